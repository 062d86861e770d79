#include "linnetcox/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "linnetcox/envelopes.hpp"
#include "linnetcox/errors.hpp"
#include "linnetcox/estimation.hpp"
#include "linnetcox/io.hpp"
#include "linnetcox/simulate.hpp"
#include "linnetcox/summaries.hpp"
#include "linnetcox/templates.hpp"

namespace linnet {

namespace {

namespace fs = std::filesystem;
using io::json;

enum class LogLevel { error, warn, info, debug };

struct Globals {
    int threads = 1;
    std::string log_level = "warn";

    LogLevel level() const {
        static const std::map<std::string, LogLevel> names{
            {"error", LogLevel::error}, {"warn", LogLevel::warn}, {"info", LogLevel::info}, {"debug", LogLevel::debug}};
        return names.at(log_level);
    }
    void log(LogLevel l, const std::string& msg) const {
        static const char* tags[] = {"error", "warn", "info", "debug"};
        if (l <= level()) std::cerr << "[" << tags[static_cast<int>(l)] << "] " << msg << "\n";
    }
};

/// Files produced by one command, written only after all of them are ready.
struct Outputs {
    std::vector<std::pair<fs::path, std::string>> files;
    void add(fs::path p, std::string content) { files.emplace_back(std::move(p), std::move(content)); }
};

void set_env_names(CLI::App& app) {
    for (CLI::Option* opt : app.get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || names.front() == "help") continue;
        std::string env = "LINNETCOX_" + names.front();
        for (char& c : env) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        opt->envname(env);
    }
}

Eigen::ArrayXd parse_rgrid(const std::string& spec) {
    const auto a = spec.find(':'), b = spec.rfind(':');
    if (a == std::string::npos || a == b) throw ValidationError("r-grid must look like lo:hi:n");
    const double lo = io::parse_double(spec.substr(0, a));
    const double hi = io::parse_double(spec.substr(a + 1, b - a - 1));
    const long n = std::stol(spec.substr(b + 1));
    if (!(hi > lo) || lo < 0.0 || n < 2) throw ValidationError("r-grid needs 0 <= lo < hi and n >= 2");
    return make_rgrid(lo, hi, n);
}

std::string replicate_name(const std::string& stem, Index i, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%04ld", static_cast<long>(i + 1));
    return stem + buf + ext;
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
    fs::path p = out;
    p.replace_extension(suffix);
    return p;
}

// ---------------------------------------------------------------------------
// make-network

struct MakeNetworkArgs {
    std::string kind = "dendrite";
    std::uint64_t seed = 1;
    TemplateOptions knobs;
    std::string out = "network.json";
};

void setup_make_network(CLI::App& sub, MakeNetworkArgs& a) {
    sub.add_option("--template", a.kind, "dendrite, path, star or random-tree")->capture_default_str();
    sub.add_option("--seed", a.seed, "random seed")->capture_default_str();
    sub.add_option("--length", a.knobs.length, "path length (um)");
    sub.add_option("--arms", a.knobs.arms, "star arm count");
    sub.add_option("--arm-length", a.knobs.arm_length, "star arm length (um)");
    sub.add_option("--edges", a.knobs.edges, "random-tree edge count");
    sub.add_option("--main-length", a.knobs.main_length, "dendrite main branch length (um)");
    sub.add_option("--side-length", a.knobs.side_length, "dendrite total side branch length (um)");
    sub.add_option("--side-branches", a.knobs.side_branches, "dendrite side subtree count");
    sub.add_option("--out", a.out, "output network file")->capture_default_str();
}

void run_make_network(const MakeNetworkArgs& a, Outputs& out, const Globals& g) {
    const LinearNetwork net = make_network(network_template_from_string(a.kind), a.seed, a.knobs);
    g.log(LogLevel::info, "network with " + std::to_string(net.edge_count()) + " edges, |L| = " +
                              io::format_double(net.total_length()));
    out.add(a.out, io::network_to_json(net).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// simulate-poisson / simulate-cox

struct SimulateArgs {
    std::string net;
    double rho_m = 0.0, rho_s = 0.0;
    CoxModel cox;
    std::string mode = "exact";
    double spacing = 1.0;
    bool pi_grid = false;
    Index reps = 1;
    std::uint64_t seed = 1;
    std::string out = "patterns";
};

void setup_simulate_poisson(CLI::App& sub, SimulateArgs& a) {
    sub.add_option("--net", a.net, "network file")->required();
    sub.add_option("--rho-m", a.rho_m, "intensity on the main branch (1/um)")->required();
    sub.add_option("--rho-s", a.rho_s, "intensity on side branches (1/um)")->required();
    sub.add_option("--reps", a.reps, "number of patterns")->capture_default_str();
    sub.add_option("--seed", a.seed, "master seed")->capture_default_str();
    sub.add_option("--out", a.out, "output directory")->capture_default_str();
}

void setup_simulate_cox(CLI::App& sub, SimulateArgs& a) {
    sub.add_option("--net", a.net, "network file")->required();
    sub.add_option("--rho-ym", a.cox.rho_y_main, "driving intensity, main branch")->required();
    sub.add_option("--rho-ys", a.cox.rho_y_side, "driving intensity, side branches")->required();
    sub.add_option("--sigma2", a.cox.sigma2, "field variance scale")->capture_default_str();
    sub.add_option("--beta", a.cox.beta, "inverse correlation range (1/um)")->capture_default_str();
    sub.add_option("--k", a.cox.k, "number of Gaussian fields")->capture_default_str();
    sub.add_option("--mode", a.mode, "exact or grid")->capture_default_str();
    sub.add_option("--spacing", a.spacing, "lattice spacing in grid mode (um)")->capture_default_str();
    sub.add_flag("--pi-grid", a.pi_grid, "also write the retention field at the evaluation sites");
    sub.add_option("--reps", a.reps, "number of patterns")->capture_default_str();
    sub.add_option("--seed", a.seed, "master seed")->capture_default_str();
    sub.add_option("--out", a.out, "output directory")->capture_default_str();
}

void run_simulate_poisson(const SimulateArgs& a, Outputs& out, const Globals&) {
    if (a.reps < 1) throw ValidationError("--reps must be positive");
    const NetworkPtr net = io::load_network(a.net);
    const IntensityModel m{a.rho_m, a.rho_s};
    m.validate();
    for (Index i = 0; i < a.reps; ++i) {
        const PointPattern x = simulate_poisson(net, m, derive_seed(a.seed, static_cast<std::uint64_t>(i)));
        out.add(fs::path(a.out) / replicate_name("pattern", i, ".csv"), io::pattern_to_csv(x));
    }
}

void run_simulate_cox(const SimulateArgs& a, Outputs& out, const Globals& g) {
    if (a.reps < 1) throw ValidationError("--reps must be positive");
    if (a.mode != "exact" && a.mode != "grid") throw ValidationError("--mode must be exact or grid");
    const NetworkPtr net = io::load_network(a.net);
    a.cox.validate();
    const CoxOptions opts{a.mode == "grid" ? CoxMode::grid : CoxMode::exact, a.spacing};
    if (opts.mode == CoxMode::grid && !(a.spacing > 0.0)) throw ValidationError("--spacing must be positive");
    for (Index i = 0; i < a.reps; ++i) {
        const auto r = simulate_cox(net, a.cox, opts, derive_seed(a.seed, static_cast<std::uint64_t>(i)));
        g.log(LogLevel::debug, "replicate " + std::to_string(i + 1) + ": " + std::to_string(r.pattern.size()) +
                                   " of " + std::to_string(r.driving_count) + " driving points retained");
        out.add(fs::path(a.out) / replicate_name("pattern", i, ".csv"), io::pattern_to_csv(r.pattern));
        if (a.pi_grid)
            out.add(fs::path(a.out) / replicate_name("pi", i, ".csv"), io::retention_to_csv(*net, r.sites, r.retention));
    }
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
    std::string net, pattern;
    std::string method = "mce-g";
    int k = 1;
    double r_l = 0.0;
    std::optional<double> r_u;
    double p = 1.0;
    std::optional<double> bandwidth;
    double start_sigma2 = 0.5, start_beta = 0.5;
    Cl2Config cl2;
    std::string weight = "adaptive-indicator";
    std::string search = "derivative-free";
    std::string out = "fit.json";
};

void setup_fit(CLI::App& sub, FitArgs& a) {
    sub.add_option("--net", a.net, "network file")->required();
    sub.add_option("--pattern", a.pattern, "point pattern file")->required();
    sub.add_option("--method", a.method, "mce-g, mce-k, cl2 or poisson")->capture_default_str();
    sub.add_option("--k", a.k, "number of Gaussian fields")->capture_default_str();
    sub.add_option("--rl", a.r_l, "lower contrast limit (um)")->capture_default_str();
    sub.add_option("--ru", a.r_u, "upper contrast limit (um), default 0.1 |L|");
    sub.add_option("--p", a.p, "contrast exponent")->capture_default_str();
    sub.add_option("--bandwidth", a.bandwidth, "g-hat kernel half-width (um)");
    sub.add_option("--start-sigma2", a.start_sigma2, "optimizer start")->capture_default_str();
    sub.add_option("--start-beta", a.start_beta, "optimizer start")->capture_default_str();
    sub.add_option("--weight", a.weight, "cl2 weight: fixed, adaptive-indicator, adaptive-smooth")->capture_default_str();
    sub.add_option("--r0", a.cl2.r0, "cl2 fixed-range cutoff (um)")->capture_default_str();
    sub.add_option("--epsilon", a.cl2.epsilon, "cl2 adaptive threshold")->capture_default_str();
    sub.add_option("--samples", a.cl2.samples_per_pair, "cl2 samples per segment pair")->capture_default_str();
    sub.add_option("--mc-seed", a.cl2.seed, "cl2 integration seed")->capture_default_str();
    sub.add_option("--search", a.search, "cl2 search: derivative-free or grid")->capture_default_str();
    sub.add_option("--grid-n", a.cl2.grid_n, "cl2 grid points per axis")->capture_default_str();
    sub.add_option("--out", a.out, "output model file")->capture_default_str();
}

void run_fit(FitArgs a, Outputs& out, const Globals& g) {
    const NetworkPtr net = io::load_network(a.net);
    const PointPattern x = io::load_pattern(net, a.pattern);
    if (a.k < 1) throw ValidationError("--k must be a positive integer");

    json doc;
    if (a.method == "poisson") {
        doc = io::model_to_json(fit_intensity_mle(x));
        doc["method"] = "poisson";
    } else if (a.method == "cl2") {
        if (a.weight == "fixed") a.cl2.weight = WeightKind::fixed_range;
        else if (a.weight == "adaptive-indicator") a.cl2.weight = WeightKind::adaptive_indicator;
        else if (a.weight == "adaptive-smooth") a.cl2.weight = WeightKind::adaptive_smooth;
        else throw ValidationError("unknown --weight '" + a.weight + "'");
        if (a.search == "grid") a.cl2.strategy = SearchStrategy::grid;
        else if (a.search != "derivative-free") throw ValidationError("unknown --search '" + a.search + "'");
        a.cl2.start_sigma2 = a.start_sigma2;
        a.cl2.start_beta = a.start_beta;
        const Cl2Fit f = cl2_fit(x, a.k, a.cl2);
        FitResult r;
        r.intensity = fit_intensity_mle(x);
        r.sigma2 = f.sigma2;
        r.beta = f.beta;
        r.k = a.k;
        r.driving = driving_intensity(r.intensity, f.sigma2, a.k);
        r.objective = f.score_norm;
        r.converged = f.converged && !f.on_boundary;
        doc = io::fit_to_json(r, "cl2");
        doc["on_boundary"] = f.on_boundary;
        if (f.on_boundary) g.log(LogLevel::warn, "composite-likelihood estimate lies on the search grid boundary");
    } else {
        const Method m = method_from_string(a.method);
        if (m == Method::cl2) throw ValidationError("unreachable");
        MinContrastConfig cfg;
        cfg.target = m == Method::mce_g ? ContrastTarget::g : ContrastTarget::K;
        cfg.r_l = a.r_l;
        cfg.r_u = a.r_u;
        cfg.p = a.p;
        cfg.bandwidth = a.bandwidth;
        cfg.start_sigma2 = a.start_sigma2;
        cfg.start_beta = a.start_beta;
        const FitResult r = two_step_fit(x, a.k, cfg);
        doc = io::fit_to_json(r, a.method);
        doc["r_l"] = cfg.r_l;
        doc["r_u"] = cfg.r_u.value_or(0.1 * net->total_length());
        doc["p"] = cfg.p;
        if (!r.converged) g.log(LogLevel::warn, "optimizer stopped before convergence");
        if (r.weakly_identified)
            g.log(LogLevel::warn, "fitted model is practically Poisson; sigma2 and beta are not identified");
    }
    out.add(a.out, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// summaries

struct SummariesArgs {
    std::string net, pattern;
    std::string which = "K,g,F,G,J";
    std::string rgrid;
    std::optional<double> bandwidth;
    double spacing = 0.5;
    double r_min = 0.0;
    std::string model;
    std::string out = "curves.csv";
};

void setup_summaries(CLI::App& sub, SummariesArgs& a) {
    sub.add_option("--net", a.net, "network file")->required();
    sub.add_option("--pattern", a.pattern, "point pattern file")->required();
    sub.add_option("--which", a.which, "comma-separated subset of K,g,F,G,J")->capture_default_str();
    sub.add_option("--rgrid", a.rgrid, "lo:hi:n, default 0:0.2|L|:512");
    sub.add_option("--bandwidth", a.bandwidth, "g-hat kernel half-width (um)");
    sub.add_option("--spacing", a.spacing, "F-hat test lattice spacing (um)")->capture_default_str();
    sub.add_option("--rmin", a.r_min, "F/G/J cells below this r are undefined")->capture_default_str();
    sub.add_option("--model", a.model, "model file supplying the intensity (default: branch MLE)");
    sub.add_option("--out", a.out, "output CSV")->capture_default_str();
}

void run_summaries(const SummariesArgs& a, Outputs& out, const Globals&) {
    const NetworkPtr net = io::load_network(a.net);
    const PointPattern x = io::load_pattern(net, a.pattern);
    const Eigen::ArrayXd r = a.rgrid.empty() ? default_rgrid(*net) : parse_rgrid(a.rgrid);
    const IntensityModel rho =
        a.model.empty() ? fit_intensity_mle(x) : null_intensity(io::model_from_json(json::parse(io::read_file(a.model))));
    const IntensityFn fn = as_function(*net, rho);

    std::vector<std::string> kinds;
    for (std::size_t start = 0;;) {
        const auto comma = a.which.find(',', start);
        kinds.push_back(a.which.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    std::vector<SummaryCurve> curves;
    std::optional<FgjCurves> fgj;
    for (const auto& k : kinds) {
        const CurveKind kind = curve_kind_from_string(k);
        if (kind == CurveKind::K) {
            curves.push_back(K_hat(x, fn, r));
        } else if (kind == CurveKind::g) {
            GhatOptions opts;
            opts.bandwidth = a.bandwidth;
            curves.push_back(g_hat(x, fn, r, opts));
        } else if (kind == CurveKind::F || kind == CurveKind::G || kind == CurveKind::J) {
            if (!fgj) {
                FgjConfig cfg = FgjConfig::from_model(*net, rho, a.spacing);
                cfg.r_min = a.r_min;
                fgj = fgj_hat(x, cfg, r);
            }
            curves.push_back(kind == CurveKind::F ? fgj->F : kind == CurveKind::G ? fgj->G : fgj->J);
        } else {
            throw ValidationError("--which accepts K, g, F, G and J");
        }
    }
    out.add(a.out, io::curves_to_csv(curves));
}

// ---------------------------------------------------------------------------
// envelope

struct EnvelopeArgs {
    std::string net, pattern, model;
    std::string test = "K";
    Index sims = 2499;
    double alpha = 0.05;
    double r_min = 1.0;
    std::string rgrid;
    double spacing = 0.5;
    std::uint64_t seed = 1;
    std::string out = "envelope.csv";
};

void setup_envelope(CLI::App& sub, EnvelopeArgs& a) {
    sub.add_option("--net", a.net, "network file")->required();
    sub.add_option("--pattern", a.pattern, "point pattern file")->required();
    sub.add_option("--model", a.model, "model file (fit output)")->required();
    sub.add_option("--test", a.test, "K or FGJ")->capture_default_str();
    sub.add_option("--sims", a.sims, "number of simulations")->capture_default_str();
    sub.add_option("--alpha", a.alpha, "envelope level")->capture_default_str();
    sub.add_option("--rmin", a.r_min, "ignore distances below this (um)")->capture_default_str();
    sub.add_option("--rgrid", a.rgrid, "lo:hi:n, default 0:0.1|L|:128");
    sub.add_option("--spacing", a.spacing, "F-hat test lattice spacing (um)")->capture_default_str();
    sub.add_option("--seed", a.seed, "master seed")->capture_default_str();
    sub.add_option("--out", a.out, "output CSV; the p-interval goes to the .json sibling")->capture_default_str();
}

void run_envelope(const EnvelopeArgs& a, Outputs& out, const Globals& g) {
    const NetworkPtr net = io::load_network(a.net);
    const PointPattern x = io::load_pattern(net, a.pattern);
    const NullModel model = io::model_from_json(json::parse(io::read_file(a.model)));
    EnvelopeConfig cfg;
    cfg.test = envelope_test_from_string(a.test);
    cfg.simulations = a.sims;
    cfg.alpha = a.alpha;
    cfg.r_min = a.r_min;
    if (!a.rgrid.empty()) cfg.rgrid = parse_rgrid(a.rgrid);
    cfg.lattice_spacing = a.spacing;
    cfg.seed = a.seed;
    cfg.threads = g.threads;
    const EnvelopeRun run = envelope_pipeline(x, model, cfg);
    if (run.result.low_resolution)
        g.log(LogLevel::warn, "fewer simulations than 1/alpha - 1; the envelope is coarse");
    out.add(a.out, io::envelope_to_csv(run.curves, run.result));
    out.add(sibling(a.out, ".json"), io::envelope_summary(run.result).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// simstudy

struct StudyArgs {
    std::string design = "reference";
    std::string net;
    std::uint64_t net_seed = 4;
    Index reps = 500;
    std::uint64_t seed = 1;
    std::string out = "results.csv";
};

void setup_simstudy(CLI::App& sub, StudyArgs& a) {
    sub.add_option("--design", a.design, "design file (JSON) or 'reference'")->capture_default_str();
    sub.add_option("--net", a.net, "network file (default: dendrite template with |L_m| = 225, |L_s| = 652)");
    sub.add_option("--net-seed", a.net_seed, "seed for the default network")->capture_default_str();
    sub.add_option("--reps", a.reps, "replicates per run")->capture_default_str();
    sub.add_option("--seed", a.seed, "master seed")->capture_default_str();
    sub.add_option("--out", a.out, "output CSV; run summaries go to the .json sibling")->capture_default_str();
}

void run_simstudy(const StudyArgs& a, Outputs& out, const Globals& g) {
    const json design_doc = a.design == "reference" ? json("reference") : json::parse(io::read_file(a.design));
    const auto design = io::designs_from_json(design_doc);
    NetworkPtr net;
    if (a.net.empty()) {
        TemplateOptions knobs;
        knobs.main_length = 225.0;
        knobs.side_length = 652.0;
        net = std::make_shared<const LinearNetwork>(make_network(NetworkTemplate::dendrite, a.net_seed, knobs));
    } else {
        net = io::load_network(a.net);
    }
    const StudyResult result = simulation_study(net, design, a.reps, a.seed, g.threads);
    for (const auto& s : result.summary)
        if (s.failures > 0)
            g.log(LogLevel::warn, "run " + std::to_string(s.run) + " " + std::string(to_string(s.method)) + ": " +
                                      std::to_string(s.failures) + " failed fits");
    out.add(a.out, io::study_to_csv(result));
    out.add(sibling(a.out, ".json"), io::study_summary(result).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// kernel-intensity

struct KernelArgs {
    std::string net, pattern;
    double bandwidth = 10.0;
    std::optional<double> spacing;
    std::string out = "intensity.csv";
};

void setup_kernel(CLI::App& sub, KernelArgs& a) {
    sub.add_option("--net", a.net, "network file")->required();
    sub.add_option("--pattern", a.pattern, "point pattern file")->required();
    sub.add_option("--bandwidth", a.bandwidth, "kernel standard deviation (um)")->capture_default_str();
    sub.add_option("--spacing", a.spacing, "mesh spacing (um), default bandwidth / 10");
    sub.add_option("--out", a.out, "output CSV edge,offset,intensity")->capture_default_str();
}

void run_kernel(const KernelArgs& a, Outputs& out, const Globals&) {
    const NetworkPtr net = io::load_network(a.net);
    const PointPattern x = io::load_pattern(net, a.pattern);
    const KernelIntensity k = kernel_intensity(x, a.bandwidth, a.spacing);
    std::string csv = "edge,offset,intensity\n";
    for (Index e = 0; e < net->edge_count(); ++e) {
        const std::string id = std::to_string(net->edges()[static_cast<std::size_t>(e)].id);
        const auto& off = k.offsets[static_cast<std::size_t>(e)];
        const auto& val = k.values[static_cast<std::size_t>(e)];
        for (Index i = 0; i < off.size(); ++i)
            csv += id + "," + io::format_double(off[i]) + "," + io::format_double(val[i]) + "\n";
    }
    out.add(a.out, std::move(csv));
}

// ---------------------------------------------------------------------------

fs::path manifest_path(const std::string& command, const Outputs& out) {
    if (command == "simulate-poisson" || command == "simulate-cox")
        return out.files.front().first.parent_path() / "manifest.json";
    fs::path p = out.files.front().first;
    p += ".manifest.json";
    return p;
}

} // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"Point processes on linear networks: simulation, fitting and envelope tests", "linnetcox"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Globals g;
    app.add_option("--threads", g.threads, "worker threads")->capture_default_str();
    app.add_option("--log-level", g.log_level, "error, warn, info or debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}))
        ->capture_default_str();

    MakeNetworkArgs make_args;
    SimulateArgs poisson_args, cox_args;
    FitArgs fit_args;
    SummariesArgs summaries_args;
    EnvelopeArgs envelope_args;
    StudyArgs study_args;
    KernelArgs kernel_args;

    std::map<std::string, std::function<void(Outputs&)>> actions;
    auto add = [&](const char* name, const char* help, auto setup, auto& a, auto run) {
        CLI::App* sub = app.add_subcommand(name, help);
        setup(*sub, a);
        set_env_names(*sub);
        actions[name] = [&a, &g, run](Outputs& out) { run(a, out, g); };
        return sub;
    };
    add("make-network", "Write a synthetic labelled tree", setup_make_network, make_args, run_make_network);
    add("simulate-poisson", "Simulate Poisson patterns", setup_simulate_poisson, poisson_args, run_simulate_poisson);
    add("simulate-cox", "Simulate thinned Cox patterns", setup_simulate_cox, cox_args, run_simulate_cox);
    add("fit", "Fit a Poisson or Cox model", setup_fit, fit_args, run_fit);
    add("summaries", "Empirical K, g, F, G, J", setup_summaries, summaries_args, run_summaries);
    add("envelope", "Global rank envelope test", setup_envelope, envelope_args, run_envelope);
    add("simstudy", "Parameter recovery study", setup_simstudy, study_args, run_simstudy);
    add("kernel-intensity", "Heat-kernel intensity estimate", setup_kernel, kernel_args, run_kernel);
    set_env_names(app);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (g.threads < 1) {
        std::cerr << "error: --threads must be positive\n";
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    try {
        Outputs out;
        actions.at(command)(out);
        json manifest{{"artifact", "linnetcox"},
                      {"version", kVersion},
                      {"command", command},
                      {"argv", args},
                      {"config", sub->config_to_str(true, false)},
                      {"outputs", json::array()}};
        for (const auto& [path, content] : out.files) {
            io::write_atomic(path, content);
            manifest["outputs"].push_back(path.lexically_normal().generic_string());
        }
        if (!out.files.empty()) io::write_atomic(manifest_path(command, out), manifest.dump(2) + "\n");
        g.log(LogLevel::info, command + ": wrote " + std::to_string(out.files.size()) + " file(s)");
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: malformed JSON input: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

} // namespace linnet
