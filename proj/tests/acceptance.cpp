// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "linnetcox/envelopes.hpp"
#include "linnetcox/estimation.hpp"
#include "linnetcox/pair_correlation.hpp"
#include "linnetcox/simulate.hpp"
#include "linnetcox/summaries.hpp"
#include "linnetcox/templates.hpp"
#include "oracles.hpp"

using namespace linnet;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

/// The published table mixes rounding and truncation to 3 d.p.
bool printed_as(double v, double printed) {
    return round3(v) == printed || std::floor(v * 1000.0) / 1000.0 == printed;
}

NetworkPtr shared(LinearNetwork net) { return std::make_shared<const LinearNetwork>(std::move(net)); }

NetworkPtr dendrite(double main_length, double side_length, std::uint64_t seed) {
    TemplateOptions o;
    o.main_length = main_length;
    o.side_length = side_length;
    return shared(make_network(NetworkTemplate::dendrite, seed, o));
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Moments {
    double n = 0, mean = 0, m2 = 0;
    void add(double x) {
        n += 1;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double se() const { return std::sqrt(m2 / (n - 1) / n); }
};

// ---------------------------------------------------------------------------

Outcome intensity_mle() {
    // Two-edge network: one main edge, one side edge, points spread evenly.
    struct Row {
        int n_m, n_s;
        double l_m, l_s, rho_m, rho_s;
    };
    bool ok = true;
    std::string detail;
    for (const Row& r : {Row{51, 72, 212, 202, 0.240, 0.356}, Row{36, 145, 204, 430, 0.176, 0.337}}) {
        const auto net = shared(LinearNetwork({{0}, {1}, {2}},
                                              {{0, 0, 1, r.l_m, Branch::main}, {1, 1, 2, r.l_s, Branch::side}}));
        std::vector<NetworkPoint> pts;
        for (int i = 0; i < r.n_m; ++i) pts.push_back({0, r.l_m * (i + 0.5) / r.n_m});
        for (int i = 0; i < r.n_s; ++i) pts.push_back({1, r.l_s * (i + 0.5) / r.n_s});
        const IntensityModel m = fit_intensity_mle(PointPattern(net, pts));
        ok = ok && m.rho_main == static_cast<double>(r.n_m) / r.l_m && m.rho_side == static_cast<double>(r.n_s) / r.l_s;
        ok = ok && printed_as(m.rho_main, r.rho_m) && printed_as(m.rho_side, r.rho_s);
        detail += fmt("%d/%g -> %.5f, %d/%g -> %.5f; ", r.n_m, r.l_m, m.rho_main, r.n_s, r.l_s, m.rho_side);
    }
    return {ok, detail + "published 0.240, 0.356, 0.176, 0.337 (3 d.p., rounded or truncated)"};
}

Outcome back_derivation() {
    const IntensityModel d1 = driving_intensity({0.240, 0.356}, 0.686, 1);
    const IntensityModel d3 = driving_intensity({0.328, 0.312}, 5.170e-8, 1);
    const double rel3 = std::abs(d3.rho_main / 0.328 - 1.0);
    const bool ok = round3(d1.rho_main) == 0.312 && rel3 < 1e-7;
    return {ok, fmt("dendrite 1: rho_Y,m = %.4f (expect 0.312); dendrite 3: rho_Y,m / rho_m - 1 = %.2e", d1.rho_main,
                    rel3)};
}

Outcome closed_forms() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20241018);
    std::uniform_real_distribution<double> s2(0.1, 10.0), b(0.01, 2.0), rr(0.0, 50.0);
    double worst = 0.0;
    int evaluations = 0;
    for (int i = 0; i < 50; ++i) {
        const double sigma2 = s2(rng), beta = b(rng);
        for (int k = 1; k <= 5; ++k) {
            for (int j = 0; j < 4; ++j) {
                double r = rr(rng);
                if (r == 0.0) r = 50.0;
                const double ref =
                    oracle::simpson([&](double t) { return oracle::g0(t, sigma2, beta, k); }, 0.0, r, 1e-14 * r);
                worst = std::max(worst, std::abs(K_theoretical(r, {1, 1, sigma2, beta, k}) / ref - 1.0));
                ++evaluations;
            }
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    return {worst <= 1e-8 && secs < 5.0,
            fmt("%d evaluations, max relative error %.2e (tol 1e-8), %.2f s (limit 5 s)", evaluations, worst, secs)};
}

Outcome poisson_limit() {
    double worst_k = 0.0, worst_g = 0.0;
    for (int k = 1; k <= 5; ++k) {
        const CoxModel m{1, 1, 1e-10, 0.1, k};
        const Eigen::ArrayXd grid = make_rgrid(0.0, 50.0, 512);
        for (double r : grid) {
            worst_k = std::max(worst_k, std::abs(K_theoretical(r, m) - r));
            worst_g = std::max(worst_g, std::abs(g0_theoretical(r, m) - 1.0));
        }
    }
    return {worst_k <= 1e-6 && worst_g <= 1e-6,
            fmt("sigma2 = 1e-10, k = 1..5, 512 r-values on [0, 50]: max |K - r| = %.2e, max |g0 - 1| = %.2e (tol 1e-6)",
                worst_k, worst_g)};
}

Outcome unbiasedness() {
    const auto t0 = Clock::now();
    TemplateOptions o;
    o.edges = 200;
    const auto net = shared(make_network(NetworkTemplate::random_tree, 2024, o));
    const IntensityModel rho{0.1, 0.1};
    const IntensityFn f = as_function(*net, rho);
    const Eigen::ArrayXd r = make_rgrid(1.0, 25.0, 25);
    const double bw = default_pcf_bandwidth(*net, f);
    GhatOptions gopts;
    gopts.bandwidth = bw;
    const int reps = 500;
    std::vector<Moments> km(static_cast<std::size_t>(r.size())), gm(km.size());
    for (int i = 0; i < reps; ++i) {
        const PointPattern x = simulate_poisson(net, rho, derive_seed(55, static_cast<std::uint64_t>(i)));
        const SummaryCurve k = K_hat(x, f, r);
        const SummaryCurve g = g_hat(x, f, r, gopts);
        for (Index c = 0; c < r.size(); ++c) {
            km[static_cast<std::size_t>(c)].add(k.value[c]);
            gm[static_cast<std::size_t>(c)].add(g.value[c]);
        }
    }
    double worst_k = 0.0, worst_g = 0.0;
    int g_cells = 0;
    for (Index c = 0; c < r.size(); ++c) {
        const auto& kc = km[static_cast<std::size_t>(c)];
        worst_k = std::max(worst_k, std::abs(kc.mean - r[c]) / kc.se());
        if (r[c] < bw) continue;
        const auto& gc = gm[static_cast<std::size_t>(c)];
        worst_g = std::max(worst_g, std::abs(gc.mean - 1.0) / gc.se());
        ++g_cells;
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    return {worst_k <= 3.0 && worst_g <= 3.0 && g_cells > 0 && secs < 300.0,
            fmt("|L| = %.0f, 500 patterns, 25 r-values in [1, 25]: max |mean K - r| / SE = %.2f, max |mean g - 1| / SE "
                "= %.2f over %d cells with r >= h = %.2f (tol 3), %.1f s",
                net->total_length(), worst_k, worst_g, g_cells, bw, secs)};
}

Outcome cox_moments() {
    const auto t0 = Clock::now();
    const auto net = dendrite(212, 202, 1);
    const CoxModel model{0.312, 0.463, 5.0, 0.1, 1};
    const int reps = 2000;
    Moments main_count, side_count, pi_mean;
    for (int i = 0; i < reps; ++i) {
        const auto x = simulate_cox(net, model, {}, derive_seed(66, static_cast<std::uint64_t>(i))).pattern;
        main_count.add(static_cast<double>(x.count(Branch::main)));
        side_count.add(static_cast<double>(x.count(Branch::side)));
    }
    // Retention field on a 1 um lattice, one factorization reused.
    const auto sites = lattice(*net, 1.0);
    const Eigen::MatrixXd chol = jittered_cholesky(correlation_matrix(*net, sites, exponential_correlation(0.1)));
    Rng rng = make_rng(67);
    std::normal_distribution<double> z;
    const auto n = static_cast<Index>(sites.size());
    for (int i = 0; i < reps; ++i) {
        Eigen::VectorXd w(n);
        for (Index j = 0; j < n; ++j) w[j] = z(rng);
        const Eigen::VectorXd field = chol * w;
        pi_mean.add(retention_field(Eigen::MatrixXd(field.transpose()), model.sigma2).mean());
    }
    const IntensityModel expect = model.intensity();
    const double em = expect.rho_main * net->branch_length(Branch::main);
    const double es = expect.rho_side * net->branch_length(Branch::side);
    const double ep = model.mean_retention();
    const double zm = (main_count.mean - em) / main_count.se();
    const double zs = (side_count.mean - es) / side_count.se();
    const double zp = (pi_mean.mean - ep) / pi_mean.se();
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    return {std::abs(zm) <= 3 && std::abs(zs) <= 3 && std::abs(zp) <= 3 && secs < 300.0,
            fmt("2000 exact simulations: main %.2f vs %.2f (z = %.2f), side %.2f vs %.2f (z = %.2f); mean Pi on %zu "
                "sites %.4f vs %.4f (z = %.2f); %.1f s",
                main_count.mean, em, zm, side_count.mean, es, zs, sites.size(), pi_mean.mean, ep, zp, secs)};
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Outcome parameter_recovery() {
    const auto t0 = Clock::now();
    const auto net = dendrite(225, 652, 4);
    auto design = reference_study_design();
    design.resize(1);
    const StudyResult study = simulation_study(net, design, 100, 2024);
    std::vector<double> s_g, b_g, b_k;
    for (const auto& row : study.rows) {
        if (!row.error.empty()) continue;
        if (row.method == Method::mce_g) {
            s_g.push_back(row.sigma2_hat);
            b_g.push_back(row.beta_hat);
        } else {
            b_k.push_back(row.beta_hat);
        }
    }
    if (s_g.empty() || b_k.empty()) return {false, "no successful fits"};
    const double med_s = quantile(s_g, 0.5), med_b = quantile(b_g, 0.5);
    const double iqr_g = quantile(b_g, 0.75) - quantile(b_g, 0.25);
    const double iqr_k = quantile(b_k, 0.75) - quantile(b_k, 0.25);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool ok = med_s >= 2.5 && med_s <= 10.0 && med_b >= 0.05 && med_b <= 0.2 && iqr_g < iqr_k && secs < 1800.0;
    return {ok, fmt("100 replicates on |L| = %.0f: MCE-g median sigma2 = %.3f (in [2.5, 10]), median beta = %.4f (in "
                    "[0.05, 0.2]); IQR(beta) MCE-g %.4f vs MCE-K %.4f; %zu/%zu fits ok; %.1f s",
                    net->total_length(), med_s, med_b, iqr_g, iqr_k, s_g.size() + b_k.size(), study.rows.size(), secs)};
}

Outcome composite_likelihood_internals() {
    const auto t0 = Clock::now();
    Cl2Config cfg;
    cfg.weight = WeightKind::fixed_range;
    cfg.r0 = 30.0;
    cfg.samples_per_pair = 200;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> s2(0.3, 8.0), b(0.03, 0.8);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto net = dendrite(150, 200, 30 + seed);
        const auto x = simulate_cox(net, {0.5, 0.7, 3.0, 0.1, 1}, {}, seed).pattern;
        const CompositeLikelihood cl(x, 1, cfg);
        for (int i = 0; i < 4; ++i) {
            const double sigma2 = s2(rng), beta = b(rng);
            const Eigen::Vector2d u = cl.score(sigma2, beta);
            const double hs = 1e-5 * sigma2, hb = 1e-5 * beta;
            const double ds = (cl.log_likelihood(sigma2 + hs, beta) - cl.log_likelihood(sigma2 - hs, beta)) / (2 * hs);
            const double db = (cl.log_likelihood(sigma2, beta + hb) - cl.log_likelihood(sigma2, beta - hb)) / (2 * hb);
            worst = std::max({worst, std::abs(u[0] / ds - 1.0), std::abs(u[1] / db - 1.0)});
        }
    }
    // Path a - d - b: the cross term between the end edges has a closed form,
    // and the whole path integral equals that of one segment of length a+d+b.
    const double a = 1.5, d = 2.0, bb = 0.7;
    const LinearNetwork path({{0}, {1}, {2}, {3}},
                             {{0, 0, 1, a, Branch::main}, {1, 1, 2, d, Branch::main}, {2, 2, 3, bb, Branch::side}});
    const auto f0 = [](double t) { return std::exp(-t); };
    const PairDistanceSample s = sample_pair_distances(path, 100000, 5);
    double cross = 0.0;
    for (Index i = 0; i < s.distance.size(); ++i)
        if (std::min(s.first_edge[i], s.second_edge[i]) == 0 && std::max(s.first_edge[i], s.second_edge[i]) == 2)
            cross += 0.5 * s.weight[i] * f0(s.distance[i]);
    const double cross_exact = std::exp(-d) * (1.0 - std::exp(-a)) * (1.0 - std::exp(-bb));
    const double total_len = a + d + bb;
    const double whole = mc_double_integral(path, f0, 100000, 6);
    const double whole_exact = 2.0 * (total_len - 1.0 + std::exp(-total_len));
    const double e_cross = std::abs(cross / cross_exact - 1.0), e_whole = std::abs(whole / whole_exact - 1.0);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    return {worst <= 1e-4 && e_cross <= 0.005 && e_whole <= 0.005 && secs < 60.0,
            fmt("score vs central differences: max relative error %.2e (tol 1e-4); disjoint segments %.5f vs %.5f "
                "(rel %.2e), whole path %.5f vs %.5f (rel %.2e) at 1e5 samples per pair (tol 0.5%%); %.1f s",
                worst, cross, cross_exact, e_cross, whole, whole_exact, e_whole, secs)};
}

Outcome envelope_calibration() {
    const auto t0 = Clock::now();
    Eigen::MatrixXd toy_sims(1, 4);
    toy_sims << 1, 2, 3, 4;
    CurveSet toy;
    toy.segment = {"T"};
    toy.r = Eigen::ArrayXd::Constant(1, 1.0);
    toy.data = Eigen::ArrayXd::Constant(1, 5.0);
    toy.sims = toy_sims;
    toy.defined = Mask::Constant(1, true);
    const EnvelopeResult t = rank_envelope(toy, 0.05);
    const bool toy_ok = t.p_liberal == 0.2 && t.p_conservative == 0.4;

    const auto net = dendrite(212, 202, 9);
    const IntensityModel rho{0.24, 0.356};
    EnvelopeConfig cfg;
    cfg.simulations = 99;
    const int trials = 200;
    int rejected = 0;
    for (int i = 0; i < trials; ++i) {
        const auto x = simulate_poisson(net, rho, derive_seed(99, static_cast<std::uint64_t>(i)));
        cfg.seed = derive_seed(100, static_cast<std::uint64_t>(i));
        rejected += envelope_pipeline(x, rho, cfg).result.p_conservative <= cfg.alpha;
    }
    const double rate = static_cast<double>(rejected) / trials;
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    return {toy_ok && rate >= 0.005 && rate <= 0.10 && secs < 600.0,
            fmt("toy p-interval (%.2f, %.2f) (expect (0.2, 0.4)); K test, s = 99, 200 Poisson trials: rejection rate "
                "%.3f (in [0.005, 0.10]); %.1f s",
                t.p_liberal, t.p_conservative, rate, secs)};
}

Outcome fgj_exactness() {
    TemplateOptions o;
    o.edges = 15;
    const auto net = shared(make_network(NetworkTemplate::random_tree, 77, o));
    const Eigen::ArrayXd r = make_rgrid(0.0, 12.0, 25);
    const std::vector<double> rv(r.begin(), r.end());
    const FgjConfig cfg = FgjConfig::from_model(*net, {0.2, 0.2}, 1.0);
    const FgjCurves empty = fgj_hat(PointPattern(net), cfg, r);
    bool empty_ok = true;
    for (Index c = 0; c < r.size(); ++c) empty_ok = empty_ok && (!empty.F.defined[c] || empty.F.value[c] == 0.0);
    empty_ok = empty_ok && empty.F.defined.any();

    const auto sites = lattice(*net, 1.0);
    double worst = 0.0;
    int mask_mismatch = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const PointPattern x = simulate_poisson(net, {0.2, 0.2}, derive_seed(10, s));
        const FgjCurves c = fgj_hat(x, cfg, r);
        std::vector<bool> fd, gd;
        const auto f = oracle::ball_scan(*net, sites, x.points(), rv, false, &fd);
        const auto g = oracle::ball_scan(*net, x.points(), x.points(), rv, true, &gd);
        for (Index i = 0; i < r.size(); ++i) {
            const auto u = static_cast<std::size_t>(i);
            mask_mismatch += (c.F.defined[i] != fd[u]) + (c.G.defined[i] != gd[u]);
            if (c.F.defined[i] && fd[u]) worst = std::max(worst, std::abs(c.F.value[i] - f[u]));
            if (c.G.defined[i] && gd[u]) worst = std::max(worst, std::abs(c.G.value[i] - g[u]));
        }
    }
    return {empty_ok && worst <= 1e-12 && mask_mismatch == 0,
            fmt("empty pattern F = 0: %s; 20 patterns vs ball scan: max |diff| = %.1e, mask mismatches %d",
                empty_ok ? "yes" : "no", worst, mask_mismatch)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"intensity MLE", intensity_mle},
        {"two-step back-derivation", back_derivation},
        {"closed-form K vs quadrature", closed_forms},
        {"Poisson limit", poisson_limit},
        {"K-hat and g-hat unbiasedness", unbiasedness},
        {"Cox moments", cox_moments},
        {"parameter recovery", parameter_recovery},
        {"composite-likelihood internals", composite_likelihood_internals},
        {"envelope size calibration", envelope_calibration},
        {"F/G/J exactness", fgj_exactness},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2zu %s: %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
