#include "linnetcox/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "linnetcox/errors.hpp"
#include "linnetcox/optimize.hpp"
#include "linnetcox/pair_correlation.hpp"
#include "linnetcox/parallel.hpp"
#include "linnetcox/random.hpp"
#include "linnetcox/simulate.hpp"

namespace linnet {

namespace {

constexpr double kLogBound = 30.0;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
    if (v.empty()) return kNaN;
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

} // namespace

void MinContrastConfig::validate() const {
    if (!(r_l >= 0.0)) throw ValidationError("r_l must be nonnegative");
    if (r_u && !(*r_u > r_l)) throw ValidationError("r_u must exceed r_l");
    if (!(p > 0.0)) throw ValidationError("contrast exponent p must be positive");
    if (!(start_sigma2 > 0.0) || !(start_beta > 0.0)) throw ValidationError("start values must be positive");
    if (grid_points < 2) throw ValidationError("contrast grid needs at least two points");
}

Eigen::ArrayXd model_curve(ContrastTarget target, const Eigen::ArrayXd& r, double sigma2, double beta, int k) {
    Eigen::ArrayXd out(r.size());
    const CoxModel m{1.0, 1.0, sigma2, beta, k};
    for (Index i = 0; i < r.size(); ++i)
        out[i] = target == ContrastTarget::K ? K_theoretical(r[i], m) : g0(r[i], sigma2, beta, k);
    return out;
}

double contrast_objective(const SummaryCurve& empirical, ContrastTarget target, double sigma2, double beta, int k,
                          double p) {
    const Eigen::ArrayXd model = model_curve(target, empirical.r, sigma2, beta, k);
    double total = 0.0;
    Index prev = -1;
    double prev_sq = 0.0;
    for (Index i = 0; i < empirical.size(); ++i) {
        if (!empirical.defined[i]) continue;
        const double diff = std::pow(empirical.value[i], p) - std::pow(model[i], p);
        const double sq = diff * diff;
        if (prev >= 0) total += 0.5 * (empirical.r[i] - empirical.r[prev]) * (sq + prev_sq);
        prev = i;
        prev_sq = sq;
    }
    return total;
}

ContrastFit min_contrast_curve(const SummaryCurve& empirical, int k, const MinContrastConfig& cfg) {
    cfg.validate();
    if (k < 1) throw ValidationError("k must be a positive integer");
    if ((empirical.defined.cast<int>().sum()) < 2)
        throw ValidationError("empirical curve is undefined on the contrast range");

    auto objective = [&](const Eigen::VectorXd& logp) {
        if (logp.cwiseAbs().maxCoeff() > kLogBound) return std::numeric_limits<double>::infinity();
        return contrast_objective(empirical, cfg.target, std::exp(logp[0]), std::exp(logp[1]), k, cfg.p);
    };
    Eigen::VectorXd start(2);
    start << std::log(cfg.start_sigma2), std::log(cfg.start_beta);
    NelderMeadOptions nm;
    nm.max_iterations = cfg.max_iterations;
    nm.f_tol = cfg.tolerance;
    nm.x_tol = 1e-7;
    const auto res = nelder_mead<double>(objective, start, nm);

    ContrastFit fit;
    fit.sigma2 = std::exp(res.x[0]);
    fit.beta = std::exp(res.x[1]);
    fit.objective = res.value;
    fit.iterations = res.iterations;
    fit.converged = res.converged;
    if (auto it = empirical.metadata.find("bandwidth"); it != empirical.metadata.end()) fit.bandwidth = it->second;
    Index lo = 0, hi = empirical.size() - 1;
    while (!empirical.defined[lo]) ++lo;
    while (!empirical.defined[hi]) --hi;
    fit.weakly_identified = clustering_excess(empirical.r[lo], empirical.r[hi], fit.sigma2, fit.beta, k) < 0.01;
    return fit;
}

double clustering_excess(double r_l, double r_u, double sigma2, double beta, int k) {
    if (!(r_u > r_l)) throw ValidationError("r_u must exceed r_l");
    const CoxModel m{1.0, 1.0, sigma2, beta, k};
    return (K_theoretical(r_u, m) - K_theoretical(r_l, m)) / (r_u - r_l) - 1.0;
}

SummaryCurve empirical_contrast_curve(const PointPattern& x, const MinContrastConfig& cfg) {
    cfg.validate();
    if (x.size() < 2) throw ValidationError("minimum contrast needs at least two points");
    const auto& net = x.network();
    const IntensityModel rho = fit_intensity_mle(x);
    const IntensityFn fn = as_function(net, rho);
    const double r_u = cfg.r_u.value_or(0.1 * net.total_length());
    if (!(r_u > cfg.r_l)) throw ValidationError("r_u must exceed r_l");
    const Eigen::ArrayXd r = make_rgrid(cfg.r_l, r_u, cfg.grid_points);
    if (cfg.target == ContrastTarget::K) return K_hat(x, fn, r);
    GhatOptions opts;
    opts.bandwidth = cfg.bandwidth;
    return g_hat(x, fn, r, opts);
}

ContrastFit min_contrast(const PointPattern& x, int k, const MinContrastConfig& cfg) {
    return min_contrast_curve(empirical_contrast_curve(x, cfg), k, cfg);
}

IntensityModel driving_intensity(const IntensityModel& rho, double sigma2, int k) {
    const double f = std::pow(1.0 + sigma2, 0.5 * k);
    return {f * rho.rho_main, f * rho.rho_side};
}

FitResult two_step_fit(const PointPattern& x, int k, const MinContrastConfig& cfg) {
    FitResult out;
    out.intensity = fit_intensity_mle(x);
    const ContrastFit c = min_contrast(x, k, cfg);
    out.sigma2 = c.sigma2;
    out.beta = c.beta;
    out.k = k;
    out.driving = driving_intensity(out.intensity, c.sigma2, k);
    out.objective = c.objective;
    out.iterations = c.iterations;
    out.converged = c.converged;
    out.weakly_identified = c.weakly_identified;
    return out;
}

// ---------------------------------------------------------------------------

PairDistanceSample sample_pair_distances(const LinearNetwork& net, Index samples_per_pair, std::uint64_t seed) {
    if (samples_per_pair < 1) throw ValidationError("samples per segment pair must be positive");
    if (!net.is_tree()) throw ValidationError("segment-pair integration assumes a tree network");
    const Index m = net.edge_count();
    const Index pairs = m * (m + 1) / 2;
    std::vector<std::tuple<double, double, int, int>> rows;
    rows.reserve(static_cast<std::size_t>(pairs * samples_per_pair));
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Index i = 0; i < m; ++i) {
        for (Index j = i; j < m; ++j) {
            const double li = net.length(i), lj = net.length(j);
            const double w = (i == j ? 1.0 : 2.0) * li * lj / static_cast<double>(samples_per_pair);
            // Gap between the closest endpoints; on a tree every path between
            // the two segments leaves through those endpoints.
            const double gap = std::min({net.vertex_distance(net.tail(i), net.tail(j)),
                                         net.vertex_distance(net.tail(i), net.head(j)),
                                         net.vertex_distance(net.head(i), net.tail(j)),
                                         net.vertex_distance(net.head(i), net.head(j))});
            for (Index s = 0; s < samples_per_pair; ++s) {
                const double u = unit(rng) * li, v = unit(rng) * lj;
                const double d = i == j ? std::abs(u - v) : gap + u + v;
                rows.emplace_back(d, w, static_cast<int>(i), static_cast<int>(j));
            }
        }
    }
    std::sort(rows.begin(), rows.end());
    PairDistanceSample out;
    const auto n = static_cast<Index>(rows.size());
    out.distance.resize(n);
    out.weight.resize(n);
    out.first_edge.resize(n);
    out.second_edge.resize(n);
    for (Index k = 0; k < n; ++k) {
        std::tie(out.distance[k], out.weight[k], out.first_edge[k], out.second_edge[k]) = rows[static_cast<std::size_t>(k)];
    }
    return out;
}

double mc_double_integral(const LinearNetwork& net, const std::function<double(double)>& f0, Index samples_per_pair,
                          std::uint64_t seed) {
    const PairDistanceSample s = sample_pair_distances(net, samples_per_pair, seed);
    double total = 0.0;
    for (Index k = 0; k < s.distance.size(); ++k) total += s.weight[k] * f0(s.distance[k]);
    return total;
}

// ---------------------------------------------------------------------------

void Cl2Config::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
    if (samples_per_pair < 1) throw ValidationError("samples per segment pair must be positive");
    if (weight == WeightKind::fixed_range && !(r0 > 0.0)) throw ValidationError("r0 must be positive");
    if (strategy == SearchStrategy::grid && grid_n < 2) throw ValidationError("grid needs at least 2 points per axis");
    if (!(sigma2_lo > 0.0 && sigma2_hi > sigma2_lo && beta_lo > 0.0 && beta_hi > beta_lo))
        throw ValidationError("invalid search bounds");
}

double smooth_weight(double h) {
    if (!(std::abs(h) < 1.0)) return 0.0;
    return std::exp(1.0 / (h * h - 1.0));
}

double cl2_weight(const Cl2Config& cfg, double distance, double g, double g0_at_zero) {
    const double bound = std::abs(g0_at_zero - 1.0);
    switch (cfg.weight) {
    case WeightKind::fixed_range:
        return distance <= cfg.r0 ? 1.0 : 0.0;
    case WeightKind::adaptive_indicator:
        if (bound == 0.0) return 0.0;
        return std::abs(g - 1.0) / bound > cfg.epsilon ? 1.0 : 0.0;
    case WeightKind::adaptive_smooth:
        if (g == 1.0) return 0.0;
        return smooth_weight(cfg.epsilon * bound / (g - 1.0));
    }
    return 0.0;
}

CompositeLikelihood::CompositeLikelihood(const PointPattern& x, int k, const Cl2Config& cfg)
    : cfg_(cfg), k_(k), intensity_(fit_intensity_mle(x)) {
    cfg_.validate();
    if (k < 1) throw ValidationError("k must be a positive integer");
    if (x.size() < 2) throw ValidationError("composite likelihood needs at least two points");
    const auto& net = x.network();

    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            pairs.emplace_back(net.distance(x[i], x[j]),
                               std::log(intensity_.at(net, x[i]) * intensity_.at(net, x[j])));
    std::sort(pairs.begin(), pairs.end());
    pair_distance_.resize(static_cast<Index>(pairs.size()));
    pair_log_rho_.resize(static_cast<Index>(pairs.size()));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        pair_distance_[static_cast<Index>(i)] = pairs[i].first;
        pair_log_rho_[static_cast<Index>(i)] = pairs[i].second;
    }

    sample_ = sample_pair_distances(net, cfg_.samples_per_pair, cfg_.seed);
    for (Index s = 0; s < sample_.distance.size(); ++s)
        sample_.weight[s] *= intensity_.at(net.branch(sample_.first_edge[s])) *
                             intensity_.at(net.branch(sample_.second_edge[s]));
}

// Both sums run over distance-sorted arrays; every supported weight is
// nonincreasing in distance, so the loops stop at the first zero weight.
double CompositeLikelihood::log_likelihood(double sigma2, double beta) const {
    const double gz = g0(0.0, sigma2, beta, k_);
    double pair_sum = 0.0;
    for (Index i = 0; i < pair_distance_.size(); ++i) {
        const double g = g0(pair_distance_[i], sigma2, beta, k_);
        const double w = cl2_weight(cfg_, pair_distance_[i], g, gz);
        if (w == 0.0) break;
        pair_sum += 2.0 * w * (pair_log_rho_[i] + std::log(g));
    }
    double integral = 0.0;
    for (Index s = 0; s < sample_.distance.size(); ++s) {
        const double g = g0(sample_.distance[s], sigma2, beta, k_);
        const double w = cl2_weight(cfg_, sample_.distance[s], g, gz);
        if (w == 0.0) break;
        integral += sample_.weight[s] * w * g;
    }
    return pair_sum - integral;
}

Eigen::Vector2d CompositeLikelihood::score(double sigma2, double beta) const {
    const double gz = g0(0.0, sigma2, beta, k_);
    Eigen::Vector2d pair_sum = Eigen::Vector2d::Zero();
    for (Index i = 0; i < pair_distance_.size(); ++i) {
        const double d = pair_distance_[i];
        const double g = g0(d, sigma2, beta, k_);
        const double w = cl2_weight(cfg_, d, g, gz);
        if (w == 0.0) break;
        pair_sum += 2.0 * w * g0_gradient(d, sigma2, beta, k_) / g;
    }
    Eigen::Vector2d integral = Eigen::Vector2d::Zero();
    for (Index s = 0; s < sample_.distance.size(); ++s) {
        const double d = sample_.distance[s];
        const double g = g0(d, sigma2, beta, k_);
        const double w = cl2_weight(cfg_, d, g, gz);
        if (w == 0.0) break;
        integral += sample_.weight[s] * w * g0_gradient(d, sigma2, beta, k_);
    }
    return pair_sum - integral;
}

double CompositeLikelihood::standardized_score(double sigma2, double beta) const {
    const double gz = g0(0.0, sigma2, beta, k_);
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    for (Index i = 0; i < pair_distance_.size(); ++i) {
        const double d = pair_distance_[i];
        const double g = g0(d, sigma2, beta, k_);
        const double w = cl2_weight(cfg_, d, g, gz);
        if (w == 0.0) break;
        u += 2.0 * w * g0_gradient(d, sigma2, beta, k_) / g;
    }
    Eigen::Matrix2d j = Eigen::Matrix2d::Zero();
    for (Index s = 0; s < sample_.distance.size(); ++s) {
        const double d = sample_.distance[s];
        const double g = g0(d, sigma2, beta, k_);
        const double w = cl2_weight(cfg_, d, g, gz);
        if (w == 0.0) break;
        const Eigen::Vector2d grad = g0_gradient(d, sigma2, beta, k_);
        u -= sample_.weight[s] * w * grad;
        j += sample_.weight[s] * w / g * grad * grad.transpose();
    }
    const Eigen::LDLT<Eigen::Matrix2d> ldlt(j);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
        return std::numeric_limits<double>::infinity();
    return u.dot(ldlt.solve(u));
}

Eigen::Vector2d cl2_score(const PointPattern& x, double sigma2, double beta, int k, const Cl2Config& cfg) {
    const CompositeLikelihood cl(x, k, cfg);
    const Eigen::Vector2d s = cl.score(sigma2, beta);
    if (s.isZero(0.0) && cfg.weight != WeightKind::fixed_range)
        throw NumericalError("composite-likelihood weight vanishes for every pair");
    return s;
}

Cl2Fit cl2_fit(const PointPattern& x, int k, const Cl2Config& cfg) {
    const CompositeLikelihood cl(x, k, cfg);
    Cl2Fit fit;
    if (cfg.strategy == SearchStrategy::grid) {
        const Eigen::ArrayXd s2 = Eigen::ArrayXd::LinSpaced(cfg.grid_n, cfg.sigma2_lo, cfg.sigma2_hi);
        const Eigen::ArrayXd b = Eigen::ArrayXd::LinSpaced(cfg.grid_n, cfg.beta_lo, cfg.beta_hi);
        double best = std::numeric_limits<double>::infinity();
        Index bi = 0, bj = 0;
        for (Index i = 0; i < cfg.grid_n; ++i) {
            for (Index j = 0; j < cfg.grid_n; ++j) {
                const double norm = cl.score(s2[i], b[j]).norm();
                if (norm < best) {
                    best = norm;
                    bi = i;
                    bj = j;
                }
            }
        }
        fit.sigma2 = s2[bi];
        fit.beta = b[bj];
        fit.score_norm = best;
        fit.on_boundary = bi == 0 || bj == 0 || bi == cfg.grid_n - 1 || bj == cfg.grid_n - 1;
        fit.converged = true;
        return fit;
    }
    // The score also vanishes trivially when the weights select no pairs
    // (sigma2 -> 0 or beta -> infinity), so the search stays inside the box.
    const Eigen::Vector2d lo(std::log(cfg.sigma2_lo), std::log(cfg.beta_lo));
    const Eigen::Vector2d hi(std::log(cfg.sigma2_hi), std::log(cfg.beta_hi));
    auto objective = [&](const Eigen::VectorXd& logp) {
        if ((logp.array() < lo.array()).any() || (logp.array() > hi.array()).any())
            return std::numeric_limits<double>::infinity();
        return cl.standardized_score(std::exp(logp[0]), std::exp(logp[1]));
    };
    Eigen::VectorXd start(2);
    start << std::log(cfg.start_sigma2), std::log(cfg.start_beta);
    if ((start.array() < lo.array()).any() || (start.array() > hi.array()).any())
        throw ValidationError("composite-likelihood start lies outside the search box");
    // Adaptive weights make the objective piecewise smooth with many local
    // minima; a coarse log-grid scan picks the simplex start.
    double start_value = objective(start);
    constexpr int kScan = 8;
    for (int i = 0; i < kScan; ++i) {
        for (int j = 0; j < kScan; ++j) {
            Eigen::VectorXd cand(2);
            cand << lo[0] + (hi[0] - lo[0]) * (i + 0.5) / kScan, lo[1] + (hi[1] - lo[1]) * (j + 0.5) / kScan;
            const double v = objective(cand);
            if (v < start_value) {
                start_value = v;
                start = cand;
            }
        }
    }
    NelderMeadOptions nm;
    nm.max_iterations = cfg.max_iterations;
    nm.f_tol = 1e-10;
    nm.x_tol = 1e-7;
    nm.initial_step = 0.25;
    const auto res = nelder_mead<double>(objective, start, nm);
    fit.sigma2 = std::exp(res.x[0]);
    fit.beta = std::exp(res.x[1]);
    fit.score_norm = res.value;
    fit.converged = res.converged;
    const Eigen::Vector2d margin = 0.01 * (hi - lo);
    fit.on_boundary = ((res.x.array() - lo.array()) < margin.array()).any() ||
                      ((hi.array() - res.x.array()) < margin.array()).any();
    return fit;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Method m) {
    switch (m) {
    case Method::mce_g: return "mce-g";
    case Method::mce_k: return "mce-k";
    case Method::cl2: return "cl2";
    }
    return "?";
}

Method method_from_string(std::string_view s) {
    for (auto m : {Method::mce_g, Method::mce_k, Method::cl2})
        if (to_string(m) == s) return m;
    throw ValidationError("unknown estimation method '" + std::string(s) + "'");
}

std::vector<RunDesign> reference_study_design() {
    struct Row {
        double sigma2, beta, rym, rys, pg, pk, rl;
        bool rl_bw;
        double ru, s0, b0;
    };
    // clang-format off
    const Row rows[] = {
        {5, 0.1, 0.8, 1.2, 1.0, 0.25, 0.0, false, 30, 0.5, 0.5},
        {5, 0.1, 0.8, 1.2, 0.5, 0.5,  0.0, false, 30, 0.5, 0.5},
        {5, 0.1, 0.8, 1.2, 1.0, 0.25, 0.0, false, 50, 0.5, 0.5},
        {5, 0.1, 0.8, 1.2, 1.0, 0.25, 0.0, false, 20, 0.5, 0.5},
        {5, 0.1, 0.8, 1.2, 1.0, 0.25, 0.0, false, 30, 3.0, 0.2},
        {5, 0.1, 0.8, 1.2, 1.0, 0.25, 0.0, false, 30, 0.2, 3.0},
        {5, 0.1, 0.3, 0.7, 1.0, 0.25, 0.0, false, 30, 0.5, 0.5},
        {5, 0.1, 1.0, 1.0, 1.0, 0.25, 0.0, false, 30, 0.5, 0.5},
        {5, 0.5, 0.8, 1.2, 1.0, 0.25, 0.0, false, 30, 0.5, 0.5},
        {5, 1.0, 0.8, 1.2, 1.0, 0.25, 0.0, false, 30, 0.5, 0.5},
        {1, 0.1, 0.8, 1.2, 1.0, 0.25, 0.0, false, 30, 0.5, 0.5},
        {1, 0.5, 0.8, 1.2, 1.0, 0.25, 0.0, false, 30, 0.5, 0.5},
        {5, 0.1, 0.8, 1.2, 1.0, 0.25, 2.0, true,  30, 0.5, 0.5},
        {5, 0.1, 0.8, 1.2, 1.0, 0.25, 0.5, true,  30, 0.5, 0.5},
        {5, 0.1, 0.8, 1.2, 1.0, 0.25, 2.0, false, 30, 0.5, 0.5},
        {5, 0.1, 0.8, 1.2, 1.0, 0.25, 0.5, false, 30, 0.5, 0.5},
    };
    // clang-format on
    std::vector<RunDesign> out;
    int id = 1;
    for (const auto& r : rows) {
        RunDesign d;
        d.id = id++;
        d.truth = {r.rym, r.rys, r.sigma2, r.beta, 1};
        d.p_g = r.pg;
        d.p_k = r.pk;
        d.r_l = r.rl;
        d.r_l_in_bandwidths = r.rl_bw;
        d.r_u = r.ru;
        d.start_sigma2 = r.s0;
        d.start_beta = r.b0;
        out.push_back(d);
    }
    return out;
}

namespace {

StudyRow fit_one(const PointPattern& x, const RunDesign& run, Method method, Index rep) {
    StudyRow row;
    row.run = run.id;
    row.replicate = rep;
    row.method = method;
    row.sigma2_hat = kNaN;
    row.beta_hat = kNaN;
    try {
        if (method == Method::cl2) {
            const Cl2Fit f = cl2_fit(x, run.truth.k, run.cl2);
            row.sigma2_hat = f.sigma2;
            row.beta_hat = f.beta;
            row.converged = f.converged && !f.on_boundary;
            return row;
        }
        MinContrastConfig cfg;
        cfg.target = method == Method::mce_g ? ContrastTarget::g : ContrastTarget::K;
        cfg.p = method == Method::mce_g ? run.p_g : run.p_k;
        cfg.r_l = run.r_l;
        if (run.r_l_in_bandwidths) {
            if (x.size() < 2) throw ValidationError("minimum contrast needs at least two points");
            cfg.r_l = run.r_l * default_pcf_bandwidth(x.network(), as_function(x.network(), fit_intensity_mle(x)));
        }
        cfg.r_u = run.r_u;
        cfg.start_sigma2 = run.start_sigma2;
        cfg.start_beta = run.start_beta;
        const ContrastFit f = min_contrast(x, run.truth.k, cfg);
        row.sigma2_hat = f.sigma2;
        row.beta_hat = f.beta;
        row.converged = f.converged;
    } catch (const std::exception& e) {
        row.error = e.what();
        row.converged = false;
    }
    return row;
}

} // namespace

StudyResult simulation_study(const NetworkPtr& net, const std::vector<RunDesign>& design, Index replicates,
                             std::uint64_t seed, int threads) {
    if (replicates < 0) throw ValidationError("replicate count must be nonnegative");
    for (const auto& run : design) run.truth.validate();

    const auto reps = static_cast<std::size_t>(replicates);
    std::vector<std::vector<StudyRow>> slots(design.size() * reps);
    parallel_for(slots.size(), threads, [&](std::size_t task) {
        const auto& run = design[task / reps];
        const auto rep = static_cast<Index>(task % reps);
        const std::uint64_t s = derive_seed(derive_seed(seed, static_cast<std::uint64_t>(run.id)),
                                            static_cast<std::uint64_t>(rep));
        auto& out = slots[task];
        try {
            const PointPattern x = simulate_cox(net, run.truth, {}, s).pattern;
            for (Method m : run.methods) out.push_back(fit_one(x, run, m, rep));
        } catch (const std::exception& e) {
            for (Method m : run.methods) {
                StudyRow row{run.id, rep, m, kNaN, kNaN, false, e.what()};
                out.push_back(row);
            }
        }
    });

    StudyResult result;
    for (auto& s : slots)
        for (auto& row : s) result.rows.push_back(std::move(row));

    for (const auto& run : design) {
        for (Method m : run.methods) {
            StudySummary sum;
            sum.run = run.id;
            sum.method = m;
            std::vector<double> s2, b;
            for (const auto& row : result.rows) {
                if (row.run != run.id || row.method != m) continue;
                ++sum.rows;
                if (!row.error.empty() || !std::isfinite(row.sigma2_hat)) {
                    ++sum.failures;
                    continue;
                }
                s2.push_back(row.sigma2_hat);
                b.push_back(row.beta_hat);
                sum.sigma2_above_cap += row.sigma2_hat > 15.0;
                sum.beta_above_cap += row.beta_hat > 5.0;
            }
            sum.median_sigma2 = median(s2);
            sum.median_beta = median(b);
            result.summary.push_back(sum);
        }
    }
    return result;
}

} // namespace linnet
