#include "linnetcox/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "linnetcox/errors.hpp"

namespace linnet {

PointPattern simulate_poisson(const NetworkPtr& net, const IntensityModel& intensity, Rng& rng) {
    intensity.validate();
    const double mean = intensity.expected_count(*net);
    if (mean <= 0.0) return PointPattern(net);

    std::vector<double> weights(static_cast<std::size_t>(net->edge_count()));
    for (Index e = 0; e < net->edge_count(); ++e)
        weights[e] = intensity.at(net->branch(e)) * net->length(e);

    const auto n = std::poisson_distribution<long>(mean)(rng);
    std::discrete_distribution<Index> pick_edge(weights.begin(), weights.end());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<NetworkPoint> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const Index e = pick_edge(rng);
        pts.push_back({e, unit(rng) * net->length(e)});
    }
    std::sort(pts.begin(), pts.end());
    return PointPattern(net, std::move(pts));
}

PointPattern simulate_poisson(const NetworkPtr& net, const IntensityModel& intensity, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return simulate_poisson(net, intensity, rng);
}

Eigen::MatrixXd correlation_matrix(const LinearNetwork& net, const std::vector<NetworkPoint>& sites,
                                   const CorrelationFn& corr) {
    const auto n = static_cast<Index>(sites.size());
    Eigen::MatrixXd c(n, n);
    for (Index i = 0; i < n; ++i) {
        c(i, i) = corr(0.0);
        for (Index j = i + 1; j < n; ++j) c(i, j) = c(j, i) = corr(net.distance(sites[i], sites[j]));
    }
    return c;
}

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& cov, double* jitter_used) {
    const Index n = cov.rows();
    if (n == 0) return Eigen::MatrixXd(0, 0);
    const double scale = cov.diagonal().mean();
    for (double jitter = 1e-10; jitter <= 1e-4 * (1.0 + 1e-9); jitter *= 10.0) {
        Eigen::MatrixXd a = cov;
        a.diagonal().array() += jitter * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success) {
            if (jitter_used) *jitter_used = jitter * scale;
            return llt.matrixL();
        }
    }
    std::ostringstream msg;
    msg << "covariance matrix of size " << n << " is not positive definite even with jitter 1e-4";
    throw NumericalError(msg.str());
}

GrfSample sample_grf(const LinearNetwork& net, std::vector<NetworkPoint> sites, const CorrelationFn& corr,
                     int k, Rng& rng) {
    if (k < 1) throw ValidationError("number of fields must be positive");
    if (!net.is_tree()) throw ValidationError("exponential correlation is only valid on tree networks");
    for (auto& s : sites) s = net.canonical(s);

    // Factor only distinct sites; duplicates would make the matrix singular.
    std::map<NetworkPoint, Index> slot;
    std::vector<NetworkPoint> unique;
    std::vector<Index> site_slot(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) {
        auto [it, inserted] = slot.emplace(sites[i], static_cast<Index>(unique.size()));
        if (inserted) unique.push_back(sites[i]);
        site_slot[i] = it->second;
    }

    GrfSample out;
    const Eigen::MatrixXd chol = jittered_cholesky(correlation_matrix(net, unique, corr), &out.jitter);
    const auto m = static_cast<Index>(unique.size());
    std::normal_distribution<double> normal;
    Eigen::MatrixXd white(m, k);
    for (Index j = 0; j < k; ++j)
        for (Index i = 0; i < m; ++i) white(i, j) = normal(rng);
    const Eigen::MatrixXd fields = chol.triangularView<Eigen::Lower>() * white;  // m x k

    out.values.resize(k, static_cast<Index>(sites.size()));
    for (std::size_t i = 0; i < sites.size(); ++i) out.values.col(static_cast<Index>(i)) = fields.row(site_slot[i]).transpose();
    out.sites = std::move(sites);
    return out;
}

GrfSample sample_grf(const LinearNetwork& net, std::vector<NetworkPoint> sites, double beta, int k,
                     std::uint64_t seed) {
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    Rng rng = make_rng(seed);
    GrfSample out = sample_grf(net, std::move(sites), exponential_correlation(beta), k, rng);
    out.beta = beta;
    out.seed = seed;
    return out;
}

Eigen::VectorXd retention_field(const Eigen::MatrixXd& field_values, double sigma2) {
    if (!(sigma2 > 0.0)) throw ValidationError("sigma2 must be positive");
    return (-0.5 * sigma2 * field_values.array().square().colwise().sum()).exp().transpose();
}

CoxRealization simulate_cox(const NetworkPtr& net, const CoxModel& model, const CoxOptions& opts, Rng& rng) {
    model.validate();
    if (!net->is_tree()) throw ValidationError("Cox simulation requires a tree network");
    if (opts.mode == CoxMode::grid && !(opts.spacing > 0.0))
        throw ValidationError("grid spacing must be positive");

    const auto corr = exponential_correlation(model.beta);
    CoxRealization out{PointPattern(net), 0, {}, {}};
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    if (opts.mode == CoxMode::exact) {
        PointPattern y = simulate_poisson(net, model.driving(), rng);
        out.driving_count = y.size();
        if (y.empty()) return out;
        GrfSample grf = sample_grf(*net, y.points(), corr, model.k, rng);
        out.retention = retention_field(grf, model.sigma2);
        std::vector<NetworkPoint> kept;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (out.retention[static_cast<Index>(i)] >= unit(rng)) kept.push_back(y[i]);
        out.sites = std::move(grf.sites);
        out.pattern = PointPattern(net, std::move(kept));
        return out;
    }

    const Lattice grid = make_lattice(*net, opts.spacing);
    GrfSample grf = sample_grf(*net, grid.points, corr, model.k, rng);
    out.retention = retention_field(grf, model.sigma2);
    out.sites = grid.points;
    PointPattern y = simulate_poisson(net, model.driving(), rng);
    out.driving_count = y.size();
    std::vector<NetworkPoint> kept;
    for (const auto& p : y.points())
        if (out.retention[grid.nearest_site(*net, p)] >= unit(rng)) kept.push_back(p);
    out.pattern = PointPattern(net, std::move(kept));
    return out;
}

CoxRealization simulate_cox(const NetworkPtr& net, const CoxModel& model, const CoxOptions& opts,
                            std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return simulate_cox(net, model, opts, rng);
}

PointPattern matern_thin(const PointPattern& x, double h) {
    if (!(h > 0.0)) throw ValidationError("hard-core distance must be positive");
    const Eigen::MatrixXd d = pairwise_distances(x);
    std::vector<NetworkPoint> kept;
    for (Index i = 0; i < d.rows(); ++i) {
        bool alone = true;
        for (Index j = 0; j < d.cols() && alone; ++j) alone = i == j || d(i, j) > h;
        if (alone) kept.push_back(x[static_cast<std::size_t>(i)]);
    }
    return PointPattern(x.network_ptr(), std::move(kept));
}

} // namespace linnet
