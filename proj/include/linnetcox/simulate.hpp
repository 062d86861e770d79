#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "linnetcox/model.hpp"
#include "linnetcox/network.hpp"
#include "linnetcox/random.hpp"

namespace linnet {

PointPattern simulate_poisson(const NetworkPtr& net, const IntensityModel& intensity, Rng& rng);
PointPattern simulate_poisson(const NetworkPtr& net, const IntensityModel& intensity, std::uint64_t seed);

/// Isotropic correlation as a function of shortest-path distance.
using CorrelationFn = std::function<double(double)>;

inline CorrelationFn exponential_correlation(double beta) {
    return [beta](double d) { return std::exp(-beta * d); };
}

/// Covariance matrix exp(-beta d) over sites; exposed for tests.
Eigen::MatrixXd correlation_matrix(const LinearNetwork& net, const std::vector<NetworkPoint>& sites,
                                   const CorrelationFn& corr);

/// Cholesky factor with jitter escalation 1e-10 .. 1e-4 times the mean
/// diagonal. Throws NumericalError when all levels fail.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& cov, double* jitter_used = nullptr);

struct GrfSample {
    std::vector<NetworkPoint> sites;
    Eigen::MatrixXd values;  // k x n, one row per field
    double beta = 0.0;
    std::uint64_t seed = 0;
    double jitter = 0.0;
};

/// k independent zero-mean unit-variance Gaussian fields at the sites.
/// Coincident sites share one value.
GrfSample sample_grf(const LinearNetwork& net, std::vector<NetworkPoint> sites, const CorrelationFn& corr,
                     int k, Rng& rng);
GrfSample sample_grf(const LinearNetwork& net, std::vector<NetworkPoint> sites, double beta, int k,
                     std::uint64_t seed);

Eigen::VectorXd retention_field(const Eigen::MatrixXd& field_values, double sigma2);
inline Eigen::VectorXd retention_field(const GrfSample& grf, double sigma2) {
    return retention_field(grf.values, sigma2);
}

enum class CoxMode { exact, grid };

struct CoxOptions {
    CoxMode mode = CoxMode::exact;
    double spacing = 1.0;  // grid mode only
};

struct CoxRealization {
    PointPattern pattern;
    std::size_t driving_count = 0;
    /// Sites where the retention field was evaluated (driving points in exact
    /// mode, the lattice in grid mode) and the field values there.
    std::vector<NetworkPoint> sites;
    Eigen::VectorXd retention;
};

CoxRealization simulate_cox(const NetworkPtr& net, const CoxModel& model, const CoxOptions& opts, Rng& rng);
CoxRealization simulate_cox(const NetworkPtr& net, const CoxModel& model, const CoxOptions& opts,
                            std::uint64_t seed);

/// Matern type-I thinning: drop every point with another point within h.
PointPattern matern_thin(const PointPattern& x, double h);

} // namespace linnet
