#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "linnetcox/model.hpp"
#include "linnetcox/network.hpp"
#include "linnetcox/summaries.hpp"

namespace linnet {

// ---------------------------------------------------------------------------
// Minimum contrast

enum class ContrastTarget { K, g };

struct MinContrastConfig {
    ContrastTarget target = ContrastTarget::g;
    double r_l = 0.0;
    std::optional<double> r_u;     // 0.1 |L| when unset
    double p = 1.0;
    double start_sigma2 = 0.5;
    double start_beta = 0.5;
    int max_iterations = 2000;
    double tolerance = 1e-10;
    Index grid_points = 256;       // trapezoid nodes on [r_l, r_u]
    std::optional<double> bandwidth;  // for g-hat; default rule when unset

    void validate() const;
};

struct ContrastFit {
    double sigma2 = 0.0;
    double beta = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double bandwidth = 0.0;  // only meaningful for the g target
    /// Fitted K exceeds r by less than 1% of the contrast range: the fit is
    /// practically Poisson and (sigma2, beta) are not identified.
    bool weakly_identified = false;
};

/// Mean excess (K(r_u) - K(r_l)) / (r_u - r_l) - 1 of the model over [r_l, r_u].
double clustering_excess(double r_l, double r_u, double sigma2, double beta, int k);

/// Model curve K or g0 for (sigma2, beta, k) on the given r values.
Eigen::ArrayXd model_curve(ContrastTarget target, const Eigen::ArrayXd& r, double sigma2, double beta, int k);

/// Trapezoid approximation of int (T_hat^p - T^p)^2 dr over defined cells.
double contrast_objective(const SummaryCurve& empirical, ContrastTarget target, double sigma2, double beta, int k,
                          double p);

/// Minimizes the contrast for a given empirical curve (log-parameter Nelder-Mead).
ContrastFit min_contrast_curve(const SummaryCurve& empirical, int k, const MinContrastConfig& cfg);

/// Empirical curve with plug-in branch intensities, then min_contrast_curve.
ContrastFit min_contrast(const PointPattern& x, int k, const MinContrastConfig& cfg);

/// Empirical K or g for the contrast, on the cfg grid, with the MLE plug-in.
SummaryCurve empirical_contrast_curve(const PointPattern& x, const MinContrastConfig& cfg);

struct FitResult {
    IntensityModel intensity;   // first step
    double sigma2 = 0.0;
    double beta = 0.0;
    int k = 1;
    IntensityModel driving;     // (1 + sigma2)^{k/2} * intensity
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    bool weakly_identified = false;

    CoxModel model() const { return {driving.rho_main, driving.rho_side, sigma2, beta, k}; }
};

/// Inverts rho = (1 + sigma2)^{-k/2} rho_Y.
IntensityModel driving_intensity(const IntensityModel& rho, double sigma2, int k);

FitResult two_step_fit(const PointPattern& x, int k, const MinContrastConfig& cfg);

// ---------------------------------------------------------------------------
// Segment-pair Monte Carlo integration

/// Distances d(u, v) for (u, v) drawn uniformly from pairs of segments, each
/// carrying the weight |L_i| |L_j| / samples (doubled for i != j so that
/// summing over unordered pairs covers all ordered ones). Sorted by distance.
struct PairDistanceSample {
    Eigen::ArrayXd distance;
    Eigen::ArrayXd weight;
    Eigen::ArrayXi first_edge;
    Eigen::ArrayXi second_edge;
};

PairDistanceSample sample_pair_distances(const LinearNetwork& net, Index samples_per_pair, std::uint64_t seed);

/// Estimates int_L int_L f0(d(u, v)) du dv on a tree.
double mc_double_integral(const LinearNetwork& net, const std::function<double(double)>& f0, Index samples_per_pair,
                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Second-order composite likelihood

enum class WeightKind { fixed_range, adaptive_indicator, adaptive_smooth };
enum class SearchStrategy { grid, derivative_free };

struct Cl2Config {
    WeightKind weight = WeightKind::adaptive_indicator;
    double r0 = 30.0;
    double epsilon = 0.05;
    Index samples_per_pair = 1000;
    std::uint64_t seed = 1;
    SearchStrategy strategy = SearchStrategy::derivative_free;
    Index grid_n = 100;
    double sigma2_lo = 0.1, sigma2_hi = 10.0;
    double beta_lo = 0.01, beta_hi = 1.0;
    double start_sigma2 = 0.5, start_beta = 0.5;
    int max_iterations = 500;

    void validate() const;
};

/// exp(1 / (h^2 - 1)) on [-1, 1], 0 elsewhere (continuous at |h| = 1).
double smooth_weight(double h);

/// w(u, v) for a pair at pair correlation g (g0_at_zero gives M = |g0(0) - 1|).
double cl2_weight(const Cl2Config& cfg, double distance, double g, double g0_at_zero);

/// Precomputed data pair distances and Monte Carlo integration sample for
/// one pattern; evaluations at different parameters share the same sample.
class CompositeLikelihood {
public:
    CompositeLikelihood(const PointPattern& x, int k, const Cl2Config& cfg);

    double log_likelihood(double sigma2, double beta) const;
    Eigen::Vector2d score(double sigma2, double beta) const;
    /// U' J^{-1} U with U the score and J = int int w rho rho grad(g) grad(g)' / g;
    /// unlike |U| it does not shrink where the weights select few pairs.
    double standardized_score(double sigma2, double beta) const;
    const IntensityModel& intensity() const { return intensity_; }

private:
    Cl2Config cfg_;
    int k_;
    IntensityModel intensity_;
    Eigen::ArrayXd pair_distance_;   // unordered data pairs, sorted
    Eigen::ArrayXd pair_log_rho_;    // log rho(u) rho(v)
    PairDistanceSample sample_;      // weights include rho(u) rho(v)
};

Eigen::Vector2d cl2_score(const PointPattern& x, double sigma2, double beta, int k, const Cl2Config& cfg);

struct Cl2Fit {
    double sigma2 = 0.0;
    double beta = 0.0;
    double score_norm = 0.0;   // |U| for the grid search, U' J^{-1} U otherwise
    bool on_boundary = false;
    bool converged = false;
};

Cl2Fit cl2_fit(const PointPattern& x, int k, const Cl2Config& cfg);

// ---------------------------------------------------------------------------
// Simulation study

enum class Method { mce_g, mce_k, cl2 };
std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

struct RunDesign {
    int id = 1;
    CoxModel truth;
    double p_g = 1.0;
    double p_k = 0.25;
    double r_l = 0.0;
    bool r_l_in_bandwidths = false;  // r_l is a multiple of the g-hat bandwidth
    double r_u = 30.0;
    double start_sigma2 = 0.5;
    double start_beta = 0.5;
    std::vector<Method> methods{Method::mce_g, Method::mce_k};
    Cl2Config cl2;
};

/// The sixteen minimum-contrast runs of the reference study design.
std::vector<RunDesign> reference_study_design();

struct StudyRow {
    int run = 0;
    Index replicate = 0;
    Method method = Method::mce_g;
    double sigma2_hat = 0.0;
    double beta_hat = 0.0;
    bool converged = false;
    std::string error;
};

struct StudySummary {
    int run = 0;
    Method method = Method::mce_g;
    Index rows = 0;
    Index failures = 0;
    Index sigma2_above_cap = 0;  // sigma2_hat > 15
    Index beta_above_cap = 0;    // beta_hat > 5
    double median_sigma2 = 0.0;
    double median_beta = 0.0;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    std::vector<StudySummary> summary;
};

StudyResult simulation_study(const NetworkPtr& net, const std::vector<RunDesign>& design, Index replicates,
                             std::uint64_t seed, int threads = 1);

} // namespace linnet
