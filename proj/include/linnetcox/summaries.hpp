#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "linnetcox/model.hpp"
#include "linnetcox/network.hpp"

namespace linnet {

enum class CurveKind { K, g, F, G, J, intensity };

std::string_view to_string(CurveKind kind);
CurveKind curve_kind_from_string(std::string_view s);

/// Values of a summary function on a strictly increasing r-grid. Cells that
/// could not be evaluated carry defined = false.
struct SummaryCurve {
    CurveKind kind = CurveKind::K;
    Eigen::ArrayXd r;
    Eigen::ArrayXd value;
    Eigen::Array<bool, Eigen::Dynamic, 1> defined;
    std::map<std::string, double> metadata;

    Index size() const { return r.size(); }
};

/// n equally spaced values on [lo, hi].
Eigen::ArrayXd make_rgrid(double lo, double hi, Index n);
/// 512 values from 0 to 0.2 |L|.
Eigen::ArrayXd default_rgrid(const LinearNetwork& net);

/// Branch-wise MLE: n_m / |L_m| and n_s / |L_s|.
IntensityModel fit_intensity_mle(const PointPattern& x);

/// Average of rho over the network, assuming rho is constant along edges.
double mean_intensity(const LinearNetwork& net, const IntensityFn& rho);

struct KernelIntensity {
    std::vector<Eigen::ArrayXd> offsets;  // per edge, nodes including both ends
    std::vector<Eigen::ArrayXd> values;   // per edge, same layout
    double bandwidth = 0.0;
    double spacing = 0.0;

    double integral() const;
    double at(const NetworkPoint& p) const;
};

/// Heat-kernel smoothing: each point's unit mass diffuses for time
/// bandwidth^2 / 2 on the network (Kirchhoff junctions), so on a long
/// segment the profile is Gaussian with sd = bandwidth.
KernelIntensity kernel_intensity(const PointPattern& x, double bandwidth, std::optional<double> spacing = {},
                                 int time_steps = 100);

/// Ordered pairs u != v with their distance and geometric-correction weight
/// 1 / (rho(u) rho(v) m(u, d(u, v))), sorted by distance.
struct PairWeights {
    Eigen::ArrayXd distance;
    Eigen::ArrayXd weight;
};
PairWeights geometric_pair_weights(const PointPattern& x, const IntensityFn& rho);

SummaryCurve K_hat(const PointPattern& x, const IntensityFn& rho, const Eigen::ArrayXd& rgrid);

enum class Kernel { epanechnikov, uniform };

struct GhatOptions {
    std::optional<double> bandwidth;  // kernel half-width; 0.15 / sqrt(mean rho) if unset
    Kernel kernel = Kernel::epanechnikov;
};

double default_pcf_bandwidth(const LinearNetwork& net, const IntensityFn& rho);
double kernel_value(Kernel kernel, double x, double bandwidth);

/// Kernel estimate of g with reflection at r = 0.
SummaryCurve g_hat(const PointPattern& x, const IntensityFn& rho, const Eigen::ArrayXd& rgrid,
                   const GhatOptions& opts = {});

struct FgjConfig {
    IntensityFn rho;
    double floor = 0.0;            // inf of rho over the network, must be > 0
    double lattice_spacing = 0.5;  // spacing of the test lattice H
    double r_min = 0.0;            // cells with r < r_min are left undefined

    static FgjConfig from_model(const LinearNetwork& net, const IntensityModel& m, double spacing = 0.5);
};

struct FgjCurves {
    SummaryCurve F, G, J;
};

FgjCurves fgj_hat(const PointPattern& x, const FgjConfig& cfg, const Eigen::ArrayXd& rgrid);

} // namespace linnet
