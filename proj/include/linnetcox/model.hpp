#pragma once

#include <cmath>
#include <functional>

#include "linnetcox/network.hpp"

namespace linnet {

/// Piecewise-constant intensity: one value on the main branch, one on the
/// side branches (points per um).
struct IntensityModel {
    double rho_main = 0.0;
    double rho_side = 0.0;

    double at(Branch b) const { return b == Branch::main ? rho_main : rho_side; }
    double at(const LinearNetwork& net, const NetworkPoint& p) const { return at(net.branch(p.edge)); }
    double expected_count(const LinearNetwork& net) const {
        return rho_main * net.branch_length(Branch::main) + rho_side * net.branch_length(Branch::side);
    }
    /// Infimum over the network (branches of zero length are ignored).
    double floor(const LinearNetwork& net) const;
    void validate() const;
};

/// Thinned Cox process: Poisson Y with intensity rho_Y, retention
/// exp(-sigma2/2 * sum_j Z_j^2) with k exponential-correlation fields.
struct CoxModel {
    double rho_y_main = 0.0;
    double rho_y_side = 0.0;
    double sigma2 = 1.0;
    double beta = 1.0;  // 1/um
    int k = 1;

    IntensityModel driving() const { return {rho_y_main, rho_y_side}; }
    /// Mean retention (1 + sigma2)^(-k/2).
    double mean_retention() const { return std::pow(1.0 + sigma2, -0.5 * k); }
    /// Intensity of the thinned process.
    IntensityModel intensity() const {
        const double q = mean_retention();
        return {q * rho_y_main, q * rho_y_side};
    }
    void validate() const;
};

using IntensityFn = std::function<double(const NetworkPoint&)>;

inline IntensityFn as_function(const LinearNetwork& net, const IntensityModel& m) {
    return [&net, m](const NetworkPoint& p) { return m.at(net, p); };
}

} // namespace linnet
