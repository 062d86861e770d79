#include "linnetcox/model.hpp"

#include <algorithm>
#include <limits>

#include "linnetcox/errors.hpp"

namespace linnet {

double IntensityModel::floor(const LinearNetwork& net) const {
    double lo = std::numeric_limits<double>::infinity();
    if (net.branch_length(Branch::main) > 0.0) lo = std::min(lo, rho_main);
    if (net.branch_length(Branch::side) > 0.0) lo = std::min(lo, rho_side);
    return lo;
}

void IntensityModel::validate() const {
    if (!(rho_main >= 0.0) || !(rho_side >= 0.0) || !std::isfinite(rho_main) || !std::isfinite(rho_side))
        throw ValidationError("intensities must be finite and nonnegative");
}

void CoxModel::validate() const {
    driving().validate();
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ValidationError("sigma2 must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
    if (k < 1) throw ValidationError("k must be a positive integer");
}

} // namespace linnet
