#include "linnetcox/pair_correlation.hpp"

#include "linnetcox/errors.hpp"
#include "linnetcox/quadrature.hpp"

namespace linnet {

double g0_theoretical(double t, const CoxModel& model) {
    if (!(t >= 0.0)) throw ValidationError("distance must be nonnegative");
    return g0(t, model.sigma2, model.beta, model.k);
}

double K_quadrature(double r, double sigma2, double beta, int k) {
    if (!(r >= 0.0)) throw ValidationError("r must be nonnegative");
    return integrate([&](double s) { return g0(s, sigma2, beta, k); }, 0.0, r);
}

double K_theoretical(double r, const CoxModel& model) {
    if (!(r >= 0.0)) throw ValidationError("r must be nonnegative");
    if (model.k >= 1 && model.k <= 5) return K_closed_form(r, model.sigma2, model.beta, model.k);
    return K_quadrature(r, model.sigma2, model.beta, model.k);
}

} // namespace linnet
