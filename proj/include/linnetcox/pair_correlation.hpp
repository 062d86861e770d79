#pragma once

// Second-order structure of the thinned Cox process with exponential
// correlation c(t) = exp(-beta t). Written against a generic scalar so the
// same expressions serve double, long double and test-side oracles.

#include <cmath>

#include <Eigen/Core>

#include "linnetcox/model.hpp"

namespace linnet {

/// alpha = (1 + 1/sigma2)^-2, computed without cancellation for small sigma2.
template <typename Scalar>
Scalar retention_alpha(const Scalar& sigma2) {
    using std::pow;
    const Scalar q = sigma2 / (Scalar(1) + sigma2);
    return q * q;
}

/// 1 - alpha = (1 + 2 sigma2) / (1 + sigma2)^2.
template <typename Scalar>
Scalar retention_one_minus_alpha(const Scalar& sigma2) {
    const Scalar d = Scalar(1) + sigma2;
    return (Scalar(1) + Scalar(2) * sigma2) / (d * d);
}

/// g0(t) = {(1+s^2)^2 / ((1+s^2)^2 - s^4 c(t)^2)}^{k/2} = (1 - alpha e^{-2 beta t})^{-k/2}.
template <typename Scalar>
Scalar g0(const Scalar& t, const Scalar& sigma2, const Scalar& beta, int k) {
    using std::exp;
    using std::pow;
    const Scalar alpha = retention_alpha(sigma2);
    return pow(Scalar(1) - alpha * exp(Scalar(-2) * beta * t), -Scalar(k) / Scalar(2));
}

/// Gradient of g0 with respect to (sigma2, beta).
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> g0_gradient(const Scalar& t, const Scalar& sigma2, const Scalar& beta, int k) {
    using std::exp;
    using std::pow;
    const Scalar alpha = retention_alpha(sigma2);
    const Scalar c2 = exp(Scalar(-2) * beta * t);
    const Scalar base = Scalar(1) - alpha * c2;
    const Scalar outer = Scalar(k) / Scalar(2) * pow(base, -Scalar(k) / Scalar(2) - Scalar(1));
    const Scalar one_plus = Scalar(1) + sigma2;
    const Scalar dalpha = Scalar(2) * sigma2 / (one_plus * one_plus * one_plus);
    Eigen::Matrix<Scalar, 2, 1> grad;
    grad << outer * c2 * dalpha, outer * alpha * (Scalar(-2) * t * c2);
    return grad;
}

/// Closed-form K(r) = int_0^r g0(s) ds for k = 1..5. The expressions are the
/// standard antiderivatives rearranged into differences that stay accurate
/// for small r, small beta and large beta*r.
template <typename Scalar>
Scalar K_closed_form(const Scalar& r, const Scalar& sigma2, const Scalar& beta, int k) {
    using std::exp;
    using std::expm1;
    using std::log1p;
    using std::sqrt;
    if (r <= Scalar(0)) return Scalar(0);
    const Scalar alpha = retention_alpha(sigma2);
    const Scalar y = exp(Scalar(-2) * beta * r);
    const Scalar e = -expm1(Scalar(-2) * beta * r);                    // 1 - y
    const Scalar a = sqrt(Scalar(1) - alpha * y);                      // sqrt(1 - alpha y)
    const Scalar b = sqrt(retention_one_minus_alpha(sigma2));          // sqrt(1 - alpha)
    const Scalar ae = alpha * e;                                       // a^2 - b^2
    const Scalar k1 = r + log1p(ae / ((a + b) * (Scalar(1) + b))) / beta;
    switch (k) {
    case 1:
        return k1;
    case 2:
        return r + log1p(ae / (b * b)) / (Scalar(2) * beta);
    case 3:
        return k1 + ae / ((a + b) * a * b) / beta;
    case 4: {
        const Scalar k2 = r + log1p(ae / (b * b)) / (Scalar(2) * beta);
        return k2 + ae / (b * b * a * a) / (Scalar(2) * beta);
    }
    case 5: {
        const Scalar p = Scalar(4) / Scalar(3) - alpha;
        const Scalar inner = p * (a * a + a * b + b * b) / (a + b) - b * b * b;
        return k1 + ae * inner / (a * a * a * b * b * b) / beta;
    }
    default:
        return Scalar(std::nan(""));
    }
}

double g0_theoretical(double t, const CoxModel& model);

/// Closed forms for k <= 5, adaptive quadrature of g0 otherwise.
double K_theoretical(double r, const CoxModel& model);

/// K by adaptive quadrature of g0 regardless of k.
double K_quadrature(double r, double sigma2, double beta, int k);

} // namespace linnet
