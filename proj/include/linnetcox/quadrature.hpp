#pragma once

#include <array>
#include <cmath>

namespace linnet {

namespace detail {

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
double gk15(const F& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const double fc = f(mid);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double s = f(mid - dx) + f(mid + dx);
        kronrod += kKronrodWeights[i] * s;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * s;
    }
    err = std::abs((kronrod - gauss) * half);
    return kronrod * half;
}

template <typename F>
double adaptive(const F& f, double a, double b, double whole, double err, double tol, int depth) {
    if (err <= tol || depth <= 0) return whole;
    const double mid = 0.5 * (a + b);
    double el = 0.0, er = 0.0;
    const double left = gk15(f, a, mid, el);
    const double right = gk15(f, mid, b, er);
    return adaptive(f, a, mid, left, el, 0.5 * tol, depth - 1) +
           adaptive(f, mid, b, right, er, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15) integral of f over [a, b].
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 1e-14,
                 int max_depth = 40) {
    if (a == b) return 0.0;
    double err = 0.0;
    const double whole = detail::gk15(f, a, b, err);
    const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
    return detail::adaptive(f, a, b, whole, err, tol, max_depth);
}

} // namespace linnet
