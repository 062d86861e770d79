#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace linnet {

struct NelderMeadOptions {
    int max_iterations = 2000;
    double f_tol = 1e-10;    // spread of function values across the simplex
    double x_tol = 1e-8;     // simplex diameter
    double initial_step = 0.5;
};

template <typename Scalar>
struct NelderMeadResult {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
    Scalar value{};
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization (standard reflection / expansion /
/// contraction / shrink coefficients 1, 2, 1/2, 1/2).
template <typename Scalar, typename F>
NelderMeadResult<Scalar> nelder_mead(const F& f, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& start,
                                     const NelderMeadOptions& opts = {}) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const auto n = start.size();
    std::vector<Vec> pts(static_cast<std::size_t>(n + 1), start);
    std::vector<Scalar> val(static_cast<std::size_t>(n + 1));
    NelderMeadResult<Scalar> res;
    auto eval = [&](const Vec& x) {
        ++res.evaluations;
        const Scalar v = f(x);
        return std::isnan(static_cast<double>(v)) ? std::numeric_limits<Scalar>::infinity() : v;
    };
    for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i + 1)][i] += Scalar(opts.initial_step);
    for (std::size_t i = 0; i < pts.size(); ++i) val[i] = eval(pts[i]);

    std::vector<std::size_t> order(pts.size());
    for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return val[a] < val[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];

        Scalar diameter = 0;
        for (const auto& p : pts) diameter = std::max(diameter, (p - pts[best]).cwiseAbs().maxCoeff());
        if (std::abs(static_cast<double>(val[worst] - val[best])) <= opts.f_tol && diameter <= Scalar(opts.x_tol)) {
            res.converged = true;
            break;
        }

        Vec centroid = Vec::Zero(n);
        for (std::size_t i : order)
            if (i != worst) centroid += pts[i];
        centroid /= Scalar(n);

        const Vec reflected = centroid + (centroid - pts[worst]);
        const Scalar fr = eval(reflected);
        if (fr < val[best]) {
            const Vec expanded = centroid + Scalar(2) * (centroid - pts[worst]);
            const Scalar fe = eval(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                val[worst] = fe;
            } else {
                pts[worst] = reflected;
                val[worst] = fr;
            }
            continue;
        }
        if (fr < val[second]) {
            pts[worst] = reflected;
            val[worst] = fr;
            continue;
        }
        const bool outside = fr < val[worst];
        const Vec contracted = outside ? Vec(centroid + Scalar(0.5) * (reflected - centroid))
                                       : Vec(centroid + Scalar(0.5) * (pts[worst] - centroid));
        const Scalar fc = eval(contracted);
        if (fc < (outside ? fr : val[worst])) {
            pts[worst] = contracted;
            val[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = pts[best] + Scalar(0.5) * (pts[i] - pts[best]);
            val[i] = eval(pts[i]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin());
    res.x = pts[best];
    res.value = val[best];
    return res;
}

} // namespace linnet
