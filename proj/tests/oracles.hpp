#pragma once

// Reference implementations used only by the tests. They share no code with
// the library beyond reading network topology (endpoints and lengths).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "linnetcox/network.hpp"

namespace oracle {

using linnet::Index;
using linnet::LinearNetwork;
using linnet::NetworkPoint;

/// All-pairs shortest paths on the graph obtained by inserting every query
/// point as a vertex on its edge (Floyd-Warshall). Node i < V is network
/// vertex i; node V + j is query point j.
class ExpandedGraph {
public:
    ExpandedGraph(const LinearNetwork& net, const std::vector<NetworkPoint>& pts)
        : v_(net.vertex_count()), n_(v_ + static_cast<Index>(pts.size())),
          d_(static_cast<std::size_t>(n_ * n_), std::numeric_limits<double>::infinity()) {
        for (Index i = 0; i < n_; ++i) at(i, i) = 0.0;
        for (Index e = 0; e < net.edge_count(); ++e) {
            std::vector<std::pair<double, Index>> chain{{0.0, net.tail(e)}, {net.length(e), net.head(e)}};
            for (std::size_t j = 0; j < pts.size(); ++j)
                if (pts[j].edge == e) chain.emplace_back(pts[j].offset, v_ + static_cast<Index>(j));
            std::sort(chain.begin(), chain.end());
            for (std::size_t k = 1; k < chain.size(); ++k) link(chain[k - 1].second, chain[k].second,
                                                                chain[k].first - chain[k - 1].first);
        }
        for (Index k = 0; k < n_; ++k)
            for (Index i = 0; i < n_; ++i)
                for (Index j = 0; j < n_; ++j) at(i, j) = std::min(at(i, j), at(i, k) + at(k, j));
    }

    double point_distance(Index i, Index j) const { return d_[idx(v_ + i, v_ + j)]; }
    double point_to_vertex(Index i, Index v) const { return d_[idx(v_ + i, v)]; }

private:
    std::size_t idx(Index i, Index j) const { return static_cast<std::size_t>(i * n_ + j); }
    double& at(Index i, Index j) { return d_[idx(i, j)]; }
    void link(Index a, Index b, double w) {
        at(a, b) = std::min(at(a, b), w);
        at(b, a) = std::min(at(b, a), w);
    }

    Index v_, n_;
    std::vector<double> d_;
};

inline std::vector<Index> leaves(const LinearNetwork& net) {
    std::vector<int> degree(static_cast<std::size_t>(net.vertex_count()), 0);
    for (Index e = 0; e < net.edge_count(); ++e) {
        ++degree[static_cast<std::size_t>(net.tail(e))];
        ++degree[static_cast<std::size_t>(net.head(e))];
    }
    std::vector<Index> out;
    for (Index v = 0; v < net.vertex_count(); ++v)
        if (degree[static_cast<std::size_t>(v)] == 1) out.push_back(v);
    return out;
}

/// Pair correlation of the thinned Cox model, written directly from its
/// definition: g0(t) = (1 - (sigma2 / (1 + sigma2))^2 exp(-2 beta t))^(-k/2).
inline double g0(double t, double sigma2, double beta, int k) {
    const double a = std::pow(sigma2 / (1.0 + sigma2), 2);
    return std::pow(1.0 - a * std::exp(-2.0 * beta * t), -0.5 * k);
}

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 50) {
    const std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
                return left + right + (left + right - whole) / 15.0;
            return rec(lo, mid, flo, flm, fmid, left, 0.5 * eps, d - 1) +
                   rec(mid, hi, fmid, frm, fhi, right, 0.5 * eps, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// Empty-space fraction for a homogeneous pattern: among origins farther
/// than r from every leaf, the share with a data point within distance r.
/// With `self_excluded`, origin i is data point i and ignores itself.
inline std::vector<double> ball_scan(const LinearNetwork& net, const std::vector<NetworkPoint>& origins,
                                     const std::vector<NetworkPoint>& data, const std::vector<double>& r,
                                     bool self_excluded, std::vector<bool>* defined = nullptr) {
    std::vector<NetworkPoint> all = origins;
    all.insert(all.end(), data.begin(), data.end());
    const ExpandedGraph g(net, all);
    const auto leaf = leaves(net);
    const auto n_orig = static_cast<Index>(origins.size());
    std::vector<double> out(r.size(), 0.0);
    if (defined) defined->assign(r.size(), false);
    for (std::size_t c = 0; c < r.size(); ++c) {
        double hits = 0.0, total = 0.0;
        for (Index o = 0; o < n_orig; ++o) {
            double reach = std::numeric_limits<double>::infinity();
            for (Index v : leaf) reach = std::min(reach, g.point_to_vertex(o, v));
            if (!(reach > r[c])) continue;
            total += 1.0;
            for (Index j = 0; j < static_cast<Index>(data.size()); ++j) {
                if (self_excluded && j == o) continue;
                if (g.point_distance(o, n_orig + j) <= r[c]) {
                    hits += 1.0;
                    break;
                }
            }
        }
        if (total > 0.0) {
            out[c] = hits / total;
            if (defined) (*defined)[c] = true;
        }
    }
    return out;
}

} // namespace oracle
