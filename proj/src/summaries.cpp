#include "linnetcox/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "linnetcox/errors.hpp"

namespace linnet {

std::string_view to_string(CurveKind kind) {
    switch (kind) {
    case CurveKind::K: return "K";
    case CurveKind::g: return "g";
    case CurveKind::F: return "F";
    case CurveKind::G: return "G";
    case CurveKind::J: return "J";
    case CurveKind::intensity: return "intensity";
    }
    return "?";
}

CurveKind curve_kind_from_string(std::string_view s) {
    for (auto k : {CurveKind::K, CurveKind::g, CurveKind::F, CurveKind::G, CurveKind::J, CurveKind::intensity})
        if (to_string(k) == s) return k;
    throw ValidationError("unknown summary function '" + std::string(s) + "'");
}

Eigen::ArrayXd make_rgrid(double lo, double hi, Index n) {
    if (n < 2 || !(hi > lo) || !(lo >= 0.0)) throw ValidationError("r-grid needs 0 <= lo < hi and n >= 2");
    return Eigen::ArrayXd::LinSpaced(n, lo, hi);
}

Eigen::ArrayXd default_rgrid(const LinearNetwork& net) { return make_rgrid(0.0, 0.2 * net.total_length(), 512); }

namespace {

void check_grid(const Eigen::ArrayXd& r) {
    for (Index i = 0; i < r.size(); ++i) {
        if (!(r[i] >= 0.0)) throw ValidationError("r-grid values must be nonnegative");
        if (i > 0 && !(r[i] > r[i - 1])) throw ValidationError("r-grid must be strictly increasing");
    }
}

SummaryCurve blank_curve(CurveKind kind, const Eigen::ArrayXd& r) {
    SummaryCurve c;
    c.kind = kind;
    c.r = r;
    c.value = Eigen::ArrayXd::Zero(r.size());
    c.defined = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(r.size(), true);
    return c;
}

} // namespace

// ---------------------------------------------------------------------------

IntensityModel fit_intensity_mle(const PointPattern& x) {
    const auto& net = x.network();
    const double lm = net.branch_length(Branch::main), ls = net.branch_length(Branch::side);
    if (lm <= 0.0 || ls <= 0.0) throw ValidationError("intensity MLE needs both main and side branches");
    return {static_cast<double>(x.count(Branch::main)) / lm, static_cast<double>(x.count(Branch::side)) / ls};
}

double mean_intensity(const LinearNetwork& net, const IntensityFn& rho) {
    double acc = 0.0;
    for (Index e = 0; e < net.edge_count(); ++e) acc += rho({e, 0.5 * net.length(e)}) * net.length(e);
    return acc / net.total_length();
}

// ---------------------------------------------------------------------------

double KernelIntensity::integral() const {
    double total = 0.0;
    for (std::size_t e = 0; e < values.size(); ++e) {
        const auto& x = offsets[e];
        const auto& v = values[e];
        for (Index i = 0; i + 1 < x.size(); ++i) total += 0.5 * (x[i + 1] - x[i]) * (v[i] + v[i + 1]);
    }
    return total;
}

double KernelIntensity::at(const NetworkPoint& p) const {
    const auto& x = offsets.at(static_cast<std::size_t>(p.edge));
    const auto& v = values[static_cast<std::size_t>(p.edge)];
    const Index n = x.size() - 1;
    const double h = x[n] / static_cast<double>(n);
    const Index i = std::min<Index>(static_cast<Index>(p.offset / h), n - 1);
    const double t = (p.offset - x[i]) / h;
    return (1.0 - t) * v[i] + t * v[i + 1];
}

KernelIntensity kernel_intensity(const PointPattern& x, double bandwidth, std::optional<double> spacing,
                                 int time_steps) {
    if (!(bandwidth > 0.0)) throw ValidationError("bandwidth must be positive");
    const double h_target = spacing.value_or(bandwidth / 10.0);
    if (!(h_target > 0.0)) throw ValidationError("spacing must be positive");
    if (h_target >= bandwidth) throw ValidationError("spacing must be smaller than the bandwidth");
    if (time_steps < 1) throw ValidationError("time_steps must be positive");
    const auto& net = x.network();

    // Node numbering: vertices first, then interior nodes edge by edge.
    std::vector<std::vector<Index>> nodes(static_cast<std::size_t>(net.edge_count()));
    std::vector<double> step(nodes.size());
    Index next = net.vertex_count();
    for (Index e = 0; e < net.edge_count(); ++e) {
        const auto cells = std::max<Index>(1, static_cast<Index>(std::ceil(net.length(e) / h_target - 1e-9)));
        step[e] = net.length(e) / static_cast<double>(cells);
        auto& ids = nodes[e];
        ids.push_back(net.tail(e));
        for (Index j = 1; j < cells; ++j) ids.push_back(next++);
        ids.push_back(net.head(e));
    }
    const Index n = next;

    std::vector<Eigen::Triplet<double>> stiff;
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
    for (std::size_t e = 0; e < nodes.size(); ++e) {
        const double h = step[e];
        for (std::size_t j = 0; j + 1 < nodes[e].size(); ++j) {
            const Index a = nodes[e][j], b = nodes[e][j + 1];
            stiff.emplace_back(a, a, 1.0 / h);
            stiff.emplace_back(b, b, 1.0 / h);
            stiff.emplace_back(a, b, -1.0 / h);
            stiff.emplace_back(b, a, -1.0 / h);
            mass[a] += 0.5 * h;
            mass[b] += 0.5 * h;
        }
    }

    // Unit mass per point, split linearly between the two nearest nodes.
    Eigen::VectorXd load = Eigen::VectorXd::Zero(n);
    for (const auto& p : x.points()) {
        const auto& ids = nodes[static_cast<std::size_t>(p.edge)];
        const double h = step[p.edge];
        const auto cells = static_cast<Index>(ids.size()) - 1;
        const Index i = std::min<Index>(static_cast<Index>(p.offset / h), cells - 1);
        const double t = p.offset / h - static_cast<double>(i);
        load[ids[i]] += 1.0 - t;
        load[ids[i + 1]] += t;
    }

    Eigen::VectorXd u = load.cwiseQuotient(mass);
    if (!x.empty()) {
        const double dt = 0.5 * bandwidth * bandwidth / time_steps;
        Eigen::SparseMatrix<double> a(n, n);
        a.setFromTriplets(stiff.begin(), stiff.end());
        a *= dt;
        for (Index i = 0; i < n; ++i) a.coeffRef(i, i) += mass[i];
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
        if (solver.info() != Eigen::Success) throw NumericalError("diffusion system factorization failed");
        for (int s = 0; s < time_steps; ++s) {
            const Eigen::VectorXd rhs = mass.cwiseProduct(u);
            u = solver.solve(rhs);
        }
    }

    KernelIntensity out;
    out.bandwidth = bandwidth;
    out.spacing = h_target;
    for (std::size_t e = 0; e < nodes.size(); ++e) {
        const auto m = static_cast<Index>(nodes[e].size());
        Eigen::ArrayXd off(m), val(m);
        for (Index j = 0; j < m; ++j) {
            off[j] = step[e] * static_cast<double>(j);
            val[j] = u[nodes[e][j]];
        }
        off[m - 1] = net.length(static_cast<Index>(e));
        out.offsets.push_back(std::move(off));
        out.values.push_back(std::move(val));
    }
    return out;
}

// ---------------------------------------------------------------------------

PairWeights geometric_pair_weights(const PointPattern& x, const IntensityFn& rho) {
    const auto& net = x.network();
    const auto n = static_cast<Index>(x.size());
    std::vector<double> intensity(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        intensity[i] = rho(x[i]);
        if (!(intensity[i] > 0.0)) throw ValidationError("intensity must be positive at every data point");
    }
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(static_cast<std::size_t>(n * (n - 1)));
    for (Index i = 0; i < n; ++i) {
        const SphereCounter sphere(net, x[i]);
        for (Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = net.distance(x[i], x[j]);
            const int m = sphere.count(d);
            if (m <= 0) throw NumericalError("zero sphere count at a realized distance");
            pairs.emplace_back(d, 1.0 / (intensity[i] * intensity[j] * m));
        }
    }
    std::sort(pairs.begin(), pairs.end());
    PairWeights out;
    out.distance.resize(static_cast<Index>(pairs.size()));
    out.weight.resize(static_cast<Index>(pairs.size()));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        out.distance[static_cast<Index>(k)] = pairs[k].first;
        out.weight[static_cast<Index>(k)] = pairs[k].second;
    }
    return out;
}

SummaryCurve K_hat(const PointPattern& x, const IntensityFn& rho, const Eigen::ArrayXd& rgrid) {
    check_grid(rgrid);
    SummaryCurve c = blank_curve(CurveKind::K, rgrid);
    if (x.size() < 2) return c;
    const PairWeights pw = geometric_pair_weights(x, rho);
    const double total = x.network().total_length();
    double acc = 0.0;
    Index k = 0;
    for (Index i = 0; i < rgrid.size(); ++i) {
        while (k < pw.distance.size() && pw.distance[k] <= rgrid[i]) acc += pw.weight[k++];
        c.value[i] = acc / total;
    }
    return c;
}

double kernel_value(Kernel kernel, double x, double bandwidth) {
    const double u = x / bandwidth;
    if (std::abs(u) > 1.0) return 0.0;
    switch (kernel) {
    case Kernel::epanechnikov: return 0.75 * (1.0 - u * u) / bandwidth;
    case Kernel::uniform: return 0.5 / bandwidth;
    }
    return 0.0;
}

double default_pcf_bandwidth(const LinearNetwork& net, const IntensityFn& rho) {
    const double m = mean_intensity(net, rho);
    if (!(m > 0.0)) throw ValidationError("mean intensity must be positive for the default bandwidth");
    return 0.15 / std::sqrt(m);
}

SummaryCurve g_hat(const PointPattern& x, const IntensityFn& rho, const Eigen::ArrayXd& rgrid,
                   const GhatOptions& opts) {
    check_grid(rgrid);
    SummaryCurve c = blank_curve(CurveKind::g, rgrid);
    const double b = opts.bandwidth ? *opts.bandwidth : default_pcf_bandwidth(x.network(), rho);
    if (!(b > 0.0)) throw ValidationError("bandwidth must be positive");
    c.metadata["bandwidth"] = b;
    if (x.size() < 2) return c;
    const PairWeights pw = geometric_pair_weights(x, rho);
    const double total = x.network().total_length();
    const double* first = pw.distance.data();
    const double* last = first + pw.distance.size();
    for (Index i = 0; i < rgrid.size(); ++i) {
        const double r = rgrid[i];
        double acc = 0.0;
        const auto lo = std::lower_bound(first, last, r - b) - first;
        const auto hi = std::upper_bound(first, last, r + b) - first;
        for (auto k = lo; k < hi; ++k) acc += pw.weight[k] * kernel_value(opts.kernel, r - pw.distance[k], b);
        // Reflection at the origin: mass that the kernel would put below 0.
        if (r < b) {
            const auto hi0 = std::upper_bound(first, last, b - r) - first;
            for (Index k = 0; k < hi0; ++k) acc += pw.weight[k] * kernel_value(opts.kernel, r + pw.distance[k], b);
        }
        c.value[i] = acc / total;
    }
    return c;
}

// ---------------------------------------------------------------------------

FgjConfig FgjConfig::from_model(const LinearNetwork& net, const IntensityModel& m, double spacing) {
    FgjConfig cfg;
    cfg.rho = as_function(net, m);
    cfg.floor = m.floor(net);
    cfg.lattice_spacing = spacing;
    return cfg;
}

namespace {

/// For each origin, accumulates prod{1 - floor/rho(u) : u in x, d(u, v) <= r}
/// over origins v with leaf distance > r.
void accumulate_products(const PointPattern& x, const std::vector<double>& factor,
                         const std::vector<NetworkPoint>& origins, const std::vector<Index>& self,
                         const Eigen::ArrayXd& r, Eigen::ArrayXd& num, Eigen::ArrayXd& count) {
    const auto& net = x.network();
    std::vector<std::pair<double, double>> near;
    for (std::size_t o = 0; o < origins.size(); ++o) {
        const NetworkPoint& v = origins[o];
        const double reach = net.leaf_distance(v);
        near.clear();
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!self.empty() && static_cast<Index>(i) == self[o]) continue;
            near.emplace_back(net.distance(v, x[i]), factor[i]);
        }
        std::sort(near.begin(), near.end());
        double prod = 1.0;
        std::size_t k = 0;
        for (Index c = 0; c < r.size() && reach > r[c]; ++c) {
            while (k < near.size() && near[k].first <= r[c]) prod *= near[k++].second;
            num[c] += prod;
            count[c] += 1.0;
        }
    }
}

} // namespace

FgjCurves fgj_hat(const PointPattern& x, const FgjConfig& cfg, const Eigen::ArrayXd& rgrid) {
    check_grid(rgrid);
    if (!(cfg.floor > 0.0)) throw ValidationError("intensity floor must be positive");
    if (!cfg.rho) throw ValidationError("F/G/J need an intensity function");
    const auto& net = x.network();

    std::vector<double> factor(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double rho = cfg.rho(x[i]);
        if (!(rho >= cfg.floor)) throw ValidationError("intensity below the declared floor at a data point");
        factor[i] = 1.0 - cfg.floor / rho;
    }

    const Index n = rgrid.size();
    Eigen::ArrayXd f_num = Eigen::ArrayXd::Zero(n), f_cnt = Eigen::ArrayXd::Zero(n);
    Eigen::ArrayXd g_num = Eigen::ArrayXd::Zero(n), g_cnt = Eigen::ArrayXd::Zero(n);
    accumulate_products(x, factor, lattice(net, cfg.lattice_spacing), {}, rgrid, f_num, f_cnt);
    std::vector<Index> self(x.size());
    std::iota(self.begin(), self.end(), Index{0});
    accumulate_products(x, factor, x.points(), self, rgrid, g_num, g_cnt);

    FgjCurves out{blank_curve(CurveKind::F, rgrid), blank_curve(CurveKind::G, rgrid), blank_curve(CurveKind::J, rgrid)};
    for (Index c = 0; c < n; ++c) {
        const bool in_range = rgrid[c] >= cfg.r_min;
        const bool f_ok = in_range && f_cnt[c] > 0.0;
        const bool g_ok = in_range && g_cnt[c] > 0.0;
        const double f_empty = f_ok ? f_num[c] / f_cnt[c] : 0.0;  // 1 - F
        const double g_empty = g_ok ? g_num[c] / g_cnt[c] : 0.0;  // 1 - G
        out.F.defined[c] = f_ok;
        out.F.value[c] = f_ok ? 1.0 - f_empty : 0.0;
        out.G.defined[c] = g_ok;
        out.G.value[c] = g_ok ? 1.0 - g_empty : 0.0;
        out.J.defined[c] = f_ok && g_ok && f_empty > 0.0;
        out.J.value[c] = out.J.defined[c] ? g_empty / f_empty : 0.0;
    }
    for (auto* curve : {&out.F, &out.G, &out.J}) {
        curve->metadata["floor"] = cfg.floor;
        curve->metadata["lattice_spacing"] = cfg.lattice_spacing;
        curve->metadata["r_min"] = cfg.r_min;
    }
    return out;
}

} // namespace linnet
