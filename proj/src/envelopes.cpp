#include "linnetcox/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linnetcox/errors.hpp"
#include "linnetcox/parallel.hpp"
#include "linnetcox/random.hpp"
#include "linnetcox/simulate.hpp"

namespace linnet {

LabelledCurve concat_test_function(const std::vector<SummaryCurve>& curves, double r_min) {
    if (curves.empty()) throw ValidationError("no curves to concatenate");
    LabelledCurve out;
    std::vector<double> r, value;
    std::vector<bool> defined;
    for (const auto& c : curves) {
        for (Index i = 0; i < c.size(); ++i) {
            if (c.r[i] < r_min) continue;
            out.segment.emplace_back(to_string(c.kind));
            r.push_back(c.r[i]);
            value.push_back(c.value[i]);
            defined.push_back(c.defined[i] && std::isfinite(c.value[i]));
        }
    }
    const auto n = static_cast<Index>(r.size());
    out.r = Eigen::Map<const Eigen::ArrayXd>(r.data(), n);
    out.value = Eigen::Map<const Eigen::ArrayXd>(value.data(), n);
    out.defined.resize(n);
    for (Index i = 0; i < n; ++i) out.defined[i] = defined[static_cast<std::size_t>(i)];
    if (!out.defined.any()) throw ValidationError("test function has no defined cells");
    return out;
}

CurveSet make_curve_set(const LabelledCurve& data, const std::vector<LabelledCurve>& sims) {
    if (sims.empty()) throw ValidationError("an envelope needs at least one simulation");
    CurveSet set;
    set.segment = data.segment;
    set.r = data.r;
    set.data = data.value;
    set.defined = data.defined;
    set.sims.resize(data.size(), static_cast<Index>(sims.size()));
    for (std::size_t j = 0; j < sims.size(); ++j) {
        const auto& s = sims[j];
        if (s.size() != data.size() || !(s.r == data.r).all() || s.segment != data.segment)
            throw ValidationError("simulation curve grid differs from the data grid");
        set.sims.col(static_cast<Index>(j)) = s.value.matrix();
        set.defined = set.defined && s.defined;
    }
    return set;
}

EnvelopeResult rank_envelope(const CurveSet& set, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    const Index s = set.simulations();
    if (s < 1) throw ValidationError("an envelope needs at least one simulation");
    if (set.data.size() != set.cells() || set.sims.rows() != set.cells() || set.defined.size() != set.cells())
        throw ValidationError("curve set dimensions disagree");
    if (!set.defined.any()) throw ValidationError("every cell of the curve set is masked");

    const Index n = s + 1;
    auto value = [&](Index cell, Index j) { return j == 0 ? set.data[cell] : set.sims(cell, j - 1); };

    Eigen::ArrayXi ranks = Eigen::ArrayXi::Constant(n, static_cast<int>(n));
    std::vector<double> sorted(static_cast<std::size_t>(n));
    for (Index c = 0; c < set.cells(); ++c) {
        if (!set.defined[c]) continue;
        for (Index j = 0; j < n; ++j) sorted[static_cast<std::size_t>(j)] = value(c, j);
        std::sort(sorted.begin(), sorted.end());
        for (Index j = 0; j < n; ++j) {
            const double v = value(c, j);
            const auto below = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
            const auto above = sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), v);
            ranks[j] = std::min(ranks[j], static_cast<int>(std::min(below, above)));
        }
    }

    EnvelopeResult out;
    out.alpha = alpha;
    out.ranks = ranks;
    out.low_resolution = static_cast<double>(s) < 1.0 / alpha - 1.0;
    const int r0 = ranks[0];
    out.p_conservative = static_cast<double>((ranks <= r0).count()) / static_cast<double>(n);
    out.p_liberal = static_cast<double>((ranks < r0).count() + 1) / static_cast<double>(n);

    // #{j : R_j < k} is nondecreasing in k, so scan upwards.
    const double budget = alpha * static_cast<double>(n);
    int k = 1;
    while (k <= n && static_cast<double>((ranks < k + 1).count()) <= budget) ++k;
    out.critical_rank = k;

    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    out.lower = Eigen::ArrayXd::Constant(set.cells(), nan);
    out.upper = Eigen::ArrayXd::Constant(set.cells(), nan);
    for (Index c = 0; c < set.cells(); ++c) {
        if (!set.defined[c]) continue;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (Index j = 0; j < n; ++j) {
            if (ranks[j] < k) continue;
            const double v = j == 0 ? set.data[c] : set.sims(c, j - 1);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (lo <= hi) {
            out.lower[c] = lo;
            out.upper[c] = hi;
        }
    }
    return out;
}

std::string_view to_string(EnvelopeTest t) { return t == EnvelopeTest::K ? "K" : "FGJ"; }

EnvelopeTest envelope_test_from_string(std::string_view s) {
    if (s == "K") return EnvelopeTest::K;
    if (s == "FGJ") return EnvelopeTest::FGJ;
    throw ValidationError("unknown envelope test '" + std::string(s) + "' (expected K or FGJ)");
}

IntensityModel null_intensity(const NullModel& model) {
    if (const auto* p = std::get_if<IntensityModel>(&model)) return *p;
    return std::get<CoxModel>(model).intensity();
}

void EnvelopeConfig::validate() const {
    if (simulations < 1) throw ValidationError("at least one simulation is required");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    if (!(r_min >= 0.0)) throw ValidationError("rmin must be nonnegative");
    if (!(lattice_spacing > 0.0)) throw ValidationError("lattice spacing must be positive");
}

LabelledCurve test_statistic(const PointPattern& x, const IntensityModel& rho, const EnvelopeConfig& cfg,
                             const Eigen::ArrayXd& rgrid) {
    const auto& net = x.network();
    if (cfg.test == EnvelopeTest::K) {
        SummaryCurve k = K_hat(x, as_function(net, rho), rgrid);
        k.value -= k.r;
        return concat_test_function({k}, cfg.r_min);
    }
    FgjConfig fc = FgjConfig::from_model(net, rho, cfg.lattice_spacing);
    const FgjCurves c = fgj_hat(x, fc, rgrid);
    return concat_test_function({c.F, c.G, c.J}, cfg.r_min);
}

EnvelopeRun envelope_pipeline(const PointPattern& data, const NullModel& model, const EnvelopeConfig& cfg) {
    cfg.validate();
    const NetworkPtr& net = data.network_ptr();
    if (const auto* cox = std::get_if<CoxModel>(&model)) cox->validate();
    else std::get<IntensityModel>(model).validate();

    const IntensityModel rho = null_intensity(model);
    const Eigen::ArrayXd rgrid = cfg.rgrid ? *cfg.rgrid : make_rgrid(0.0, 0.1 * net->total_length(), 128);
    const LabelledCurve observed = test_statistic(data, rho, cfg, rgrid);

    std::vector<LabelledCurve> sims(static_cast<std::size_t>(cfg.simulations));
    parallel_for(sims.size(), cfg.threads, [&](std::size_t j) {
        const std::uint64_t s = derive_seed(cfg.seed, j + 1);
        const PointPattern y = std::holds_alternative<CoxModel>(model)
                                   ? simulate_cox(net, std::get<CoxModel>(model), {}, s).pattern
                                   : simulate_poisson(net, std::get<IntensityModel>(model), s);
        sims[j] = test_statistic(y, rho, cfg, rgrid);
    });

    EnvelopeRun run;
    run.curves = make_curve_set(observed, sims);
    run.result = rank_envelope(run.curves, cfg.alpha);
    return run;
}

} // namespace linnet
