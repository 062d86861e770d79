#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "linnetcox/model.hpp"
#include "linnetcox/network.hpp"
#include "linnetcox/summaries.hpp"

namespace linnet {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// One curve on a possibly concatenated grid; cell i belongs to segment[i].
struct LabelledCurve {
    std::vector<std::string> segment;
    Eigen::ArrayXd r;
    Eigen::ArrayXd value;
    Mask defined;
    Index size() const { return r.size(); }
};

/// Concatenates curves in order, dropping cells with r < r_min.
LabelledCurve concat_test_function(const std::vector<SummaryCurve>& curves, double r_min = 0.0);

/// Data curve plus s simulation curves (columns of sims). A cell enters the
/// ranking only when it is defined for every curve.
struct CurveSet {
    std::vector<std::string> segment;
    Eigen::ArrayXd r;
    Eigen::ArrayXd data;
    Eigen::MatrixXd sims;  // cells x s
    Mask defined;

    Index cells() const { return r.size(); }
    Index simulations() const { return sims.cols(); }
};

/// Builds a set from labelled curves sharing one grid; masks are intersected.
CurveSet make_curve_set(const LabelledCurve& data, const std::vector<LabelledCurve>& sims);

struct EnvelopeResult {
    Eigen::ArrayXd lower;  // NaN in masked cells
    Eigen::ArrayXd upper;
    double alpha = 0.05;
    double p_liberal = 1.0;
    double p_conservative = 1.0;
    Eigen::ArrayXi ranks;  // extreme rank per curve, data first
    int critical_rank = 1;
    bool low_resolution = false;  // s < 1/alpha - 1
};

/// Global extreme-rank envelope. Ranks are two-sided and tied values share a
/// rank; every curve, the data included, counts towards each rank.
EnvelopeResult rank_envelope(const CurveSet& set, double alpha);

enum class EnvelopeTest { K, FGJ };
std::string_view to_string(EnvelopeTest t);
EnvelopeTest envelope_test_from_string(std::string_view s);

/// Null model: inhomogeneous Poisson or thinned Cox.
using NullModel = std::variant<IntensityModel, CoxModel>;

/// Intensity of X under the null model.
IntensityModel null_intensity(const NullModel& model);

struct EnvelopeConfig {
    EnvelopeTest test = EnvelopeTest::K;
    Index simulations = 2499;
    double alpha = 0.05;
    double r_min = 1.0;
    std::optional<Eigen::ArrayXd> rgrid;  // 0 .. 0.1 |L|, 128 cells when unset
    double lattice_spacing = 0.5;         // F-hat test lattice
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const;
};

struct EnvelopeRun {
    CurveSet curves;
    EnvelopeResult result;
};

/// Test statistic for one pattern: K-hat(r) - r, or the F, G, J concatenation.
/// Every pattern uses the null model's intensity as plug-in.
LabelledCurve test_statistic(const PointPattern& x, const IntensityModel& rho, const EnvelopeConfig& cfg,
                             const Eigen::ArrayXd& rgrid);

EnvelopeRun envelope_pipeline(const PointPattern& data, const NullModel& model, const EnvelopeConfig& cfg);

} // namespace linnet
