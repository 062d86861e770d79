#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "linnetcox/envelopes.hpp"
#include "linnetcox/estimation.hpp"
#include "linnetcox/network.hpp"
#include "linnetcox/summaries.hpp"

namespace linnet::io {

namespace fs = std::filesystem;
using nlohmann::json;

/// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

std::string read_file(const fs::path& path);

/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const fs::path& path, std::string_view content);

// Networks: {"units": "um", "vertices": [{id, x?, y?}], "edges": [{id, from, to, length, branch}]}
json network_to_json(const LinearNetwork& net);
LinearNetwork network_from_json(const json& doc);
NetworkPtr load_network(const fs::path& path);
void save_network(const fs::path& path, const LinearNetwork& net);

// Point patterns: CSV with header edge,offset (edge ids as in the network file).
std::string pattern_to_csv(const PointPattern& x);
PointPattern pattern_from_csv(const NetworkPtr& net, std::string_view text);
PointPattern load_pattern(const NetworkPtr& net, const fs::path& path);
void save_pattern(const fs::path& path, const PointPattern& x);

// Summary curves: CSV kind,r,value,defined.
std::string curves_to_csv(const std::vector<SummaryCurve>& curves);
std::vector<SummaryCurve> curves_from_csv(std::string_view text);

/// Retention field on grid sites: CSV edge,offset,pi.
std::string retention_to_csv(const LinearNetwork& net, const std::vector<NetworkPoint>& sites,
                             const Eigen::VectorXd& pi);

// Envelopes: CSV segment,r,data,lower,upper plus a JSON sidecar.
std::string envelope_to_csv(const CurveSet& curves, const EnvelopeResult& result);
json envelope_summary(const EnvelopeResult& result);

// Simulation study: CSV run,replicate,method,sigma2_hat,beta_hat,converged.
std::string study_to_csv(const StudyResult& result);
json study_summary(const StudyResult& result);

/// Run designs: an array of objects with the RunDesign field names, or the
/// string "reference" for the built-in sixteen-run design.
std::vector<RunDesign> designs_from_json(const json& doc);

// Fitted or specified models.
json model_to_json(const NullModel& model);
NullModel model_from_json(const json& doc);
json fit_to_json(const FitResult& fit, std::string_view method);

} // namespace linnet::io
