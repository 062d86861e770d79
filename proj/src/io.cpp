#include "linnetcox/io.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "linnetcox/errors.hpp"

namespace linnet::io {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Non-empty data lines after the header, which must match `header`.
std::vector<std::vector<std::string_view>> csv_rows(std::string_view text, std::string_view header) {
    std::vector<std::vector<std::string_view>> rows;
    bool seen_header = false;
    std::size_t line_no = 0;
    const auto expected = split(header, ',');
    for (std::string_view rest = text; !rest.empty();) {
        const auto nl = rest.find('\n');
        const std::string_view line = trim(rest.substr(0, nl));
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        auto fields = split(line, ',');
        for (auto& f : fields) f = trim(f);
        if (!seen_header) {
            if (fields != expected)
                throw ValidationError("expected CSV header '" + std::string(header) + "'");
            seen_header = true;
            continue;
        }
        if (fields.size() != expected.size())
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected.size()) + " fields");
        rows.push_back(std::move(fields));
    }
    if (!seen_header) throw ValidationError("missing CSV header '" + std::string(header) + "'");
    return rows;
}

long parse_long(std::string_view s) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ValidationError("not an integer: '" + std::string(s) + "'");
    return v;
}

bool parse_bool(std::string_view s) {
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw ValidationError("not a boolean: '" + std::string(s) + "'");
}

template <typename T>
T get_field(const json& obj, const char* key) {
    if (!obj.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("field '") + key + "' has the wrong type");
    }
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

double parse_double(std::string_view s) {
    if (s == "nan" || s == "NaN" || s == "NA") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ValidationError("not a number: '" + std::string(s) + "'");
    return v;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::random_device rd;
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out.flush()) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ValidationError("write to '" + tmp.string() + "' failed");
        }
    }
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------

json network_to_json(const LinearNetwork& net) {
    json vertices = json::array(), edges = json::array();
    for (const auto& v : net.vertices()) {
        json o{{"id", v.id}};
        if (v.x) o["x"] = *v.x;
        if (v.y) o["y"] = *v.y;
        vertices.push_back(std::move(o));
    }
    for (const auto& e : net.edges())
        edges.push_back(
            {{"id", e.id}, {"from", e.from}, {"to", e.to}, {"length", e.length}, {"branch", to_string(e.branch)}});
    return {{"units", "um"}, {"vertices", vertices}, {"edges", edges}};
}

LinearNetwork network_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("network document must be an object");
    if (doc.contains("units") && doc["units"] != "um") throw ValidationError("network units must be \"um\"");
    const auto& vs = doc.contains("vertices") ? doc["vertices"] : throw ValidationError("missing 'vertices'");
    const auto& es = doc.contains("edges") ? doc["edges"] : throw ValidationError("missing 'edges'");
    if (!vs.is_array() || !es.is_array()) throw ValidationError("'vertices' and 'edges' must be arrays");
    std::vector<VertexRecord> vertices;
    for (const auto& v : vs) {
        VertexRecord r;
        r.id = get_field<long>(v, "id");
        if (v.contains("x")) r.x = get_field<double>(v, "x");
        if (v.contains("y")) r.y = get_field<double>(v, "y");
        vertices.push_back(r);
    }
    std::vector<EdgeRecord> edges;
    for (const auto& e : es) {
        EdgeRecord r;
        r.id = get_field<long>(e, "id");
        r.from = get_field<long>(e, "from");
        r.to = get_field<long>(e, "to");
        r.length = get_field<double>(e, "length");
        r.branch = branch_from_string(get_field<std::string>(e, "branch"));
        edges.push_back(r);
    }
    return LinearNetwork(std::move(vertices), std::move(edges));
}

NetworkPtr load_network(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    return std::make_shared<const LinearNetwork>(network_from_json(doc));
}

void save_network(const fs::path& path, const LinearNetwork& net) {
    write_atomic(path, network_to_json(net).dump(2) + "\n");
}

std::string pattern_to_csv(const PointPattern& x) {
    std::string out = "edge,offset\n";
    const auto& net = x.network();
    for (const auto& p : x.points())
        out += std::to_string(net.edges()[static_cast<std::size_t>(p.edge)].id) + "," + format_double(p.offset) + "\n";
    return out;
}

PointPattern pattern_from_csv(const NetworkPtr& net, std::string_view text) {
    std::vector<NetworkPoint> pts;
    for (const auto& row : csv_rows(text, "edge,offset"))
        pts.push_back({net->edge_index(parse_long(row[0])), parse_double(row[1])});
    return PointPattern(net, std::move(pts));
}

PointPattern load_pattern(const NetworkPtr& net, const fs::path& path) {
    return pattern_from_csv(net, read_file(path));
}

void save_pattern(const fs::path& path, const PointPattern& x) { write_atomic(path, pattern_to_csv(x)); }

std::string curves_to_csv(const std::vector<SummaryCurve>& curves) {
    std::string out = "kind,r,value,defined\n";
    for (const auto& c : curves) {
        const std::string kind(to_string(c.kind));
        for (Index i = 0; i < c.size(); ++i)
            out += kind + "," + format_double(c.r[i]) + "," + format_double(c.value[i]) + "," +
                   (c.defined[i] ? "1" : "0") + "\n";
    }
    return out;
}

std::vector<SummaryCurve> curves_from_csv(std::string_view text) {
    std::vector<SummaryCurve> out;
    std::vector<std::vector<double>> r, v;
    std::vector<std::vector<bool>> d;
    for (const auto& row : csv_rows(text, "kind,r,value,defined")) {
        const CurveKind kind = curve_kind_from_string(row[0]);
        if (out.empty() || out.back().kind != kind) {
            out.push_back({});
            out.back().kind = kind;
            r.emplace_back();
            v.emplace_back();
            d.emplace_back();
        }
        r.back().push_back(parse_double(row[1]));
        v.back().push_back(parse_double(row[2]));
        d.back().push_back(parse_bool(row[3]));
    }
    for (std::size_t c = 0; c < out.size(); ++c) {
        const auto n = static_cast<Index>(r[c].size());
        out[c].r = Eigen::Map<Eigen::ArrayXd>(r[c].data(), n);
        out[c].value = Eigen::Map<Eigen::ArrayXd>(v[c].data(), n);
        out[c].defined.resize(n);
        for (Index i = 0; i < n; ++i) out[c].defined[i] = d[c][static_cast<std::size_t>(i)];
    }
    return out;
}

std::string retention_to_csv(const LinearNetwork& net, const std::vector<NetworkPoint>& sites,
                             const Eigen::VectorXd& pi) {
    std::string out = "edge,offset,pi\n";
    for (std::size_t i = 0; i < sites.size(); ++i)
        out += std::to_string(net.edges()[static_cast<std::size_t>(sites[i].edge)].id) + "," +
               format_double(sites[i].offset) + "," + format_double(pi[static_cast<Index>(i)]) + "\n";
    return out;
}

std::string envelope_to_csv(const CurveSet& curves, const EnvelopeResult& result) {
    std::string out = "segment,r,data,lower,upper\n";
    for (Index c = 0; c < curves.cells(); ++c)
        out += curves.segment[static_cast<std::size_t>(c)] + "," + format_double(curves.r[c]) + "," +
               format_double(curves.data[c]) + "," + format_double(result.lower[c]) + "," +
               format_double(result.upper[c]) + "\n";
    return out;
}

json envelope_summary(const EnvelopeResult& result) {
    return {{"p_liberal", result.p_liberal},
            {"p_conservative", result.p_conservative},
            {"alpha", result.alpha},
            {"data_rank", result.ranks[0]},
            {"critical_rank", result.critical_rank},
            {"simulations", result.ranks.size() - 1}};
}

std::string study_to_csv(const StudyResult& result) {
    std::string out = "run,replicate,method,sigma2_hat,beta_hat,converged\n";
    for (const auto& row : result.rows)
        out += std::to_string(row.run) + "," + std::to_string(row.replicate) + "," + std::string(to_string(row.method)) +
               "," + format_double(row.sigma2_hat) + "," + format_double(row.beta_hat) + "," +
               (row.converged ? "1" : "0") + "\n";
    return out;
}

json study_summary(const StudyResult& result) {
    json runs = json::array();
    for (const auto& s : result.summary) {
        runs.push_back({{"run", s.run},
                        {"method", to_string(s.method)},
                        {"rows", s.rows},
                        {"failures", s.failures},
                        {"sigma2_above_15", s.sigma2_above_cap},
                        {"beta_above_5", s.beta_above_cap},
                        {"median_sigma2", std::isfinite(s.median_sigma2) ? json(s.median_sigma2) : json()},
                        {"median_beta", std::isfinite(s.median_beta) ? json(s.median_beta) : json()}});
    }
    return {{"summary", runs}};
}

std::vector<RunDesign> designs_from_json(const json& doc) {
    if (doc.is_string() && doc == "reference") return reference_study_design();
    if (doc.is_object() && doc.contains("runs")) return designs_from_json(doc["runs"]);
    if (!doc.is_array()) throw ValidationError("design must be an array of runs or \"reference\"");
    std::vector<RunDesign> out;
    int next_id = 1;
    for (const auto& r : doc) {
        if (!r.is_object()) throw ValidationError("each run must be an object");
        RunDesign d;
        d.id = r.value("id", next_id);
        next_id = d.id + 1;
        d.truth.sigma2 = get_field<double>(r, "sigma2");
        d.truth.beta = get_field<double>(r, "beta");
        d.truth.rho_y_main = get_field<double>(r, "rho_y_main");
        d.truth.rho_y_side = get_field<double>(r, "rho_y_side");
        d.truth.k = r.value("k", 1);
        d.p_g = r.value("p_g", d.p_g);
        d.p_k = r.value("p_k", d.p_k);
        d.r_l = r.value("r_l", d.r_l);
        d.r_l_in_bandwidths = r.value("r_l_in_bandwidths", d.r_l_in_bandwidths);
        d.r_u = r.value("r_u", d.r_u);
        d.start_sigma2 = r.value("start_sigma2", d.start_sigma2);
        d.start_beta = r.value("start_beta", d.start_beta);
        if (r.contains("methods")) {
            d.methods.clear();
            for (const auto& m : r["methods"]) d.methods.push_back(method_from_string(m.get<std::string>()));
        }
        if (r.contains("cl2")) {
            const auto& c = r["cl2"];
            const std::string w = c.value("weight", std::string("adaptive-indicator"));
            if (w == "fixed") d.cl2.weight = WeightKind::fixed_range;
            else if (w == "adaptive-indicator") d.cl2.weight = WeightKind::adaptive_indicator;
            else if (w == "adaptive-smooth") d.cl2.weight = WeightKind::adaptive_smooth;
            else throw ValidationError("unknown cl2 weight '" + w + "'");
            d.cl2.r0 = c.value("r0", d.cl2.r0);
            d.cl2.epsilon = c.value("epsilon", d.cl2.epsilon);
            d.cl2.samples_per_pair = c.value("samples", d.cl2.samples_per_pair);
            d.cl2.seed = c.value("seed", d.cl2.seed);
            if (c.value("search", std::string("derivative-free")) == "grid") {
                d.cl2.strategy = SearchStrategy::grid;
                d.cl2.grid_n = c.value("grid_n", d.cl2.grid_n);
            }
        }
        d.truth.validate();
        out.push_back(d);
    }
    return out;
}

json model_to_json(const NullModel& model) {
    if (const auto* p = std::get_if<IntensityModel>(&model))
        return {{"model", "poisson"}, {"rho_main", p->rho_main}, {"rho_side", p->rho_side}};
    const auto& c = std::get<CoxModel>(model);
    const IntensityModel x = c.intensity();
    return {{"model", "cox"},     {"rho_y_main", c.rho_y_main}, {"rho_y_side", c.rho_y_side},
            {"sigma2", c.sigma2}, {"beta", c.beta},             {"k", c.k},
            {"rho_main", x.rho_main}, {"rho_side", x.rho_side}};
}

NullModel model_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("model document must be an object");
    const auto kind = get_field<std::string>(doc, "model");
    if (kind == "poisson") {
        IntensityModel m{get_field<double>(doc, "rho_main"), get_field<double>(doc, "rho_side")};
        m.validate();
        return m;
    }
    if (kind == "cox") {
        CoxModel m{get_field<double>(doc, "rho_y_main"), get_field<double>(doc, "rho_y_side"),
                   get_field<double>(doc, "sigma2"), get_field<double>(doc, "beta"), doc.value("k", 1)};
        m.validate();
        return m;
    }
    throw ValidationError("unknown model kind '" + kind + "'");
}

json fit_to_json(const FitResult& fit, std::string_view method) {
    json out = model_to_json(fit.model());
    out["rho_main"] = fit.intensity.rho_main;
    out["rho_side"] = fit.intensity.rho_side;
    out["method"] = method;
    out["objective"] = fit.objective;
    out["iterations"] = fit.iterations;
    out["converged"] = fit.converged;
    out["weakly_identified"] = fit.weakly_identified;
    return out;
}

} // namespace linnet::io
