#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <random>

#include "linnetcox/cli.hpp"
#include "linnetcox/errors.hpp"
#include "linnetcox/io.hpp"
#include "linnetcox/simulate.hpp"
#include "linnetcox/templates.hpp"

using namespace linnet;
namespace fs = std::filesystem;

namespace {

/// Fresh scratch directory, removed on scope exit.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) {
        dir = fs::temp_directory_path() / ("linnetcox_test_" + name + "_" + std::to_string(std::random_device{}()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

int run(std::vector<std::string> args) { return run_command(args); }

std::vector<fs::path> listing(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("doubles survive a text round trip") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, i % 20 - 10);
        CHECK(io::parse_double(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(std::isnan(io::parse_double(io::format_double(std::nan("")))));
    CHECK(io::parse_double(io::format_double(std::numeric_limits<double>::infinity())) ==
          std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(io::parse_double("1.5x"), ValidationError);
    CHECK_THROWS_AS(io::parse_double(""), ValidationError);
}

TEST_CASE("networks round-trip through JSON") {
    TemplateOptions o;
    o.edges = 200;
    const LinearNetwork net = make_network(NetworkTemplate::random_tree, 3, o);
    const LinearNetwork back = io::network_from_json(io::network_to_json(net));
    REQUIRE(back.edge_count() == 200);
    CHECK(back.vertex_count() == 201);
    CHECK(back.is_tree());
    for (Index e = 0; e < net.edge_count(); ++e) {
        CHECK(back.length(e) == net.length(e));
        CHECK(back.length(e) > 0.0);
        CHECK(back.branch(e) == net.branch(e));
        CHECK(back.tail(e) == net.tail(e));
        CHECK(back.head(e) == net.head(e));
    }
    CHECK(io::network_to_json(back) == io::network_to_json(net));

    auto doc = io::network_to_json(net);
    doc["edges"][0]["branch"] = "axon";
    CHECK_THROWS_AS(io::network_from_json(doc), ValidationError);
    doc = io::network_to_json(net);
    doc["edges"][0]["length"] = -1.0;
    CHECK_THROWS_AS(io::network_from_json(doc), ValidationError);
}

TEST_CASE("patterns, curves and models round-trip") {
    const auto net = std::make_shared<const LinearNetwork>(make_network(NetworkTemplate::dendrite, 2));
    const PointPattern x = simulate_poisson(net, {0.3, 0.4}, 5);
    const PointPattern y = io::pattern_from_csv(net, io::pattern_to_csv(x));
    REQUIRE(y.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
    CHECK_THROWS_AS(io::pattern_from_csv(net, "edge,offset\n999,0.5\n"), ValidationError);
    CHECK_THROWS_AS(io::pattern_from_csv(net, "e,o\n0,0.5\n"), ValidationError);

    SummaryCurve c;
    c.kind = CurveKind::J;
    c.r = make_rgrid(0.0, 5.0, 6);
    c.value = c.r * 0.3;
    c.defined = Mask::Constant(6, true);
    c.defined[4] = false;
    const auto curves = io::curves_from_csv(io::curves_to_csv({c}));
    REQUIRE(curves.size() == 1);
    CHECK(curves[0].kind == CurveKind::J);
    CHECK((curves[0].r == c.r).all());
    CHECK((curves[0].defined == c.defined).all());
    CHECK(curves[0].value[3] == c.value[3]);

    const CoxModel cox{0.312, 0.463, 0.686, 0.037, 1};
    const NullModel back = io::model_from_json(io::model_to_json(cox));
    REQUIRE(std::holds_alternative<CoxModel>(back));
    CHECK(std::get<CoxModel>(back).beta == 0.037);
    CHECK(std::get<CoxModel>(back).rho_y_side == 0.463);
    const NullModel pois = io::model_from_json(io::model_to_json(IntensityModel{0.24, 0.356}));
    REQUIRE(std::holds_alternative<IntensityModel>(pois));
    CHECK(std::get<IntensityModel>(pois).rho_main == 0.24);
    CHECK_THROWS_AS(io::model_from_json(io::json{{"model", "hawkes"}}), ValidationError);
}

TEST_CASE("study designs from JSON") {
    CHECK(io::designs_from_json("reference").size() == 16);
    const auto d = io::designs_from_json(io::json::parse(
        R"([{"id": 3, "sigma2": 2.0, "beta": 0.2, "rho_y_main": 0.5, "rho_y_side": 0.6, "methods": ["mce-g", "cl2"]}])"));
    REQUIRE(d.size() == 1);
    CHECK(d[0].id == 3);
    CHECK(d[0].truth.sigma2 == 2.0);
    CHECK(d[0].methods.size() == 2);
}

TEST_CASE("atomic writes leave no temporary files") {
    Scratch s("atomic");
    io::write_atomic(s / "a.txt", "first");
    io::write_atomic(s / "a.txt", "second");
    CHECK(io::read_file(s / "a.txt") == "second");
    CHECK(listing(s.dir).size() == 1);
    CHECK_THROWS_AS(io::read_file(s / "missing.txt"), ValidationError);
}

TEST_CASE("make-network templates") {
    Scratch s("templates");
    REQUIRE(run({"make-network", "--template", "path", "--length", "10", "--out", s / "path.json"}) == 0);
    const auto path = io::load_network(s / "path.json");
    CHECK(path->vertex_count() == 2);
    CHECK(path->edge_count() == 1);
    CHECK(path->total_length() == 10.0);

    REQUIRE(run({"make-network", "--template", "dendrite", "--seed", "7", "--out", s / "d.json"}) == 0);
    const auto d = io::load_network(s / "d.json");
    CHECK(d->is_tree());
    CHECK(d->edge_count() == d->vertex_count() - 1);
    CHECK(d->total_length() >= 380.0);
    CHECK(d->total_length() <= 938.0);
    CHECK(d->branch_length(Branch::main) > 0.0);
    CHECK(d->branch_length(Branch::side) > 0.0);
    CHECK(fs::exists(s / "d.json.manifest.json"));

    REQUIRE(run({"make-network", "--template", "random-tree", "--edges", "200", "--out", s / "t.json"}) == 0);
    const auto t = io::load_network(s / "t.json");
    CHECK(t->edge_count() == 200);
    CHECK(t->is_tree());
    CHECK(io::network_to_json(*t) == io::json::parse(io::read_file(s / "t.json")));

    CHECK(run({"make-network", "--template", "lattice", "--out", s / "x.json"}) == 2);
    CHECK_FALSE(fs::exists(s / "x.json"));
}

TEST_CASE("invalid input exits with code 2 and writes nothing") {
    Scratch s("invalid");
    REQUIRE(run({"make-network", "--template", "dendrite", "--out", s / "net.json"}) == 0);
    const auto before = listing(s.dir);
    CHECK(run({"fit", "--net", s / "net.json", "--pattern", s / "nope.csv", "--out", s / "fit.json"}) == 2);
    CHECK(listing(s.dir) == before);
    io::write_atomic(s / "bad.json", "{not json");
    CHECK(run({"fit", "--net", s / "bad.json", "--pattern", s / "nope.csv", "--out", s / "fit.json"}) == 2);
    CHECK(run({"fit", "--bogus"}) == 2);
    CHECK(run({"--help"}) == 0);
    CHECK(run({"simulate-poisson", "--net", s / "net.json", "--rho-m", "-1", "--rho-s", "0.2", "--out", s / "p"}) ==
          2);
    CHECK_FALSE(fs::exists(s / "p"));
}

TEST_CASE("same command and seed give bitwise identical outputs") {
    Scratch s("determinism");
    REQUIRE(run({"make-network", "--template", "dendrite", "--seed", "3", "--out", s / "net.json"}) == 0);
    for (const char* dir : {"a", "b"})
        REQUIRE(run({"simulate-cox", "--net", s / "net.json", "--rho-ym", "0.8", "--rho-ys", "1.2", "--sigma2", "5",
                     "--beta", "0.1", "--reps", "3", "--seed", "11", "--pi-grid", "--out", s / dir}) == 0);
    for (const char* f : {"pattern_0001.csv", "pattern_0003.csv", "pi_0002.csv"})
        CHECK(io::read_file(s.dir / "a" / f) == io::read_file(s.dir / "b" / f));
    CHECK(io::read_file(s.dir / "a" / "pattern_0001.csv") != io::read_file(s.dir / "a" / "pattern_0002.csv"));

    REQUIRE(run({"fit", "--net", s / "net.json", "--pattern", (s.dir / "a" / "pattern_0001.csv").string(), "--out",
                 s / "fit.json"}) == 0);
    const std::string first = io::read_file(s / "fit.json");

    // Re-run from the recorded manifest.
    const auto manifest = io::json::parse(io::read_file(s / "fit.json.manifest.json"));
    CHECK(manifest.at("command") == "fit");
    CHECK(manifest.at("version") == kVersion);
    fs::remove(s / "fit.json");
    REQUIRE(run(manifest.at("argv").get<std::vector<std::string>>()) == 0);
    CHECK(io::read_file(s / "fit.json") == first);
}

TEST_CASE("environment variables override defaults") {
    Scratch s("env");
    REQUIRE(run({"make-network", "--template", "dendrite", "--seed", "42", "--out", s / "explicit.json"}) == 0);
    ::setenv("LINNETCOX_SEED", "42", 1);
    const int code = run({"make-network", "--template", "dendrite", "--out", s / "env.json"});
    ::unsetenv("LINNETCOX_SEED");
    REQUIRE(code == 0);
    CHECK(io::read_file(s / "env.json") == io::read_file(s / "explicit.json"));
    REQUIRE(run({"make-network", "--template", "dendrite", "--out", s / "default.json"}) == 0);
    CHECK(io::read_file(s / "default.json") != io::read_file(s / "explicit.json"));
}

TEST_CASE("fit, summaries and envelope commands produce their documented files") {
    Scratch s("pipeline");
    REQUIRE(run({"make-network", "--template", "dendrite", "--seed", "5", "--out", s / "net.json"}) == 0);
    REQUIRE(run({"simulate-poisson", "--net", s / "net.json", "--rho-m", "0.24", "--rho-s", "0.356", "--seed", "2",
                 "--out", s / "pp"}) == 0);
    const std::string pattern = (s.dir / "pp" / "pattern_0001.csv").string();
    CHECK(fs::exists(s.dir / "pp" / "manifest.json"));

    REQUIRE(run({"fit", "--net", s / "net.json", "--pattern", pattern, "--method", "poisson", "--out",
                 s / "pois.json"}) == 0);
    const NullModel m = io::model_from_json(io::json::parse(io::read_file(s / "pois.json")));
    CHECK(std::holds_alternative<IntensityModel>(m));

    REQUIRE(run({"summaries", "--net", s / "net.json", "--pattern", pattern, "--which", "K,F", "--rgrid", "0:20:21",
                 "--out", s / "curves.csv"}) == 0);
    const auto curves = io::curves_from_csv(io::read_file(s / "curves.csv"));
    REQUIRE(curves.size() == 2);
    CHECK(curves[0].kind == CurveKind::K);
    CHECK(curves[1].kind == CurveKind::F);
    CHECK(curves[0].size() == 21);

    REQUIRE(run({"envelope", "--net", s / "net.json", "--pattern", pattern, "--model", s / "pois.json", "--sims",
                 "19", "--seed", "4", "--out", s / "env.csv"}) == 0);
    const std::string csv = io::read_file(s / "env.csv");
    CHECK(csv.rfind("segment,r,data,lower,upper\n", 0) == 0);
    const auto side = io::json::parse(io::read_file(s / "env.json"));
    CHECK(side.at("p_liberal").get<double>() <= side.at("p_conservative").get<double>());
    CHECK(side.at("simulations") == 19);

    REQUIRE(run({"kernel-intensity", "--net", s / "net.json", "--pattern", pattern, "--bandwidth", "10", "--out",
                 s / "ki.csv"}) == 0);
    CHECK(io::read_file(s / "ki.csv").rfind("edge,offset,intensity\n", 0) == 0);
}

TEST_CASE("simstudy writes one row per replicate and method") {
    Scratch s("study");
    io::write_atomic(s / "design.json",
                     R"([{"id": 1, "sigma2": 5, "beta": 0.1, "rho_y_main": 0.8, "rho_y_side": 1.2}])");
    REQUIRE(run({"make-network", "--template", "dendrite", "--main-length", "120", "--side-length", "160", "--seed",
                 "1", "--out", s / "net.json"}) == 0);
    REQUIRE(run({"simstudy", "--design", s / "design.json", "--net", s / "net.json", "--reps", "2", "--seed", "3",
                 "--out", s / "study.csv"}) == 0);
    const std::string csv = io::read_file(s / "study.csv");
    CHECK(csv.rfind("run,replicate,method,sigma2_hat,beta_hat,converged\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(io::json::parse(io::read_file(s / "study.json")).at("summary").size() == 2);
}
