#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "curvflux/errors.hpp"
#include "curvflux/experiment.hpp"

namespace ex = curvflux::experiment;
namespace fs = std::filesystem;
using ex::Json;

namespace {

Json one(Json experiment) { return Json{{"experiments", Json::array({std::move(experiment)})}}; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::current_path() / "experiment-scratch" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_doc(const Json& doc, const fs::path& dir, std::string* err_out = nullptr) {
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << doc.dump();
  ex::Overrides ov;
  ov.out_dir = dir / "out";
  std::ostringstream out, err;
  const int code = ex::run_command(cfg, ov, out, err);
  if (err_out) *err_out = err.str();
  return code;
}

const Json kCylinderFlux = {{"name", "cyl"},        {"kind", "flux"},  {"surface", "cylinder-patch"},
                            {"field", "position"},  {"k", 1},          {"ladder", {8, 16, 32}},
                            {"printed", "holds"}};

}  // namespace

TEST_CASE("config validation rejects bad input") {
  CHECK_THROWS_AS(ex::parse_config(Json::object()), curvflux::ConfigError);
  CHECK_THROWS_AS(ex::parse_config(one({{"name", "a"}, {"kind", "teleport"}})), curvflux::ConfigError);
  CHECK_THROWS_AS(ex::parse_config(one({{"name", "a"}, {"kind", "flux"}, {"surface", "moebius"}})),
                  curvflux::ConfigError);
  CHECK_THROWS_AS(ex::parse_config(one({{"name", "a b"}, {"kind", "torus"}})), curvflux::ConfigError);
  CHECK_THROWS_AS(ex::parse_config(one({{"name", "a"}, {"kind", "torus"}, {"typo", 1}})), curvflux::ConfigError);
  Json short_ladder = kCylinderFlux;
  short_ladder["ladder"] = {8, 16};
  CHECK_THROWS_AS(ex::parse_config(one(short_ladder)), curvflux::ConfigError);
  Json bad_k = kCylinderFlux;
  bad_k["k"] = 2;
  CHECK_THROWS_AS(ex::parse_config(one(bad_k)), curvflux::ConfigError);
  Json bad_param = kCylinderFlux;
  bad_param["surface"] = {{"id", "cylinder-patch"}, {"params", {{"height", 2.0}}}};
  CHECK_THROWS_AS(ex::parse_config(one(bad_param)), curvflux::ConfigError);
  Json twice = one({{"name", "a"}, {"kind", "torus"}});
  twice["experiments"].push_back({{"name", "a"}, {"kind", "torus"}});
  CHECK_THROWS_AS(ex::parse_config(twice), curvflux::ConfigError);
  CHECK_NOTHROW(ex::parse_config(one(kCylinderFlux)));
}

TEST_CASE("overrides take precedence") {
  ex::Overrides ov;
  ov.seed = 7;
  ov.float_tol = 1e-9;
  ov.ladder = std::vector<int>{4, 8};
  CHECK_THROWS_AS(ex::parse_config(one(kCylinderFlux), ov), curvflux::ConfigError);
  ov.ladder = std::vector<int>{4, 8, 16};
  const auto c = ex::parse_config(one(kCylinderFlux), ov);
  CHECK(c.seed == 7);
  CHECK(c.float_tol == 1e-9);
  const auto o = ex::run_experiment(c, c.experiments[0]);
  CHECK(o.ladders.at("lhs").values.size() == 3);
  CHECK(o.results["config"]["ladder"] == Json({4, 8, 16}));
}

TEST_CASE("catalog lists builtins and config surfaces") {
  ex::Catalog cat;
  for (const char* id : {"sphere-cap", "cylinder-patch", "graph-patch", "hr-torus", "clifford-torus", "flat-disk"})
    CHECK(cat.find("surface", id) != nullptr);
  CHECK(cat.find("surface", "bowl") == nullptr);
  cat.add_config_surfaces(Json::array({{{"id", "bowl"}, {"kind", "graph-patch"}, {"params", {{"half_width", 0.3}}}}}));
  REQUIRE(cat.find("surface", "bowl") != nullptr);
  CHECK(cat.surface_kind("bowl") == "graph-patch");
  CHECK(cat.surface_params("bowl", Json::object())["half_width"] == 0.3);
  CHECK(cat.text().find("bowl [config]") != std::string::npos);
  const Json j = cat.json();
  bool listed = false;
  for (const auto& s : j["surfaces"]) listed = listed || (s["id"] == "bowl" && s["config_defined"] == true);
  CHECK(listed);
  CHECK_THROWS_AS(cat.add_config_surfaces(Json::array({{{"id", "bowl"}, {"kind", "graph-patch"}}})),
                  curvflux::ConfigError);
  CHECK_THROWS_AS(cat.add_config_surfaces(Json::array({{{"id", "knot"}, {"kind", "trefoil"}}})),
                  curvflux::ConfigError);
}

TEST_CASE("ladder csv format") {
  const auto l = curvflux::calculus::analyze_integral({0.5, 0.25, 0.125}, {1.0, 1.75, 1.9375});
  const std::string csv = curvflux::report::ladder_csv(l);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "level,h,value,error-estimate,order");
  std::getline(in, line);
  CHECK(line.rfind("0,0.5,1,", 0) == 0);
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line == "2,0.125,1.9375,0.0625,2");  // Richardson: 0.1875 / (2^2 - 1)
  CHECK(curvflux::report::number(std::nan("")).is_null());
}

TEST_CASE("algebra suite is seed-deterministic") {
  Json doc = one({{"name", "alg"}, {"kind", "algebra-suite"}, {"cases", 40}, {"max_n", 5}, {"coefficient_max_n", 4}});
  const auto c = ex::parse_config(doc);
  const auto a = ex::run_experiment(c, c.experiments[0]);
  const auto b = ex::run_experiment(c, c.experiments[0]);
  CHECK(a.passed());
  CHECK(a.report().dump() == b.report().dump());
  doc["seed"] = 43;
  const auto c2 = ex::parse_config(doc);
  const auto other = ex::run_experiment(c2, c2.experiments[0]);
  CHECK(other.passed());
  CHECK(other.results["identities"]["newton-trace-formula"]["checks"] !=
        a.results["identities"]["newton-trace-formula"]["checks"]);
}

TEST_CASE("exit codes") {
  CHECK(run_doc(one(kCylinderFlux), scratch("ok")) == 0);

  const auto dir = scratch("written");
  REQUIRE(run_doc(one(kCylinderFlux), dir) == 0);
  for (const char* f : {"cyl.json", "cyl.lhs.csv", "cyl.residual-paper.csv", "summary.json", "summary.csv"})
    CHECK(fs::exists(dir / "out" / f));

  // The printed identity does not close on the cap: a hard assertion fails.
  Json cap = kCylinderFlux;
  cap["surface"] = "sphere-cap";
  std::string err;
  CHECK(run_doc(one(cap), scratch("cap"), &err) == 1);
  CHECK(err.find("weighted-newton-flux-identity") != std::string::npos);
  CHECK(err.find("residual-paper.relative") != std::string::npos);

  // Non-constant H_1 violates the volume formula's precondition.
  Json vol = {{"name", "v"}, {"kind", "volume"}, {"surface", "graph-patch"}, {"ladder", {8, 16, 32}}};
  CHECK(run_doc(one(vol), scratch("vol"), &err) == 2);
  CHECK(err.find("precondition") != std::string::npos);

  CHECK(run_doc(one({{"name", "x"}, {"kind", "flux"}, {"surface", "moebius"}}), scratch("bad")) == 2);
  ex::Overrides ov;
  std::ostringstream out, e2;
  CHECK(ex::run_command(scratch("missing") / "nope.json", ov, out, e2) == 2);
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"acceptance.json", "cylinder-flux.json", "examples.json"})
    CHECK_NOTHROW(ex::load_config(fs::path(CURVFLUX_SOURCE_DIR) / "configs" / name));
}
