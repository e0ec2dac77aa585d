// Runs the acceptance config through the experiment layer and prints one
// PASS/FAIL line per criterion. Exit status is non-zero if any line fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "curvflux/experiment.hpp"

namespace ex = curvflux::experiment;
namespace fs = std::filesystem;

namespace {

struct Timed {
  ex::Outcome outcome;
  double seconds = 0.0;
};

bool assertions_pass(const ex::Outcome& o, const std::function<bool(const std::string&)>& selected) {
  bool any = false;
  for (const auto& a : o.assertions) {
    if (!selected(a.name)) continue;
    any = true;
    if (!a.passed) return false;
  }
  return any;
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Byte comparison of two report trees.
bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a)) files.push_back(e.path().filename());
  std::size_t count_b = std::distance(fs::directory_iterator(b), fs::directory_iterator());
  if (files.empty() || files.size() != count_b) return false;
  for (const auto& f : files)
    if (!fs::exists(b / f) || slurp(a / f) != slurp(b / f)) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path config_path = argc > 1 ? fs::path(argv[1]) : fs::path(CURVFLUX_SOURCE_DIR) / "configs/acceptance.json";
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::current_path() / "acceptance-reports";
  fs::remove_all(work);

  std::map<std::string, Timed> runs;
  auto run_once = [&](const fs::path& out) {
    ex::Overrides ov;
    ov.out_dir = out;
    const auto config = ex::load_config(config_path, ov);
    ex::RunResult result;
    for (const auto& e : config.experiments) {
      const auto t0 = std::chrono::steady_clock::now();
      result.outcomes.push_back(ex::run_experiment(config, e));
      const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      runs[result.outcomes.back().name] = {result.outcomes.back(), dt};
    }
    ex::write_reports(config, result);
  };
  run_once(work / "first");

  auto of_kind = [&](const std::string& kind) {
    std::vector<const Timed*> out;
    for (const auto& [name, t] : runs)
      if (t.outcome.kind == kind) out.push_back(&t);
    return out;
  };
  auto all_pass = [](const std::vector<const Timed*>& ts, const std::function<bool(const std::string&)>& sel) {
    if (ts.empty()) return false;
    for (const auto* t : ts)
      if (!assertions_pass(t->outcome, sel)) return false;
    return true;
  };
  auto seconds = [](const std::vector<const Timed*>& ts) {
    double s = 0.0;
    for (const auto* t : ts) s += t->seconds;
    return s;
  };
  auto every = [](const std::string&) { return true; };

  struct Line {
    std::string label;
    bool ok;
    std::string detail;
  };
  std::vector<Line> lines;
  char buf[160];

  const auto algebra = of_kind("algebra-suite");
  const bool alg = all_pass(algebra, [](const std::string& n) { return !contains(n, "coefficient-bridge"); });
  std::snprintf(buf, sizeof buf, "500 exact cases, zero failures, %.2f s (limit 10 s)", seconds(algebra));
  lines.push_back({"exact algebraic identity suite", alg && seconds(algebra) < 10.0, buf});
  lines.push_back({"coefficient bridge ratio is the rising product for n <= 10",
                   all_pass(algebra, [](const std::string& n) { return contains(n, "coefficient-bridge"); }),
                   "exact comparison"});

  const auto div = of_kind("divergence-audit");
  std::size_t cases = 0;
  for (const auto* t : div) cases += t->outcome.assertions.size() / 2;
  std::snprintf(buf, sizeof buf, "%zu cases, |residual| <= 1e-6, order >= 1.9, %.1f s (limit 60 s)", cases,
                seconds(div));
  lines.push_back({"divergence theorem engine", all_pass(div, every) && cases == 24 && seconds(div) < 60.0, buf});

  const auto nd = of_kind("newton-divergence");
  lines.push_back({"Newton divergence: finite differences vs recursion, k = 1 closed forms",
                   all_pass(nd, every) && nd.size() == 5, std::to_string(nd.size()) + " surfaces, sup error <= 1e-4"});

  const auto flux = of_kind("flux");
  bool printed_holds = false, corrected = false;
  for (const auto* t : flux) {
    const auto& o = t->outcome;
    if (assertions_pass(o, [](const std::string& n) { return contains(n, "residual-paper."); }))
      printed_holds = true;
    if (assertions_pass(o, [](const std::string& n) { return contains(n, "paper-minus-correction"); }) &&
        assertions_pass(o, [](const std::string& n) { return contains(n, "residual-corrected.relative"); }))
      corrected = true;
  }
  lines.push_back({"flux identity: printed form on the cylinder, correction term on the cap",
                   all_pass(flux, every) && printed_holds && corrected, "relative residuals <= 1e-5"});

  const auto vol = of_kind("volume");
  std::snprintf(buf, sizeof buf, "relative error <= 1e-5, %.2f s (limit 30 s)", seconds(vol));
  lines.push_back({"volume recovery on the cylinder patch", all_pass(vol, every) && seconds(vol) < 30.0, buf});

  lines.push_back({"Gaussian shrinker has vanishing weighted mean curvature", all_pass(of_kind("shrinker-pin"), every),
                   "analytic <= 1e-10, numerical frames <= 1e-6"});
  lines.push_back({"torus sigma_1 scan, certified roots, sphere example audit", all_pass(of_kind("torus"), every),
                   "scan <= 1e-12, |g| <= 1e-10"});

  run_once(work / "second");
  lines.push_back({"determinism: second run gives byte-identical reports", same_tree(work / "first", work / "second"),
                   "all report and ladder files compared"});

  bool ok = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::cout << (lines[i].ok ? "PASS" : "FAIL") << "  criterion " << i + 1 << ": " << lines[i].label << " ("
              << lines[i].detail << ")\n";
    ok = ok && lines[i].ok;
  }
  return ok ? 0 : 1;
}
