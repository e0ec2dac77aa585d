#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "curvflux/errors.hpp"
#include "curvflux/experiment.hpp"

namespace ex = curvflux::experiment;

namespace {

std::vector<int> parse_ladder(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Newton transformation audits"};
  app.require_subcommand(1);

  ex::Overrides ov;
  std::string out_dir, ladder;
  std::uint64_t seed = 0;
  double float_tol = 0.0;
  std::string config_path;

  auto* run = app.add_subcommand("run", "run the experiments in a config file");
  run->add_option("config", config_path, "JSON config")->required();
  run->add_option("--out-dir", out_dir, "report directory (overrides the config)");
  run->add_option("--seed", seed, "seed for the random property suites");
  run->add_option("--ladder", ladder, "comma-separated cells per axis, e.g. 32,64,128");
  run->add_option("--float-tol", float_tol, "tolerance of float mode against exact mode");

  bool as_json = false;
  std::string catalog_config;
  auto* catalog = app.add_subcommand("catalog", "list surfaces, weights, fields and experiment kinds");
  catalog->add_flag("--json", as_json, "machine-readable output");
  catalog->add_option("--config", catalog_config, "also list surfaces declared in this config");

  app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (app.got_subcommand("version")) {
    std::cout << "curvflux " << ex::kVersion << "\n";
    return 0;
  }

  if (app.got_subcommand("catalog")) {
    ex::Catalog cat;
    if (!catalog_config.empty()) {
      try {
        cat = ex::load_config(catalog_config).catalog;
      } catch (const curvflux::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
    }
    std::cout << (as_json ? curvflux::report::dump(cat.json()) : cat.text());
    return 0;
  }

  if (run->count("--out-dir")) ov.out_dir = out_dir;
  if (run->count("--seed")) ov.seed = seed;
  if (run->count("--float-tol")) ov.float_tol = float_tol;
  if (run->count("--ladder")) {
    try {
      ov.ladder = parse_ladder(ladder);
    } catch (const std::exception&) {
      std::cerr << "config error: --ladder expects comma-separated integers\n";
      return 2;
    }
  }
  return ex::run_command(config_path, ov, std::cout, std::cerr);
}
