#pragma once

// Config-driven experiment runner behind the command line tool.
//
// A config is one JSON document:
//
//   {
//     "out_dir": "reports",          optional, default "reports"
//     "seed": 42,                     optional, default 42
//     "float_tol": 1e-12,             optional, default 1e-12
//     "surfaces": [ { "id": "bowl", "kind": "graph-patch", "params": {...} } ],
//     "experiments": [ { "name": "...", "kind": "...", ... } ]
//   }
//
// Every experiment writes <out_dir>/<name>.json plus one CSV per ladder,
// and the run writes summary.json and summary.csv. Reports carry no
// timestamps or host data, so equal inputs give byte-identical files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curvflux/report.hpp"

namespace curvflux::experiment {

using report::Json;

inline constexpr const char* kVersion = "1.0.0";

/// Command-line values that take precedence over the config.
struct Overrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<int>> ladder;
  std::optional<double> float_tol;
};

struct ParamSchema {
  std::string name;
  std::string type;  // "int", "number", "number[]", "terms"
  Json default_value;
  std::string description;
};

struct CatalogEntry {
  std::string id;
  std::string category;  // "surface", "weight", "field", "test-field", "experiment"
  std::string description;
  std::vector<ParamSchema> params;
  bool config_defined = false;
};

/// Built-in surfaces, weights, conformal fields, test fields and experiment
/// kinds, plus surfaces declared in the config's "surfaces" array.
class Catalog {
 public:
  Catalog();
  /// Adds config-declared surfaces; throws ConfigError on bad entries.
  void add_config_surfaces(const Json& surfaces);

  const std::vector<CatalogEntry>& entries() const { return entries_; }
  const CatalogEntry* find(const std::string& category, const std::string& id) const;
  /// Builtin kind behind a surface id (itself for builtins).
  std::string surface_kind(const std::string& id) const;
  /// Parameters merged as: schema defaults, config surface params, then `params`.
  Json surface_params(const std::string& id, const Json& params) const;

  std::string text() const;
  Json json() const;

 private:
  std::vector<CatalogEntry> entries_;
  std::map<std::string, std::pair<std::string, Json>> declared_;  // id -> (kind, params)
};

struct Config {
  Json raw;
  std::filesystem::path out_dir = "reports";
  std::uint64_t seed = 42;
  double float_tol = 1e-12;
  std::optional<std::vector<int>> ladder_override;
  Catalog catalog;
  std::vector<Json> experiments;  // validated experiment objects
};

/// Parse and validate; throws ConfigError with a diagnostic.
Config parse_config(const Json& doc, const Overrides& overrides = {});
Config load_config(const std::filesystem::path& path, const Overrides& overrides = {});

struct Assertion {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<=", ">=" or "=="
  bool passed = false;
};

struct Outcome {
  std::string name;
  std::string kind;
  std::string identity;  // id of the identity the experiment audits
  Json results;
  std::map<std::string, calculus::Ladder> ladders;
  std::vector<Assertion> assertions;

  bool passed() const;
  Json report() const;
};

/// Runs one validated experiment. Throws ConfigError or PreconditionError
/// when the requested combination is not admissible.
Outcome run_experiment(const Config& config, const Json& experiment);

struct RunResult {
  std::vector<Outcome> outcomes;
  bool passed() const;
  Json summary() const;
  std::string summary_csv() const;
};

RunResult run_all(const Config& config);
/// Writes every report, ladder CSV and the summary under config.out_dir.
void write_reports(const Config& config, const RunResult& result);

/// Whole `run` subcommand: 0 if all assertions pass, 1 if any fails, 2 on
/// configuration or precondition errors.
int run_command(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& out,
                std::ostream& err);

}  // namespace curvflux::experiment
