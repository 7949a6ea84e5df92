#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bjs/anosov.hpp"
#include "bjs/cocycle.hpp"
#include "bjs/construct.hpp"
#include "bjs/exponent.hpp"
#include "bjs/jsonio.hpp"
#include "bjs/model.hpp"

namespace bjs {

// Parsed run configuration.  The on-disk format is a documented key-value
// text file; every tolerance and depth has a default.
struct RunConfig {
  std::string text;  // verbatim config source, echoed into reports

  GroupModel model;

  CocycleSpec sigma;                  // construction cocycle
  std::vector<CocycleSpec> registered;  // cocycles that get fits and reports

  bool delta_auto = true;
  double delta = 0;           // explicit target
  double delta_fraction = 0.8;  // auto: delta = fraction * deltaHat(Gamma)

  int enumeration_depth = 10;
  size_t enumeration_cap = 30000000;
  int certification_depth = 6;
  int annulus_budget = -1;    // default: enumeration depth
  int adjuster_depth = 4;
  double safety = 1.5;

  std::vector<Word> explicit_seed;  // optional; skips the seed search
  std::vector<double> sequence_fractions;

  double metric_tolerance = 1e-9;
  double gap_tolerance = 0.05;
  double gap_margin = 0.02;
  size_t pair_budget = 200000;

  uint64_t rng_seed = 1;
  int threads = 1;
  std::string output_dir = "out";
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

struct RunReport {
  Json doc;
  int exit_code = 0;  // 0 ok, 2 certification FAIL, 3 seed-not-found, 4 config error
};

RunReport run_pipeline(const RunConfig& cfg);

enum class EmitFormat { JsonOnly, CsvOnly, Both };
std::vector<std::string> emit(const RunReport& report, const RunConfig& cfg, EmitFormat format);

// Re-runs the config embedded in a serialized report and compares: exact
// arithmetic must reproduce byte-identically, float numbers to 1e-9.
struct ReplayResult {
  bool match = false;
  std::string first_mismatch;
  RunReport fresh;
};
ReplayResult replay(const std::string& report_path);

}  // namespace bjs
