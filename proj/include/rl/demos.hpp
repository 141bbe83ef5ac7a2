#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rl/metrics.hpp"
#include "rl/theory.hpp"

namespace rl {

struct DemoOptions {
  std::uint64_t seed = 0;
  std::size_t runs = 1;
  std::optional<std::size_t> epochs;
  Settings overrides;  // from --config, applied after the theory's own config
  std::string out_dir = "rl_out";
  bool self_check = false;
};

struct DemoResult {
  std::string id;
  std::uint64_t seed = 0;
  std::string out_dir;
  MetricRecord summary;  // final metrics, the self-check reads these
  MetricsLog log;
  std::vector<std::string> report;  // human readable lines
};

struct Threshold {
  std::string metric;
  enum class Op { Ge, Gt, Le, Lt } op = Op::Ge;
  double value = 0.0;
};
std::string to_string(const Threshold& t);

std::vector<std::string> demo_ids();
bool is_demo(const std::string& id);
const std::vector<Threshold>& demo_thresholds(const std::string& id);
// Corpus file name of the demo's theory, e.g. "binary.rl".
std::string demo_theory_file(const std::string& id);

// One seed, outputs under opts.out_dir.
DemoResult run_demo(const std::string& id, const DemoOptions& opts);

struct CheckOutcome {
  bool passed = true;
  std::vector<std::string> failures;
};
CheckOutcome self_check(const std::string& id, const MetricRecord& summary);

// Runs opts.runs seeds (in parallel when more than one), writes summary.csv
// with mean and 95% interval, prints a report and returns the exit status.
int demo_main(const std::string& id, const DemoOptions& opts, std::ostream& out);

// Corpus and bundled data locations; RL_CORPUS_DIR / RL_DATA_DIR in the
// environment take precedence over the build-time paths.
std::string corpus_path(const std::string& file);
std::string data_path(const std::string& file);

}  // namespace rl
