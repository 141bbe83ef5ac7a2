#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rl/fuzzy.hpp"
#include "rl/grounding.hpp"
#include "rl/params.hpp"
#include "rl/parser.hpp"

namespace rl {

enum class Regularizer { None, L1, L2 };

struct Breakpoint {
  double epoch = 0.0;
  double p = 1.0;
};

// "0:1, 100:6"; epochs must be strictly increasing.
std::vector<Breakpoint> parse_schedule(std::string_view text);
// Step mode holds the last breakpoint at or before epoch; linear mode
// interpolates between neighbours. Empty schedules return fallback.
double schedule_value(const std::vector<Breakpoint>& s, double epoch, bool linear, double fallback);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  Regularizer reg = Regularizer::None;
  double lambda = 0.0;
  std::vector<Breakpoint> forall_schedule;
  std::vector<Breakpoint> exists_schedule;
  bool linear_schedule = false;
};

struct RefutationConfig {
  double q = 0.95;
  double alpha = 0.05;
  double beta = 10.0;
  double c = 2.0;  // hard penalty constant, only used by the decision rule
  std::size_t epochs = 2000;
  std::size_t restarts = 1;
  double lr = 0.01;
};

struct Axiom {
  std::string label;
  FormulaPtr formula;
  QuantifierOverrides overrides;
};

// Variables bound to the same file and filter share minibatch indices.
struct DataGroup {
  std::string key;
  std::size_t rows = 0;
  std::vector<std::string> vars;
};

using Settings = std::vector<std::pair<std::string, std::string>>;

struct Theory {
  GroundingEnv env;
  ParamStore params;
  FuzzyConfig fuzzy;
  TrainConfig train;
  RefutationConfig refute;
  std::size_t query_restarts = 10;
  bool strict_diag = false;
  double eq_alpha = 1.0;
  std::vector<Axiom> axioms;
  std::vector<DataGroup> groups;

  // Throws std::invalid_argument for unknown keys or bad values.
  void apply_setting(const std::string& key, const std::string& value);
  // Fresh parameters drawn from seed.
  void reinitialize(std::uint64_t seed);
  std::string axiom_label(std::size_t i) const;
  const DataGroup* group_of(const std::string& var) const;
};

struct BuildOptions {
  std::string data_dir;  // data statements resolve against this directory
  Settings overrides;    // applied after the theory's own config lines
  std::optional<std::uint64_t> seed;
};

Theory build_theory(const TheoryDoc& doc, const BuildOptions& opts = {});
// data_dir defaults to the file's directory.
Theory load_theory(const std::string& path, BuildOptions opts = {});
// Flat key = value lines; '#' starts a comment.
Settings read_settings_file(const std::string& path);

}  // namespace rl
