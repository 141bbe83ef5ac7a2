#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rl/metrics.hpp"
#include "rl/theory.hpp"

namespace rl {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SatResult {
  Tensor sat;
  std::vector<Tensor> truths;  // one scalar per axiom
};

// Aggregates every axiom truth in ctx, honouring per-axiom overrides on top
// of ctx.cfg. Throws LogicError for a theory without axioms.
SatResult satisfiability(const Theory& t, EvalContext& ctx);
// Untracked Sat on the full data with the theory's operators.
double satisfiability_value(const Theory& t);
// Sum of |theta| or theta^2 over every slot; zero for Regularizer::None.
Tensor regularization(const Theory& t, ParamView& view);

// Quantifier exponents in effect at the start of epoch (0-based).
FuzzyConfig scheduled_config(const Theory& t, std::size_t epoch);

// Called after every epoch with the record about to be logged.
using EpochHook = std::function<void(std::size_t epoch, const Theory& t, MetricRecord& record)>;

struct LearnOptions {
  EpochHook on_epoch;
  // Also log an epoch-0 record evaluated on the full data before training.
  bool log_initial = true;
};

// Minibatch Adam on 1 - Sat + lambda R. Each record holds epoch, sat, loss,
// reg and the per-axiom truths of the last step in the epoch.
MetricsLog learn(Theory& t, const LearnOptions& opts = {});

enum class QueryKind { Truth, Value, GeneralizationTruth, GeneralizationValue };
std::string to_string(QueryKind k);

struct QueryOptions {
  // Unseen instances replacing a variable's grounding ([k, features...]).
  std::map<std::string, Tensor> unseen;
  std::optional<double> forall_p;
  std::optional<double> exists_p;
};

struct QueryResult {
  QueryKind kind = QueryKind::Truth;
  Tensor values;
  std::vector<std::string> axes;
};

// Never touches t.params.
QueryResult query_truth(const Theory& t, const Formula& f, const QueryOptions& opts = {});
QueryResult query_value(const Theory& t, const Term& term, const QueryOptions& opts = {});
// Parses text as a formula first and falls back to a term.
QueryResult query(const Theory& t, const std::string& text, const QueryOptions& opts = {});

// Stable fingerprint of every parameter value.
std::uint64_t params_hash(const ParamStore& store);

}  // namespace rl
