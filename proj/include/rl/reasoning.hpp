#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rl/training.hpp"

namespace rl {

// beta (q - sat) when sat <= q, alpha (exp(q - sat) - 1) above.
double elu_penalty(double sat, double q, double alpha, double beta);
Tensor elu_penalty(const Tensor& sat, double q, double alpha, double beta);

struct RestartOutcome {
  std::uint64_t seed = 0;
  double sat = 0.0;
  double phi = 0.0;
  // Truth of every 0-ary predicate after training.
  std::vector<std::pair<std::string, double>> atoms;
};

struct QueryAfterLearningResult {
  bool entailed = true;
  bool no_satisfying_grounding = false;  // no restart reached Sat >= q
  std::vector<RestartOutcome> restarts;
};

// Learns from `restarts` seeds (theory seed, seed + 1, ...) and checks phi on
// every run that satisfies the knowledge base to level q.
QueryAfterLearningResult reason_query_after_learning(const Theory& t, const Formula& phi, double q,
                                                     std::size_t restarts);

enum class Verdict { Entailed, EntailedVacuously, NotEntailed };
std::string to_string(Verdict v);

struct RefutationResult {
  Verdict verdict = Verdict::EntailedVacuously;
  double sat = 0.0;  // G*(K)
  double phi = 0.0;  // G*(phi)
  std::size_t steps = 0;
  std::optional<ParamStore> counterexample;
  std::vector<std::pair<std::string, double>> atoms;
  MetricsLog trace;  // step, sat, phi, objective
};

// Gradient search for a grounding with Sat >= q and phi < q, minimising
// phi + elu_penalty(Sat). Restarts reuse the theory seed plus the restart index.
RefutationResult reason_refute(const Theory& t, const Formula& phi, const RefutationConfig& cfg);

// Truth values of the 0-ary predicates under the current parameters.
std::vector<std::pair<std::string, double>> propositional_truths(const Theory& t);

}  // namespace rl
