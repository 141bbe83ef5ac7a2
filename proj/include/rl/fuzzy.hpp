#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rl/tensor.hpp"

namespace rl {

enum class TNorm { Min, Product, ProductStable, Lukasiewicz };
enum class TConorm { Max, ProbSum, ProbSumStable, Lukasiewicz };
enum class Implication { KleeneDienes, Goedel, Reichenbach, ReichenbachStable, Goguen, Lukasiewicz };

enum class AggregatorKind {
  Min,            // A_TM
  Max,            // A_SM
  Prod,           // A_TP
  ProbSum,        // A_SP
  LukAnd,         // A_TL
  LukOr,          // A_SL
  Mean,
  PMean,
  PMeanError,
  PMeanStable,
  PMeanErrorStable,
};

struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::PMeanErrorStable;
  double p = 2.0;

  bool operator==(const AggregatorSpec&) const = default;
};

// Per-axiom replacement of the quantifier exponents.
struct QuantifierOverrides {
  std::optional<double> forall_p;
  std::optional<double> exists_p;

  bool empty() const { return !forall_p && !exists_p; }
  bool operator==(const QuantifierOverrides&) const = default;
};

struct FuzzyConfig {
  TNorm conjunction = TNorm::ProductStable;
  TConorm disjunction = TConorm::ProbSumStable;
  Implication implication = Implication::ReichenbachStable;
  AggregatorSpec forall{AggregatorKind::PMeanErrorStable, 2.0};
  AggregatorSpec exists{AggregatorKind::PMeanStable, 2.0};
  AggregatorSpec sat{AggregatorKind::PMeanErrorStable, 2.0};
  double epsilon = 1e-4;

  // "stable-product" (the default), "product", "goedel", "lukasiewicz".
  static FuzzyConfig preset(std::string_view name);
  FuzzyConfig with_overrides(const QuantifierOverrides& o) const;

  // Applies one configuration key such as "and" or "forall" with a tag value.
  void set(std::string_view key, std::string_view value);
};

TNorm parse_tnorm(std::string_view tag);
TConorm parse_tconorm(std::string_view tag);
Implication parse_implication(std::string_view tag);
// "pmean_error_stable:p=2" style; p defaults to the given value.
AggregatorSpec parse_aggregator(std::string_view tag, double default_p = 2.0);
std::string to_string(TNorm t);
std::string to_string(TConorm s);
std::string to_string(Implication i);
std::string to_string(const AggregatorSpec& a);

// pi0(a) = (1-eps) a + eps, pi1(a) = (1-eps) a
Tensor pi0(const Tensor& a, double eps);
Tensor pi1(const Tensor& a, double eps);

Tensor negation(const Tensor& a);
Tensor conjunction(TNorm t, const Tensor& a, const Tensor& b, double eps);
Tensor disjunction(TConorm s, const Tensor& a, const Tensor& b, double eps);
Tensor implication(Implication i, const Tensor& a, const Tensor& b, double eps);
// T(I(a, b), I(b, a))
Tensor equivalence(const FuzzyConfig& cfg, const Tensor& a, const Tensor& b);

// Aggregates over the given axes.
Tensor aggregate(const AggregatorSpec& spec, const Tensor& values, std::vector<std::size_t> axes,
                 double eps);
// Over every axis of a truth vector.
Tensor aggregate(const AggregatorSpec& spec, const Tensor& values, double eps);
// Only cells with a nonzero mask take part; groups with no such cell yield
// empty_value. mask must have the shape of values and is never differentiated.
Tensor aggregate_masked(const AggregatorSpec& spec, const Tensor& values, const Tensor& mask,
                        std::vector<std::size_t> axes, double eps, double empty_value);

enum class ProblemExtent { None, EdgeOnly, Interior };
std::string to_string(ProblemExtent e);

struct GradientProblems {
  ProblemExtent single_passing = ProblemExtent::None;
  ProblemExtent vanishing = ProblemExtent::None;
  ProblemExtent exploding = ProblemExtent::None;

  bool operator==(const GradientProblems&) const = default;
};

struct DerivativeCell {
  std::vector<double> inputs;
  std::vector<double> partials;
  bool edge = false;
  bool single_passing = false;
  bool vanishing = false;
  bool exploding = false;
};

struct DerivativeProfile {
  std::string op;
  std::vector<DerivativeCell> cells;
  GradientProblems observed;
};

inline constexpr double kVanishingThreshold = 1e-6;
inline constexpr double kExplodingThreshold = 1e6;

// Operator ids: T_M T_P T_L S_M S_P S_L I_KD I_G I_R I_P I_Luk, T'_P S'_P
// I'_R, and aggregators A_TM A_TP A_TL A_SM A_SP A_SL A_pM A_pME A'_pM A'_pME.
// Binary ids take points of length 2; aggregator ids take any length.
std::vector<std::string> profiled_operators();
DerivativeProfile derivative_profile(const std::string& op, std::span<const std::vector<double>> grid,
                                     double eps = 1e-4, double p = 2.0);
// Grid on [0,1]^2 with steps of 0.1 plus points within 1e-8 of the edges.
std::vector<std::vector<double>> connective_grid();
// Interior vectors in (0,1)^n together with edge vectors built from 0 and 1.
std::vector<std::vector<double>> aggregator_grid(std::size_t n, std::size_t samples, unsigned seed);
// Reference classification; stable operators expect no problems.
GradientProblems expected_problems(const std::string& op);

}  // namespace rl
