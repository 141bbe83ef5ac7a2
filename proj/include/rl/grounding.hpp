#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rl/ast.hpp"
#include "rl/fuzzy.hpp"
#include "rl/mlp.hpp"
#include "rl/params.hpp"
#include "rl/random.hpp"
#include "rl/tensor.hpp"

namespace rl {

// values has one leading axis per free variable (labelled by axes), then
// feature_rank trailing feature axes.
struct GroundedValue {
  Tensor values;
  std::vector<std::string> axes;
  std::size_t feature_rank = 0;

  Shape grid_shape() const;
  Shape feature_shape() const;
  std::size_t axis_size(const std::string& axis) const;
  bool has_axis(const std::string& axis) const;
};

struct Grid {
  std::vector<std::string> axes;
  Shape sizes;

  std::size_t cells() const { return num_elements(sizes); }
};

// Union of axes in first-occurrence order; equal labels must have equal sizes.
Grid grid_union(std::span<const GroundedValue> values);
// Places v's variable axes in target order with length-1 axes for the rest.
Tensor align_to(const GroundedValue& v, const std::vector<std::string>& target);
// [grid sizes..., features...]
Tensor expand_to(const GroundedValue& v, const Grid& grid);
// [cells, flattened features]
Tensor rows_on(const GroundedValue& v, const Grid& grid);

struct EvalContext;

// Grounding of a function or predicate symbol.
class SymbolGrounding {
 public:
  virtual ~SymbolGrounding() = default;
  // Predicates return truth values with feature_rank 0.
  virtual GroundedValue apply(std::span<const GroundedValue> args, EvalContext& ctx) const = 0;
  virtual void init_params(ParamStore&, Rng&) const {}
  virtual std::string describe() const = 0;
};

using GroundingPtr = std::shared_ptr<const SymbolGrounding>;

// Arguments are concatenated per grid cell and fed through an MLP.
// output_features is empty for predicates (the single output is squeezed).
class MlpGrounding : public SymbolGrounding {
 public:
  MlpGrounding(std::string prefix, std::size_t input_width, MlpSpec spec, Shape output_features);
  GroundedValue apply(std::span<const GroundedValue> args, EvalContext& ctx) const override;
  void init_params(ParamStore& store, Rng& rng) const override;
  std::string describe() const override;
  const MlpSpec& spec() const { return spec_; }

 private:
  std::string prefix_;
  std::size_t input_width_;
  MlpSpec spec_;
  Shape output_features_;
};

// The MLP sees every argument but the last; its output vector is dotted with
// the last argument, a one-hot (or soft) selector or an integer class index.
class SelectMlpGrounding : public SymbolGrounding {
 public:
  SelectMlpGrounding(std::string prefix, std::size_t input_width, MlpSpec spec);
  GroundedValue apply(std::span<const GroundedValue> args, EvalContext& ctx) const override;
  void init_params(ParamStore& store, Rng& rng) const override;
  std::string describe() const override;
  const MlpSpec& spec() const { return spec_; }

 private:
  std::string prefix_;
  std::size_t input_width_;
  MlpSpec spec_;
};

// exp(-alpha * ||u - v||)
class SmoothEqualityGrounding : public SymbolGrounding {
 public:
  explicit SmoothEqualityGrounding(double alpha);
  GroundedValue apply(std::span<const GroundedValue> args, EvalContext& ctx) const override;
  std::string describe() const override;
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

// ||u - v|| as a one-element feature.
class DistanceGrounding : public SymbolGrounding {
 public:
  GroundedValue apply(std::span<const GroundedValue> args, EvalContext& ctx) const override;
  std::string describe() const override { return "distance"; }
};

// Propositional truth value, fixed or trainable within bounds.
class TruthGrounding : public SymbolGrounding {
 public:
  static std::shared_ptr<TruthGrounding> fixed(double value);
  static std::shared_ptr<TruthGrounding> trainable(std::string slot, double init, Bounds bounds);
  GroundedValue apply(std::span<const GroundedValue> args, EvalContext& ctx) const override;
  void init_params(ParamStore& store, Rng& rng) const override;
  std::string describe() const override;
  double init() const { return value_; }
  const std::string& slot() const { return slot_; }
  const Bounds& bounds() const { return bounds_; }

 private:
  double value_ = 0.0;
  std::string slot_;
  Bounds bounds_;
};

// Arbitrary per-cell function over concatenated argument rows [cells, width].
// The result has shape [cells, features...]; use empty features for predicates.
class CallbackGrounding : public SymbolGrounding {
 public:
  using Fn = std::function<Tensor(const Tensor& rows, ParamView& params)>;
  CallbackGrounding(Fn fn, Shape output_features, std::string name = "callback");
  GroundedValue apply(std::span<const GroundedValue> args, EvalContext& ctx) const override;
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  Shape output_features_;
  std::string name_;
};

struct ConstantGrounding {
  Tensor value;          // used when slot is empty
  std::string slot;      // trainable parameter name
  double init_lo = 0.0;  // uniform initialisation range of trainable constants
  double init_hi = 1.0;
};

struct VariableGrounding {
  Tensor values;                      // [instances, features...]
  std::vector<std::string> constants; // alternatively, a list of constants
};

class GroundingEnv {
 public:
  Signature signature;
  std::map<std::string, ConstantGrounding> constants;
  std::map<std::string, VariableGrounding> variables;
  std::map<std::string, GroundingPtr> functions;
  std::map<std::string, GroundingPtr> predicates;
  double eq_alpha = 1.0;

  void init_params(ParamStore& store, Rng& rng) const;
  // Throws LogicError for declared symbols without a grounding.
  void check_complete() const;
};

struct ScopedVariable {
  std::string axis;
  Tensor values;
};

struct EvalContext {
  EvalContext(const GroundingEnv& env, ParamView& params, FuzzyConfig cfg = {});

  const GroundingEnv* env;
  ParamView* params;
  FuzzyConfig cfg;
  bool training = false;
  Rng* rng = nullptr;
  // Replacement values for variables (minibatches, unseen data).
  const std::map<std::string, Tensor>* variable_values = nullptr;
  // Unequal Diag lengths are an error instead of a truncation warning.
  bool strict_diag = false;
  std::vector<std::string>* warnings = nullptr;
  std::map<std::string, ScopedVariable> scope;

  // Full instance tensor of a variable, ignoring quantifier scope.
  Tensor variable_values_of(const std::string& var) const;
  Tensor constant_value(const std::string& name) const;
};

GroundedValue ground_term(const Term& t, EvalContext& ctx);
GroundedValue ground_formula(const Formula& f, EvalContext& ctx);
// Truth value of a closed formula as a scalar tensor.
Tensor evaluate_closed(const Formula& f, EvalContext& ctx);
// 1/0 mask over the guard's variable axes. Never tracked.
GroundedValue ground_guard(const Guard& g, EvalContext& ctx);

GroundedValue quantify(const AggregatorSpec& spec, const GroundedValue& body,
                       const std::vector<std::string>& axes, double eps, double empty_value);
GroundedValue quantify_masked(const AggregatorSpec& spec, const GroundedValue& body,
                              const GroundedValue& mask, const std::vector<std::string>& axes,
                              double eps, double empty_value);

}  // namespace rl
