#include "rl/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rl/ops.hpp"

namespace rl {

Shape GroundedValue::grid_shape() const {
  const auto& s = values.shape();
  return Shape(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(axes.size()));
}

Shape GroundedValue::feature_shape() const {
  const auto& s = values.shape();
  return Shape(s.begin() + static_cast<std::ptrdiff_t>(axes.size()), s.end());
}

std::size_t GroundedValue::axis_size(const std::string& axis) const {
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] == axis) return values.dim(i);
  }
  throw ShapeError("no axis '" + axis + "'");
}

bool GroundedValue::has_axis(const std::string& axis) const {
  return std::find(axes.begin(), axes.end(), axis) != axes.end();
}

Grid grid_union(std::span<const GroundedValue> values) {
  Grid g;
  for (const auto& v : values) {
    if (v.values.rank() != v.axes.size() + v.feature_rank) {
      throw ShapeError("grounded value of shape " + to_string(v.values.shape()) + " does not match " +
                       std::to_string(v.axes.size()) + " axes and " +
                       std::to_string(v.feature_rank) + " feature axes");
    }
    for (std::size_t i = 0; i < v.axes.size(); ++i) {
      auto it = std::find(g.axes.begin(), g.axes.end(), v.axes[i]);
      if (it == g.axes.end()) {
        g.axes.push_back(v.axes[i]);
        g.sizes.push_back(v.values.dim(i));
      } else if (g.sizes[static_cast<std::size_t>(it - g.axes.begin())] != v.values.dim(i)) {
        throw ShapeError("axis '" + v.axes[i] + "' has inconsistent lengths");
      }
    }
  }
  return g;
}

Tensor align_to(const GroundedValue& v, const std::vector<std::string>& target) {
  const std::size_t r = v.axes.size();
  std::vector<std::size_t> pos(r);
  for (std::size_t i = 0; i < r; ++i) {
    auto it = std::find(target.begin(), target.end(), v.axes[i]);
    if (it == target.end()) throw ShapeError("axis '" + v.axes[i] + "' missing from target grid");
    pos[i] = static_cast<std::size_t>(it - target.begin());
  }
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pos[a] < pos[b]; });
  std::vector<std::size_t> perm = order;
  for (std::size_t j = 0; j < v.feature_rank; ++j) perm.push_back(r + j);
  Tensor t = permute(v.values, perm);
  Shape shape(target.size(), 1);
  for (std::size_t i = 0; i < r; ++i) shape[pos[i]] = v.values.dim(i);
  for (auto d : v.feature_shape()) shape.push_back(d);
  return reshape(t, shape);
}

Tensor expand_to(const GroundedValue& v, const Grid& grid) {
  Shape full = grid.sizes;
  for (auto d : v.feature_shape()) full.push_back(d);
  return broadcast_to(align_to(v, grid.axes), full);
}

Tensor rows_on(const GroundedValue& v, const Grid& grid) {
  return reshape(expand_to(v, grid), {grid.cells(), num_elements(v.feature_shape())});
}

namespace {

Tensor concat_rows(std::span<const GroundedValue> args, const Grid& g) {
  std::vector<Tensor> parts;
  parts.reserve(args.size());
  for (const auto& a : args) parts.push_back(rows_on(a, g));
  return parts.size() == 1 ? parts[0] : concat(parts, 1);
}

Shape with_features(Shape s, const Shape& features) {
  s.insert(s.end(), features.begin(), features.end());
  return s;
}

std::string describe_mlp(const MlpSpec& spec) {
  std::string s = "mlp(";
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(spec.layers[i].units) + " " + to_string(spec.layers[i].activation);
  }
  return s + ")";
}

}  // namespace

MlpGrounding::MlpGrounding(std::string prefix, std::size_t input_width, MlpSpec spec,
                           Shape output_features)
    : prefix_(std::move(prefix)),
      input_width_(input_width),
      spec_(std::move(spec)),
      output_features_(std::move(output_features)) {
  if (spec_.layers.empty()) throw std::invalid_argument("mlp for '" + prefix_ + "' has no layers");
  std::size_t want = output_features_.empty() ? 1 : num_elements(output_features_);
  if (spec_.output_width() != want) {
    throw std::invalid_argument("mlp for '" + prefix_ + "' ends with " +
                                std::to_string(spec_.output_width()) + " units, expected " +
                                std::to_string(want));
  }
}

GroundedValue MlpGrounding::apply(std::span<const GroundedValue> args, EvalContext& ctx) const {
  if (args.empty()) throw LogicError("mlp grounding '" + prefix_ + "' needs arguments");
  Grid g = grid_union(args);
  Tensor x = concat_rows(args, g);
  if (x.dim(1) != input_width_) {
    throw ShapeError("'" + prefix_ + "' expects input width " + std::to_string(input_width_) +
                     ", got " + std::to_string(x.dim(1)));
  }
  Tensor y = mlp_forward(*ctx.params, prefix_, spec_, x, ctx.training, ctx.rng);
  return {reshape(y, with_features(g.sizes, output_features_)), g.axes, output_features_.size()};
}

void MlpGrounding::init_params(ParamStore& store, Rng& rng) const {
  init_mlp(store, prefix_, input_width_, spec_, rng);
}

std::string MlpGrounding::describe() const { return describe_mlp(spec_); }

SelectMlpGrounding::SelectMlpGrounding(std::string prefix, std::size_t input_width, MlpSpec spec)
    : prefix_(std::move(prefix)), input_width_(input_width), spec_(std::move(spec)) {
  if (spec_.layers.empty()) throw std::invalid_argument("mlp for '" + prefix_ + "' has no layers");
}

GroundedValue SelectMlpGrounding::apply(std::span<const GroundedValue> args, EvalContext& ctx) const {
  if (args.size() < 2) throw LogicError("select grounding '" + prefix_ + "' needs a selector argument");
  auto inputs = args.first(args.size() - 1);
  Grid g = grid_union(inputs);
  Tensor x = concat_rows(inputs, g);
  if (x.dim(1) != input_width_) {
    throw ShapeError("'" + prefix_ + "' expects input width " + std::to_string(input_width_) +
                     ", got " + std::to_string(x.dim(1)));
  }
  const std::size_t k = spec_.output_width();
  Tensor y = mlp_forward(*ctx.params, prefix_, spec_, x, ctx.training, ctx.rng);
  GroundedValue probs{reshape(y, with_features(g.sizes, {k})), g.axes, 1};

  GroundedValue sel = args.back();
  std::size_t width = num_elements(sel.feature_shape());
  Shape sel_grid = sel.grid_shape();
  if (width == 1 && k != 1) {
    // Integer class index.
    auto idx = sel.values.detach().to_vector();
    std::vector<double> hot(idx.size() * k, 0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      double c = std::round(idx[i]);
      if (c < 0 || c >= static_cast<double>(k) || std::abs(c - idx[i]) > 1e-9) {
        throw DomainError("class index " + std::to_string(idx[i]) + " outside [0, " +
                          std::to_string(k) + ")");
      }
      hot[i * k + static_cast<std::size_t>(c)] = 1.0;
    }
    sel = {Tensor(with_features(sel_grid, {k}), std::move(hot)), sel.axes, 1};
  } else if (width == k) {
    sel = {reshape(sel.values, with_features(sel_grid, {k})), sel.axes, 1};
  } else {
    throw ShapeError("selector for '" + prefix_ + "' has width " + std::to_string(width) +
                     ", expected 1 or " + std::to_string(k));
  }
  std::vector<GroundedValue> both{probs, sel};
  Grid g2 = grid_union(both);
  Tensor prod = mul(align_to(probs, g2.axes), align_to(sel, g2.axes));
  return {sum(prod, {g2.axes.size()}), g2.axes, 0};
}

void SelectMlpGrounding::init_params(ParamStore& store, Rng& rng) const {
  init_mlp(store, prefix_, input_width_, spec_, rng);
}

std::string SelectMlpGrounding::describe() const { return "select " + describe_mlp(spec_); }

SmoothEqualityGrounding::SmoothEqualityGrounding(double alpha) : alpha_(alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("smooth equality needs alpha > 0");
}

GroundedValue SmoothEqualityGrounding::apply(std::span<const GroundedValue> args, EvalContext&) const {
  if (args.size() != 2) throw LogicError("equality takes two arguments");
  Grid g = grid_union(args);
  Tensor d = l2_norm(sub(rows_on(args[0], g), rows_on(args[1], g)));
  return {reshape(exp(affine(d, -alpha_, 0.0)), g.sizes), g.axes, 0};
}

std::string SmoothEqualityGrounding::describe() const {
  return "smooth_eq(" + std::to_string(alpha_) + ")";
}

GroundedValue DistanceGrounding::apply(std::span<const GroundedValue> args, EvalContext&) const {
  if (args.size() != 2) throw LogicError("distance takes two arguments");
  Grid g = grid_union(args);
  Tensor d = l2_norm(sub(rows_on(args[0], g), rows_on(args[1], g)));
  return {reshape(d, with_features(g.sizes, {1})), g.axes, 1};
}

std::shared_ptr<TruthGrounding> TruthGrounding::fixed(double value) {
  auto t = std::make_shared<TruthGrounding>();
  t->value_ = value;
  return t;
}

std::shared_ptr<TruthGrounding> TruthGrounding::trainable(std::string slot, double init, Bounds bounds) {
  auto t = std::make_shared<TruthGrounding>();
  t->value_ = init;
  t->slot_ = std::move(slot);
  t->bounds_ = bounds;
  return t;
}

GroundedValue TruthGrounding::apply(std::span<const GroundedValue> args, EvalContext& ctx) const {
  if (!args.empty()) throw LogicError("propositional symbol applied to arguments");
  Tensor v = slot_.empty() ? Tensor::scalar(value_) : ctx.params->get(slot_);
  return {reshape(v, {}), {}, 0};
}

void TruthGrounding::init_params(ParamStore& store, Rng&) const {
  if (!slot_.empty()) store.add(slot_, Tensor::scalar(value_), bounds_);
}

std::string TruthGrounding::describe() const {
  return slot_.empty() ? "truth(" + std::to_string(value_) + ")" : "param(" + slot_ + ")";
}

CallbackGrounding::CallbackGrounding(Fn fn, Shape output_features, std::string name)
    : fn_(std::move(fn)), output_features_(std::move(output_features)), name_(std::move(name)) {}

GroundedValue CallbackGrounding::apply(std::span<const GroundedValue> args, EvalContext& ctx) const {
  Grid g = grid_union(args);
  Tensor x = args.empty() ? Tensor::zeros({1, 0}) : concat_rows(args, g);
  Tensor y = fn_(x, *ctx.params);
  return {reshape(y, with_features(g.sizes, output_features_)), g.axes, output_features_.size()};
}

void GroundingEnv::init_params(ParamStore& store, Rng& rng) const {
  for (const auto& [name, c] : constants) {
    if (c.slot.empty()) continue;
    const Shape& shape = signature.domain_shape(signature.constant_domain(name));
    std::vector<double> v(num_elements(shape));
    for (auto& x : v) x = uniform(rng, c.init_lo, c.init_hi);
    store.add(c.slot, Tensor(shape, std::move(v)));
  }
  for (const auto& [name, g] : functions) g->init_params(store, rng);
  for (const auto& [name, g] : predicates) g->init_params(store, rng);
}

void GroundingEnv::check_complete() const {
  for (const auto& [name, d] : signature.constants()) {
    if (!constants.count(name)) throw LogicError("constant '" + name + "' has no grounding");
  }
  for (const auto& [name, d] : signature.variables()) {
    if (!variables.count(name)) throw LogicError("variable '" + name + "' has no grounding");
  }
  for (const auto& [name, f] : signature.functions()) {
    if (!functions.count(name)) throw LogicError("function '" + name + "' has no grounding");
  }
  for (const auto& [name, p] : signature.predicates()) {
    if (!predicates.count(name)) throw LogicError("predicate '" + name + "' has no grounding");
  }
}

EvalContext::EvalContext(const GroundingEnv& e, ParamView& p, FuzzyConfig c)
    : env(&e), params(&p), cfg(std::move(c)) {}

Tensor EvalContext::constant_value(const std::string& name) const {
  auto it = env->constants.find(name);
  if (it == env->constants.end()) throw LogicError("constant '" + name + "' has no grounding");
  return it->second.slot.empty() ? it->second.value : params->get(it->second.slot);
}

Tensor EvalContext::variable_values_of(const std::string& var) const {
  if (variable_values) {
    auto it = variable_values->find(var);
    if (it != variable_values->end()) return it->second;
  }
  auto it = env->variables.find(var);
  if (it == env->variables.end()) throw LogicError("variable '" + var + "' has no grounding");
  const auto& vg = it->second;
  if (vg.constants.empty()) return vg.values;
  std::vector<Tensor> rows;
  rows.reserve(vg.constants.size());
  for (const auto& c : vg.constants) rows.push_back(constant_value(c));
  return stack(rows);
}

namespace {

GroundedValue variable_value(const std::string& axis, const Tensor& values) {
  if (values.rank() == 0) throw ShapeError("variable values need an instance axis");
  return {values, {axis}, values.rank() - 1};
}

std::vector<GroundedValue> ground_args(const std::vector<TermPtr>& args, EvalContext& ctx) {
  std::vector<GroundedValue> out;
  out.reserve(args.size());
  for (const auto& a : args) out.push_back(ground_term(*a, ctx));
  return out;
}

class ScopeRestore {
 public:
  explicit ScopeRestore(EvalContext& ctx) : ctx_(ctx), saved_(ctx.scope) {}
  ~ScopeRestore() { ctx_.scope = std::move(saved_); }

 private:
  EvalContext& ctx_;
  std::map<std::string, ScopedVariable> saved_;
};

std::vector<std::size_t> axis_positions(const std::vector<std::string>& have,
                                        const std::vector<std::string>& want) {
  std::vector<std::size_t> idx;
  for (const auto& a : want) {
    auto it = std::find(have.begin(), have.end(), a);
    if (it == have.end()) throw LogicError("quantifying variable '" + a + "' absent from the grid");
    idx.push_back(static_cast<std::size_t>(it - have.begin()));
  }
  return idx;
}

std::vector<std::string> remaining_axes(const std::vector<std::string>& have,
                                        const std::vector<std::size_t>& idx) {
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < have.size(); ++i) {
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) rest.push_back(have[i]);
  }
  return rest;
}

Shape remaining_sizes(const Shape& sizes, const std::vector<std::size_t>& idx) {
  Shape rest;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) rest.push_back(sizes[i]);
  }
  return rest;
}

// Elementwise arithmetic on untracked grounded values. Feature axes are
// right-aligned.
GroundedValue guard_arith(GuardExpr::Kind op, const GroundedValue& a, const GroundedValue& b) {
  std::vector<GroundedValue> both{a, b};
  Grid g = grid_union(both);
  std::size_t fr = std::max(a.feature_rank, b.feature_rank);
  auto lift = [&](const GroundedValue& v) {
    Tensor t = align_to(v, g.axes);
    Shape s(t.shape().begin(), t.shape().begin() + static_cast<std::ptrdiff_t>(g.axes.size()));
    for (std::size_t i = v.feature_rank; i < fr; ++i) s.push_back(1);
    for (auto d : v.feature_shape()) s.push_back(d);
    return reshape(t, s).detach();
  };
  Tensor x = lift(a), y = lift(b), r;
  switch (op) {
    case GuardExpr::Kind::Add: r = add(x, y); break;
    case GuardExpr::Kind::Sub: r = sub(x, y); break;
    case GuardExpr::Kind::Mul: r = mul(x, y); break;
    case GuardExpr::Kind::Div: r = div(x, y); break;
    default: throw std::logic_error("not a binary guard operator");
  }
  // Broadcasting may have widened axes that only one side had.
  return {r, g.axes, fr};
}

GroundedValue ground_guard_expr(const GuardExpr& e, EvalContext& ctx) {
  switch (e.kind) {
    case GuardExpr::Kind::Number: return {Tensor::scalar(e.number), {}, 0};
    case GuardExpr::Kind::Term: {
      GroundedValue v = ground_term(*e.term, ctx);
      v.values = v.values.detach();
      return v;
    }
    case GuardExpr::Kind::Neg: {
      GroundedValue v = ground_guard_expr(*e.lhs, ctx);
      v.values = affine(v.values, -1.0, 0.0);
      return v;
    }
    case GuardExpr::Kind::Norm: {
      GroundedValue v = ground_guard_expr(*e.lhs, ctx);
      Shape grid = v.grid_shape();
      Shape flat = grid;
      flat.push_back(num_elements(v.feature_shape()));
      return {reshape(l2_norm(reshape(v.values, flat)), grid), v.axes, 0};
    }
    default:
      return guard_arith(e.kind, ground_guard_expr(*e.lhs, ctx), ground_guard_expr(*e.rhs, ctx));
  }
}

}  // namespace

GroundedValue ground_guard(const Guard& guard, EvalContext& ctx) {
  GroundedValue d = guard_arith(GuardExpr::Kind::Sub, ground_guard_expr(*guard.lhs, ctx),
                                ground_guard_expr(*guard.rhs, ctx));
  if (num_elements(d.feature_shape()) != 1) {
    throw LogicError("guard compares non-scalar values", guard.span);
  }
  Shape grid = d.grid_shape();
  auto v = d.values.to_vector();
  for (auto& x : v) {
    bool ok = false;
    switch (guard.op) {
      case Comparison::Lt: ok = x < 0; break;
      case Comparison::Le: ok = x <= 0; break;
      case Comparison::Gt: ok = x > 0; break;
      case Comparison::Ge: ok = x >= 0; break;
      case Comparison::Eq: ok = std::abs(x) <= 1e-9; break;
      case Comparison::Ne: ok = std::abs(x) > 1e-9; break;
    }
    x = ok ? 1.0 : 0.0;
  }
  return {Tensor(grid, std::move(v)), d.axes, 0};
}

GroundedValue ground_term(const Term& t, EvalContext& ctx) {
  const Signature& sig = ctx.env->signature;
  if (t.kind == Term::Kind::Symbol) {
    auto sc = ctx.scope.find(t.name);
    if (sc != ctx.scope.end()) return variable_value(sc->second.axis, sc->second.values);
    if (sig.is_variable(t.name)) return variable_value(t.name, ctx.variable_values_of(t.name));
    if (sig.is_constant(t.name)) {
      Tensor v = ctx.constant_value(t.name);
      return {v, {}, v.rank()};
    }
    if (!sig.is_function(t.name)) throw LogicError("unknown term symbol '" + t.name + "'", t.span);
  }
  auto it = ctx.env->functions.find(t.name);
  if (it == ctx.env->functions.end()) {
    throw LogicError("function '" + t.name + "' has no grounding", t.span);
  }
  auto args = ground_args(t.args, ctx);
  return it->second->apply(args, ctx);
}

GroundedValue quantify(const AggregatorSpec& spec, const GroundedValue& body,
                       const std::vector<std::string>& axes, double eps, double empty_value) {
  if (body.feature_rank != 0) throw ShapeError("quantifier over non-truth values");
  auto idx = axis_positions(body.axes, axes);
  auto rest = remaining_axes(body.axes, idx);
  Shape grid = body.grid_shape();
  std::size_t count = 1;
  for (auto i : idx) count *= grid[i];
  if (count == 0) return {Tensor::full(remaining_sizes(grid, idx), empty_value), rest, 0};
  return {aggregate(spec, body.values, idx, eps), rest, 0};
}

GroundedValue quantify_masked(const AggregatorSpec& spec, const GroundedValue& body,
                              const GroundedValue& mask, const std::vector<std::string>& axes,
                              double eps, double empty_value) {
  if (body.feature_rank != 0 || mask.feature_rank != 0) {
    throw ShapeError("guarded quantifier over non-truth values");
  }
  std::vector<GroundedValue> both{body, mask};
  Grid g = grid_union(both);
  auto idx = axis_positions(g.axes, axes);
  Tensor values = expand_to(body, g);
  Tensor m = expand_to(GroundedValue{mask.values.detach(), mask.axes, 0}, g);
  return {aggregate_masked(spec, values, m, idx, eps, empty_value), remaining_axes(g.axes, idx), 0};
}

GroundedValue ground_formula(const Formula& f, EvalContext& ctx) {
  switch (f.kind) {
    case Formula::Kind::Atom: {
      auto it = ctx.env->predicates.find(f.pred);
      if (it == ctx.env->predicates.end()) {
        throw LogicError("predicate '" + f.pred + "' has no grounding", f.span);
      }
      auto args = ground_args(f.args, ctx);
      GroundedValue v = it->second->apply(args, ctx);
      if (v.feature_rank != 0) throw ShapeError("predicate '" + f.pred + "' returned features");
      return v;
    }
    case Formula::Kind::Equal: {
      auto args = ground_args(f.args, ctx);
      return SmoothEqualityGrounding(ctx.env->eq_alpha).apply(args, ctx);
    }
    case Formula::Kind::Not: {
      GroundedValue v = ground_formula(*f.lhs, ctx);
      v.values = negation(v.values);
      return v;
    }
    case Formula::Kind::Binary: {
      GroundedValue a = ground_formula(*f.lhs, ctx);
      GroundedValue b = ground_formula(*f.rhs, ctx);
      std::vector<GroundedValue> both{a, b};
      Grid g = grid_union(both);
      Tensor x = align_to(a, g.axes), y = align_to(b, g.axes), r;
      const auto& c = ctx.cfg;
      switch (f.op) {
        case Connective::And: r = conjunction(c.conjunction, x, y, c.epsilon); break;
        case Connective::Or: r = disjunction(c.disjunction, x, y, c.epsilon); break;
        case Connective::Implies: r = implication(c.implication, x, y, c.epsilon); break;
        case Connective::Iff: r = equivalence(c, x, y); break;
      }
      return {r, g.axes, 0};
    }
    case Formula::Kind::Quant: {
      ScopeRestore restore(ctx);
      std::vector<std::string> keys;
      for (const auto& b : f.binders) {
        if (!b.diag) {
          for (const auto& v : b.vars) {
            ctx.scope[v] = {v, ctx.variable_values_of(v)};
            keys.push_back(v);
          }
          continue;
        }
        std::vector<Tensor> vals;
        std::size_t k = SIZE_MAX;
        bool equal = true;
        for (const auto& v : b.vars) {
          vals.push_back(ctx.variable_values_of(v));
          std::size_t n = vals.back().dim(0);
          if (k != SIZE_MAX && n != k) equal = false;
          k = std::min(k, n);
        }
        std::string key = "Diag(";
        for (std::size_t i = 0; i < b.vars.size(); ++i) key += (i ? "," : "") + b.vars[i];
        key += ")";
        if (!equal) {
          std::string msg = key + " over variables of unequal lengths; truncated to " + std::to_string(k);
          if (ctx.strict_diag) throw LogicError(msg, f.span);
          if (ctx.warnings) ctx.warnings->push_back(msg);
        }
        std::vector<std::size_t> head(k);
        std::iota(head.begin(), head.end(), 0);
        for (std::size_t i = 0; i < b.vars.size(); ++i) {
          Tensor t = vals[i].dim(0) == k ? vals[i] : index_select(vals[i], 0, head);
          ctx.scope[b.vars[i]] = {key, t};
        }
        keys.push_back(key);
      }
      const bool forall = f.quant == Quantifier::Forall;
      const AggregatorSpec& spec = forall ? ctx.cfg.forall : ctx.cfg.exists;
      const double empty = forall ? 1.0 : 0.0;
      GroundedValue body = ground_formula(*f.body, ctx);
      if (f.guard) {
        GroundedValue mask = ground_guard(*f.guard, ctx);
        return quantify_masked(spec, body, mask, keys, ctx.cfg.epsilon, empty);
      }
      try {
        return quantify(spec, body, keys, ctx.cfg.epsilon, empty);
      } catch (const LogicError& e) {
        throw LogicError(e.message(), f.span);
      }
    }
  }
  throw std::logic_error("unknown formula kind");
}

Tensor evaluate_closed(const Formula& f, EvalContext& ctx) {
  GroundedValue v = ground_formula(f, ctx);
  if (!v.axes.empty()) {
    std::string names;
    for (const auto& a : v.axes) names += (names.empty() ? "" : ", ") + a;
    throw LogicError("formula is not closed; free axes: " + names, f.span);
  }
  return v.values;
}

}  // namespace rl
