#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rl/grounding.hpp"
#include "rl/ops.hpp"
#include "rl/parser.hpp"
#include "rl/random.hpp"

namespace rl::fixtures {

inline TermPtr sym(const std::string& n) { return Term::symbol(n); }

inline FormulaPtr atom(const std::string& p, std::vector<std::string> args) {
  std::vector<TermPtr> ts;
  for (auto& a : args) ts.push_back(sym(a));
  return Formula::atom(p, ts);
}

inline FormulaPtr forall(std::vector<std::string> vars, FormulaPtr body, std::optional<Guard> g = {}) {
  return Formula::quantified(Quantifier::Forall, {Binder{std::move(vars), false}}, std::move(g),
                             std::move(body));
}

inline FormulaPtr exists(std::vector<std::string> vars, FormulaPtr body, std::optional<Guard> g = {}) {
  return Formula::quantified(Quantifier::Exists, {Binder{std::move(vars), false}}, std::move(g),
                             std::move(body));
}

inline Tensor eye(std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return Tensor({n, n}, v);
}

// rows [cells, w] -> column k, shape [cells, 1]
inline Tensor column(const Tensor& rows, std::size_t k) {
  std::vector<std::size_t> idx{k};
  return index_select(rows, 1, idx);
}

inline GroundingPtr lookup_predicate(const std::string& slot) {
  return std::make_shared<CallbackGrounding>(
      [slot](const Tensor& rows, ParamView& p) {
        Tensor theta = p.get(slot);
        return matmul(rows, reshape(theta, {theta.size(), 1}));
      },
      Shape{}, "lookup");
}

inline GroundingPtr fixed_lookup(std::vector<double> table, Shape out) {
  Tensor t({table.size(), 1}, table);
  return std::make_shared<CallbackGrounding>(
      [t](const Tensor& rows, ParamView&) { return matmul(rows, t); }, std::move(out), "table");
}

// Three people as one-hot rows, P(x) from a trainable table (0.2, 0.7, 0.8),
// ages 12, 30, 45 and Adult(x) = (0, 1, 1).
struct PeopleFixture {
  GroundingEnv env;
  ParamStore store;

  PeopleFixture() {
    env.signature.declare_domain("person", {3});
    env.signature.declare_domain("real", {1});
    env.signature.declare_variable("x", "person");
    env.signature.declare_function("age", {{"person"}, "real"});
    env.signature.declare_predicate("P", {"person"});
    env.signature.declare_predicate("Adult", {"person"});
    env.variables["x"] = {eye(3), {}};
    env.functions["age"] = fixed_lookup({12, 30, 45}, {1});
    env.predicates["P"] = lookup_predicate("theta");
    env.predicates["Adult"] = fixed_lookup({0, 1, 1}, {});
    store.add("theta", Tensor::vector({0.2, 0.7, 0.8}));
    env.check_complete();
  }

  // Plain means: forall is pmean_error p=1, exists pmean p=1.
  static FuzzyConfig mean_config() {
    FuzzyConfig cfg = FuzzyConfig::preset("product");
    cfg.forall = {AggregatorKind::PMeanError, 1.0};
    cfg.exists = {AggregatorKind::PMean, 1.0};
    cfg.implication = Implication::Reichenbach;
    return cfg;
  }

  static Guard adult_guard(Comparison op = Comparison::Gt, double bound = 18) {
    return Guard{GuardExpr::of_term(Term::apply("age", {sym("x")})), op, GuardExpr::constant(bound), {}};
  }

  double eval(const Formula& f, const FuzzyConfig& cfg) {
    ParamView view(store);
    EvalContext ctx(env, view, cfg);
    return evaluate_closed(f, ctx).item();
  }

  // Gradient of f with respect to theta.
  std::vector<double> gradient(const Formula& f, const FuzzyConfig& cfg) {
    Tape tape;
    ParamView view(store, tape);
    EvalContext ctx(env, view, cfg);
    Tensor y = evaluate_closed(f, ctx);
    return view.gradients(y).at("theta").to_vector();
  }
};

// exists Diag(x, y): q(x, y) against exists z: r(z) where z holds the
// concatenated pairs, and a brute-force stable p-mean (p = 2) of the same rows.
struct DiagOracle {
  double diag = 0, paired = 0, brute = 0;
};

inline DiagOracle diag_oracle(std::size_t n, Rng& rng) {
  GroundingEnv env;
  env.signature.declare_domain("a", {2});
  env.signature.declare_domain("ab", {4});
  env.signature.declare_variable("x", "a");
  env.signature.declare_variable("y", "a");
  env.signature.declare_variable("z", "ab");
  env.signature.declare_predicate("q", {"a", "a"});
  env.signature.declare_predicate("r", {"ab"});
  std::vector<double> xs(n * 2), ys(n * 2), zs;
  for (auto& v : xs) v = uniform(rng, 0, 1);
  for (auto& v : ys) v = uniform(rng, 0, 1);
  for (std::size_t i = 0; i < n; ++i) zs.insert(zs.end(), {xs[2 * i], xs[2 * i + 1], ys[2 * i], ys[2 * i + 1]});
  env.variables["x"] = {Tensor({n, 2}, xs), {}};
  env.variables["y"] = {Tensor({n, 2}, ys), {}};
  env.variables["z"] = {Tensor({n, 4}, zs), {}};
  auto pred = std::make_shared<CallbackGrounding>(
      [](const Tensor& rows, ParamView&) { return sigmoid(sum(rows, {1})); }, Shape{});
  env.predicates["q"] = pred;
  env.predicates["r"] = pred;
  ParamStore store;
  ParamView view(store);
  EvalContext ctx(env, view);
  auto diag = Formula::quantified(Quantifier::Exists, {Binder{{"x", "y"}, true}}, {}, atom("q", {"x", "y"}));
  DiagOracle o;
  o.diag = evaluate_closed(*diag, ctx).item();
  o.paired = evaluate_closed(*exists({"z"}, atom("r", {"z"})), ctx).item();
  double acc = 0;
  const double eps = ctx.cfg.epsilon;
  for (std::size_t i = 0; i < n; ++i) {
    double t = 1 / (1 + std::exp(-(zs[4 * i] + zs[4 * i + 1] + zs[4 * i + 2] + zs[4 * i + 3])));
    t = (1 - eps) * t + eps;
    acc += t * t;
  }
  o.brute = std::sqrt(acc / static_cast<double>(n));
  return o;
}

// Random formulas over a few propositions, unary and binary predicates.
inline FormulaPtr random_formula(Rng& rng, int depth) {
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  const char* vars[] = {"x", "y", "z"};
  if (depth == 0 || pick(4) == 0) {
    switch (pick(4)) {
      case 0: return Formula::atom(std::string(1, static_cast<char>('A' + pick(3))), {});
      case 1: return Formula::atom("p", {Term::symbol(vars[pick(3)])});
      case 2: return Formula::atom("r", {Term::symbol(vars[pick(3)]), Term::apply("f", {Term::symbol(vars[pick(3)])})});
      default: return Formula::equal(Term::symbol(vars[pick(3)]), Term::symbol(vars[pick(3)]));
    }
  }
  switch (pick(6)) {
    case 0: return Formula::negate(random_formula(rng, depth - 1));
    case 1: {
      std::vector<Binder> bs{Binder{{vars[pick(3)]}, false}};
      if (pick(3) == 0) bs.push_back(Binder{{"u", "v"}, true});
      std::optional<Guard> g;
      if (pick(3) == 0) {
        g = Guard{GuardExpr::binary(GuardExpr::Kind::Sub, GuardExpr::of_term(Term::symbol("x")),
                                    GuardExpr::constant(pick(5) - 2.5)),
                  static_cast<Comparison>(pick(6)), GuardExpr::of_term(Term::apply("f", {Term::symbol("y")})), {}};
      }
      return Formula::quantified(pick(2) ? Quantifier::Forall : Quantifier::Exists, bs, g,
                                 random_formula(rng, depth - 1));
    }
    default:
      return Formula::binary(static_cast<Connective>(pick(4)), random_formula(rng, depth - 1),
                             random_formula(rng, depth - 1));
  }
}

// Printing then parsing gives back f, both pretty and fully parenthesized,
// and the pretty form is a fixpoint. Returns the offending text or "".
inline std::string precedence_mismatch(const Formula& f) {
  std::string pretty = pretty_print(f);
  std::string full = print_fully_parenthesized(f);
  FormulaPtr a = parse_formula_syntax(pretty);
  FormulaPtr b = parse_formula_syntax(full);
  if (!same_formula(*a, f)) return pretty;
  if (!same_formula(*b, f)) return full;
  if (pretty_print(*a) != pretty) return pretty;
  return "";
}

}  // namespace rl::fixtures
