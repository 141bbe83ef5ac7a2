#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rl/fuzzy.hpp"
#include "rl/ops.hpp"
#include "rl/random.hpp"
#include "rl/reasoning.hpp"
#include "rl/tensor.hpp"
#include "rl/training.hpp"

namespace rl::check {

struct GradCheckResult {
  bool ok = true;
  double worst_abs = 0.0;
  std::string detail;
};

// Compares reverse-mode gradients of a scalar function against central
// differences. Inputs are watched on a fresh tape for the analytic pass.
inline GradCheckResult grad_check(
    const std::function<Tensor(const std::vector<Tensor>&)>& f, const std::vector<Tensor>& inputs,
    double h = 1e-5, double rtol = 1e-4, double atol = 1e-7) {
  Tape tape;
  std::vector<Tensor> leaves;
  for (const auto& x : inputs) leaves.push_back(tape.watch(x));
  Tensor y = f(leaves);
  Gradients g = tape.backward(y);
  GradCheckResult res;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Tensor analytic = g.of(leaves[k]);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto eval = [&](double delta) {
        std::vector<Tensor> xs = inputs;
        auto v = xs[k].to_vector();
        v[i] += delta;
        xs[k] = Tensor(xs[k].shape(), v);
        return f(xs).item();
      };
      double numeric = (eval(h) - eval(-h)) / (2 * h);
      double a = analytic[i];
      double err = std::abs(a - numeric);
      res.worst_abs = std::max(res.worst_abs, err);
      if (!(err <= atol + rtol * std::abs(numeric))) {
        res.ok = false;
        res.detail += "input " + std::to_string(k) + "[" + std::to_string(i) + "]: analytic " +
                      std::to_string(a) + " numeric " + std::to_string(numeric) + "\n";
      }
    }
  }
  return res;
}


inline Tensor rand_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(num_elements(s));
  for (auto& x : v) x = uniform(rng, lo, hi);
  return Tensor(std::move(s), std::move(v));
}

// Weighted sum so every output element carries a distinct gradient.
inline Tensor weigh(const Tensor& t) {
  std::vector<double> w(t.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.3 + 0.17 * static_cast<double>(i % 7);
  return reduce_all(ReduceOp::Sum, mul(t, Tensor(t.shape(), w)));
}

struct OpCase {
  std::string name;
  std::function<Tensor(const std::vector<Tensor>&)> f;
  std::vector<Tensor> inputs;
};

// One case per differentiable primitive, connective and aggregator, with
// inputs drawn away from kinks and domain edges.
inline std::vector<OpCase> op_cases(Rng& rng) {
  std::vector<OpCase> out;
  auto r = [&](Shape s, double lo = -1.0, double hi = 1.0) { return rand_tensor(std::move(s), rng, lo, hi); };
  using V = const std::vector<Tensor>&;
  Tensor a = r({2, 3}), b = r({3}), pa = r({2, 3}, 0.2, 2.0), pb = r({2, 1}, 0.5, 2.0);
  out.push_back({"add", [](V x) { return weigh(add(x[0], x[1])); }, {a, b}});
  out.push_back({"sub", [](V x) { return weigh(sub(x[0], x[1])); }, {a, b}});
  out.push_back({"mul", [](V x) { return weigh(mul(x[0], x[1])); }, {a, b}});
  out.push_back({"div", [](V x) { return weigh(div(x[0], x[1])); }, {a, pb}});
  out.push_back({"pow", [](V x) { return weigh(pow(x[0], x[1])); }, {pa, pb}});
  out.push_back({"pow_scalar", [](V x) { return weigh(pow(x[0], 2.5)); }, {pa}});
  out.push_back({"minimum", [](V x) { return weigh(minimum(x[0], x[1])); }, {a, b}});
  out.push_back({"maximum", [](V x) { return weigh(maximum(x[0], x[1])); }, {a, b}});
  out.push_back({"exp", [](V x) { return weigh(exp(x[0])); }, {a}});
  out.push_back({"log", [](V x) { return weigh(log(x[0])); }, {pa}});
  out.push_back({"neg", [](V x) { return weigh(neg(x[0])); }, {a}});
  out.push_back({"sqrt", [](V x) { return weigh(sqrt(x[0])); }, {pa}});
  out.push_back({"affine", [](V x) { return weigh(affine(x[0], -1.5, 0.25)); }, {a}});
  out.push_back({"sigmoid", [](V x) { return weigh(sigmoid(x[0])); }, {a}});
  out.push_back({"elu", [](V x) { return weigh(elu(x[0])); }, {a}});
  out.push_back({"clamp_passthrough", [](V x) { return weigh(clamp_passthrough(x[0], -2.0, 2.0)); }, {a}});
  Tensor t3 = r({2, 3, 4}, 0.1, 0.9);
  const std::pair<const char*, ReduceOp> reds[] = {{"sum", ReduceOp::Sum},   {"mean", ReduceOp::Mean},
                                                   {"min", ReduceOp::Min},   {"max", ReduceOp::Max},
                                                   {"prod", ReduceOp::Prod}, {"pmean", ReduceOp::PMean},
                                                   {"pmean_error", ReduceOp::PMeanError}};
  for (const auto& [name, op] : reds) {
    for (std::vector<std::size_t> axes : {std::vector<std::size_t>{1}, {0, 2}, {0, 1, 2}}) {
      out.push_back({std::string("reduce_") + name, [op, axes](V x) { return weigh(reduce(op, x[0], axes, 3.0)); },
                     {t3}});
    }
  }
  Tensor s3 = r({2, 3, 2}), s1 = r({2, 3, 1});
  out.push_back({"permute", [](V x) { return weigh(permute(x[0], {2, 0, 1})); }, {s3}});
  out.push_back({"reshape", [](V x) { return weigh(reshape(x[0], {3, 4})); }, {s3}});
  out.push_back({"broadcast_to", [](V x) { return weigh(broadcast_to(x[0], {4, 2, 3, 1})); }, {s1}});
  out.push_back({"concat", [](V x) {
                   std::vector<Tensor> parts{x[0], x[1]};
                   return weigh(concat(parts, 2));
                 },
                 {s3, s1}});
  out.push_back({"stack", [](V x) {
                   std::vector<Tensor> parts{x[0], x[0]};
                   return weigh(stack(parts));
                 },
                 {s3}});
  out.push_back({"index_select", [](V x) {
                   std::vector<std::size_t> idx{2, 0, 2};
                   return weigh(index_select(x[0], 1, idx));
                 },
                 {s3}});
  out.push_back({"where", [](V x) { return weigh(where(Tensor({3, 1}, {1, 0, 1}), x[0], x[1])); }, {s3, s1}});
  Tensor m = r({3, 4}), n = r({4, 2});
  out.push_back({"matmul", [](V x) { return weigh(matmul(x[0], x[1])); }, {m, n}});
  out.push_back({"softmax", [](V x) { return weigh(softmax(x[0])); }, {m}});
  out.push_back({"l2_norm", [](V x) { return weigh(l2_norm(x[0])); }, {m}});

  const double eps = 1e-4;
  Tensor u = r({4}, 0.05, 0.95), w = r({4}, 0.05, 0.95);
  for (auto t : {TNorm::Min, TNorm::Product, TNorm::ProductStable, TNorm::Lukasiewicz}) {
    out.push_back({"and_" + to_string(t), [t, eps](V x) { return weigh(conjunction(t, x[0], x[1], eps)); }, {u, w}});
  }
  for (auto s : {TConorm::Max, TConorm::ProbSum, TConorm::ProbSumStable, TConorm::Lukasiewicz}) {
    out.push_back({"or_" + to_string(s), [s, eps](V x) { return weigh(disjunction(s, x[0], x[1], eps)); }, {u, w}});
  }
  for (auto i : {Implication::KleeneDienes, Implication::Goedel, Implication::Reichenbach,
                 Implication::ReichenbachStable, Implication::Goguen, Implication::Lukasiewicz}) {
    out.push_back({"implies_" + to_string(i), [i, eps](V x) { return weigh(implication(i, x[0], x[1], eps)); },
                   {u, w}});
  }
  out.push_back({"not", [](V x) { return weigh(negation(x[0])); }, {u}});
  Tensor g = r({3, 4}, 0.05, 0.95);
  Tensor mask({3, 4}, {1, 0, 1, 1, 0, 1, 1, 0, 0, 0, 0, 0});
  for (auto kind : {AggregatorKind::Min, AggregatorKind::Max, AggregatorKind::Prod, AggregatorKind::ProbSum,
                    AggregatorKind::LukAnd, AggregatorKind::LukOr, AggregatorKind::Mean, AggregatorKind::PMean,
                    AggregatorKind::PMeanError, AggregatorKind::PMeanStable, AggregatorKind::PMeanErrorStable}) {
    AggregatorSpec spec{kind, 3.0};
    out.push_back({"aggregate_" + to_string(spec), [spec, eps](V x) { return weigh(aggregate(spec, x[0], {1}, eps)); },
                   {g}});
    out.push_back({"aggregate_masked_" + to_string(spec),
                   [spec, eps, mask](V x) { return weigh(aggregate_masked(spec, x[0], mask, {1}, eps, 1.0)); }, {g}});
  }
  Tensor sats({4}, {0.3, 0.8, 0.96, 0.99});
  out.push_back({"elu_penalty", [](V x) { return weigh(elu_penalty(x[0], 0.95, 0.05, 10.0)); }, {sats}});
  return out;
}

// Finite-difference check of 1 - Sat + lambda R with respect to every
// parameter of a theory, on the first `rows` instances of each data group.
// Dropout is off so that the loss is a deterministic function of theta.
inline GradCheckResult theory_grad_check(const Theory& t, std::size_t rows = 6, std::size_t max_per_slot = 12,
                                         double h = 1e-5, double rtol = 1e-4, double atol = 1e-7) {
  std::map<std::string, Tensor> batch;
  for (const auto& g : t.groups) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < std::min(rows, g.rows); ++i) idx.push_back(i);
    for (const auto& v : g.vars) batch[v] = index_select(t.env.variables.at(v).values, 0, idx);
  }
  auto loss_of = [&](const ParamStore& store, Tape* tape, GradientMap* grads) {
    std::optional<ParamView> view;
    if (tape) view.emplace(store, *tape);
    else view.emplace(store);
    EvalContext ctx(t.env, *view, t.fuzzy);
    ctx.variable_values = &batch;
    Tensor loss = add(affine(satisfiability(t, ctx).sat, -1.0, 1.0),
                      affine(regularization(t, *view), t.train.lambda, 0.0));
    if (grads) *grads = view->gradients(loss);
    return loss.item();
  };
  // Central differences need room on both sides of a bounded value.
  ParamStore at = t.params;
  for (const auto& slot : t.params.slots()) {
    if (!slot.bounds) continue;
    auto v = slot.value.to_vector();
    for (auto& x : v) x = std::clamp(x, slot.bounds->lo + 0.05, slot.bounds->hi - 0.05);
    at.set(slot.name, Tensor(slot.value.shape(), v));
  }
  Tape tape;
  GradientMap grads;
  loss_of(at, &tape, &grads);
  GradCheckResult res;
  ParamStore probe = at;
  for (const auto& slot : at.slots()) {
    const Tensor& analytic = grads.at(slot.name);
    std::size_t n = slot.value.size();
    std::size_t stride = std::max<std::size_t>(1, n / max_per_slot);
    for (std::size_t i = 0; i < n; i += stride) {
      auto eval = [&](double delta) {
        auto v = slot.value.to_vector();
        v[i] += delta;
        probe.set(slot.name, Tensor(slot.value.shape(), v));
        double l = loss_of(probe, nullptr, nullptr);
        probe.set(slot.name, slot.value);
        return l;
      };
      double numeric = (eval(h) - eval(-h)) / (2 * h);
      double a = analytic[i];
      double err = std::abs(a - numeric);
      res.worst_abs = std::max(res.worst_abs, err);
      if (!(err <= atol + rtol * std::abs(numeric))) {
        res.ok = false;
        res.detail += slot.name + "[" + std::to_string(i) + "]: analytic " + std::to_string(a) + " numeric " +
                      std::to_string(numeric) + "\n";
      }
    }
  }
  return res;
}

}  // namespace rl::check
