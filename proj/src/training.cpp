#include "rl/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "rl/ops.hpp"

namespace rl {

SatResult satisfiability(const Theory& t, EvalContext& ctx) {
  if (t.axioms.empty()) throw LogicError("satisfiability of an empty knowledge base");
  SatResult r;
  FuzzyConfig base = ctx.cfg;
  for (const auto& ax : t.axioms) {
    ctx.cfg = base.with_overrides(ax.overrides);
    r.truths.push_back(evaluate_closed(*ax.formula, ctx));
  }
  ctx.cfg = base;
  r.sat = aggregate(base.sat, stack(r.truths), base.epsilon);
  return r;
}

double satisfiability_value(const Theory& t) {
  ParamView view(t.params);
  EvalContext ctx(t.env, view, t.fuzzy);
  ctx.strict_diag = t.strict_diag;
  return satisfiability(t, ctx).sat.item();
}

Tensor regularization(const Theory& t, ParamView& view) {
  Tensor total = Tensor::scalar(0.0);
  if (t.train.reg == Regularizer::None) return total;
  for (const auto& slot : t.params.slots()) {
    Tensor v = view.get(slot.name);
    Tensor term = t.train.reg == Regularizer::L2 ? mul(v, v) : maximum(v, neg(v));
    total = add(total, reduce_all(ReduceOp::Sum, term));
  }
  return total;
}

FuzzyConfig scheduled_config(const Theory& t, std::size_t epoch) {
  FuzzyConfig c = t.fuzzy;
  double e = static_cast<double>(epoch);
  c.forall.p = schedule_value(t.train.forall_schedule, e, t.train.linear_schedule, c.forall.p);
  c.exists.p = schedule_value(t.train.exists_schedule, e, t.train.linear_schedule, c.exists.p);
  return c;
}

namespace {

void log_truths(const Theory& t, const SatResult& s, MetricRecord& rec) {
  for (std::size_t i = 0; i < s.truths.size(); ++i) rec.set("truth." + t.axiom_label(i), s.truths[i].item());
}

}  // namespace

MetricsLog learn(Theory& t, const LearnOptions& opts) {
  MetricsLog log;
  const auto& tc = t.train;
  // Separate streams so that batching does not depend on the parameter count.
  Rng batch_rng(tc.seed * 0x9E3779B97F4A7C15ULL + 1);
  Rng dropout_rng(tc.seed * 0xBF58476D1CE4E5B9ULL + 2);
  std::size_t max_rows = 0;
  for (const auto& g : t.groups) max_rows = std::max(max_rows, g.rows);
  const std::size_t steps = max_rows == 0 ? 1 : (max_rows + tc.batch_size - 1) / tc.batch_size;
  std::vector<std::string> warnings;

  auto finish_record = [&](std::size_t epoch, MetricRecord& rec) {
    if (opts.on_epoch) opts.on_epoch(epoch, t, rec);
    log.add(std::move(rec));
  };

  if (opts.log_initial) {
    ParamView view(t.params);
    EvalContext ctx(t.env, view, scheduled_config(t, 0));
    ctx.strict_diag = t.strict_diag;
    ctx.warnings = &warnings;
    SatResult s = satisfiability(t, ctx);
    double reg = regularization(t, view).item();
    MetricRecord rec;
    rec.set("epoch", 0);
    rec.set("sat", s.sat.item());
    rec.set("loss", 1.0 - s.sat.item() + tc.lambda * reg);
    rec.set("reg", reg);
    log_truths(t, s, rec);
    finish_record(0, rec);
  }

  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    FuzzyConfig cfg = scheduled_config(t, epoch);
    MetricRecord rec;
    for (std::size_t step = 0; step < steps; ++step) {
      std::map<std::string, Tensor> batch;
      for (const auto& g : t.groups) {
        std::size_t n = std::min(tc.batch_size, g.rows);
        if (n == g.rows) continue;  // whole group fits
        auto perm = permutation(batch_rng, g.rows);
        perm.resize(n);
        for (const auto& v : g.vars) batch[v] = index_select(t.env.variables.at(v).values, 0, perm);
      }
      Tape tape;
      ParamView view(t.params, tape);
      EvalContext ctx(t.env, view, cfg);
      ctx.training = true;
      ctx.rng = &dropout_rng;
      ctx.variable_values = &batch;
      ctx.strict_diag = t.strict_diag;
      ctx.warnings = &warnings;
      SatResult s = satisfiability(t, ctx);
      Tensor reg = regularization(t, view);
      Tensor loss = add(affine(s.sat, -1.0, 1.0), affine(reg, tc.lambda, 0.0));
      double lv = loss.item();
      if (!std::isfinite(lv)) {
        throw TrainingError("loss is not finite at epoch " + std::to_string(epoch + 1) + ", step " +
                            std::to_string(step + 1));
      }
      if (loss.tracked()) {
        adam_step(t.params, view.gradients(loss), AdamConfig{tc.lr});
      }
      if (step + 1 == steps) {
        rec.set("epoch", static_cast<double>(epoch + 1));
        rec.set("sat", s.sat.item());
        rec.set("loss", lv);
        rec.set("reg", reg.item());
        log_truths(t, s, rec);
      }
    }
    finish_record(epoch + 1, rec);
  }
  return log;
}

std::string to_string(QueryKind k) {
  switch (k) {
    case QueryKind::Truth: return "truth";
    case QueryKind::Value: return "value";
    case QueryKind::GeneralizationTruth: return "generalization-truth";
    case QueryKind::GeneralizationValue: return "generalization-value";
  }
  return "?";
}

namespace {

void check_unseen(const Theory& t, const QueryOptions& opts) {
  const Signature& sig = t.env.signature;
  for (const auto& [var, values] : opts.unseen) {
    if (!sig.is_variable(var)) throw LogicError("unseen data for unknown variable '" + var + "'");
    const Shape& want = sig.domain_shape(sig.variable_domain(var));
    Shape have(values.shape().begin() + (values.rank() ? 1 : 0), values.shape().end());
    if (values.rank() == 0 || have != want) {
      throw ShapeError("unseen data for '" + var + "' has shape " + to_string(values.shape()) +
                       ", expected instances of feature shape " + to_string(want));
    }
  }
}

FuzzyConfig query_config(const Theory& t, const QueryOptions& opts) {
  FuzzyConfig c = t.fuzzy;
  if (opts.forall_p) c.forall.p = *opts.forall_p;
  if (opts.exists_p) c.exists.p = *opts.exists_p;
  return c;
}

}  // namespace

QueryResult query_truth(const Theory& t, const Formula& f, const QueryOptions& opts) {
  check_unseen(t, opts);
  type_check(f, t.env.signature);
  ParamView view(t.params);
  EvalContext ctx(t.env, view, query_config(t, opts));
  ctx.strict_diag = t.strict_diag;
  ctx.variable_values = &opts.unseen;
  GroundedValue g = ground_formula(f, ctx);
  return {opts.unseen.empty() ? QueryKind::Truth : QueryKind::GeneralizationTruth, g.values, g.axes};
}

QueryResult query_value(const Theory& t, const Term& term, const QueryOptions& opts) {
  check_unseen(t, opts);
  term_domain(term, t.env.signature);
  ParamView view(t.params);
  EvalContext ctx(t.env, view, query_config(t, opts));
  ctx.variable_values = &opts.unseen;
  GroundedValue g = ground_term(term, ctx);
  return {opts.unseen.empty() ? QueryKind::Value : QueryKind::GeneralizationValue, g.values, g.axes};
}

QueryResult query(const Theory& t, const std::string& text, const QueryOptions& opts) {
  FormulaPtr f;
  try {
    f = parse_formula(text, t.env.signature);
  } catch (const LogicError& formula_error) {
    TermPtr term;
    try {
      term = parse_term(text, t.env.signature);
    } catch (const LogicError&) {
      throw formula_error;
    }
    return query_value(t, *term, opts);
  }
  return query_truth(t, *f, opts);
}

std::uint64_t params_hash(const ParamStore& store) {
  // FNV-1a over names, shapes and raw bytes.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& s : store.slots()) {
    mix(s.name.data(), s.name.size());
    for (std::size_t d : s.value.shape()) mix(&d, sizeof d);
    auto v = s.value.values();
    mix(v.data(), v.size() * sizeof(double));
  }
  return h;
}

}  // namespace rl
