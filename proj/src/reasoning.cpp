#include "rl/reasoning.hpp"

#include <cmath>

#include "rl/ops.hpp"

namespace rl {

double elu_penalty(double sat, double q, double alpha, double beta) {
  return sat <= q ? beta * (q - sat) : alpha * (std::exp(q - sat) - 1.0);
}

Tensor elu_penalty(const Tensor& sat, double q, double alpha, double beta) {
  Tensor below = affine(sat, -beta, beta * q);
  Tensor above = affine(exp(affine(sat, -1.0, q)), alpha, -alpha);
  std::vector<double> c(sat.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = sat[i] <= q ? 1.0 : 0.0;
  Tensor cond(sat.shape(), std::move(c));
  return where(cond, below, above);
}

std::vector<std::pair<std::string, double>> propositional_truths(const Theory& t) {
  std::vector<std::pair<std::string, double>> out;
  ParamView view(t.params);
  EvalContext ctx(t.env, view, t.fuzzy);
  for (const auto& [name, inputs] : t.env.signature.predicates()) {
    if (!inputs.empty()) continue;
    out.emplace_back(name, evaluate_closed(*Formula::atom(name, {}), ctx).item());
  }
  return out;
}

namespace {

double closed_truth(const Theory& t, const Formula& phi) {
  ParamView view(t.params);
  EvalContext ctx(t.env, view, t.fuzzy);
  ctx.strict_diag = t.strict_diag;
  return evaluate_closed(phi, ctx).item();
}

void require_closed(const Theory& t, const Formula& phi) {
  type_check(phi, t.env.signature);
  auto free = free_variables(phi, t.env.signature);
  if (!free.empty()) throw LogicError("query formula is not closed: '" + free.front() + "' is free", phi.span);
}

}  // namespace

QueryAfterLearningResult reason_query_after_learning(const Theory& t, const Formula& phi, double q,
                                                     std::size_t restarts) {
  require_closed(t, phi);
  QueryAfterLearningResult r;
  bool any_satisfying = false;
  for (std::size_t i = 0; i < std::max<std::size_t>(restarts, 1); ++i) {
    Theory run = t;
    run.train.seed = t.train.seed + i;
    run.reinitialize(run.train.seed);
    learn(run, LearnOptions{nullptr, false});
    RestartOutcome o{run.train.seed, satisfiability_value(run), closed_truth(run, phi), propositional_truths(run)};
    if (o.sat >= q) {
      any_satisfying = true;
      if (o.phi < q) r.entailed = false;
    }
    r.restarts.push_back(std::move(o));
  }
  r.no_satisfying_grounding = !any_satisfying;
  return r;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Entailed: return "entailed";
    case Verdict::EntailedVacuously: return "entailed (vacuously: no grounding with Sat >= q found)";
    case Verdict::NotEntailed: return "NOT entailed";
  }
  return "?";
}

RefutationResult reason_refute(const Theory& t, const Formula& phi, const RefutationConfig& cfg) {
  require_closed(t, phi);
  RefutationResult best;
  bool have_best = false;
  for (std::size_t restart = 0; restart < std::max<std::size_t>(cfg.restarts, 1); ++restart) {
    Theory run = t;
    if (restart > 0) run.reinitialize(t.train.seed + restart);
    RefutationResult r;
    std::optional<ParamStore> found;
    double found_sat = 0.0, found_phi = 0.0;
    for (std::size_t step = 0; step < cfg.epochs; ++step) {
      Tape tape;
      ParamView view(run.params, tape);
      EvalContext ctx(run.env, view, run.fuzzy);
      ctx.strict_diag = run.strict_diag;
      Tensor sat = satisfiability(run, ctx).sat;
      Tensor g_phi = evaluate_closed(phi, ctx);
      Tensor objective = add(g_phi, elu_penalty(sat, cfg.q, cfg.alpha, cfg.beta));
      if (!std::isfinite(objective.item())) {
        throw TrainingError("refutation objective is not finite at step " + std::to_string(step + 1));
      }
      MetricRecord rec;
      rec.set("step", static_cast<double>(step));
      rec.set("sat", sat.item());
      rec.set("phi", g_phi.item());
      rec.set("objective", objective.item());
      r.trace.add(std::move(rec));
      if (sat.item() >= cfg.q && g_phi.item() < cfg.q) {
        found = run.params;
        found_sat = sat.item();
        found_phi = g_phi.item();
      }
      if (objective.tracked()) adam_step(run.params, view.gradients(objective), AdamConfig{cfg.lr});
      r.steps = step + 1;
    }
    r.sat = satisfiability_value(run);
    r.phi = closed_truth(run, phi);
    r.atoms = propositional_truths(run);
    if (r.sat >= cfg.q && r.phi < cfg.q) {
      r.verdict = Verdict::NotEntailed;
      r.counterexample = run.params;
    } else if (found) {
      // The last iterate slipped back; report the counterexample seen on the way.
      r.verdict = Verdict::NotEntailed;
      r.counterexample = found;
      r.sat = found_sat;
      r.phi = found_phi;
      run.params = *found;
      r.atoms = propositional_truths(run);
    } else {
      r.verdict = r.sat >= cfg.q ? Verdict::Entailed : Verdict::EntailedVacuously;
    }
    if (!have_best || r.verdict == Verdict::NotEntailed ||
        (best.verdict == Verdict::EntailedVacuously && r.verdict == Verdict::Entailed)) {
      best = std::move(r);
      have_best = true;
    }
    if (best.verdict == Verdict::NotEntailed) break;
  }
  return best;
}

}  // namespace rl
