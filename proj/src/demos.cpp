#include "rl/demos.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "rl/datasets.hpp"
#include "rl/ops.hpp"
#include "rl/reasoning.hpp"
#include "rl/training.hpp"

namespace rl {

namespace fs = std::filesystem;

std::string corpus_path(const std::string& file) {
  const char* env = std::getenv("RL_CORPUS_DIR");
  return (fs::path(env && *env ? env : RL_CORPUS_DIR) / file).string();
}

std::string data_path(const std::string& file) {
  const char* env = std::getenv("RL_DATA_DIR");
  return (fs::path(env && *env ? env : RL_DATA_DIR) / file).string();
}

std::string to_string(const Threshold& t) {
  static const char* ops[] = {">=", ">", "<=", "<"};
  return t.metric + " " + ops[static_cast<int>(t.op)] + " " + format_number(t.value);
}

namespace {

using Op = Threshold::Op;

struct Ctx {
  const DemoOptions& opts;
  std::uint64_t seed;
  fs::path out;
  DemoResult& result;

  std::string file(const std::string& name) const { return (out / name).string(); }
  void say(const std::string& line) const { result.report.push_back(line); }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

Theory load_demo_theory(const std::string& file, const Ctx& c) {
  BuildOptions b;
  b.data_dir = c.out.string();
  b.overrides = c.opts.overrides;
  if (c.opts.epochs) b.overrides.emplace_back("epochs", std::to_string(*c.opts.epochs));
  b.seed = c.seed;
  return load_theory(corpus_path(file), b);
}

QueryResult ask(const Theory& t, const std::string& text, std::map<std::string, Tensor> unseen = {},
                std::optional<double> forall_p = {}) {
  QueryOptions o;
  o.unseen = std::move(unseen);
  o.forall_p = forall_p;
  return query(t, text, o);
}

// Rows of a [k, m] grid whose axes are (row_axis, other).
std::vector<std::vector<double>> grid_rows(const QueryResult& r, const std::string& row_axis) {
  Tensor v = r.values;
  if (v.rank() != 2) throw ShapeError("expected a two-axis query result");
  if (r.axes[0] != row_axis) v = permute(v, {1, 0});
  std::size_t k = v.dim(0), m = v.dim(1);
  std::vector<std::vector<double>> out(k, std::vector<double>(m));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i][j] = v[i * m + j];
  }
  return out;
}

// Per-label truth of pred(x, label) on the instances x, as rows.
std::vector<std::vector<double>> label_scores(const Theory& t, const std::string& pred,
                                              const std::vector<std::string>& labels, const Tensor& x) {
  std::vector<std::vector<double>> rows(x.dim(0), std::vector<double>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j) {
    auto r = ask(t, pred + "(x, " + labels[j] + ")", {{"x", x}});
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i][j] = r.values[i];
  }
  return rows;
}

std::vector<int> int_column(const Dataset& d, std::size_t col) {
  std::vector<int> out;
  for (double v : d.column_values(col)) out.push_back(static_cast<int>(std::lround(v)));
  return out;
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

double final_sat(const Theory& t) {
  ParamView view(t.params);
  EvalContext ctx(t.env, view, scheduled_config(t, t.train.epochs));
  ctx.strict_diag = t.strict_diag;
  return satisfiability(t, ctx).sat.item();
}

std::vector<double> axiom_truths(const Theory& t) {
  ParamView view(t.params);
  EvalContext ctx(t.env, view, scheduled_config(t, t.train.epochs));
  std::vector<double> out;
  for (const auto& v : satisfiability(t, ctx).truths) out.push_back(v.item());
  return out;
}

void write_common(const Ctx& c, const MetricsLog& log, const ParamStore& params) {
  log.write_jsonl(c.file("metrics.jsonl"));
  log.write_csv(c.file("metrics.csv"));
  save_params(params, c.file("params.bin"));
}

// Logs metric hooks every `every` epochs and at the last epoch.
EpochHook every_n(std::size_t every, std::size_t epochs, std::function<void(const Theory&, MetricRecord&)> f) {
  return [=](std::size_t epoch, const Theory& t, MetricRecord& r) {
    if (epoch % every == 0 || epoch == epochs) f(t, r);
  };
}

void run_training(Ctx& c, Theory& t, EpochHook hook) {
  MetricsLog log = learn(t, LearnOptions{std::move(hook), true});
  write_common(c, log, t.params);
  c.result.log = std::move(log);
}

// ---- binary ----

void demo_binary(Ctx& c) {
  Dataset all = synth_binary(c.seed);
  Rng rng(c.seed + 101);
  Split s = split_rows(all, 50, rng);
  s.train.name = "binary_train";
  write_csv(c.file("binary_train.csv"), s.train);
  write_csv(c.file("binary_test.csv"), s.test);
  Theory t = load_demo_theory(demo_theory_file("binary"), c);
  Tensor xtr = s.train.matrix(0, 2), xte = s.test.matrix(0, 2);
  auto ytr = int_column(s.train, 2), yte = int_column(s.test, 2);
  auto accuracy = [&](const Theory& th, const Tensor& x, const std::vector<int>& y) {
    auto r = ask(th, "A(x)", {{"x", x}});
    std::size_t hit = 0;
    for (std::size_t i = 0; i < y.size(); ++i) hit += (r.values[i] > 0.5) == (y[i] == 1);
    return static_cast<double>(hit) / static_cast<double>(y.size());
  };
  run_training(c, t, every_n(1, t.train.epochs, [&](const Theory& th, MetricRecord& r) {
    r.set("train_accuracy", accuracy(th, xtr, ytr));
    r.set("test_accuracy", accuracy(th, xte, yte));
  }));

  // Truth of A over a 50 x 50 grid of the unit square.
  const std::size_t n = 50;
  std::vector<double> pts;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      pts.push_back((static_cast<double>(i) + 0.5) / n);
      pts.push_back((static_cast<double>(j) + 0.5) / n);
    }
  }
  auto grid = ask(t, "A(x)", {{"x", Tensor({n * n, 2}, pts)}});
  Dataset g{"decision_grid", "query", {"x0", "x1", "truth"}, n * n, {}};
  for (std::size_t k = 0; k < n * n; ++k) g.values.insert(g.values.end(), {pts[2 * k], pts[2 * k + 1], grid.values[k]});
  write_csv(c.file("decision_grid.csv"), g);

  auto& sum = c.result.summary;
  sum.set("sat", final_sat(t));
  sum.set("train_accuracy", accuracy(t, xtr, ytr));
  sum.set("test_accuracy", accuracy(t, xte, yte));
  sum.set("train_positives", std::count(ytr.begin(), ytr.end(), 1));
}

// ---- multiclass ----

void demo_multiclass(Ctx& c) {
  Dataset iris = load_csv(data_path("iris.csv"), CsvSchema{{"species"}, 5});
  Rng rng(c.seed + 202);
  Split s = split_rows(iris, 112, rng);
  standardize(s, {0, 1, 2, 3});
  write_csv(c.file("iris_train.csv"), s.train);
  write_csv(c.file("iris_test.csv"), s.test);
  Theory t = load_demo_theory(demo_theory_file("multiclass"), c);
  const std::vector<std::string> labels{"l_A", "l_B", "l_C"};
  Tensor xtr = s.train.matrix(0, 4), xte = s.test.matrix(0, 4);
  auto ytr = int_column(s.train, 4), yte = int_column(s.test, 4);
  auto acc = [&](const Theory& th, const Tensor& x, const std::vector<int>& y) {
    return top1_accuracy(label_scores(th, "P", labels, x), y);
  };
  run_training(c, t, every_n(1, t.train.epochs, [&](const Theory& th, MetricRecord& r) {
    r.set("train_accuracy", acc(th, xtr, ytr));
    r.set("test_accuracy", acc(th, xte, yte));
  }));
  auto scores = label_scores(t, "P", labels, xte);
  Dataset pred{"predictions", "query", {"label", "predicted", "p_A", "p_B", "p_C"}, yte.size(), {}};
  for (std::size_t i = 0; i < yte.size(); ++i) {
    pred.values.insert(pred.values.end(), {static_cast<double>(yte[i]), static_cast<double>(argmax(scores[i])),
                                           scores[i][0], scores[i][1], scores[i][2]});
  }
  write_csv(c.file("test_predictions.csv"), pred);
  auto& sum = c.result.summary;
  sum.set("sat", final_sat(t));
  sum.set("train_accuracy", acc(t, xtr, ytr));
  sum.set("test_accuracy", top1_accuracy(scores, yte));
}

// ---- multilabel ----

void demo_multilabel(Ctx& c) {
  Dataset crabs = load_csv(data_path("crabs.csv"), CsvSchema{{"blue", "orange", "male", "female"}, 9});
  Rng rng(c.seed + 303);
  Split s = split_rows(crabs, 150, rng);
  standardize(s, {0, 1, 2, 3, 4});
  write_csv(c.file("crabs_train.csv"), s.train);
  write_csv(c.file("crabs_test.csv"), s.test);
  Theory t = load_demo_theory(demo_theory_file("multilabel"), c);
  const std::vector<std::string> labels{"l_blue", "l_orange", "l_male", "l_female"};
  Tensor xte = s.test.matrix(0, 5);
  std::vector<std::vector<int>> yte(s.test.rows, std::vector<int>(4));
  for (std::size_t i = 0; i < s.test.rows; ++i) {
    for (std::size_t j = 0; j < 4; ++j) yte[i][j] = static_cast<int>(s.test.at(i, 5 + j));
  }
  const std::vector<std::pair<std::string, std::string>> phis = {
      {"phi1", "forall x: P(x, l_blue) -> ~P(x, l_orange)"},
      {"phi2", "forall x: P(x, l_blue) -> P(x, l_orange)"},
      {"phi3", "forall x: P(x, l_blue) -> P(x, l_male)"},
  };
  auto queries = [&](const Theory& th, MetricRecord& r) {
    r.set("test_hamming_accuracy", hamming_accuracy(label_scores(th, "P", labels, xte), yte));
    for (const auto& [name, f] : phis) r.set("query_" + name, ask(th, f, {}, 5.0).values.item());
  };
  run_training(c, t, every_n(1, t.train.epochs, queries));
  auto& sum = c.result.summary;
  sum.set("sat", final_sat(t));
  queries(t, sum);
}

// ---- addition ----

void demo_addition(Ctx& c, int operand_digits) {
  const bool single = operand_digits == 1;
  const std::size_t n_train = single ? 3000 : 1000, n_test = 500;
  Dataset train = synth_addition(c.seed, n_train, operand_digits);
  Dataset test = synth_addition(c.seed + 1000003, n_test, operand_digits);
  write_csv(c.file(single ? "addition_train.csv" : "addition_multi_train.csv"), train);
  write_csv(c.file(single ? "addition_test.csv" : "addition_multi_test.csv"), test);
  Theory t = load_demo_theory(demo_theory_file(single ? "addition-single" : "addition-multi"), c);
  const int images = 2 * operand_digits;
  const std::string img_var = single ? "x" : "x1";
  const std::size_t n_col = test.column("n");
  auto digit_accuracy = [&](const Theory& th, const Dataset& d, double* sum_acc) {
    std::vector<std::vector<int>> pred(static_cast<std::size_t>(images));
    for (int k = 0; k < images; ++k) {
      auto r = ask(th, "digit(" + img_var + ", d1)", {{img_var, d.matrix(static_cast<std::size_t>(k) * 10, 10)}});
      for (const auto& row : grid_rows(r, img_var)) pred[static_cast<std::size_t>(k)].push_back(argmax(row));
    }
    std::size_t digit_hits = 0, sum_hits = 0;
    for (std::size_t i = 0; i < d.rows; ++i) {
      std::vector<int> p(static_cast<std::size_t>(images));
      for (int k = 0; k < images; ++k) {
        p[static_cast<std::size_t>(k)] = pred[static_cast<std::size_t>(k)][i];
        digit_hits += p[static_cast<std::size_t>(k)] == static_cast<int>(d.at(i, n_col + 1 + static_cast<std::size_t>(k)));
      }
      double n = single ? p[0] + p[1] : 10 * p[0] + p[1] + 10 * p[2] + p[3];
      sum_hits += n == d.at(i, n_col);
    }
    *sum_acc = static_cast<double>(sum_hits) / static_cast<double>(d.rows);
    return static_cast<double>(digit_hits) / static_cast<double>(d.rows * static_cast<std::size_t>(images));
  };
  auto metrics = [&](std::size_t epoch, const Theory& th, MetricRecord& r) {
    double sum_acc = 0;
    r.set("test_digit_accuracy", digit_accuracy(th, test, &sum_acc));
    r.set("test_accuracy", sum_acc);
    r.set("exists_p", scheduled_config(th, epoch).exists.p);
  };
  run_training(c, t, metrics);
  auto& sum = c.result.summary;
  sum.set("sat", final_sat(t));
  double train_sum = 0;
  digit_accuracy(t, train, &train_sum);
  sum.set("train_accuracy", train_sum);
  metrics(t.train.epochs, t, sum);
  // Mean test accuracy over the logged epochs, a learning-speed summary.
  auto curve = c.result.log.series("test_accuracy");
  double area = 0;
  for (double v : curve) area += v;
  sum.set("mean_test_accuracy", curve.empty() ? 0.0 : area / static_cast<double>(curve.size()));
}

// ---- regression ----

void demo_regression(Ctx& c) {
  Dataset re = load_csv(data_path("real_estate.csv"), CsvSchema{{"Y_price"}, 7});
  Rng rng(c.seed + 505);
  Split s = split_rows(re, 330, rng);
  standardize(s, {0, 1, 2, 3, 4, 5});
  write_csv(c.file("regression_train.csv"), s.train);
  write_csv(c.file("regression_test.csv"), s.test);
  Theory t = load_demo_theory(demo_theory_file("regression"), c);
  Tensor xtr = s.train.matrix(0, 6), xte = s.test.matrix(0, 6);
  auto ytr = s.train.column_values(6), yte = s.test.column_values(6);
  auto predict = [&](const Theory& th, const Tensor& x) { return ask(th, "f(x)", {{"x", x}}).values.to_vector(); };
  run_training(c, t, every_n(1, t.train.epochs, [&](const Theory& th, MetricRecord& r) {
    r.set("train_rmse", rmse(predict(th, xtr), ytr));
    r.set("test_rmse", rmse(predict(th, xte), yte));
  }));
  auto p = predict(t, xte);
  Dataset pred{"predictions", "query", {"target", "predicted"}, p.size(), {}};
  for (std::size_t i = 0; i < p.size(); ++i) pred.values.insert(pred.values.end(), {yte[i], p[i]});
  write_csv(c.file("test_predictions.csv"), pred);
  auto curve = c.result.log.series("test_rmse");
  auto& sum = c.result.summary;
  sum.set("sat", final_sat(t));
  sum.set("initial_test_rmse", curve.front());
  sum.set("test_rmse", curve.back());
  sum.set("rmse_ratio", curve.back() / curve.front());
  // Fraction of epochs whose RMSE is at or below the value 10 epochs before.
  std::size_t down = 0, total = 0;
  for (std::size_t i = 10; i < curve.size(); ++i, ++total) down += curve[i] <= curve[i - 10];
  sum.set("rmse_decreasing_fraction", total ? static_cast<double>(down) / static_cast<double>(total) : 1.0);
}

// ---- clustering ----

void demo_clustering(Ctx& c) {
  Dataset centers;
  Dataset pts = synth_clustering(c.seed, &centers);
  write_csv(c.file("clustering.csv"), pts);
  write_csv(c.file("centers.csv"), centers);
  Theory t = load_demo_theory(demo_theory_file("clustering"), c);
  auto blobs = int_column(pts, 2);
  auto assign = [&](const Theory& th) {
    std::vector<int> out;
    for (const auto& row : grid_rows(ask(th, "C(x, c)"), "x")) out.push_back(argmax(row));
    return out;
  };
  // Points whose cluster is the most common one of their blob.
  auto agreement = [&](const std::vector<int>& cl) {
    std::map<int, std::map<int, std::size_t>> counts;
    for (std::size_t i = 0; i < cl.size(); ++i) ++counts[blobs[i]][cl[i]];
    std::size_t agree = 0;
    for (const auto& [b, m] : counts) {
      std::size_t best = 0;
      for (const auto& [k, n] : m) best = std::max(best, n);
      agree += best;
    }
    return static_cast<double>(agree) / static_cast<double>(cl.size());
  };
  run_training(c, t, every_n(25, t.train.epochs, [&](const Theory& th, MetricRecord& r) {
    r.set("blob_agreement", agreement(assign(th)));
  }));
  auto cl = assign(t);
  auto probs = grid_rows(ask(t, "C(x, c)"), "x");
  Dataset a{"assignments", "query", {"x0", "x1", "blob", "cluster", "p0", "p1", "p2", "p3"}, pts.rows, {}};
  for (std::size_t i = 0; i < pts.rows; ++i) {
    a.values.insert(a.values.end(), {pts.at(i, 0), pts.at(i, 1), pts.at(i, 2), static_cast<double>(cl[i]),
                                     probs[i][0], probs[i][1], probs[i][2], probs[i][3]});
  }
  write_csv(c.file("cluster_assignments.csv"), a);
  auto& sum = c.result.summary;
  sum.set("sat", final_sat(t));
  sum.set("blob_agreement", agreement(cl));
  std::vector<int> distinct = cl;
  std::sort(distinct.begin(), distinct.end());
  sum.set("clusters_used", static_cast<double>(std::unique(distinct.begin(), distinct.end()) - distinct.begin()));
}

// ---- smokers ----

void demo_smokers(Ctx& c) {
  Theory t = load_demo_theory(demo_theory_file("smokers"), c);
  const std::string phi1 = "forall x: C(x) -> S(x)";
  const std::string phi2 = "forall x, y: C(x) | C(y) -> F(x, y)";
  auto queries = [&](const Theory& th, MetricRecord& r) {
    r.set("query_phi1", ask(th, phi1, {}, 5.0).values.item());
    r.set("query_phi2", ask(th, phi2, {}, 5.0).values.item());
  };
  run_training(c, t, every_n(10, t.train.epochs, queries));

  auto f = smokers_facts();
  auto s = ask(t, "S(x)").values, cc = ask(t, "C(x)").values;
  auto fr = grid_rows(ask(t, "F(x, y)"), "x");
  Dataset truths{"smokers_truths", "query", {"person", "S", "C"}, f.people.size(), {}};
  Dataset friends{"friendship", "query", {"person"}, f.people.size(), {}};
  Dataset emb{"embeddings", "parameters", {"person", "e0", "e1", "e2", "e3", "e4"}, f.people.size(), {}};
  for (const auto& p : f.people) friends.columns.push_back("F_" + p);
  for (std::size_t i = 0; i < f.people.size(); ++i) {
    double id = static_cast<double>(i);
    truths.values.insert(truths.values.end(), {id, s[i], cc[i]});
    friends.values.push_back(id);
    friends.values.insert(friends.values.end(), fr[i].begin(), fr[i].end());
    emb.values.push_back(id);
    auto e = t.params.value("const." + f.people[i]).to_vector();
    emb.values.insert(emb.values.end(), e.begin(), e.end());
  }
  write_csv(c.file("smokers_truths.csv"), truths);
  write_csv(c.file("friendship.csv"), friends);
  write_csv(c.file("embeddings.csv"), emb);
  {
    std::ofstream legend(c.file("people.csv"));
    legend << "person,name\n";
    for (std::size_t i = 0; i < f.people.size(); ++i) legend << i << "," << f.people[i] << "\n";
  }
  auto& sum = c.result.summary;
  sum.set("sat", final_sat(t));
  queries(t, sum);
  auto truths_now = axiom_truths(t);
  for (std::size_t i = 0; i < truths_now.size(); ++i) sum.set("truth." + t.axiom_label(i), truths_now[i]);
}

// ---- refute ----

void demo_refute(Ctx& c) {
  DemoOptions o = c.opts;
  o.epochs.reset();
  Ctx plain{o, c.seed, c.out, c.result};
  Theory t = load_demo_theory(demo_theory_file("refute"), plain);
  if (c.opts.epochs) t.refute.epochs = *c.opts.epochs;
  auto phi = parse_formula("A", t.env.signature);
  RefutationResult r = reason_refute(t, *phi, t.refute);
  r.trace.write_jsonl(c.file("metrics.jsonl"));
  r.trace.write_csv(c.file("metrics.csv"));
  save_params(r.counterexample ? *r.counterexample : t.params, c.file("params.bin"));
  c.result.log = r.trace;
  auto atom = [](const std::vector<std::pair<std::string, double>>& v, const std::string& n) {
    for (const auto& [k, x] : v) {
      if (k == n) return x;
    }
    return std::nan("");
  };
  auto& sum = c.result.summary;
  sum.set("not_entailed", r.verdict == Verdict::NotEntailed ? 1.0 : 0.0);
  sum.set("sat", r.sat);
  sum.set("phi", r.phi);
  sum.set("a", atom(r.atoms, "A"));
  sum.set("b", atom(r.atoms, "B"));
  sum.set("steps", static_cast<double>(r.steps));
  c.say("refutation of (A | B) |= A: " + to_string(r.verdict) + ", Sat* = " + fmt(r.sat) + ", a = " +
        fmt(sum.at("a")) + ", b = " + fmt(sum.at("b")) + " after " + std::to_string(r.steps) + " steps");

  auto qal = reason_query_after_learning(t, *phi, t.refute.q, t.query_restarts);
  std::ofstream out(c.file("query_after_learning.csv"));
  out << "restart,seed,sat,phi,a,b\n";
  double min_a = 1, min_b = 1;
  for (std::size_t i = 0; i < qal.restarts.size(); ++i) {
    const auto& o2 = qal.restarts[i];
    double a = atom(o2.atoms, "A"), b = atom(o2.atoms, "B");
    min_a = std::min(min_a, a);
    min_b = std::min(min_b, b);
    out << i << "," << o2.seed << "," << format_number(o2.sat) << "," << format_number(o2.phi) << ","
        << format_number(a) << "," << format_number(b) << "\n";
  }
  sum.set("qal_entailed", qal.entailed ? 1.0 : 0.0);
  sum.set("qal_min_a", min_a);
  sum.set("qal_min_b", min_b);
  c.say("query after learning, " + std::to_string(qal.restarts.size()) + " restarts: " +
        (qal.entailed ? "entailed" : "NOT entailed") + " (min a = " + fmt(min_a) + ", min b = " + fmt(min_b) + ")");
}

using DemoFn = std::function<void(Ctx&)>;

const std::vector<std::pair<std::string, DemoFn>>& registry() {
  static const std::vector<std::pair<std::string, DemoFn>> r = {
      {"binary", demo_binary},
      {"multiclass", demo_multiclass},
      {"multilabel", demo_multilabel},
      {"addition-single", [](Ctx& c) { demo_addition(c, 1); }},
      {"addition-multi", [](Ctx& c) { demo_addition(c, 2); }},
      {"regression", demo_regression},
      {"clustering", demo_clustering},
      {"smokers", demo_smokers},
      {"refute", demo_refute},
  };
  return r;
}

bool holds(const Threshold& t, double v) {
  switch (t.op) {
    case Op::Ge: return v >= t.value;
    case Op::Gt: return v > t.value;
    case Op::Le: return v <= t.value;
    case Op::Lt: return v < t.value;
  }
  return false;
}

}  // namespace

std::vector<std::string> demo_ids() {
  std::vector<std::string> out;
  for (const auto& [id, fn] : registry()) out.push_back(id);
  return out;
}

bool is_demo(const std::string& id) {
  auto ids = demo_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

const std::vector<Threshold>& demo_thresholds(const std::string& id) {
  static const std::map<std::string, std::vector<Threshold>> table = {
      {"binary", {{"test_accuracy", Op::Ge, 0.9}, {"sat", Op::Ge, 0.85}}},
      {"multiclass", {{"test_accuracy", Op::Ge, 0.9}}},
      {"multilabel",
       {{"test_hamming_accuracy", Op::Ge, 0.9},
        {"query_phi1", Op::Gt, 0.7},
        {"query_phi2", Op::Lt, 0.3},
        {"query_phi3", Op::Lt, 0.3}}},
      {"addition-single", {{"test_accuracy", Op::Ge, 0.85}}},
      {"addition-multi", {{"test_accuracy", Op::Ge, 0.85}}},
      {"regression", {{"rmse_ratio", Op::Lt, 0.25}, {"sat", Op::Gt, 0.4}}},
      {"clustering", {{"sat", Op::Ge, 0.8}, {"blob_agreement", Op::Ge, 0.95}}},
      {"smokers",
       {{"sat", Op::Gt, 0.7},
        {"query_phi1", Op::Gt, 0.8},
        {"query_phi2", Op::Lt, 0.4},
        {"truth.symmetric", Op::Ge, 0.9}}},
      {"refute",
       {{"not_entailed", Op::Ge, 1.0},
        {"sat", Op::Ge, 0.95},
        {"a", Op::Lt, 0.05},
        {"b", Op::Gt, 0.95},
        {"qal_min_a", Op::Ge, 0.99},
        {"qal_min_b", Op::Ge, 0.99}}},
  };
  auto it = table.find(id);
  if (it == table.end()) throw std::invalid_argument("unknown demo '" + id + "'");
  return it->second;
}

std::string demo_theory_file(const std::string& id) {
  if (!is_demo(id)) throw std::invalid_argument("unknown demo '" + id + "'");
  if (id == "addition-single") return "addition_single.rl";
  if (id == "addition-multi") return "addition_multi.rl";
  return id + ".rl";
}

CheckOutcome self_check(const std::string& id, const MetricRecord& summary) {
  CheckOutcome out;
  for (const auto& t : demo_thresholds(id)) {
    auto v = summary.get(t.metric);
    if (!v || !holds(t, *v)) {
      out.passed = false;
      out.failures.push_back(to_string(t) + " (got " + (v ? format_number(*v) : std::string("nothing")) + ")");
    }
  }
  return out;
}

DemoResult run_demo(const std::string& id, const DemoOptions& opts) {
  const auto& reg = registry();
  auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first == id; });
  if (it == reg.end()) throw std::invalid_argument("unknown demo '" + id + "'");
  DemoResult result;
  result.id = id;
  result.seed = opts.seed;
  result.out_dir = opts.out_dir;
  fs::create_directories(opts.out_dir);
  Ctx c{opts, opts.seed, fs::path(opts.out_dir), result};
  it->second(c);
  {
    std::ofstream s(c.file("summary.csv"));
    s << "metric,value\n";
    for (const auto& [k, v] : result.summary.fields()) s << k << "," << format_number(v) << "\n";
  }
  return result;
}

int demo_main(const std::string& id, const DemoOptions& opts, std::ostream& out) {
  if (!is_demo(id)) {
    out << "unknown demo '" << id << "'; choose one of:";
    for (const auto& d : demo_ids()) out << " " << d;
    out << "\n";
    return 2;
  }
  const std::size_t runs = std::max<std::size_t>(opts.runs, 1);
  std::vector<DemoResult> results(runs);
  std::vector<std::string> errors(runs);
  auto one = [&](std::size_t i) {
    DemoOptions o = opts;
    o.seed = opts.seed + i;
    if (runs > 1) o.out_dir = (fs::path(opts.out_dir) / ("seed_" + std::to_string(o.seed))).string();
    try {
      results[i] = run_demo(id, o);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  if (runs == 1) {
    one(0);
  } else {
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < runs; start += workers) {
      std::vector<std::thread> pool;
      for (std::size_t i = start; i < std::min(runs, start + workers); ++i) pool.emplace_back(one, i);
      for (auto& th : pool) th.join();
    }
  }
  for (std::size_t i = 0; i < runs; ++i) {
    if (!errors[i].empty()) {
      out << "demo " << id << " seed " << opts.seed + i << " failed: " << errors[i] << "\n";
      return 1;
    }
  }

  // Mean and 95% interval per summary metric, in first-run order.
  MetricRecord mean;
  std::ofstream summary;
  if (runs > 1) {
    summary.open((fs::path(opts.out_dir) / "summary.csv").string());
    summary << "metric,mean,ci95,n\n";
  }
  for (const auto& [k, v0] : results[0].summary.fields()) {
    std::vector<double> xs;
    for (const auto& r : results) {
      if (auto v = r.summary.get(k)) xs.push_back(*v);
    }
    MeanCi ci = mean_ci95(xs);
    mean.set(k, ci.mean);
    if (runs > 1) {
      summary << k << "," << format_number(ci.mean) << "," << format_number(ci.half_width) << "," << ci.n << "\n";
      out << "  " << k << " = " << fmt(ci.mean) << " +- " << fmt(ci.half_width) << "\n";
    } else {
      out << "  " << k << " = " << fmt(ci.mean) << "\n";
    }
  }
  for (const auto& r : results) {
    for (const auto& line : r.report) out << (runs > 1 ? "  [seed " + std::to_string(r.seed) + "] " : "  ") << line << "\n";
  }
  out << "outputs in " << opts.out_dir << "\n";
  if (opts.self_check) {
    CheckOutcome chk = self_check(id, mean);
    if (!chk.passed) {
      for (const auto& f : chk.failures) out << "self-check FAILED: " << f << "\n";
      return 1;
    }
    out << "self-check passed\n";
  }
  return 0;
}

}  // namespace rl
