#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gradcheck.hpp"
#include "rl/datasets.hpp"
#include "rl/ops.hpp"
#include "rl/reasoning.hpp"
#include "rl/training.hpp"

using namespace rl;
namespace fs = std::filesystem;

namespace {

Theory theory(const std::string& text, BuildOptions opts = {}) {
  return build_theory(parse_theory(text).value(), opts);
}

const char* kPropositional =
    "pred A = trainable(0.3)\n"
    "pred B = trainable(0.6)\n"
    "axiom A | B\n"
    "config preset = product\n";

// A tiny data-bound theory with an MLP predicate.
std::string write_points_csv() {
  fs::path dir = fs::path(RL_TEST_TMP) / "training";
  fs::create_directories(dir);
  std::ofstream out(dir / "points.csv");
  out << "x0,x1,label\n";
  Rng rng(3);
  for (int i = 0; i < 40; ++i) {
    double a = uniform(rng, 0, 1), b = uniform(rng, 0, 1);
    out << a << "," << b << "," << (a > b ? 1 : 0) << "\n";
  }
  return dir.string();
}

const char* kPoints =
    "domain pt[2]\n"
    "data \"points.csv\" columns 0, 1 where 2 = 1 as var xp: pt\n"
    "data \"points.csv\" columns 0, 1 where 2 = 0 as var xn: pt\n"
    "pred P: pt = mlp(8 elu, 1 sigmoid)\n"
    "axiom forall xp: P(xp)\n"
    "axiom forall xn: ~P(xn)\n"
    "config epochs = 30\n"
    "config batch_size = 8\n"
    "config lr = 0.01\n";

}  // namespace

TEST(Satisfiability, ProductDisjunction) {
  Theory t = theory(kPropositional);
  double a = 0.3, b = 0.6;
  EXPECT_NEAR(satisfiability_value(t), a + b - a * b, 1e-12);
}

TEST(Satisfiability, AllTrueAxiomsGiveOne) {
  Theory t = theory("pred A = truth(1)\npred B = truth(1)\naxiom A\naxiom A & B\naxiom B -> A\n"
                    "config preset = product\n");
  EXPECT_DOUBLE_EQ(satisfiability_value(t), 1.0);
}

TEST(Satisfiability, SingleAxiomIdentity) {
  for (double v : {0.0, 0.2, 0.77, 1.0}) {
    Theory t = theory("pred A = truth(" + format_number(v) + ")\naxiom A\nconfig preset = product\n");
    EXPECT_NEAR(satisfiability_value(t), v, 1e-15);
  }
}

TEST(Satisfiability, PerAxiomOverrideChangesOnlyThatAxiom) {
  const std::string base =
      "domain d\nvar x: d = [1, 2, 3]\nconst c: d = [0]\n"
      "pred P: d = mlp(4 elu, 1 sigmoid)\n";
  Theory plain = theory(base + "axiom forall x: P(x)\nconfig seed = 4\n");
  Theory over = theory(base + "axiom @forall(p=6) forall x: P(x)\nconfig seed = 4\n");
  double p2 = satisfiability_value(plain);
  double p6 = satisfiability_value(over);
  EXPECT_LT(p6, p2);  // larger p punishes outliers harder
}

TEST(Schedule, StepAndLinear) {
  auto s = parse_schedule("0:1, 100:6");
  EXPECT_EQ(schedule_value(s, 0, false, 9), 1);
  EXPECT_EQ(schedule_value(s, 99, false, 9), 1);
  EXPECT_EQ(schedule_value(s, 100, false, 9), 6);
  EXPECT_DOUBLE_EQ(schedule_value(s, 50, true, 9), 3.5);
  EXPECT_EQ(schedule_value({}, 50, true, 9), 9);
  EXPECT_THROW(parse_schedule("5:1, 5:2"), std::invalid_argument);
  EXPECT_THROW(parse_schedule("5"), std::invalid_argument);
}

TEST(Settings, ApplyAndReject) {
  Theory t = theory(kPropositional);
  t.apply_setting("epochs", "12");
  t.apply_setting("reg", "l2");
  t.apply_setting("lambda", "0.5");
  t.apply_setting("forall", "pmean_error:p=3");
  EXPECT_EQ(t.train.epochs, 12u);
  EXPECT_EQ(t.train.reg, Regularizer::L2);
  EXPECT_EQ(t.fuzzy.forall.kind, AggregatorKind::PMeanError);
  EXPECT_EQ(t.fuzzy.forall.p, 3.0);
  EXPECT_THROW(t.apply_setting("epochs", "0"), std::invalid_argument);
  EXPECT_THROW(t.apply_setting("refute.q", "0.4"), std::invalid_argument);
  EXPECT_THROW(t.apply_setting("bogus", "1"), std::invalid_argument);

  fs::path p = fs::path(RL_TEST_TMP) / "settings.cfg";
  fs::create_directories(p.parent_path());
  std::ofstream(p) << "# comment\nepochs = 7\n\nlr=0.5 # trailing\n";
  auto s = read_settings_file(p.string());
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1], (std::pair<std::string, std::string>{"lr", "0.5"}));
}

TEST(Build, DataGroupsShareIndices) {
  std::string dir = write_points_csv();
  Theory t = theory(kPoints, {dir, {}, {}});
  ASSERT_EQ(t.groups.size(), 2u);
  EXPECT_EQ(t.groups[0].rows + t.groups[1].rows, 40u);
  EXPECT_THROW(theory(kPoints, {"/nonexistent", {}, {}}), LogicError);
}

TEST(Learn, LossSatDualityAndProgress) {
  std::string dir = write_points_csv();
  Theory t = theory(kPoints, {dir, {{"reg", "l2"}, {"lambda", "0.001"}}, {}});
  MetricsLog log = learn(t);
  ASSERT_EQ(log.records().size(), 31u);
  for (const auto& r : log.records()) {
    EXPECT_NEAR(r.at("loss") + r.at("sat"), 1.0 + 0.001 * r.at("reg"), 1e-12);
  }
  EXPECT_GT(satisfiability_value(t), log.records().front().at("sat"));
}

TEST(Learn, SeedDeterminism) {
  std::string dir = write_points_csv();
  Theory a = theory(kPoints, {dir, {}, 5});
  Theory b = theory(kPoints, {dir, {}, 5});
  auto la = learn(a), lb = learn(b);
  ASSERT_EQ(la.records().size(), lb.records().size());
  for (std::size_t i = 0; i < la.records().size(); ++i) {
    EXPECT_EQ(la.records()[i].fields(), lb.records()[i].fields());
  }
  EXPECT_EQ(params_hash(a.params), params_hash(b.params));
}

TEST(Learn, L2ShrinksParameters) {
  std::string dir = write_points_csv();
  auto norm_after = [&](double lambda) {
    Theory t = theory(kPoints, {dir, {{"reg", "l2"}, {"lambda", format_number(lambda)}}, 1});
    learn(t);
    double s = 0;
    for (const auto& slot : t.params.slots()) {
      for (double v : slot.value.values()) s += v * v;
    }
    return std::sqrt(s);
  };
  EXPECT_LT(norm_after(0.05), norm_after(0.0));
}

TEST(Learn, FrozenGroundingsKeepSat) {
  Theory t = theory("pred A = truth(0.4)\npred B = truth(0.7)\naxiom A -> B\naxiom ~A\nconfig epochs = 5\n");
  auto log = learn(t);
  auto sat = log.series("sat");
  for (double s : sat) EXPECT_EQ(s, sat.front());
}

TEST(Learn, NanLossAborts) {
  Theory t = theory("pred A = trainable(0.5)\naxiom A\nconfig epochs = 3\nconfig preset = product\n"
                    "config sat = pmean_error:p=2\n");
  t.params.set("pred.A", Tensor::scalar(std::nan("")));
  EXPECT_THROW(learn(t), TrainingError);
}

TEST(Learn, GradientsMatchFiniteDifferences) {
  std::string dir = write_points_csv();
  Theory t = theory(kPoints, {dir, {{"reg", "l2"}, {"lambda", "0.01"}}, 2});
  auto r = check::theory_grad_check(t);
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Query, PureAndTyped) {
  std::string dir = write_points_csv();
  Theory t = theory(kPoints + std::string("const c: pt = [0.25, 0.75]\n"), {dir, {}, {}});
  auto before = params_hash(t.params);
  auto truth = query(t, "forall xp: P(xp)");
  EXPECT_EQ(truth.kind, QueryKind::Truth);
  EXPECT_EQ(truth.values.rank(), 0u);
  auto value = query(t, "c");
  EXPECT_EQ(value.kind, QueryKind::Value);
  EXPECT_EQ(value.values.to_vector(), (std::vector<double>{0.25, 0.75}));
  auto open = query(t, "P(xp)");
  EXPECT_EQ(open.axes, std::vector<std::string>{"xp"});
  EXPECT_EQ(params_hash(t.params), before);
}

TEST(Query, GeneralizationOverUnseenData) {
  std::string dir = write_points_csv();
  Theory t = theory(kPoints, {dir, {}, {}});
  QueryOptions o;
  o.unseen["xp"] = Tensor({5, 2}, std::vector<double>(10, 0.5));
  auto r = query(t, "P(xp)", o);
  EXPECT_EQ(r.kind, QueryKind::GeneralizationTruth);
  EXPECT_EQ(r.values.shape(), (Shape{5}));
  for (double v : r.values.values()) EXPECT_TRUE(v >= 0 && v <= 1);
  o.unseen["xp"] = Tensor({5, 3}, std::vector<double>(15, 0.5));
  EXPECT_THROW(query(t, "P(xp)", o), ShapeError);
}

TEST(Penalty, LiteralFormAndMonotone) {
  EXPECT_EQ(elu_penalty(0.95, 0.95, 0.05, 10), 0.0);
  EXPECT_NEAR(elu_penalty(0.5, 0.95, 0.05, 10), 4.5, 1e-12);
  EXPECT_NEAR(elu_penalty(1.0, 0.95, 0.05, 10), 0.05 * (std::exp(-0.05) - 1), 1e-15);
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    double a = uniform(rng, 0, 1), b = uniform(rng, 0, 1);
    double q = uniform(rng, 0.51, 0.99);
    if (a > b) std::swap(a, b);
    EXPECT_GE(elu_penalty(a, q, 0.05, 10), elu_penalty(b, q, 0.05, 10));
  }
  // Continuity at the branch point.
  EXPECT_NEAR(elu_penalty(0.95 + 1e-12, 0.95, 0.05, 10), 0.0, 1e-12);
  Tensor s = Tensor::vector({0.2, 0.95, 0.99});
  auto v = elu_penalty(s, 0.95, 0.05, 10).to_vector();
  EXPECT_NEAR(v[0], elu_penalty(0.2, 0.95, 0.05, 10), 1e-15);
  EXPECT_NEAR(v[2], elu_penalty(0.99, 0.95, 0.05, 10), 1e-15);
}

TEST(Reasoning, RefutationFindsCounterexample) {
  Theory t = load_theory(std::string(RL_CORPUS_DIR) + "/refute.rl");
  auto phi = parse_formula("A", t.env.signature);
  auto r = reason_refute(t, *phi, t.refute);
  EXPECT_EQ(r.verdict, Verdict::NotEntailed);
  ASSERT_TRUE(r.counterexample);
  EXPECT_GE(r.sat, 0.95);
  EXPECT_LT(r.phi, 0.95);
  // Soundness of the reported counterexample itself.
  Theory check = t;
  check.params = *r.counterexample;
  EXPECT_GE(satisfiability_value(check), t.refute.q);
  ParamView view(check.params);
  EvalContext ctx(check.env, view, check.fuzzy);
  EXPECT_LT(evaluate_closed(*phi, ctx).item(), t.refute.q);
}

TEST(Reasoning, QueryAfterLearningMissesCounterexample) {
  Theory t = load_theory(std::string(RL_CORPUS_DIR) + "/refute.rl");
  auto phi = parse_formula("A", t.env.signature);
  auto r = reason_query_after_learning(t, *phi, 0.95, 10);
  EXPECT_TRUE(r.entailed);
  ASSERT_EQ(r.restarts.size(), 10u);
  for (const auto& o : r.restarts) {
    for (const auto& [name, v] : o.atoms) EXPECT_GE(v, 0.99) << name;
  }
}

TEST(Reasoning, MemberOfKnowledgeBaseIsEntailed) {
  Theory t = theory("pred A = trainable(0.2)\naxiom A\nconfig preset = product\nconfig sat = mean\nconfig epochs = 400\n"
                    "config lr = 0.01\n");
  auto phi = parse_formula("A", t.env.signature);
  auto r = reason_refute(t, *phi, t.refute);
  EXPECT_NE(r.verdict, Verdict::NotEntailed);
  EXPECT_FALSE(r.counterexample);
  EXPECT_TRUE(reason_query_after_learning(t, *phi, 0.95, 2).entailed);
}

TEST(Reasoning, UnsatisfiableBaseIsVacuous) {
  Theory t = theory("pred A = trainable(0.2)\npred B = truth(0)\naxiom A & ~A\nconfig preset = product\nconfig sat = mean\n"
                    "config epochs = 200\nconfig lr = 0.01\n");
  auto phi = parse_formula("B", t.env.signature);
  auto q = reason_query_after_learning(t, *phi, 0.95, 2);
  EXPECT_TRUE(q.entailed);
  EXPECT_TRUE(q.no_satisfying_grounding);
  for (const auto& o : q.restarts) EXPECT_LE(o.sat, 0.25 + 1e-9);
  auto r = reason_refute(t, *phi, t.refute);
  EXPECT_EQ(r.verdict, Verdict::EntailedVacuously);
}

TEST(Datasets, SyntheticShapes) {
  auto b = synth_binary(3);
  EXPECT_EQ(b.rows, 100u);
  for (std::size_t r = 0; r < b.rows; ++r) {
    bool inside = std::hypot(b.at(r, 0) - 0.5, b.at(r, 1) - 0.5) < kBinaryRadius;
    EXPECT_EQ(b.at(r, 2), inside ? 1.0 : 0.0);
  }
  Dataset centers;
  auto c = synth_clustering(3, &centers);
  EXPECT_EQ(c.rows, 200u);
  EXPECT_EQ(centers.rows, 4u);
  auto a = synth_addition(3, 20, 2);
  for (std::size_t r = 0; r < a.rows; ++r) {
    std::size_t n = a.column("n");
    double want = 10 * a.at(r, n + 1) + a.at(r, n + 2) + 10 * a.at(r, n + 3) + a.at(r, n + 4);
    EXPECT_EQ(a.at(r, n), want);
  }
  auto f = smokers_facts();
  EXPECT_EQ(f.friends.size(), 12u);
  EXPECT_EQ(f.smokers, (std::vector<std::string>{"a", "e", "f", "g", "j", "n"}));
  EXPECT_EQ(f.not_friends.size(), 79u);
}

TEST(Datasets, CsvDiagnostics) {
  fs::path dir = fs::path(RL_TEST_TMP) / "csv";
  fs::create_directories(dir);
  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3,x\n";
  try {
    load_csv((dir / "bad.csv").string());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
  }
  std::ofstream(dir / "ok.csv") << "a,b\n1,2\n";
  try {
    load_csv((dir / "ok.csv").string(), CsvSchema{{"a", "label"}, 0});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'label'"), std::string::npos);
  }
  auto iris = load_csv(std::string(RL_DATA_DIR) + "/iris.csv", CsvSchema{{"species"}, 5});
  EXPECT_EQ(iris.rows, 150u);
}

TEST(Corpus, SmokersListsMatchFacts) {
  Theory t = load_theory(std::string(RL_CORPUS_DIR) + "/smokers.rl");
  auto f = smokers_facts();
  auto names = [&](const std::string& v) { return t.env.variables.at(v).constants; };
  std::vector<std::string> fu, fv, nfu, nfv;
  for (const auto& [u, v] : f.friends) fu.push_back(u), fv.push_back(v);
  for (const auto& [u, v] : f.not_friends) nfu.push_back(u), nfv.push_back(v);
  EXPECT_EQ(names("fu"), fu);
  EXPECT_EQ(names("fv"), fv);
  EXPECT_EQ(names("nfu"), nfu);
  EXPECT_EQ(names("nfv"), nfv);
  EXPECT_EQ(names("s_pos"), f.smokers);
  EXPECT_EQ(names("s_neg"), f.non_smokers);
  EXPECT_EQ(names("c_pos"), f.cancer);
  EXPECT_EQ(names("c_neg"), f.no_cancer);
  EXPECT_EQ(t.axioms.size(), 12u);
}
