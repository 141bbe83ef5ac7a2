#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gradcheck.hpp"
#include "rl/ast.hpp"
#include "rl/demos.hpp"
#include "rl/params.hpp"

using namespace rl;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
  fs::path p = fs::path(RL_TEST_TMP) / name;
  fs::remove_all(p);
  return p;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string l; std::getline(in, l);) ++n;
  return n;
}

}  // namespace

TEST(OpCases, AllMatchFiniteDifferences) {
  Rng rng(5);
  for (const auto& c : check::op_cases(rng)) {
    auto r = check::grad_check(c.f, c.inputs);
    EXPECT_TRUE(r.ok) << c.name << "\n" << r.detail;
  }
}

TEST(Demos, RegistryAndTheoryFiles) {
  auto ids = demo_ids();
  EXPECT_EQ(ids.size(), 9u);
  for (const auto& id : ids) {
    EXPECT_TRUE(fs::exists(corpus_path(demo_theory_file(id)))) << id;
    EXPECT_FALSE(demo_thresholds(id).empty()) << id;
  }
  EXPECT_FALSE(is_demo("mnist"));
  EXPECT_THROW(demo_thresholds("mnist"), std::invalid_argument);
}

TEST(Demos, SelfCheckReportsEachFailure) {
  MetricRecord m;
  m.set("test_accuracy", 0.95);
  m.set("sat", 0.5);
  auto ok = self_check("binary", m);
  EXPECT_FALSE(ok.passed);
  ASSERT_EQ(ok.failures.size(), 1u);
  EXPECT_NE(ok.failures[0].find("sat >= 0.85"), std::string::npos);
  m.set("sat", 0.9);
  EXPECT_TRUE(self_check("binary", m).passed);
  MetricRecord empty;
  EXPECT_EQ(self_check("binary", empty).failures.size(), 2u);
}

TEST(Demos, BinaryWritesArtifacts) {
  DemoOptions o;
  o.epochs = 20;
  o.out_dir = tmp("demo_binary").string();
  DemoResult r = run_demo("binary", o);
  for (const char* f : {"metrics.jsonl", "metrics.csv", "params.bin", "decision_grid.csv", "binary_train.csv",
                        "summary.csv"}) {
    EXPECT_TRUE(fs::exists(fs::path(o.out_dir) / f)) << f;
  }
  EXPECT_EQ(line_count(fs::path(o.out_dir) / "decision_grid.csv"), 2501u);
  EXPECT_EQ(line_count(fs::path(o.out_dir) / "metrics.jsonl"), 21u);
  EXPECT_EQ(r.log.records().size(), 21u);
  ParamStore p = read_params((fs::path(o.out_dir) / "params.bin").string());
  EXPECT_GT(p.total_elements(), 0u);
  EXPECT_TRUE(r.summary.get("test_accuracy").has_value());
  // Every logged record keeps the loss identity.
  for (const auto& rec : r.log.records()) {
    EXPECT_NEAR(rec.at("loss"), 1 - rec.at("sat") + 0 * rec.at("reg"), 1e-12);
  }
}

TEST(Demos, SameSeedSameMetrics) {
  DemoOptions o;
  o.epochs = 5;
  o.out_dir = tmp("demo_seed_a").string();
  auto a = run_demo("regression", o);
  o.out_dir = tmp("demo_seed_b").string();
  auto b = run_demo("regression", o);
  EXPECT_EQ(a.summary.at("test_rmse"), b.summary.at("test_rmse"));
  o.seed = 1;
  o.out_dir = tmp("demo_seed_c").string();
  auto c = run_demo("regression", o);
  EXPECT_NE(a.summary.at("test_rmse"), c.summary.at("test_rmse"));
}

TEST(Demos, RunsWriteSummaryWithInterval) {
  DemoOptions o;
  o.epochs = 5;
  o.runs = 3;
  o.out_dir = tmp("demo_runs").string();
  std::ostringstream out;
  EXPECT_EQ(demo_main("regression", o, out), 0);
  for (int s = 0; s < 3; ++s) EXPECT_TRUE(fs::exists(fs::path(o.out_dir) / ("seed_" + std::to_string(s)) / "metrics.csv"));
  std::ifstream in(fs::path(o.out_dir) / "summary.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "metric,mean,ci95,n");
  EXPECT_NE(out.str().find("+-"), std::string::npos);
}

TEST(Demos, UnknownIdAndFailedSelfCheck) {
  DemoOptions o;
  std::ostringstream out;
  EXPECT_EQ(demo_main("nope", o, out), 2);
  EXPECT_NE(out.str().find("binary"), std::string::npos);
  // Two epochs cannot reach the regression thresholds.
  o.epochs = 2;
  o.self_check = true;
  o.out_dir = tmp("demo_fail").string();
  std::ostringstream out2;
  EXPECT_EQ(demo_main("regression", o, out2), 1);
  EXPECT_NE(out2.str().find("self-check FAILED"), std::string::npos);
}

TEST(Demos, ConfigOverridesApply) {
  DemoOptions o;
  o.epochs = 3;
  o.overrides = {{"reg", "l2"}, {"lambda", "0.5"}};
  o.out_dir = tmp("demo_l2").string();
  auto r = run_demo("regression", o);
  for (const auto& rec : r.log.records()) {
    EXPECT_GT(rec.at("reg"), 0.0);
    EXPECT_NEAR(rec.at("loss"), 1 - rec.at("sat") + 0.5 * rec.at("reg"), 1e-9);
  }
  o.overrides = {{"no_such_key", "1"}};
  EXPECT_THROW(run_demo("regression", o), LogicError);
}
