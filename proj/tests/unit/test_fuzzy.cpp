#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "rl/fuzzy.hpp"
#include "rl/ops.hpp"
#include "rl/random.hpp"

using namespace rl;

namespace {

constexpr double kEps = 1e-4;

double T(TNorm t, double a, double b) {
  return conjunction(t, Tensor::scalar(a), Tensor::scalar(b), kEps).item();
}
double S(TConorm s, double a, double b) {
  return disjunction(s, Tensor::scalar(a), Tensor::scalar(b), kEps).item();
}
double I(Implication i, double a, double b) {
  return implication(i, Tensor::scalar(a), Tensor::scalar(b), kEps).item();
}

std::vector<double> sample_unit(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, 0.0, 1.0);
  return v;
}

}  // namespace

TEST(Connectives, TNormAxiomsHold) {
  Rng rng(10);
  for (auto t : {TNorm::Min, TNorm::Product, TNorm::Lukasiewicz}) {
    for (int k = 0; k < 200; ++k) {
      auto v = sample_unit(rng, 4);
      double a = v[0], b = v[1], c = v[2], d = std::max(v[1], v[3]);
      EXPECT_NEAR(T(t, a, b), T(t, b, a), 1e-15);
      EXPECT_NEAR(T(t, a, T(t, b, c)), T(t, T(t, a, b), c), 1e-12);
      EXPECT_LE(T(t, a, b), T(t, a, d) + 1e-15);
      EXPECT_NEAR(T(t, a, 1.0), a, 1e-15);
    }
  }
}

TEST(Connectives, TConormAxiomsHold) {
  Rng rng(11);
  for (auto s : {TConorm::Max, TConorm::ProbSum, TConorm::Lukasiewicz}) {
    for (int k = 0; k < 200; ++k) {
      auto v = sample_unit(rng, 4);
      double a = v[0], b = v[1], c = v[2], d = std::max(v[1], v[3]);
      EXPECT_NEAR(S(s, a, b), S(s, b, a), 1e-15);
      EXPECT_NEAR(S(s, a, S(s, b, c)), S(s, S(s, a, b), c), 1e-12);
      EXPECT_LE(S(s, a, b), S(s, a, d) + 1e-15);
      EXPECT_NEAR(S(s, a, 0.0), a, 1e-15);
    }
  }
}

TEST(Connectives, ImplicationBoundaryBehaviour) {
  Rng rng(12);
  for (auto i : {Implication::KleeneDienes, Implication::Goedel, Implication::Reichenbach,
                 Implication::Goguen, Implication::Lukasiewicz}) {
    for (int k = 0; k < 100; ++k) {
      double b = uniform(rng, 0, 1), a = uniform(rng, 0, 1), a2 = uniform(rng, 0, 1);
      EXPECT_NEAR(I(i, 0.0, b), 1.0, 1e-15);
      EXPECT_NEAR(I(i, 1.0, b), b, 1e-15);
      // Antitone in the antecedent.
      if (a <= a2) EXPECT_GE(I(i, a, b) + 1e-15, I(i, a2, b));
    }
  }
}

TEST(Connectives, KnownValues) {
  EXPECT_DOUBLE_EQ(I(Implication::Reichenbach, 0.5, 0.5), 0.75);
  EXPECT_DOUBLE_EQ(I(Implication::Goguen, 0.5, 0.25), 0.5);
  EXPECT_DOUBLE_EQ(I(Implication::Goedel, 0.5, 0.25), 0.25);
  EXPECT_DOUBLE_EQ(I(Implication::Lukasiewicz, 0.5, 0.25), 0.75);
  EXPECT_DOUBLE_EQ(I(Implication::KleeneDienes, 0.3, 0.25), 0.7);
  EXPECT_DOUBLE_EQ(T(TNorm::Lukasiewicz, 0.3, 0.4), 0.0);
  EXPECT_NEAR(S(TConorm::Lukasiewicz, 0.7, 0.4), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(negation(Tensor::scalar(0.25)).item(), 0.75);
}

TEST(Connectives, StableVariantsStayClose) {
  Rng rng(13);
  for (int k = 0; k < 200; ++k) {
    double a = uniform(rng, 0, 1), b = uniform(rng, 0, 1);
    EXPECT_NEAR(T(TNorm::ProductStable, a, b), T(TNorm::Product, a, b), 2 * kEps);
    EXPECT_NEAR(S(TConorm::ProbSumStable, a, b), S(TConorm::ProbSum, a, b), 2 * kEps);
    EXPECT_NEAR(I(Implication::ReichenbachStable, a, b), I(Implication::Reichenbach, a, b), 2 * kEps);
  }
  // pi0 keeps values away from zero, pi1 away from one.
  EXPECT_DOUBLE_EQ(pi0(Tensor::scalar(0.0), kEps).item(), kEps);
  EXPECT_DOUBLE_EQ(pi1(Tensor::scalar(1.0), kEps).item(), 1.0 - kEps);
}

TEST(Connectives, EquivalenceIsConjunctionOfImplications) {
  FuzzyConfig cfg = FuzzyConfig::preset("product");
  Tensor a = Tensor::scalar(0.3), b = Tensor::scalar(0.8);
  double ab = 1 - 0.3 + 0.3 * 0.8, ba = 1 - 0.8 + 0.8 * 0.3;
  EXPECT_NEAR(equivalence(cfg, a, b).item(), ab * ba, 1e-15);
}

TEST(Connectives, GradientsMatchFiniteDifferencesInInterior) {
  Rng rng(14);
  for (int k = 0; k < 20; ++k) {
    Tensor a({3}, sample_unit(rng, 3)), b({3}, sample_unit(rng, 3));
    for (auto t : {TNorm::Product, TNorm::ProductStable}) {
      auto r = check::grad_check(
          [t](auto& x) { return reduce_all(ReduceOp::Sum, conjunction(t, x[0], x[1], kEps)); }, {a, b});
      EXPECT_TRUE(r.ok) << r.detail;
    }
    for (auto i : {Implication::Reichenbach, Implication::ReichenbachStable}) {
      auto r = check::grad_check(
          [i](auto& x) { return reduce_all(ReduceOp::Sum, implication(i, x[0], x[1], kEps)); }, {a, b});
      EXPECT_TRUE(r.ok) << r.detail;
    }
    auto r = check::grad_check(
        [](auto& x) { return reduce_all(ReduceOp::Sum, disjunction(TConorm::ProbSumStable, x[0], x[1], kEps)); },
        {a, b});
    EXPECT_TRUE(r.ok) << r.detail;
  }
}

TEST(Aggregators, PMeanSpecialCases) {
  Tensor v = Tensor::vector({0.2, 0.4, 0.9});
  double mean = (0.2 + 0.4 + 0.9) / 3;
  EXPECT_NEAR(aggregate({AggregatorKind::PMean, 1.0}, v, kEps).item(), mean, 1e-15);
  EXPECT_NEAR(aggregate({AggregatorKind::PMeanError, 1.0}, v, kEps).item(), mean, 1e-15);
  EXPECT_NEAR(aggregate({AggregatorKind::Mean, 1.0}, v, kEps).item(), mean, 1e-15);
  // Large p tends to max / min.
  EXPECT_NEAR(aggregate({AggregatorKind::PMean, 200.0}, v, kEps).item(), 0.9, 0.01);
  EXPECT_NEAR(aggregate({AggregatorKind::PMeanError, 200.0}, v, kEps).item(), 0.2, 0.01);
  EXPECT_NEAR(aggregate({AggregatorKind::ProbSum, 1.0}, v, kEps).item(), 1 - 0.8 * 0.6 * 0.1, 1e-15);
  EXPECT_NEAR(aggregate({AggregatorKind::LukAnd, 1.0}, v, kEps).item(), 0.0, 1e-15);
  EXPECT_NEAR(aggregate({AggregatorKind::LukOr, 1.0}, v, kEps).item(), 1.0, 1e-15);
}

TEST(Aggregators, PMeanIsMonotoneInP) {
  Rng rng(15);
  for (int k = 0; k < 50; ++k) {
    Tensor v = Tensor::vector(sample_unit(rng, 7));
    double prev_m = -1, prev_e = 2;
    for (double p : {1.0, 1.5, 2.0, 4.0, 8.0}) {
      double m = aggregate({AggregatorKind::PMean, p}, v, kEps).item();
      double e = aggregate({AggregatorKind::PMeanError, p}, v, kEps).item();
      EXPECT_GE(m + 1e-12, prev_m);
      EXPECT_LE(e - 1e-12, prev_e);
      prev_m = m;
      prev_e = e;
    }
  }
}

TEST(Aggregators, AxesReduceIndependently) {
  Tensor v({2, 3}, {0.1, 0.5, 0.9, 0.2, 0.2, 0.2});
  Tensor r = aggregate({AggregatorKind::PMean, 2.0}, v, {1}, kEps);
  EXPECT_NEAR(r[0], std::sqrt((0.01 + 0.25 + 0.81) / 3), 1e-15);
  EXPECT_NEAR(r[1], 0.2, 1e-15);
  EXPECT_THROW(aggregate({AggregatorKind::Mean, 1.0}, Tensor::zeros({0}), kEps), ShapeError);
}

TEST(Aggregators, MaskedMatchesExplicitSubset) {
  Rng rng(16);
  for (auto kind : {AggregatorKind::Min, AggregatorKind::Max, AggregatorKind::Prod,
                    AggregatorKind::ProbSum, AggregatorKind::LukAnd, AggregatorKind::LukOr,
                    AggregatorKind::Mean, AggregatorKind::PMean, AggregatorKind::PMeanError,
                    AggregatorKind::PMeanStable, AggregatorKind::PMeanErrorStable}) {
    for (int k = 0; k < 10; ++k) {
      auto vals = sample_unit(rng, 12);
      std::vector<double> mask(12), subset;
      for (std::size_t i = 0; i < 12; ++i) {
        mask[i] = uniform(rng, 0, 1) < 0.5 ? 1.0 : 0.0;
        if (mask[i] != 0.0) subset.push_back(vals[i]);
      }
      if (subset.empty()) continue;
      AggregatorSpec spec{kind, 3.0};
      double got = aggregate_masked(spec, Tensor::vector(vals), Tensor::vector(mask), {0}, kEps, -1).item();
      double want = aggregate(spec, Tensor::vector(subset), kEps).item();
      EXPECT_NEAR(got, want, 1e-12) << to_string(spec);
    }
  }
}

TEST(Aggregators, MaskedEmptyGroupsUseEmptyValueWithoutNaN) {
  for (auto kind : {AggregatorKind::PMean, AggregatorKind::PMeanErrorStable, AggregatorKind::Min}) {
    Tape tape;
    Tensor v = tape.watch(Tensor({2, 3}, {0, 0, 0, 0.5, 0.2, 0.1}));
    Tensor mask({2, 3}, {0, 0, 0, 1, 0, 1});
    Tensor r = aggregate_masked({kind, 2.0}, v, mask, {1}, kEps, 1.0);
    EXPECT_EQ(r[0], 1.0);
    Tensor g = tape.backward(reduce_all(ReduceOp::Sum, r)).of(v);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_TRUE(std::isfinite(g[i]));
    EXPECT_EQ(g[0], 0.0);
    EXPECT_EQ(g[4], 0.0);
  }
}

TEST(Aggregators, MaskedGradientsMatchFiniteDifferences) {
  Rng rng(17);
  Tensor v({2, 4}, sample_unit(rng, 8));
  Tensor mask({2, 4}, {1, 0, 1, 1, 0, 1, 1, 0});
  for (auto kind : {AggregatorKind::PMean, AggregatorKind::PMeanError, AggregatorKind::PMeanStable,
                    AggregatorKind::LukAnd, AggregatorKind::ProbSum}) {
    auto r = check::grad_check(
        [&](auto& x) {
          return reduce_all(ReduceOp::Sum, aggregate_masked({kind, 2.0}, x[0], mask, {0, 1}, kEps, 1.0));
        },
        {v});
    EXPECT_TRUE(r.ok) << r.detail;
  }
}

TEST(DerivativeProfile, MinimumIsSinglePassingAtInteriorPoint) {
  std::vector<std::vector<double>> grid{{0.3, 0.7}};
  auto prof = derivative_profile("T_M", grid);
  const auto& c = prof.cells[0];
  EXPECT_TRUE(c.single_passing);
  EXPECT_EQ(c.partials[0], 1.0);
  EXPECT_EQ(c.partials[1], 0.0);
}

TEST(DerivativeProfile, StableProductKeepsBothPartialsAtOrigin) {
  std::vector<std::vector<double>> grid{{0.0, 0.0}};
  auto prof = derivative_profile("T'_P", grid, kEps);
  for (double d : prof.cells[0].partials) EXPECT_GE(d, kEps * (1 - kEps) - 1e-18);
}

TEST(DerivativeProfile, RawPMeanExplodesAtZerosStableDoesNot) {
  std::vector<std::vector<double>> grid{std::vector<double>(10, 0.0)};
  EXPECT_TRUE(derivative_profile("A_pM", grid, kEps, 2.0).cells[0].exploding);
  auto stable = derivative_profile("A'_pM", grid, kEps, 2.0);
  EXPECT_FALSE(stable.cells[0].exploding);
  for (double d : stable.cells[0].partials) EXPECT_LE(std::abs(d), 1.0 / kEps);
  std::vector<std::vector<double>> ones{std::vector<double>(10, 1.0)};
  EXPECT_TRUE(derivative_profile("A_pME", ones, kEps, 2.0).cells[0].exploding);
  EXPECT_FALSE(derivative_profile("A'_pME", ones, kEps, 2.0).cells[0].exploding);
}

TEST(DerivativeProfile, ClassificationMatchesReferenceTables) {
  auto cgrid = connective_grid();
  auto agrid = aggregator_grid(50, 20, 7);
  for (const auto& op : profiled_operators()) {
    bool aggregator = op.rfind("A", 0) == 0;
    auto prof = derivative_profile(op, aggregator ? agrid : cgrid, kEps, 2.0);
    auto want = expected_problems(op);
    EXPECT_EQ(to_string(prof.observed.single_passing), to_string(want.single_passing)) << op;
    EXPECT_EQ(to_string(prof.observed.vanishing), to_string(want.vanishing)) << op;
    EXPECT_EQ(to_string(prof.observed.exploding), to_string(want.exploding)) << op;
  }
}

TEST(DerivativeProfile, StableOperatorsBoundedEverywhere) {
  Rng rng(18);
  auto cgrid = connective_grid();
  for (int k = 0; k < 200; ++k) cgrid.push_back(sample_unit(rng, 2));
  for (const char* op : {"T'_P", "S'_P", "I'_R"}) {
    for (const auto& cell : derivative_profile(op, cgrid, kEps).cells) {
      for (double d : cell.partials) {
        ASSERT_TRUE(std::isfinite(d));
        ASSERT_LE(std::abs(d), 1.0 / kEps);
      }
    }
  }
  for (std::size_t n : {1u, 3u, 30u}) {
    auto agrid = aggregator_grid(n, 50, 3);
    for (const char* op : {"A'_pM", "A'_pME"}) {
      for (double p : {1.0, 2.0, 6.0}) {
        for (const auto& cell : derivative_profile(op, agrid, kEps, p).cells) {
          for (double d : cell.partials) {
            ASSERT_TRUE(std::isfinite(d));
            ASSERT_LE(std::abs(d), 1.0 / kEps);
          }
        }
      }
    }
  }
}

TEST(Config, TagsRoundTrip) {
  for (const char* tag : {"min", "product", "product_stable", "lukasiewicz"}) {
    EXPECT_EQ(to_string(parse_tnorm(tag)), tag);
  }
  for (const char* tag : {"max", "probsum", "probsum_stable", "lukasiewicz"}) {
    EXPECT_EQ(to_string(parse_tconorm(tag)), tag);
  }
  for (const char* tag : {"kleene_dienes", "goedel", "reichenbach", "reichenbach_stable", "goguen",
                          "lukasiewicz"}) {
    EXPECT_EQ(to_string(parse_implication(tag)), tag);
  }
  EXPECT_EQ(to_string(parse_aggregator("pmean_error_stable:p=6")), "pmean_error_stable:p=6");
  EXPECT_EQ(parse_aggregator("pmean", 3.0).p, 3.0);
  EXPECT_THROW(parse_aggregator("pmean:q=2"), std::invalid_argument);
  EXPECT_THROW(parse_aggregator("median"), std::invalid_argument);
}

TEST(Config, DefaultsAndSettings) {
  FuzzyConfig c;
  EXPECT_EQ(c.conjunction, TNorm::ProductStable);
  EXPECT_EQ(c.forall.kind, AggregatorKind::PMeanErrorStable);
  EXPECT_EQ(c.exists.kind, AggregatorKind::PMeanStable);
  EXPECT_EQ(c.epsilon, 1e-4);
  c.set("forall", "pmean_error:p=4");
  EXPECT_EQ(c.forall, (AggregatorSpec{AggregatorKind::PMeanError, 4.0}));
  c.set("epsilon", "0.001");
  EXPECT_EQ(c.epsilon, 0.001);
  EXPECT_THROW(c.set("epsilon", "2"), std::invalid_argument);
  EXPECT_THROW(c.set("xor", "min"), std::invalid_argument);
  auto o = c.with_overrides({6.0, std::nullopt});
  EXPECT_EQ(o.forall.p, 6.0);
  EXPECT_EQ(o.exists.p, c.exists.p);
}
