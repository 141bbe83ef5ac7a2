#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "rl/ops.hpp"
#include "rl/random.hpp"

using namespace rl;
using rl::check::grad_check;

namespace {

using rl::check::rand_tensor;
using rl::check::weigh;

void expect_grad(const std::function<Tensor(const std::vector<Tensor>&)>& f,
                 const std::vector<Tensor>& xs) {
  auto r = grad_check(f, xs);
  EXPECT_TRUE(r.ok) << r.detail;
}

}  // namespace

TEST(Shapes, BroadcastFollowsRightAlignment) {
  EXPECT_EQ(broadcast_shapes({3, 1, 4}, {5, 1}), (Shape{3, 5, 4}));
  EXPECT_EQ(broadcast_shapes({}, {2, 2}), (Shape{2, 2}));
  EXPECT_THROW(broadcast_shapes({3}, {4}), ShapeError);
}

TEST(Shapes, ConstructorChecksElementCount) {
  EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), ShapeError);
  EXPECT_EQ(Tensor::zeros({2, 0}).size(), 0u);
}

TEST(Elementwise, BroadcastForwardValues) {
  Tensor a({2, 1}, {1, 2});
  Tensor b({3}, {10, 20, 30});
  Tensor c = add(a, b);
  EXPECT_EQ(c.shape(), (Shape{2, 3}));
  EXPECT_EQ(c.to_vector(), (std::vector<double>{11, 21, 31, 12, 22, 32}));
}

TEST(Elementwise, GradientsMatchFiniteDifferences) {
  Rng rng(1);
  Tensor a = rand_tensor({2, 3}, rng), b = rand_tensor({3}, rng);
  Tensor pa = rand_tensor({2, 3}, rng, 0.2, 2.0), pb = rand_tensor({2, 1}, rng, 0.5, 2.0);
  expect_grad([](auto& x) { return weigh(add(x[0], x[1])); }, {a, b});
  expect_grad([](auto& x) { return weigh(sub(x[0], x[1])); }, {a, b});
  expect_grad([](auto& x) { return weigh(mul(x[0], x[1])); }, {a, b});
  expect_grad([](auto& x) { return weigh(div(x[0], x[1])); }, {a, pb});
  expect_grad([](auto& x) { return weigh(pow(x[0], x[1])); }, {pa, pb});
  expect_grad([](auto& x) { return weigh(pow(x[0], 2.5)); }, {pa});
  expect_grad([](auto& x) { return weigh(minimum(x[0], x[1])); }, {a, b});
  expect_grad([](auto& x) { return weigh(maximum(x[0], x[1])); }, {a, b});
  expect_grad([](auto& x) { return weigh(exp(x[0])); }, {a});
  expect_grad([](auto& x) { return weigh(log(x[0])); }, {pa});
  expect_grad([](auto& x) { return weigh(neg(x[0])); }, {a});
  expect_grad([](auto& x) { return weigh(sqrt(x[0])); }, {pa});
  expect_grad([](auto& x) { return weigh(affine(x[0], -0.7, 0.2)); }, {a});
  expect_grad([](auto& x) { return weigh(sigmoid(x[0])); }, {a});
  expect_grad([](auto& x) { return weigh(elu(x[0])); }, {a});
}

TEST(Elementwise, DispatcherMatchesNamedOps) {
  Tensor a = Tensor::vector({0.5, 2.0}), b = Tensor::vector({1.5, 0.25});
  EXPECT_EQ(elementwise(ElementwiseOp::Mul, a, &b).to_vector(), mul(a, b).to_vector());
  EXPECT_EQ(elementwise(ElementwiseOp::Log, a).to_vector(), log(a).to_vector());
  EXPECT_THROW(elementwise(ElementwiseOp::Add, a), std::invalid_argument);
}

TEST(Elementwise, TiesRouteGradientToFirstArgument) {
  Tape tape;
  Tensor a = tape.watch(Tensor::scalar(0.4)), b = tape.watch(Tensor::scalar(0.4));
  auto g = tape.backward(minimum(a, b));
  EXPECT_EQ(g.of(a).item(), 1.0);
  EXPECT_EQ(g.of(b).item(), 0.0);
  auto h = tape.backward(maximum(a, b));
  EXPECT_EQ(h.of(a).item(), 1.0);
  EXPECT_EQ(h.of(b).item(), 0.0);
}

TEST(Elementwise, DomainViolationsThrow) {
  EXPECT_THROW(log(Tensor::vector({1.0, 0.0})), DomainError);
  EXPECT_THROW(div(Tensor::scalar(1.0), Tensor::scalar(0.0)), DomainError);
  EXPECT_THROW(pow(Tensor::scalar(-1.0), 0.5), DomainError);
  EXPECT_NO_THROW(pow(Tensor::scalar(-2.0), 2.0));
}

TEST(Elementwise, ClampPassthroughKeepsGradient) {
  Tape tape;
  Tensor a = tape.watch(Tensor::vector({-0.5, 0.5, 1.5}));
  Tensor c = clamp_passthrough(a, 0.0, 1.0);
  EXPECT_EQ(c.to_vector(), (std::vector<double>{0.0, 0.5, 1.0}));
  auto g = tape.backward(reduce_all(ReduceOp::Sum, c));
  EXPECT_EQ(g.of(a).to_vector(), (std::vector<double>{1, 1, 1}));
}

TEST(Where, SelectsAndSplitsGradient) {
  Tape tape;
  Tensor a = tape.watch(Tensor::vector({1, 2, 3})), b = tape.watch(Tensor::scalar(9));
  Tensor c = where(Tensor::vector({1, 0, 1}), a, b);
  EXPECT_EQ(c.to_vector(), (std::vector<double>{1, 9, 3}));
  auto g = tape.backward(reduce_all(ReduceOp::Sum, c));
  EXPECT_EQ(g.of(a).to_vector(), (std::vector<double>{1, 0, 1}));
  EXPECT_EQ(g.of(b).item(), 1.0);
}

TEST(Where, MaskedInfiniteDerivativeDoesNotLeak) {
  // sqrt has an infinite derivative at zero; the masked branch must not
  // turn that into NaN.
  Tape tape;
  Tensor a = tape.watch(Tensor::vector({0.0, 4.0}));
  Tensor c = where(Tensor::vector({0, 1}), sqrt(a), Tensor::scalar(0.0));
  auto g = tape.backward(reduce_all(ReduceOp::Sum, c));
  EXPECT_EQ(g.of(a)[0], 0.0);
  EXPECT_DOUBLE_EQ(g.of(a)[1], 0.25);
}

TEST(Reduce, ForwardValuesOverAxes) {
  Tensor a({2, 3}, {1, 5, 2, 4, 0, 6});
  EXPECT_EQ(reduce(ReduceOp::Sum, a, {1}).to_vector(), (std::vector<double>{8, 10}));
  EXPECT_EQ(reduce(ReduceOp::Sum, a, {0}).to_vector(), (std::vector<double>{5, 5, 8}));
  EXPECT_EQ(reduce(ReduceOp::Min, a, {0, 1}).item(), 0.0);
  EXPECT_EQ(reduce(ReduceOp::Max, a, {1}).to_vector(), (std::vector<double>{5, 6}));
  EXPECT_EQ(reduce(ReduceOp::Prod, a, {1}).to_vector(), (std::vector<double>{10, 0}));
  EXPECT_DOUBLE_EQ(reduce(ReduceOp::Mean, a, {0, 1}).item(), 3.0);
  Tensor t = Tensor::vector({0.2, 0.6});
  EXPECT_NEAR(reduce(ReduceOp::PMean, t, {0}, 2).item(), std::sqrt((0.04 + 0.36) / 2), 1e-15);
  EXPECT_NEAR(reduce(ReduceOp::PMeanError, t, {0}, 2).item(),
              1 - std::sqrt((0.64 + 0.16) / 2), 1e-15);
}

TEST(Reduce, GradientsMatchFiniteDifferences) {
  Rng rng(2);
  Tensor a = rand_tensor({2, 3, 4}, rng, 0.1, 0.9);
  for (auto op : {ReduceOp::Sum, ReduceOp::Mean, ReduceOp::Min, ReduceOp::Max, ReduceOp::Prod,
                  ReduceOp::PMean, ReduceOp::PMeanError}) {
    for (std::vector<std::size_t> axes :
         {std::vector<std::size_t>{0}, {1}, {2}, {0, 2}, {0, 1, 2}}) {
      expect_grad([&](auto& x) { return weigh(reduce(op, x[0], axes, 3.0)); }, {a});
    }
  }
}

TEST(Reduce, ProdGradientWithZeros) {
  Tape tape;
  Tensor a = tape.watch(Tensor::vector({0.0, 2.0, 3.0}));
  auto g = tape.backward(reduce_all(ReduceOp::Prod, a));
  EXPECT_EQ(g.of(a).to_vector(), (std::vector<double>{6, 0, 0}));
  Tape tape2;
  Tensor b = tape2.watch(Tensor::vector({0.0, 2.0, 0.0}));
  auto g2 = tape2.backward(reduce_all(ReduceOp::Prod, b));
  EXPECT_EQ(g2.of(b).to_vector(), (std::vector<double>{0, 0, 0}));
}

TEST(Reduce, MinMaxGradientGoesToFirstExtremum) {
  Tape tape;
  Tensor a = tape.watch(Tensor::vector({0.3, 0.1, 0.1, 0.7, 0.7}));
  auto g = tape.backward(reduce_all(ReduceOp::Min, a));
  EXPECT_EQ(g.of(a).to_vector(), (std::vector<double>{0, 1, 0, 0, 0}));
  auto h = tape.backward(reduce_all(ReduceOp::Max, a));
  EXPECT_EQ(h.of(a).to_vector(), (std::vector<double>{0, 0, 0, 1, 0}));
}

TEST(Reduce, InvalidAxesThrow) {
  Tensor a = Tensor::zeros({2, 2});
  EXPECT_THROW(reduce(ReduceOp::Sum, a, {2}), ShapeError);
  EXPECT_THROW(reduce(ReduceOp::Sum, a, {0, 0}), ShapeError);
  EXPECT_THROW(reduce(ReduceOp::Mean, Tensor::zeros({0, 2}), {0}), ShapeError);
  EXPECT_EQ(reduce(ReduceOp::Sum, Tensor::zeros({0, 2}), {0}).to_vector(),
            (std::vector<double>{0, 0}));
}

TEST(Structural, PermuteAndBroadcast) {
  Tensor a({2, 3}, {0, 1, 2, 3, 4, 5});
  Tensor p = permute(a, {1, 0});
  EXPECT_EQ(p.shape(), (Shape{3, 2}));
  EXPECT_EQ(p.to_vector(), (std::vector<double>{0, 3, 1, 4, 2, 5}));
  Tensor b = broadcast_to(Tensor({2, 1}, {7, 8}), {2, 3});
  EXPECT_EQ(b.to_vector(), (std::vector<double>{7, 7, 7, 8, 8, 8}));
  EXPECT_THROW(broadcast_to(a, {3, 3}), ShapeError);
  EXPECT_THROW(permute(a, {0, 0}), ShapeError);
}

TEST(Structural, GradientsMatchFiniteDifferences) {
  Rng rng(3);
  Tensor a = rand_tensor({2, 3, 2}, rng), b = rand_tensor({2, 3, 1}, rng);
  std::vector<std::size_t> idx{2, 0, 2};
  expect_grad([](auto& x) { return weigh(permute(x[0], {2, 0, 1})); }, {a});
  expect_grad([](auto& x) { return weigh(reshape(x[0], {3, 4})); }, {a});
  expect_grad([](auto& x) { return weigh(broadcast_to(x[0], {4, 2, 3, 1})); }, {b});
  expect_grad(
      [](auto& x) {
        std::vector<Tensor> parts{x[0], x[1]};
        return weigh(concat(parts, 2));
      },
      {a, b});
  expect_grad(
      [](auto& x) {
        std::vector<Tensor> parts{x[0], x[0]};
        return weigh(stack(parts));
      },
      {a});
  expect_grad([&](auto& x) { return weigh(index_select(x[0], 1, idx)); }, {a});
  expect_grad([](auto& x) { return weigh(where(Tensor({3, 1}, {1, 0, 1}), x[0], x[1])); }, {a, b});
}

TEST(Structural, ConcatAndIndexSelectValues) {
  Tensor a({2, 1}, {1, 2}), b({2, 2}, {3, 4, 5, 6});
  std::vector<Tensor> parts{a, b};
  EXPECT_EQ(concat(parts, 1).to_vector(), (std::vector<double>{1, 3, 4, 2, 5, 6}));
  std::vector<std::size_t> idx{1, 1};
  EXPECT_EQ(index_select(b, 0, idx).to_vector(), (std::vector<double>{5, 6, 5, 6}));
  std::vector<std::size_t> bad{2};
  EXPECT_THROW(index_select(b, 0, bad), ShapeError);
}

TEST(Neural, MatmulSoftmaxNormGradients) {
  Rng rng(4);
  Tensor a = rand_tensor({3, 4}, rng), b = rand_tensor({4, 2}, rng);
  expect_grad([](auto& x) { return weigh(matmul(x[0], x[1])); }, {a, b});
  expect_grad([](auto& x) { return weigh(softmax(x[0])); }, {a});
  expect_grad([](auto& x) { return weigh(l2_norm(x[0])); }, {a});
}

TEST(Neural, SoftmaxRowsSumToOne) {
  Tensor s = softmax(Tensor({2, 3}, {1000, 1001, 1002, -5, 0, 5}));
  for (int r = 0; r < 2; ++r) {
    EXPECT_NEAR(s[r * 3] + s[r * 3 + 1] + s[r * 3 + 2], 1.0, 1e-12);
  }
}

TEST(Neural, NormGradientAtZeroIsZero) {
  Tape tape;
  Tensor a = tape.watch(Tensor({1, 2}, {0.0, 0.0}));
  auto g = tape.backward(reduce_all(ReduceOp::Sum, l2_norm(a)));
  EXPECT_EQ(g.of(a).to_vector(), (std::vector<double>{0, 0}));
}

TEST(Tape, SharedSubexpressionAccumulates) {
  Tape tape;
  Tensor x = tape.watch(Tensor::scalar(3.0));
  Tensor y = add(mul(x, x), x);
  auto g = tape.backward(y);
  EXPECT_DOUBLE_EQ(g.of(x).item(), 7.0);
}

TEST(Tape, UntrackedOpsDoNotRecord) {
  Tape tape;
  Tensor c = add(Tensor::scalar(1), Tensor::scalar(2));
  EXPECT_FALSE(c.tracked());
  EXPECT_EQ(tape.num_nodes(), 0u);
  Tensor x = tape.watch(Tensor::scalar(1));
  EXPECT_TRUE(add(x, c).tracked());
  EXPECT_EQ(tape.num_nodes(), 2u);
}

TEST(Tape, MixingTapesIsAnError) {
  Tape t1, t2;
  Tensor a = t1.watch(Tensor::scalar(1)), b = t2.watch(Tensor::scalar(2));
  EXPECT_THROW(add(a, b), std::logic_error);
}

TEST(Tape, UnreachedLeafHasZeroGradient) {
  Tape tape;
  Tensor a = tape.watch(Tensor::vector({1, 2})), b = tape.watch(Tensor::scalar(2));
  auto g = tape.backward(mul(b, b));
  EXPECT_FALSE(g.reached(a));
  EXPECT_EQ(g.of(a).to_vector(), (std::vector<double>{0, 0}));
  EXPECT_THROW(tape.backward(a), ShapeError);
}

TEST(Properties, FiniteInputsGiveFiniteOutputs) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor a = rand_tensor({3, 4}, rng, -3, 3), b = rand_tensor({4}, rng, -3, 3);
    Tensor p = rand_tensor({3, 4}, rng, 0.01, 3);
    for (const Tensor& t :
         {add(a, b), mul(a, b), minimum(a, b), exp(a), log(p), sigmoid(a), elu(a), softmax(a),
          pow(p, 1.7), reduce(ReduceOp::PMean, p, {1}, 3), l2_norm(a)}) {
      for (double v : t.values()) ASSERT_TRUE(std::isfinite(v));
    }
  }
}

TEST(Properties, RandomCompositionsMatchFiniteDifferences) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor a = rand_tensor({2, 3}, rng, 0.1, 0.9), b = rand_tensor({3}, rng, 0.1, 0.9);
    double p = 1.0 + static_cast<double>(trial % 4);
    expect_grad(
        [p](auto& x) {
          Tensor t = mul(sigmoid(x[0]), affine(x[1], -1, 1));
          Tensor u = mul(reduce(ReduceOp::PMean, t, {1}, p), reduce(ReduceOp::Prod, x[0], {1}));
          return reduce_all(ReduceOp::PMeanError, u, p);
        },
        {a, b});
  }
}
