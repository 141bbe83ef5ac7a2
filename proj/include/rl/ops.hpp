#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rl/tensor.hpp"

namespace rl {

// Numpy-style broadcast of two shapes, aligned from the right.
Shape broadcast_shapes(const Shape& a, const Shape& b);

enum class ElementwiseOp { Add, Sub, Mul, Div, Pow, Min, Max, Exp, Log, Neg };

// Unary ops ignore b. Binary ops broadcast.
Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor* b = nullptr);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor pow(const Tensor& a, const Tensor& b);
Tensor pow(const Tensor& a, double p);
// Ties go to the first argument.
Tensor minimum(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor neg(const Tensor& a);
Tensor sqrt(const Tensor& a);

// scale * a + shift
Tensor affine(const Tensor& a, double scale, double shift);
Tensor sigmoid(const Tensor& a);
Tensor elu(const Tensor& a, double alpha = 1.0);

// Values are clamped to [lo, hi]; the gradient passes through unchanged.
Tensor clamp_passthrough(const Tensor& a, double lo, double hi);

// cond is read as a boolean (nonzero = true) and never differentiated.
Tensor where(const Tensor& cond, const Tensor& a, const Tensor& b);

enum class ReduceOp { Sum, Mean, Min, Max, Prod, PMean, PMeanError };

// Min/Max route the gradient to the first extremal element in row-major order.
// PMean is (mean a^p)^(1/p); PMeanError is 1 - (mean (1-a)^p)^(1/p).
Tensor reduce(ReduceOp op, const Tensor& a, std::vector<std::size_t> axes, double p = 1.0);
Tensor reduce_all(ReduceOp op, const Tensor& a, double p = 1.0);
Tensor sum(const Tensor& a, std::vector<std::size_t> axes);
Tensor mean(const Tensor& a, std::vector<std::size_t> axes);

Tensor reshape(const Tensor& a, Shape shape);
Tensor permute(const Tensor& a, const std::vector<std::size_t>& perm);
Tensor broadcast_to(const Tensor& a, const Shape& shape);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
// New leading axis.
Tensor stack(std::span<const Tensor> parts);
Tensor index_select(const Tensor& a, std::size_t axis, std::span<const std::size_t> indices);

// [n, k] x [k, m] -> [n, m]
Tensor matmul(const Tensor& a, const Tensor& b);
// Over the last axis.
Tensor softmax(const Tensor& a);
// Euclidean norm over the last axis; the gradient at zero is taken as zero.
Tensor l2_norm(const Tensor& a);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, const Tensor& b);
Tensor operator/(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a);

}  // namespace rl
