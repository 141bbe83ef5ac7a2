#include "rl/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rl {

namespace {

using Data = std::shared_ptr<const std::vector<double>>;

Data make_data(std::vector<double> v) {
  return std::make_shared<const std::vector<double>>(std::move(v));
}

std::vector<std::size_t> row_strides(const Shape& s) {
  std::vector<std::size_t> st(s.size());
  std::size_t acc = 1;
  for (std::size_t i = s.size(); i-- > 0;) {
    st[i] = acc;
    acc *= s[i];
  }
  return st;
}

// Strides of `in` laid over `out`, zero on broadcast axes.
std::vector<std::size_t> broadcast_strides(const Shape& in, const Shape& out) {
  std::vector<std::size_t> st(out.size(), 0);
  auto rs = row_strides(in);
  std::size_t off = out.size() - in.size();
  for (std::size_t i = 0; i < in.size(); ++i) {
    st[off + i] = (in[i] == 1) ? 0 : rs[i];
  }
  return st;
}

// Visits every index of `shape` in row-major order with the matching flat
// offsets under strides sa and sb.
template <class F>
void walk2(const Shape& shape, const std::vector<std::size_t>& sa,
           const std::vector<std::size_t>& sb, F&& f) {
  std::size_t n = num_elements(shape);
  if (n == 0) return;
  std::size_t r = shape.size();
  if (r == 0) {
    f(std::size_t{0}, std::size_t{0}, std::size_t{0});
    return;
  }
  std::vector<std::size_t> idx(r, 0);
  std::size_t ia = 0, ib = 0;
  const std::size_t inner = shape[r - 1], sal = sa[r - 1], sbl = sb[r - 1];
  std::size_t o = 0;
  while (true) {
    for (std::size_t k = 0; k < inner; ++k, ++o) f(o, ia + k * sal, ib + k * sbl);
    std::size_t d = r - 1;
    bool done = true;
    while (d-- > 0) {
      if (++idx[d] < shape[d]) {
        ia += sa[d];
        ib += sb[d];
        done = false;
        break;
      }
      ia -= sa[d] * (shape[d] - 1);
      ib -= sb[d] * (shape[d] - 1);
      idx[d] = 0;
    }
    if (done) break;
  }
}

template <class F>
void walk1(const Shape& shape, const std::vector<std::size_t>& s, F&& f) {
  walk2(shape, s, s, [&](std::size_t o, std::size_t i, std::size_t) { f(o, i); });
}

template <class F, class DA, class DB>
Tensor binary_op(const Tensor& a, const Tensor& b, F f, DA da, DB db) {
  Shape out = broadcast_shapes(a.shape(), b.shape());
  const std::size_t n = num_elements(out);
  Data ad = a.storage(), bd = b.storage();
  const auto& A = *ad;
  const auto& B = *bd;
  std::vector<double> v(n);
  const bool same = a.shape() == b.shape();
  std::vector<std::size_t> sa, sb;
  if (same) {
    for (std::size_t i = 0; i < n; ++i) v[i] = f(A[i], B[i]);
  } else {
    sa = broadcast_strides(a.shape(), out);
    sb = broadcast_strides(b.shape(), out);
    walk2(out, sa, sb, [&](std::size_t o, std::size_t i, std::size_t j) { v[o] = f(A[i], B[j]); });
  }
  Data od = make_data(std::move(v));
  const Tensor* ins[] = {&a, &b};
  return record_op(out, od, ins,
                   [ad, bd, od, same, sa, sb, out, da, db](std::span<const double> g,
                                                           std::span<double* const> gin) {
                     const auto& A = *ad;
                     const auto& B = *bd;
                     const auto& O = *od;
                     double* ga = gin[0];
                     double* gb = gin[1];
                     auto step = [&](std::size_t o, std::size_t i, std::size_t j) {
                       double go = g[o];
                       if (go == 0.0) return;
                       if (ga) ga[i] += go * da(A[i], B[j], O[o]);
                       if (gb) gb[j] += go * db(A[i], B[j], O[o]);
                     };
                     if (same) {
                       for (std::size_t i = 0; i < O.size(); ++i) step(i, i, i);
                     } else {
                       walk2(out, sa, sb, step);
                     }
                   });
}

template <class F, class D>
Tensor unary_op(const Tensor& a, F f, D d) {
  Data ad = a.storage();
  const auto& A = *ad;
  std::vector<double> v(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) v[i] = f(A[i]);
  Data od = make_data(std::move(v));
  const Tensor* ins[] = {&a};
  return record_op(a.shape(), od, ins,
                   [ad, od, d](std::span<const double> g, std::span<double* const> gin) {
                     const auto& A = *ad;
                     const auto& O = *od;
                     double* ga = gin[0];
                     for (std::size_t i = 0; i < A.size(); ++i) {
                       if (g[i] != 0.0) ga[i] += g[i] * d(A[i], O[i]);
                     }
                   });
}

bool is_integer(double p) { return std::floor(p) == p; }

std::vector<std::size_t> normalize_axes(std::vector<std::size_t> axes, std::size_t rank) {
  std::sort(axes.begin(), axes.end());
  if (std::adjacent_find(axes.begin(), axes.end()) != axes.end()) {
    throw ShapeError("duplicate reduction axis");
  }
  for (auto ax : axes) {
    if (ax >= rank) {
      throw ShapeError("reduction axis " + std::to_string(ax) + " out of range for rank " +
                       std::to_string(rank));
    }
  }
  return axes;
}

}  // namespace

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  std::size_t r = std::max(a.size(), b.size());
  Shape out(r);
  for (std::size_t i = 0; i < r; ++i) {
    std::size_t da = i < a.size() ? a[a.size() - 1 - i] : 1;
    std::size_t db = i < b.size() ? b[b.size() - 1 - i] : 1;
    std::size_t d;
    if (da == db || db == 1) {
      d = da;
    } else if (da == 1) {
      d = db;
    } else {
      throw ShapeError("cannot broadcast " + to_string(a) + " with " + to_string(b));
    }
    out[r - 1 - i] = d;
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x + y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x - y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x * y; }, [](double, double y, double) { return y; },
      [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  for (double y : b.values()) {
    if (y == 0.0) throw DomainError("division by zero");
  }
  return binary_op(
      a, b, [](double x, double y) { return x / y; },
      [](double, double y, double) { return 1.0 / y; },
      [](double x, double y, double) { return -x / (y * y); });
}

Tensor pow(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b,
      [](double x, double y) {
        if (x < 0.0 && !is_integer(y)) throw DomainError("negative base with fractional exponent");
        return std::pow(x, y);
      },
      [](double x, double y, double) { return y * std::pow(x, y - 1.0); },
      [](double x, double, double z) { return x > 0.0 ? z * std::log(x) : 0.0; });
}

Tensor pow(const Tensor& a, double p) {
  if (!is_integer(p)) {
    for (double x : a.values()) {
      if (x < 0.0) throw DomainError("negative base with fractional exponent");
    }
  }
  return unary_op(
      a, [p](double x) { return std::pow(x, p); },
      [p](double x, double) { return p * std::pow(x, p - 1.0); });
}

Tensor minimum(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x <= y ? x : y; },
      [](double x, double y, double) { return x <= y ? 1.0 : 0.0; },
      [](double x, double y, double) { return x <= y ? 0.0 : 1.0; });
}

Tensor maximum(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x >= y ? x : y; },
      [](double x, double y, double) { return x >= y ? 1.0 : 0.0; },
      [](double x, double y, double) { return x >= y ? 0.0 : 1.0; });
}

Tensor exp(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  for (double x : a.values()) {
    if (!(x > 0.0)) throw DomainError("log of non-positive value");
  }
  return unary_op(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor neg(const Tensor& a) { return affine(a, -1.0, 0.0); }

Tensor sqrt(const Tensor& a) {
  for (double x : a.values()) {
    if (x < 0.0) throw DomainError("sqrt of negative value");
  }
  return unary_op(
      a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Tensor affine(const Tensor& a, double scale, double shift) {
  return unary_op(
      a, [scale, shift](double x) { return scale * x + shift; },
      [scale](double, double) { return scale; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_op(
      a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor elu(const Tensor& a, double alpha) {
  return unary_op(
      a, [alpha](double x) { return x >= 0.0 ? x : alpha * (std::exp(x) - 1.0); },
      [alpha](double x, double y) { return x >= 0.0 ? 1.0 : y + alpha; });
}

Tensor clamp_passthrough(const Tensor& a, double lo, double hi) {
  return unary_op(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [](double, double) { return 1.0; });
}

Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor* b) {
  auto need_b = [&]() -> const Tensor& {
    if (!b) throw std::invalid_argument("binary elementwise op needs two operands");
    return *b;
  };
  switch (op) {
    case ElementwiseOp::Add: return add(a, need_b());
    case ElementwiseOp::Sub: return sub(a, need_b());
    case ElementwiseOp::Mul: return mul(a, need_b());
    case ElementwiseOp::Div: return div(a, need_b());
    case ElementwiseOp::Pow: return pow(a, need_b());
    case ElementwiseOp::Min: return minimum(a, need_b());
    case ElementwiseOp::Max: return maximum(a, need_b());
    case ElementwiseOp::Exp: return exp(a);
    case ElementwiseOp::Log: return log(a);
    case ElementwiseOp::Neg: return neg(a);
  }
  throw std::invalid_argument("unknown elementwise op");
}

Tensor where(const Tensor& cond, const Tensor& a, const Tensor& b) {
  Shape out = broadcast_shapes(cond.shape(), broadcast_shapes(a.shape(), b.shape()));
  const std::size_t n = num_elements(out);
  Tensor A = a.shape() == out ? a : broadcast_to(a, out);
  Tensor B = b.shape() == out ? b : broadcast_to(b, out);
  auto mask = std::make_shared<std::vector<char>>(n);
  {
    const auto& C = *cond.storage();
    auto sc = broadcast_strides(cond.shape(), out);
    walk1(out, sc, [&](std::size_t o, std::size_t i) { (*mask)[o] = C[i] != 0.0; });
  }
  const auto& AV = *A.storage();
  const auto& BV = *B.storage();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (*mask)[i] ? AV[i] : BV[i];
  const Tensor* ins[] = {&A, &B};
  return record_op(out, make_data(std::move(v)), ins,
                   [mask](std::span<const double> g, std::span<double* const> gin) {
                     const auto& M = *mask;
                     for (std::size_t i = 0; i < M.size(); ++i) {
                       if (M[i]) {
                         if (gin[0]) gin[0][i] += g[i];
                       } else if (gin[1]) {
                         gin[1][i] += g[i];
                       }
                     }
                   });
}

namespace {

// (mean x^p)^(1/p) computed as m (mean (x/m)^p)^(1/p) with m the constant
// group maximum, so large p does not underflow. Same value and gradient.
Tensor scaled_pmean(const Tensor& x, const std::vector<std::size_t>& axes, double p) {
  Tensor m = reduce(ReduceOp::Max, Tensor(x.shape(), x.to_vector()), axes);
  std::vector<double> mv = m.to_vector();
  for (auto& v : mv) {
    if (!(v > 0.0)) v = 1.0;
  }
  Tensor scale(m.shape(), std::move(mv));
  Shape keep = x.shape();
  for (auto ax : axes) keep[ax] = 1;
  Tensor scaled = div(x, reshape(scale, keep));
  return mul(pow(reduce(ReduceOp::Mean, pow(scaled, p), axes), 1.0 / p), scale);
}

}  // namespace

Tensor reduce(ReduceOp op, const Tensor& a, std::vector<std::size_t> axes, double p) {
  axes = normalize_axes(std::move(axes), a.rank());
  if (op == ReduceOp::PMean) return scaled_pmean(a, axes, p);
  if (op == ReduceOp::PMeanError) return affine(scaled_pmean(affine(a, -1.0, 1.0), axes, p), -1.0, 1.0);
  const Shape& in = a.shape();
  std::vector<bool> reduced(in.size(), false);
  for (auto ax : axes) reduced[ax] = true;
  Shape out;
  std::size_t count = 1;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (reduced[i]) {
      count *= in[i];
    } else {
      out.push_back(in[i]);
    }
  }
  if (count == 0 && op != ReduceOp::Sum && op != ReduceOp::Prod) {
    throw ShapeError("reduction over an empty axis");
  }
  // Offsets of each input element into the output.
  std::vector<std::size_t> os(in.size(), 0);
  {
    auto ors = row_strides(out);
    std::size_t k = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (!reduced[i]) os[i] = ors[k++];
    }
  }
  const std::size_t n_out = num_elements(out);
  Data ad = a.storage();
  const auto& A = *ad;
  const Tensor* ins[] = {&a};

  switch (op) {
    case ReduceOp::Sum:
    case ReduceOp::Mean: {
      std::vector<double> v(n_out, 0.0);
      walk1(in, os, [&](std::size_t i, std::size_t j) { v[j] += A[i]; });
      double scale = op == ReduceOp::Mean ? 1.0 / static_cast<double>(count) : 1.0;
      if (scale != 1.0) {
        for (auto& x : v) x *= scale;
      }
      return record_op(out, make_data(std::move(v)), ins,
                       [in, os, scale](std::span<const double> g, std::span<double* const> gin) {
                         double* ga = gin[0];
                         walk1(in, os, [&](std::size_t i, std::size_t j) { ga[i] += g[j] * scale; });
                       });
    }
    case ReduceOp::Min:
    case ReduceOp::Max: {
      const bool is_min = op == ReduceOp::Min;
      std::vector<double> v(n_out);
      auto arg = std::make_shared<std::vector<std::size_t>>(
          n_out, std::numeric_limits<std::size_t>::max());
      auto& ARG = *arg;
      walk1(in, os, [&](std::size_t i, std::size_t j) {
        double x = A[i];
        if (ARG[j] == std::numeric_limits<std::size_t>::max() || (is_min ? x < v[j] : x > v[j])) {
          v[j] = x;
          ARG[j] = i;
        }
      });
      return record_op(out, make_data(std::move(v)), ins,
                       [arg](std::span<const double> g, std::span<double* const> gin) {
                         const auto& ARG = *arg;
                         for (std::size_t j = 0; j < ARG.size(); ++j) gin[0][ARG[j]] += g[j];
                       });
    }
    case ReduceOp::Prod: {
      auto nz = std::make_shared<std::vector<double>>(n_out, 1.0);
      auto zeros = std::make_shared<std::vector<std::size_t>>(n_out, 0);
      walk1(in, os, [&](std::size_t i, std::size_t j) {
        if (A[i] == 0.0) {
          ++(*zeros)[j];
        } else {
          (*nz)[j] *= A[i];
        }
      });
      std::vector<double> v(n_out);
      for (std::size_t j = 0; j < n_out; ++j) v[j] = (*zeros)[j] ? 0.0 : (*nz)[j];
      return record_op(out, make_data(std::move(v)), ins,
                       [ad, in, os, nz, zeros](std::span<const double> g,
                                               std::span<double* const> gin) {
                         const auto& A = *ad;
                         double* ga = gin[0];
                         walk1(in, os, [&](std::size_t i, std::size_t j) {
                           std::size_t zc = (*zeros)[j];
                           if (zc == 0) {
                             ga[i] += g[j] * (*nz)[j] / A[i];
                           } else if (zc == 1 && A[i] == 0.0) {
                             ga[i] += g[j] * (*nz)[j];
                           }
                         });
                       });
    }
    default:
      break;
  }
  throw std::invalid_argument("unknown reduce op");
}

Tensor reduce_all(ReduceOp op, const Tensor& a, double p) {
  std::vector<std::size_t> axes(a.rank());
  std::iota(axes.begin(), axes.end(), 0);
  return reduce(op, a, std::move(axes), p);
}

Tensor sum(const Tensor& a, std::vector<std::size_t> axes) {
  return reduce(ReduceOp::Sum, a, std::move(axes));
}

Tensor mean(const Tensor& a, std::vector<std::size_t> axes) {
  return reduce(ReduceOp::Mean, a, std::move(axes));
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (num_elements(shape) != a.size()) {
    throw ShapeError("cannot reshape " + to_string(a.shape()) + " to " + to_string(shape));
  }
  const Tensor* ins[] = {&a};
  return record_op(std::move(shape), a.storage(), ins,
                   [](std::span<const double> g, std::span<double* const> gin) {
                     for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i];
                   });
}

Tensor permute(const Tensor& a, const std::vector<std::size_t>& perm) {
  const Shape& in = a.shape();
  if (perm.size() != in.size()) throw ShapeError("permutation rank mismatch");
  std::vector<bool> seen(in.size(), false);
  for (auto p : perm) {
    if (p >= in.size() || seen[p]) throw ShapeError("invalid permutation");
    seen[p] = true;
  }
  bool identity = true;
  for (std::size_t i = 0; i < perm.size(); ++i) identity = identity && perm[i] == i;
  if (identity) return a;
  auto rs = row_strides(in);
  Shape out(in.size());
  std::vector<std::size_t> is(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = in[perm[i]];
    is[i] = rs[perm[i]];
  }
  const auto& A = *a.storage();
  std::vector<double> v(a.size());
  walk1(out, is, [&](std::size_t o, std::size_t i) { v[o] = A[i]; });
  const Tensor* ins[] = {&a};
  return record_op(out, make_data(std::move(v)), ins,
                   [out, is](std::span<const double> g, std::span<double* const> gin) {
                     walk1(out, is, [&](std::size_t o, std::size_t i) { gin[0][i] += g[o]; });
                   });
}

Tensor broadcast_to(const Tensor& a, const Shape& shape) {
  if (broadcast_shapes(a.shape(), shape) != shape) {
    throw ShapeError("cannot broadcast " + to_string(a.shape()) + " to " + to_string(shape));
  }
  if (a.shape() == shape) return a;
  auto st = broadcast_strides(a.shape(), shape);
  const auto& A = *a.storage();
  std::vector<double> v(num_elements(shape));
  walk1(shape, st, [&](std::size_t o, std::size_t i) { v[o] = A[i]; });
  const Tensor* ins[] = {&a};
  return record_op(shape, make_data(std::move(v)), ins,
                   [shape, st](std::span<const double> g, std::span<double* const> gin) {
                     walk1(shape, st, [&](std::size_t o, std::size_t i) { gin[0][i] += g[o]; });
                   });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of no tensors");
  const Shape& s0 = parts[0].shape();
  if (axis >= s0.size()) throw ShapeError("concat axis out of range");
  Shape out = s0;
  out[axis] = 0;
  std::vector<std::size_t> chunk(parts.size());
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s0[i];
  for (std::size_t i = axis + 1; i < s0.size(); ++i) inner *= s0[i];
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Shape& s = parts[k].shape();
    if (s.size() != s0.size()) throw ShapeError("concat rank mismatch");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != axis && s[i] != s0[i]) {
        throw ShapeError("concat shape mismatch " + to_string(s) + " vs " + to_string(s0));
      }
    }
    out[axis] += s[axis];
    chunk[k] = s[axis] * inner;
  }
  std::size_t row = out[axis] * inner;
  std::vector<double> v(outer * row);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& P = *parts[k].storage();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(P.begin() + o * chunk[k], chunk[k], v.begin() + o * row + off);
    }
    off += chunk[k];
  }
  std::vector<const Tensor*> ins;
  for (const auto& p : parts) ins.push_back(&p);
  return record_op(out, make_data(std::move(v)), ins,
                   [chunk, outer, row](std::span<const double> g, std::span<double* const> gin) {
                     std::size_t off = 0;
                     for (std::size_t k = 0; k < chunk.size(); ++k) {
                       if (gin[k]) {
                         for (std::size_t o = 0; o < outer; ++o) {
                           for (std::size_t t = 0; t < chunk[k]; ++t) {
                             gin[k][o * chunk[k] + t] += g[o * row + off + t];
                           }
                         }
                       }
                       off += chunk[k];
                     }
                   });
}

Tensor stack(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("stack of no tensors");
  std::vector<Tensor> lifted;
  lifted.reserve(parts.size());
  for (const auto& p : parts) {
    Shape s = p.shape();
    s.insert(s.begin(), 1);
    lifted.push_back(reshape(p, s));
  }
  return concat(lifted, 0);
}

Tensor index_select(const Tensor& a, std::size_t axis, std::span<const std::size_t> indices) {
  const Shape& in = a.shape();
  if (axis >= in.size()) throw ShapeError("index_select axis out of range");
  std::size_t outer = 1, inner = 1, d = in[axis];
  for (std::size_t i = 0; i < axis; ++i) outer *= in[i];
  for (std::size_t i = axis + 1; i < in.size(); ++i) inner *= in[i];
  for (auto ix : indices) {
    if (ix >= d) throw ShapeError("index " + std::to_string(ix) + " out of range " + std::to_string(d));
  }
  Shape out = in;
  out[axis] = indices.size();
  auto idx = std::make_shared<std::vector<std::size_t>>(indices.begin(), indices.end());
  const auto& A = *a.storage();
  std::vector<double> v(num_elements(out));
  std::size_t m = idx->size();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t t = 0; t < m; ++t) {
      std::copy_n(A.begin() + (o * d + (*idx)[t]) * inner, inner, v.begin() + (o * m + t) * inner);
    }
  }
  const Tensor* ins[] = {&a};
  return record_op(out, make_data(std::move(v)), ins,
                   [idx, outer, inner, d](std::span<const double> g, std::span<double* const> gin) {
                     std::size_t m = idx->size();
                     for (std::size_t o = 0; o < outer; ++o) {
                       for (std::size_t t = 0; t < m; ++t) {
                         double* dst = gin[0] + (o * d + (*idx)[t]) * inner;
                         const double* src = g.data() + (o * m + t) * inner;
                         for (std::size_t k = 0; k < inner; ++k) dst[k] += src[k];
                       }
                     }
                   });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shapes " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  Data ad = a.storage(), bd = b.storage();
  const auto& A = *ad;
  const auto& B = *bd;
  std::vector<double> v(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = v.data() + i * m;
    for (std::size_t t = 0; t < k; ++t) {
      double x = A[i * k + t];
      if (x == 0.0) continue;
      const double* brow = B.data() + t * m;
      for (std::size_t j = 0; j < m; ++j) row[j] += x * brow[j];
    }
  }
  const Tensor* ins[] = {&a, &b};
  return record_op({n, m}, make_data(std::move(v)), ins,
                   [ad, bd, n, k, m](std::span<const double> g, std::span<double* const> gin) {
                     const auto& A = *ad;
                     const auto& B = *bd;
                     if (gin[0]) {
                       for (std::size_t i = 0; i < n; ++i) {
                         for (std::size_t t = 0; t < k; ++t) {
                           double acc = 0.0;
                           for (std::size_t j = 0; j < m; ++j) acc += g[i * m + j] * B[t * m + j];
                           gin[0][i * k + t] += acc;
                         }
                       }
                     }
                     if (gin[1]) {
                       for (std::size_t i = 0; i < n; ++i) {
                         for (std::size_t t = 0; t < k; ++t) {
                           double x = A[i * k + t];
                           if (x == 0.0) continue;
                           double* dst = gin[1] + t * m;
                           for (std::size_t j = 0; j < m; ++j) dst[j] += x * g[i * m + j];
                         }
                       }
                     }
                   });
}

Tensor softmax(const Tensor& a) {
  if (a.rank() == 0) throw ShapeError("softmax of a scalar");
  std::size_t w = a.shape().back();
  std::size_t rows = w ? a.size() / w : 0;
  const auto& A = *a.storage();
  std::vector<double> v(a.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = A.data() + r * w;
    double* y = v.data() + r * w;
    double mx = *std::max_element(x, x + w);
    double s = 0.0;
    for (std::size_t j = 0; j < w; ++j) s += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < w; ++j) y[j] /= s;
  }
  Data od = make_data(std::move(v));
  const Tensor* ins[] = {&a};
  return record_op(a.shape(), od, ins,
                   [od, rows, w](std::span<const double> g, std::span<double* const> gin) {
                     const auto& Y = *od;
                     for (std::size_t r = 0; r < rows; ++r) {
                       double dot = 0.0;
                       for (std::size_t j = 0; j < w; ++j) dot += g[r * w + j] * Y[r * w + j];
                       for (std::size_t j = 0; j < w; ++j) {
                         gin[0][r * w + j] += Y[r * w + j] * (g[r * w + j] - dot);
                       }
                     }
                   });
}

Tensor l2_norm(const Tensor& a) {
  if (a.rank() == 0) throw ShapeError("l2_norm of a scalar");
  Shape out(a.shape().begin(), a.shape().end() - 1);
  std::size_t w = a.shape().back();
  std::size_t rows = num_elements(out);
  Data ad = a.storage();
  const auto& A = *ad;
  std::vector<double> v(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < w; ++j) s += A[r * w + j] * A[r * w + j];
    v[r] = std::sqrt(s);
  }
  Data od = make_data(std::move(v));
  const Tensor* ins[] = {&a};
  return record_op(out, od, ins,
                   [ad, od, rows, w](std::span<const double> g, std::span<double* const> gin) {
                     const auto& A = *ad;
                     const auto& Y = *od;
                     for (std::size_t r = 0; r < rows; ++r) {
                       if (Y[r] == 0.0 || g[r] == 0.0) continue;
                       double s = g[r] / Y[r];
                       for (std::size_t j = 0; j < w; ++j) gin[0][r * w + j] += s * A[r * w + j];
                     }
                   });
}

Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
Tensor operator-(const Tensor& a) { return neg(a); }

}  // namespace rl
