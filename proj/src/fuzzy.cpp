#include "rl/fuzzy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "rl/ops.hpp"

namespace rl {

namespace {

// Untracked 1/0 tensor for a <= b (broadcast).
Tensor le_mask(const Tensor& a, const Tensor& b) {
  Tensor d = sub(a.detach(), b.detach());
  auto v = d.to_vector();
  for (auto& x : v) x = x <= 0.0 ? 1.0 : 0.0;
  return Tensor(d.shape(), std::move(v));
}

Tensor positive_mask(const Tensor& t) {
  auto v = t.to_vector();
  for (auto& x : v) x = x > 0.0 ? 1.0 : 0.0;
  return Tensor(t.shape(), std::move(v));
}

Tensor one() { return Tensor::scalar(1.0); }
Tensor zero() { return Tensor::scalar(0.0); }

std::size_t group_count(const Shape& s, const std::vector<std::size_t>& axes) {
  std::size_t n = 1;
  for (auto ax : axes) {
    if (ax >= s.size()) throw ShapeError("aggregation axis out of range");
    n *= s[ax];
  }
  return n;
}

double parse_number(std::string_view s) {
  std::string str(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(str, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != str.size() || str.empty()) {
    throw std::invalid_argument("expected a number, got '" + str + "'");
  }
  return v;
}

std::string fmt_number(double v) {
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

}  // namespace

TNorm parse_tnorm(std::string_view tag) {
  if (tag == "min") return TNorm::Min;
  if (tag == "product") return TNorm::Product;
  if (tag == "product_stable") return TNorm::ProductStable;
  if (tag == "lukasiewicz") return TNorm::Lukasiewicz;
  throw std::invalid_argument("unknown conjunction '" + std::string(tag) + "'");
}

TConorm parse_tconorm(std::string_view tag) {
  if (tag == "max") return TConorm::Max;
  if (tag == "probsum") return TConorm::ProbSum;
  if (tag == "probsum_stable") return TConorm::ProbSumStable;
  if (tag == "lukasiewicz") return TConorm::Lukasiewicz;
  throw std::invalid_argument("unknown disjunction '" + std::string(tag) + "'");
}

Implication parse_implication(std::string_view tag) {
  if (tag == "kleene_dienes") return Implication::KleeneDienes;
  if (tag == "goedel") return Implication::Goedel;
  if (tag == "reichenbach") return Implication::Reichenbach;
  if (tag == "reichenbach_stable") return Implication::ReichenbachStable;
  if (tag == "goguen") return Implication::Goguen;
  if (tag == "lukasiewicz") return Implication::Lukasiewicz;
  throw std::invalid_argument("unknown implication '" + std::string(tag) + "'");
}

AggregatorSpec parse_aggregator(std::string_view tag, double default_p) {
  AggregatorSpec spec;
  spec.p = default_p;
  std::string_view name = tag;
  auto colon = tag.find(':');
  if (colon != std::string_view::npos) {
    name = tag.substr(0, colon);
    auto rest = tag.substr(colon + 1);
    if (rest.substr(0, 2) != "p=") {
      throw std::invalid_argument("bad aggregator option '" + std::string(rest) + "'");
    }
    spec.p = parse_number(rest.substr(2));
  }
  static const std::pair<std::string_view, AggregatorKind> kinds[] = {
      {"min", AggregatorKind::Min},
      {"max", AggregatorKind::Max},
      {"prod", AggregatorKind::Prod},
      {"probsum", AggregatorKind::ProbSum},
      {"lukasiewicz_and", AggregatorKind::LukAnd},
      {"lukasiewicz_or", AggregatorKind::LukOr},
      {"mean", AggregatorKind::Mean},
      {"pmean", AggregatorKind::PMean},
      {"pmean_error", AggregatorKind::PMeanError},
      {"pmean_stable", AggregatorKind::PMeanStable},
      {"pmean_error_stable", AggregatorKind::PMeanErrorStable},
  };
  for (const auto& [n, k] : kinds) {
    if (n == name) {
      spec.kind = k;
      if (!(spec.p > 0.0)) throw std::invalid_argument("aggregator exponent must be positive");
      return spec;
    }
  }
  throw std::invalid_argument("unknown aggregator '" + std::string(name) + "'");
}

std::string to_string(TNorm t) {
  switch (t) {
    case TNorm::Min: return "min";
    case TNorm::Product: return "product";
    case TNorm::ProductStable: return "product_stable";
    case TNorm::Lukasiewicz: return "lukasiewicz";
  }
  return "";
}

std::string to_string(TConorm s) {
  switch (s) {
    case TConorm::Max: return "max";
    case TConorm::ProbSum: return "probsum";
    case TConorm::ProbSumStable: return "probsum_stable";
    case TConorm::Lukasiewicz: return "lukasiewicz";
  }
  return "";
}

std::string to_string(Implication i) {
  switch (i) {
    case Implication::KleeneDienes: return "kleene_dienes";
    case Implication::Goedel: return "goedel";
    case Implication::Reichenbach: return "reichenbach";
    case Implication::ReichenbachStable: return "reichenbach_stable";
    case Implication::Goguen: return "goguen";
    case Implication::Lukasiewicz: return "lukasiewicz";
  }
  return "";
}

std::string to_string(const AggregatorSpec& a) {
  std::string name;
  switch (a.kind) {
    case AggregatorKind::Min: name = "min"; break;
    case AggregatorKind::Max: name = "max"; break;
    case AggregatorKind::Prod: name = "prod"; break;
    case AggregatorKind::ProbSum: name = "probsum"; break;
    case AggregatorKind::LukAnd: name = "lukasiewicz_and"; break;
    case AggregatorKind::LukOr: name = "lukasiewicz_or"; break;
    case AggregatorKind::Mean: name = "mean"; break;
    case AggregatorKind::PMean: name = "pmean"; break;
    case AggregatorKind::PMeanError: name = "pmean_error"; break;
    case AggregatorKind::PMeanStable: name = "pmean_stable"; break;
    case AggregatorKind::PMeanErrorStable: name = "pmean_error_stable"; break;
  }
  return name + ":p=" + fmt_number(a.p);
}

FuzzyConfig FuzzyConfig::preset(std::string_view name) {
  FuzzyConfig c;
  if (name == "stable-product") return c;
  if (name == "product") {
    c.conjunction = TNorm::Product;
    c.disjunction = TConorm::ProbSum;
    c.implication = Implication::Reichenbach;
    c.forall = {AggregatorKind::PMeanError, 2.0};
    c.exists = {AggregatorKind::PMean, 2.0};
    c.sat = {AggregatorKind::PMeanError, 2.0};
    return c;
  }
  if (name == "goedel") {
    c.conjunction = TNorm::Min;
    c.disjunction = TConorm::Max;
    c.implication = Implication::KleeneDienes;
    c.forall = {AggregatorKind::Min, 1.0};
    c.exists = {AggregatorKind::Max, 1.0};
    c.sat = {AggregatorKind::Min, 1.0};
    return c;
  }
  if (name == "lukasiewicz") {
    c.conjunction = TNorm::Lukasiewicz;
    c.disjunction = TConorm::Lukasiewicz;
    c.implication = Implication::Lukasiewicz;
    c.forall = {AggregatorKind::LukAnd, 1.0};
    c.exists = {AggregatorKind::LukOr, 1.0};
    c.sat = {AggregatorKind::Mean, 1.0};
    return c;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

FuzzyConfig FuzzyConfig::with_overrides(const QuantifierOverrides& o) const {
  FuzzyConfig c = *this;
  if (o.forall_p) c.forall.p = *o.forall_p;
  if (o.exists_p) c.exists.p = *o.exists_p;
  return c;
}

void FuzzyConfig::set(std::string_view key, std::string_view value) {
  if (key == "preset") {
    double eps = epsilon;
    *this = preset(value);
    epsilon = eps;
  } else if (key == "not") {
    if (value != "standard") throw std::invalid_argument("unknown negation '" + std::string(value) + "'");
  } else if (key == "and") {
    conjunction = parse_tnorm(value);
  } else if (key == "or") {
    disjunction = parse_tconorm(value);
  } else if (key == "implies") {
    implication = parse_implication(value);
  } else if (key == "forall") {
    forall = parse_aggregator(value, forall.p);
  } else if (key == "exists") {
    exists = parse_aggregator(value, exists.p);
  } else if (key == "sat") {
    sat = parse_aggregator(value, sat.p);
  } else if (key == "epsilon") {
    epsilon = parse_number(value);
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  } else {
    throw std::invalid_argument("unknown fuzzy setting '" + std::string(key) + "'");
  }
}

Tensor pi0(const Tensor& a, double eps) { return affine(a, 1.0 - eps, eps); }
Tensor pi1(const Tensor& a, double eps) { return affine(a, 1.0 - eps, 0.0); }

Tensor negation(const Tensor& a) { return affine(a, -1.0, 1.0); }

Tensor conjunction(TNorm t, const Tensor& a, const Tensor& b, double eps) {
  switch (t) {
    case TNorm::Min: return minimum(a, b);
    case TNorm::Product: return mul(a, b);
    case TNorm::ProductStable: return mul(pi0(a, eps), pi0(b, eps));
    case TNorm::Lukasiewicz: return maximum(affine(add(a, b), 1.0, -1.0), zero());
  }
  throw std::invalid_argument("unknown t-norm");
}

Tensor disjunction(TConorm s, const Tensor& a, const Tensor& b, double eps) {
  switch (s) {
    case TConorm::Max: return maximum(a, b);
    case TConorm::ProbSum: return sub(add(a, b), mul(a, b));
    case TConorm::ProbSumStable: {
      Tensor x = pi1(a, eps), y = pi1(b, eps);
      return sub(add(x, y), mul(x, y));
    }
    case TConorm::Lukasiewicz: return minimum(add(a, b), one());
  }
  throw std::invalid_argument("unknown t-conorm");
}

Tensor implication(Implication i, const Tensor& a, const Tensor& b, double eps) {
  switch (i) {
    case Implication::KleeneDienes: return maximum(negation(a), b);
    case Implication::Goedel: return where(le_mask(a, b), one(), b);
    case Implication::Reichenbach: return add(negation(a), mul(a, b));
    case Implication::ReichenbachStable: {
      Tensor x = pi0(a, eps);
      return add(negation(x), mul(x, pi1(b, eps)));
    }
    case Implication::Goguen: {
      Tensor m = le_mask(a, b);
      return where(m, one(), div(b, where(m, one(), a)));
    }
    case Implication::Lukasiewicz: return minimum(add(negation(a), b), one());
  }
  throw std::invalid_argument("unknown implication");
}

Tensor equivalence(const FuzzyConfig& cfg, const Tensor& a, const Tensor& b) {
  return conjunction(cfg.conjunction, implication(cfg.implication, a, b, cfg.epsilon),
                     implication(cfg.implication, b, a, cfg.epsilon), cfg.epsilon);
}

Tensor aggregate(const AggregatorSpec& spec, const Tensor& values, std::vector<std::size_t> axes,
                 double eps) {
  if (group_count(values.shape(), axes) == 0) throw ShapeError("aggregation over an empty set");
  const double p = spec.p;
  switch (spec.kind) {
    case AggregatorKind::Min: return reduce(ReduceOp::Min, values, axes);
    case AggregatorKind::Max: return reduce(ReduceOp::Max, values, axes);
    case AggregatorKind::Prod: return reduce(ReduceOp::Prod, values, axes);
    case AggregatorKind::ProbSum: return negation(reduce(ReduceOp::Prod, negation(values), axes));
    case AggregatorKind::LukAnd:
      return maximum(affine(reduce(ReduceOp::Sum, affine(values, 1.0, -1.0), axes), 1.0, 1.0), zero());
    case AggregatorKind::LukOr: return minimum(reduce(ReduceOp::Sum, values, axes), one());
    case AggregatorKind::Mean: return reduce(ReduceOp::Mean, values, axes);
    case AggregatorKind::PMean: return reduce(ReduceOp::PMean, values, axes, p);
    case AggregatorKind::PMeanError: return reduce(ReduceOp::PMeanError, values, axes, p);
    case AggregatorKind::PMeanStable: return reduce(ReduceOp::PMean, pi0(values, eps), axes, p);
    case AggregatorKind::PMeanErrorStable:
      return reduce(ReduceOp::PMeanError, pi1(values, eps), axes, p);
  }
  throw std::invalid_argument("unknown aggregator");
}

Tensor aggregate(const AggregatorSpec& spec, const Tensor& values, double eps) {
  std::vector<std::size_t> axes(values.rank());
  std::iota(axes.begin(), axes.end(), 0);
  return aggregate(spec, values, std::move(axes), eps);
}

Tensor aggregate_masked(const AggregatorSpec& spec, const Tensor& values, const Tensor& mask,
                        std::vector<std::size_t> axes, double eps, double empty_value) {
  if (mask.shape() != values.shape()) {
    throw ShapeError("mask shape " + to_string(mask.shape()) + " differs from values " +
                     to_string(values.shape()));
  }
  Tensor m = positive_mask(mask.detach());
  Tensor count = reduce(ReduceOp::Sum, m, axes);
  Tensor nonempty = positive_mask(count);
  auto cv = count.to_vector();
  for (auto& c : cv) c = std::max(c, 1.0);
  Tensor safe_count(count.shape(), std::move(cv));
  const double p = spec.p;

  Tensor x = values;
  if (spec.kind == AggregatorKind::PMeanStable) x = pi0(values, eps);
  if (spec.kind == AggregatorKind::PMeanErrorStable) x = pi1(values, eps);

  auto masked_sum = [&](const Tensor& t) {
    return reduce(ReduceOp::Sum, where(m, t, zero()), axes);
  };
  auto safe_mean = [&](const Tensor& t) {
    return where(nonempty, div(masked_sum(t), safe_count), one());
  };

  Tensor agg;
  switch (spec.kind) {
    case AggregatorKind::Min: agg = reduce(ReduceOp::Min, where(m, x, one()), axes); break;
    case AggregatorKind::Max: agg = reduce(ReduceOp::Max, where(m, x, zero()), axes); break;
    case AggregatorKind::Prod: agg = reduce(ReduceOp::Prod, where(m, x, one()), axes); break;
    case AggregatorKind::ProbSum:
      agg = negation(reduce(ReduceOp::Prod, where(m, negation(x), one()), axes));
      break;
    case AggregatorKind::LukAnd:
      agg = maximum(affine(masked_sum(affine(x, 1.0, -1.0)), 1.0, 1.0), zero());
      break;
    case AggregatorKind::LukOr: agg = minimum(masked_sum(x), one()); break;
    case AggregatorKind::Mean: agg = safe_mean(x); break;
    case AggregatorKind::PMean:
    case AggregatorKind::PMeanStable: agg = pow(safe_mean(pow(x, p)), 1.0 / p); break;
    case AggregatorKind::PMeanError:
    case AggregatorKind::PMeanErrorStable:
      agg = negation(pow(safe_mean(pow(negation(x), p)), 1.0 / p));
      break;
  }
  return where(nonempty, agg, Tensor::scalar(empty_value));
}

std::string to_string(ProblemExtent e) {
  switch (e) {
    case ProblemExtent::None: return "none";
    case ProblemExtent::EdgeOnly: return "edge";
    case ProblemExtent::Interior: return "yes";
  }
  return "";
}

std::vector<std::string> profiled_operators() {
  return {"T_M",  "T_P",  "T_L",  "S_M",  "S_P",   "S_L",  "I_KD", "I_G",   "I_R",
          "I_P",  "I_Luk", "T'_P", "S'_P", "I'_R", "A_TM", "A_TP", "A_TL",  "A_SM",
          "A_SP", "A_SL", "A_pM", "A_pME", "A'_pM", "A'_pME"};
}

namespace {

using VecFn = std::function<Tensor(const Tensor&)>;

VecFn binary_fn(std::function<Tensor(const Tensor&, const Tensor&)> f) {
  return [f](const Tensor& x) {
    std::size_t i0[] = {0}, i1[] = {1};
    return f(index_select(x, 0, i0), index_select(x, 0, i1));
  };
}

std::optional<std::pair<VecFn, bool>> lookup_op(const std::string& op, double eps, double p) {
  using B = std::pair<VecFn, bool>;  // (fn, is_binary)
  auto bin = [](auto f) { return B{binary_fn(f), true}; };
  auto agg = [eps, p](AggregatorKind k) {
    AggregatorSpec s{k, p};
    return B{[s, eps](const Tensor& x) { return aggregate(s, x, eps); }, false};
  };
  if (op == "T_M") return bin([](auto& a, auto& b) { return conjunction(TNorm::Min, a, b, 0); });
  if (op == "T_P") return bin([](auto& a, auto& b) { return conjunction(TNorm::Product, a, b, 0); });
  if (op == "T_L") return bin([](auto& a, auto& b) { return conjunction(TNorm::Lukasiewicz, a, b, 0); });
  if (op == "S_M") return bin([](auto& a, auto& b) { return disjunction(TConorm::Max, a, b, 0); });
  if (op == "S_P") return bin([](auto& a, auto& b) { return disjunction(TConorm::ProbSum, a, b, 0); });
  if (op == "S_L") return bin([](auto& a, auto& b) { return disjunction(TConorm::Lukasiewicz, a, b, 0); });
  if (op == "I_KD") return bin([](auto& a, auto& b) { return implication(Implication::KleeneDienes, a, b, 0); });
  if (op == "I_G") return bin([](auto& a, auto& b) { return implication(Implication::Goedel, a, b, 0); });
  if (op == "I_R") return bin([](auto& a, auto& b) { return implication(Implication::Reichenbach, a, b, 0); });
  if (op == "I_P") return bin([](auto& a, auto& b) { return implication(Implication::Goguen, a, b, 0); });
  if (op == "I_Luk") return bin([](auto& a, auto& b) { return implication(Implication::Lukasiewicz, a, b, 0); });
  if (op == "T'_P") return bin([eps](auto& a, auto& b) { return conjunction(TNorm::ProductStable, a, b, eps); });
  if (op == "S'_P") return bin([eps](auto& a, auto& b) { return disjunction(TConorm::ProbSumStable, a, b, eps); });
  if (op == "I'_R") return bin([eps](auto& a, auto& b) { return implication(Implication::ReichenbachStable, a, b, eps); });
  if (op == "A_TM") return agg(AggregatorKind::Min);
  if (op == "A_TP") return agg(AggregatorKind::Prod);
  if (op == "A_TL") return agg(AggregatorKind::LukAnd);
  if (op == "A_SM") return agg(AggregatorKind::Max);
  if (op == "A_SP") return agg(AggregatorKind::ProbSum);
  if (op == "A_SL") return agg(AggregatorKind::LukOr);
  if (op == "A_pM") return agg(AggregatorKind::PMean);
  if (op == "A_pME") return agg(AggregatorKind::PMeanError);
  if (op == "A'_pM") return agg(AggregatorKind::PMeanStable);
  if (op == "A'_pME") return agg(AggregatorKind::PMeanErrorStable);
  return std::nullopt;
}

void widen(ProblemExtent& e, bool edge) {
  ProblemExtent seen = edge ? ProblemExtent::EdgeOnly : ProblemExtent::Interior;
  if (static_cast<int>(seen) > static_cast<int>(e)) e = seen;
}

}  // namespace

DerivativeProfile derivative_profile(const std::string& op, std::span<const std::vector<double>> grid,
                                     double eps, double p) {
  auto entry = lookup_op(op, eps, p);
  if (!entry) throw std::invalid_argument("unknown operator id '" + op + "'");
  auto [fn, is_binary] = *entry;
  DerivativeProfile prof;
  prof.op = op;
  for (const auto& point : grid) {
    if (is_binary && point.size() != 2) throw ShapeError(op + " needs points of length 2");
    if (point.empty()) throw ShapeError("empty grid point");
    Tape tape;
    Tensor x = tape.watch(Tensor::vector(point));
    Tensor y = reduce_all(ReduceOp::Sum, fn(x));
    Tensor g = tape.backward(y).of(x);
    DerivativeCell cell;
    cell.inputs = point;
    cell.partials = g.to_vector();
    std::size_t live = 0;
    bool all_small = true;
    for (double d : cell.partials) {
      if (!std::isfinite(d) || std::abs(d) > kExplodingThreshold) cell.exploding = true;
      if (std::isfinite(d) && std::abs(d) >= kVanishingThreshold) {
        ++live;
        all_small = false;
      }
    }
    for (double v : point) cell.edge = cell.edge || std::min(v, 1.0 - v) < kVanishingThreshold;
    cell.vanishing = !cell.exploding && all_small;
    cell.single_passing = !cell.exploding && point.size() >= 2 && live == 1;
    if (cell.exploding) widen(prof.observed.exploding, cell.edge);
    if (cell.vanishing) widen(prof.observed.vanishing, cell.edge);
    // Degenerate single-passing on the boundary (a factor equal to zero) is
    // not a property of the operator itself.
    if (cell.single_passing && !cell.edge) widen(prof.observed.single_passing, false);
    prof.cells.push_back(std::move(cell));
  }
  return prof;
}

std::vector<std::vector<double>> connective_grid() {
  std::vector<double> axis{0.0, 1e-8};
  for (int i = 1; i <= 9; ++i) axis.push_back(i / 10.0);
  axis.push_back(1.0 - 1e-8);
  axis.push_back(1.0);
  std::vector<std::vector<double>> grid;
  for (double a : axis) {
    for (double b : axis) grid.push_back({a, b});
  }
  return grid;
}

std::vector<std::vector<double>> aggregator_grid(std::size_t n, std::size_t samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<std::vector<double>> grid;
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    grid.push_back(std::move(v));
  }
  grid.push_back(std::vector<double>(n, 0.0));
  grid.push_back(std::vector<double>(n, 1.0));
  std::vector<double> half(n, 0.0);
  for (std::size_t i = 0; i < n; i += 2) half[i] = 1.0;
  grid.push_back(half);
  return grid;
}

GradientProblems expected_problems(const std::string& op) {
  using E = ProblemExtent;
  if (op == "T_M" || op == "S_M" || op == "I_KD" || op == "A_TM" || op == "A_SM") {
    return {E::Interior, E::None, E::None};
  }
  if (op == "I_G") return {E::Interior, E::Interior, E::None};
  if (op == "T_P" || op == "S_P" || op == "I_R") return {E::None, E::EdgeOnly, E::None};
  if (op == "I_P") return {E::None, E::Interior, E::EdgeOnly};
  if (op == "T_L" || op == "S_L" || op == "I_Luk" || op == "A_TP" || op == "A_SP" ||
      op == "A_TL" || op == "A_SL") {
    return {E::None, E::Interior, E::None};
  }
  if (op == "A_pM" || op == "A_pME") return {E::None, E::None, E::EdgeOnly};
  if (op == "T'_P" || op == "S'_P" || op == "I'_R" || op == "A'_pM" || op == "A'_pME") {
    return {};
  }
  throw std::invalid_argument("unknown operator id '" + op + "'");
}

}  // namespace rl
