#include "rl/theory.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rl/datasets.hpp"
#include "rl/ops.hpp"

namespace rl {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_number(std::string_view key, std::string_view text) {
  std::string s = trim(text);
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument("setting '" + std::string(key) + "': expected a number, found '" + s + "'");
  }
  return v;
}

std::size_t to_count(std::string_view key, std::string_view text, bool positive) {
  double v = to_number(key, text);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)) || (positive && v == 0)) {
    throw std::invalid_argument("setting '" + std::string(key) + "': expected a " +
                                (positive ? "positive" : "non-negative") + " integer");
  }
  return static_cast<std::size_t>(v);
}

bool to_bool(std::string_view key, std::string_view text) {
  std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("setting '" + std::string(key) + "': expected true or false");
}

}  // namespace

std::vector<Breakpoint> parse_schedule(std::string_view text) {
  std::vector<Breakpoint> out;
  std::stringstream in{std::string(text)};
  std::string item;
  while (std::getline(in, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("schedule entry '" + trim(item) + "' needs epoch:p");
    Breakpoint b{to_number("schedule", item.substr(0, colon)), to_number("schedule", item.substr(colon + 1))};
    if (!out.empty() && b.epoch <= out.back().epoch) {
      throw std::invalid_argument("schedule epochs must be strictly increasing");
    }
    if (!(b.p > 0)) throw std::invalid_argument("schedule exponents must be positive");
    out.push_back(b);
  }
  if (out.empty()) throw std::invalid_argument("empty schedule");
  return out;
}

double schedule_value(const std::vector<Breakpoint>& s, double epoch, bool linear, double fallback) {
  if (s.empty()) return fallback;
  if (epoch <= s.front().epoch) return s.front().p;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (epoch < s[i + 1].epoch) {
      if (!linear) return s[i].p;
      double t = (epoch - s[i].epoch) / (s[i + 1].epoch - s[i].epoch);
      return s[i].p + t * (s[i + 1].p - s[i].p);
    }
  }
  return s.back().p;
}

void Theory::apply_setting(const std::string& key, const std::string& raw) {
  std::string value = trim(raw);
  static const char* fuzzy_keys[] = {"preset", "not", "and", "or", "implies", "forall", "exists", "sat", "epsilon"};
  for (const char* k : fuzzy_keys) {
    if (key == k) return fuzzy.set(key, value);
  }
  if (key == "epochs") {
    train.epochs = to_count(key, value, true);
  } else if (key == "batch_size") {
    train.batch_size = to_count(key, value, true);
  } else if (key == "lr") {
    train.lr = to_number(key, value);
    if (!(train.lr > 0)) throw std::invalid_argument("lr must be positive");
  } else if (key == "seed") {
    train.seed = to_count(key, value, false);
  } else if (key == "reg") {
    if (value == "none") train.reg = Regularizer::None;
    else if (value == "l1") train.reg = Regularizer::L1;
    else if (value == "l2") train.reg = Regularizer::L2;
    else throw std::invalid_argument("reg must be none, l1 or l2");
  } else if (key == "lambda") {
    train.lambda = to_number(key, value);
    if (train.lambda < 0) throw std::invalid_argument("lambda must be non-negative");
  } else if (key == "schedule.forall") {
    train.forall_schedule = value == "none" ? std::vector<Breakpoint>{} : parse_schedule(value);
  } else if (key == "schedule.exists") {
    train.exists_schedule = value == "none" ? std::vector<Breakpoint>{} : parse_schedule(value);
  } else if (key == "schedule.mode") {
    if (value != "step" && value != "linear") throw std::invalid_argument("schedule.mode must be step or linear");
    train.linear_schedule = value == "linear";
  } else if (key == "eq_alpha") {
    eq_alpha = to_number(key, value);
  } else if (key == "strict_diag") {
    strict_diag = to_bool(key, value);
  } else if (key == "refute.q") {
    refute.q = to_number(key, value);
    if (!(refute.q > 0.5 && refute.q < 1.0)) throw std::invalid_argument("refute.q must lie in (0.5, 1)");
  } else if (key == "refute.alpha") {
    refute.alpha = to_number(key, value);
    if (refute.alpha < 0) throw std::invalid_argument("refute.alpha must be non-negative");
  } else if (key == "refute.beta") {
    refute.beta = to_number(key, value);
    if (refute.beta < 0) throw std::invalid_argument("refute.beta must be non-negative");
  } else if (key == "refute.c") {
    refute.c = to_number(key, value);
    if (!(refute.c > 1)) throw std::invalid_argument("refute.c must exceed 1");
  } else if (key == "refute.epochs") {
    refute.epochs = to_count(key, value, true);
  } else if (key == "refute.restarts") {
    refute.restarts = to_count(key, value, true);
  } else if (key == "refute.lr") {
    refute.lr = to_number(key, value);
  } else if (key == "reason.restarts") {
    query_restarts = to_count(key, value, true);
  } else {
    throw std::invalid_argument("unknown setting '" + key + "'");
  }
}

void Theory::reinitialize(std::uint64_t seed) {
  params.clear();
  Rng rng(seed);
  env.init_params(params, rng);
}

std::string Theory::axiom_label(std::size_t i) const {
  return axioms.at(i).label.empty() ? "axiom" + std::to_string(i + 1) : axioms[i].label;
}

const DataGroup* Theory::group_of(const std::string& var) const {
  for (const auto& g : groups) {
    for (const auto& v : g.vars) {
      if (v == var) return &g;
    }
  }
  return nullptr;
}

namespace {

std::size_t width_of(const Signature& sig, const std::vector<std::string>& domains) {
  std::size_t w = 0;
  for (const auto& d : domains) w += num_elements(sig.domain_shape(d));
  return w;
}

Shape prepend(std::size_t n, const Shape& s) {
  Shape out{n};
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

class Builder {
 public:
  Builder(const TheoryDoc& doc, const BuildOptions& opts, Theory& t) : doc_(doc), opts_(opts), t_(t) {}

  void run() {
    for (const auto* c : doc_.config()) setting(c->key, c->value, c->span);
    for (const auto& [k, v] : opts_.overrides) setting(k, v, {});
    if (opts_.seed) t_.train.seed = *opts_.seed;
    t_.env.signature = doc_.signature();
    t_.env.eq_alpha = t_.eq_alpha;
    for (const auto& st : doc_.statements) {
      std::visit([&](const auto& s) { statement(s); }, st);
    }
    t_.env.check_complete();
    if (t_.axioms.empty()) throw LogicError("the theory has no axioms");
    t_.reinitialize(t_.train.seed);
  }

 private:
  const Signature& sig() const { return t_.env.signature; }

  void setting(const std::string& key, const std::string& value, const SourceSpan& span) {
    try {
      t_.apply_setting(key, value);
    } catch (const std::invalid_argument& e) {
      throw LogicError(e.what(), span);
    }
  }

  void statement(const DomainDecl&) {}
  void statement(const ConfigEntry&) {}

  void statement(const AxiomDecl& a) { t_.axioms.push_back({a.label, a.formula, a.overrides}); }

  void statement(const ConstDecl& c) {
    const Shape& shape = sig().domain_shape(c.domain);
    const auto& g = c.grounding;
    for (std::size_t i = 0; i < c.names.size(); ++i) {
      ConstantGrounding cg;
      if (g.kind == GroundingSpec::Kind::Literal) {
        std::size_t per = num_elements(shape);
        if (g.numbers.size() != per * c.names.size()) {
          throw LogicError("literal for '" + c.names[i] + "' does not fit domain " + c.domain, g.span);
        }
        auto first = g.numbers.begin() + static_cast<std::ptrdiff_t>(i * per);
        cg.value = Tensor(shape, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(per)));
      } else {
        // trainable(lo, hi) or no grounding: an embedding learned from [lo, hi].
        cg.slot = "const." + c.names[i];
        if (g.numbers.size() >= 2) {
          cg.init_lo = g.numbers[0];
          cg.init_hi = g.numbers[1];
        }
      }
      t_.env.constants[c.names[i]] = std::move(cg);
    }
  }

  void statement(const VarDecl& v) {
    const Shape& shape = sig().domain_shape(v.domain);
    const auto& g = v.grounding;
    for (const auto& name : v.names) {
      VariableGrounding vg;
      if (g.kind == GroundingSpec::Kind::Literal) {
        std::size_t per = num_elements(shape);
        if (g.numbers.empty() || g.numbers.size() % per != 0) {
          throw LogicError("literal for '" + name + "' does not fit domain " + v.domain, g.span);
        }
        vg.values = Tensor(prepend(g.numbers.size() / per, shape), g.numbers);
      } else if (g.kind == GroundingSpec::Kind::Constants) {
        vg.constants = g.names;
      } else {
        continue;  // bound by a data statement
      }
      t_.env.variables[name] = std::move(vg);
    }
  }

  void statement(const DataDecl& d) {
    fs::path p = fs::path(d.path);
    if (p.is_relative() && !opts_.data_dir.empty()) p = fs::path(opts_.data_dir) / p;
    auto it = files_.find(p.string());
    if (it == files_.end()) {
      try {
        it = files_.emplace(p.string(), load_csv(p.string())).first;
      } catch (const DataError& e) {
        throw LogicError(e.what(), d.span);
      }
    }
    const Dataset& file = it->second;
    std::vector<std::size_t> rows;
    if (d.where && d.where->first >= file.width()) {
      throw LogicError("filter column " + std::to_string(d.where->first) + " out of range in " + d.path, d.span);
    }
    for (std::size_t r = 0; r < file.rows; ++r) {
      if (!d.where || file.at(r, d.where->first) == d.where->second) rows.push_back(r);
    }
    std::vector<std::size_t> cols = d.columns;
    if (cols.empty()) {
      for (std::size_t c = 0; c < file.width(); ++c) cols.push_back(c);
    }
    for (std::size_t c : cols) {
      if (c >= file.width()) {
        throw LogicError("column " + std::to_string(c) + " out of range in " + d.path, d.span);
      }
    }
    std::string domain = d.domain.empty() ? sig().variable_domain(d.var) : d.domain;
    const Shape& shape = sig().domain_shape(domain);
    if (num_elements(shape) != cols.size()) {
      throw LogicError("data for '" + d.var + "' has " + std::to_string(cols.size()) + " columns, domain " +
                           domain + " needs " + std::to_string(num_elements(shape)),
                       d.span);
    }
    if (rows.empty()) throw LogicError("data for '" + d.var + "' selects no rows", d.span);
    Tensor m = file.take_rows(rows).matrix(cols);
    t_.env.variables[d.var] = VariableGrounding{reshape(m, prepend(rows.size(), shape)), {}};

    std::string key = p.string();
    if (d.where) key += "|" + std::to_string(d.where->first) + "=" + format_number(d.where->second);
    for (auto& g : t_.groups) {
      if (g.key == key) {
        g.vars.push_back(d.var);
        return;
      }
    }
    t_.groups.push_back({key, rows.size(), {d.var}});
  }

  void statement(const FuncDecl& f) {
    const auto& g = f.grounding;
    const Shape& out = sig().domain_shape(f.output);
    GroundingPtr gp;
    switch (g.kind) {
      case GroundingSpec::Kind::Mlp:
        gp = std::make_shared<MlpGrounding>("func." + f.name, width_of(sig(), f.inputs), g.mlp, out);
        break;
      case GroundingSpec::Kind::Distance:
        if (num_elements(out) != 1) throw LogicError("distance needs a one-element output domain", f.span);
        gp = std::make_shared<DistanceGrounding>();
        break;
      default:
        throw LogicError("function '" + f.name + "' needs an mlp or distance grounding", f.span);
    }
    t_.env.functions[f.name] = gp;
  }

  void statement(const PredDecl& p) {
    const auto& g = p.grounding;
    GroundingPtr gp;
    switch (g.kind) {
      case GroundingSpec::Kind::Mlp:
        gp = std::make_shared<MlpGrounding>("pred." + p.name, width_of(sig(), p.inputs), g.mlp, Shape{});
        break;
      case GroundingSpec::Kind::SelectMlp: {
        std::vector<std::string> head(p.inputs.begin(), p.inputs.end() - 1);
        gp = std::make_shared<SelectMlpGrounding>("pred." + p.name, width_of(sig(), head), g.mlp);
        break;
      }
      case GroundingSpec::Kind::SmoothEq:
        gp = std::make_shared<SmoothEqualityGrounding>(g.numbers.empty() ? t_.eq_alpha : g.numbers[0]);
        break;
      case GroundingSpec::Kind::Truth:
        gp = TruthGrounding::fixed(g.numbers.at(0));
        break;
      case GroundingSpec::Kind::Trainable:
        gp = TruthGrounding::trainable("pred." + p.name, g.numbers.empty() ? 0.5 : g.numbers[0], Bounds{0.0, 1.0});
        break;
      default:
        throw LogicError("predicate '" + p.name + "' has no usable grounding", p.span);
    }
    t_.env.predicates[p.name] = gp;
  }

  const TheoryDoc& doc_;
  const BuildOptions& opts_;
  Theory& t_;
  std::map<std::string, Dataset> files_;
};

}  // namespace

Theory build_theory(const TheoryDoc& doc, const BuildOptions& opts) {
  Theory t;
  Builder(doc, opts, t).run();
  return t;
}

Theory load_theory(const std::string& path, BuildOptions opts) {
  ParseResult r = load_theory_file(path);
  if (opts.data_dir.empty()) opts.data_dir = fs::path(path).parent_path().string();
  return build_theory(r.value(), opts);
}

Settings read_settings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  Settings out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(n) + ": expected key = value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace rl
