#include <charconv>
#include <cmath>
#include <sstream>

#include "rl/parser.hpp"

namespace rl {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  return std::string(buf, r.ptr);
}

namespace {

std::string join_names(const std::vector<std::string>& v, const char* sep = ", ") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

// Binding strength; quantifiers extend as far right as possible, so they
// sit below every connective.
int precedence(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Quant: return 0;
    case Formula::Kind::Binary:
      switch (f.op) {
        case Connective::Iff: return 1;
        case Connective::Implies: return 2;
        case Connective::Or: return 3;
        case Connective::And: return 4;
      }
      return 0;
    case Formula::Kind::Not: return 5;
    default: return 6;
  }
}

const char* connective(Connective c) {
  switch (c) {
    case Connective::And: return "&";
    case Connective::Or: return "|";
    case Connective::Implies: return "->";
    case Connective::Iff: return "<->";
  }
  return "?";
}

const char* comparison(Comparison c) {
  switch (c) {
    case Comparison::Lt: return "<";
    case Comparison::Le: return "<=";
    case Comparison::Gt: return ">";
    case Comparison::Ge: return ">=";
    case Comparison::Eq: return "=";
    case Comparison::Ne: return "!=";
  }
  return "?";
}

int guard_precedence(const GuardExpr& e) {
  switch (e.kind) {
    case GuardExpr::Kind::Add:
    case GuardExpr::Kind::Sub: return 1;
    case GuardExpr::Kind::Mul:
    case GuardExpr::Kind::Div: return 2;
    case GuardExpr::Kind::Neg: return 3;
    case GuardExpr::Kind::Number: return e.number < 0 ? 3 : 4;
    default: return 4;
  }
}

std::string guard_expr(const GuardExpr& e, int min_prec) {
  std::string s;
  switch (e.kind) {
    case GuardExpr::Kind::Number: s = format_number(e.number); break;
    case GuardExpr::Kind::Term: s = pretty_print(*e.term); break;
    case GuardExpr::Kind::Norm: s = "|" + guard_expr(*e.lhs, 0) + "|"; break;
    case GuardExpr::Kind::Neg: s = "-" + guard_expr(*e.lhs, 4); break;
    default: {
      int p = guard_precedence(e);
      const char* op = e.kind == GuardExpr::Kind::Add   ? " + "
                       : e.kind == GuardExpr::Kind::Sub ? " - "
                       : e.kind == GuardExpr::Kind::Mul ? " * "
                                                        : " / ";
      s = guard_expr(*e.lhs, p) + op + guard_expr(*e.rhs, p + 1);
    }
  }
  return guard_precedence(e) < min_prec ? "(" + s + ")" : s;
}

std::string binders(const std::vector<Binder>& bs) {
  std::string s;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    if (i) s += ", ";
    s += bs[i].diag ? "Diag(" + join_names(bs[i].vars) + ")" : bs[i].vars.front();
  }
  return s;
}

std::string formula(const Formula& f, int min_prec, bool full) {
  std::string s;
  switch (f.kind) {
    case Formula::Kind::Atom: {
      s = f.pred;
      if (!f.args.empty()) {
        s += "(";
        for (std::size_t i = 0; i < f.args.size(); ++i) s += (i ? ", " : "") + pretty_print(*f.args[i]);
        s += ")";
      }
      break;
    }
    case Formula::Kind::Equal:
      s = pretty_print(*f.args[0]) + " = " + pretty_print(*f.args[1]);
      break;
    case Formula::Kind::Not:
      s = "~" + formula(*f.lhs, full ? 6 : 5, full);
      break;
    case Formula::Kind::Binary: {
      int p = precedence(f);
      int lp = p, rp = p + 1;
      if (f.op == Connective::Implies) lp = p + 1, rp = p;
      if (full) lp = rp = 6;
      s = formula(*f.lhs, lp, full) + " " + connective(f.op) + " " + formula(*f.rhs, rp, full);
      break;
    }
    case Formula::Kind::Quant: {
      s = f.quant == Quantifier::Forall ? "forall " : "exists ";
      s += binders(f.binders) + ":";
      if (f.guard) {
        s += " " + pretty_print(*f.guard->lhs) + " " + comparison(f.guard->op) + " " +
             pretty_print(*f.guard->rhs) + " (" + formula(*f.body, 0, full) + ")";
      } else {
        s += " " + formula(*f.body, 0, full);
      }
      break;
    }
  }
  bool atomic = f.kind == Formula::Kind::Atom || f.kind == Formula::Kind::Equal;
  return precedence(f) < min_prec && !(full && atomic) ? "(" + s + ")" : s;
}

std::string numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
  return s;
}

std::string literal(const std::vector<double>& v, const Shape& shape, std::size_t depth, std::size_t& at) {
  std::string s = "[";
  std::size_t n = depth < shape.size() ? shape[depth] : 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ", ";
    if (depth + 1 < shape.size()) {
      s += literal(v, shape, depth + 1, at);
    } else {
      s += format_number(v[at++]);
    }
  }
  return s + "]";
}

std::string mlp(const MlpSpec& spec) {
  std::string s = "mlp(";
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    if (i) s += ", ";
    s += std::to_string(l.units) + " " + to_string(l.activation);
    if (l.dropout > 0) s += " dropout " + format_number(l.dropout);
  }
  return s + ")";
}

std::string grounding(const GroundingSpec& g) {
  using K = GroundingSpec::Kind;
  switch (g.kind) {
    case K::None: return "";
    case K::Literal: {
      std::size_t at = 0;
      if (g.literal_shape.empty()) return " = " + format_number(g.numbers.at(0));
      return " = " + literal(g.numbers, g.literal_shape, 0, at);
    }
    case K::Constants: return " = {" + join_names(g.names) + "}";
    case K::Trainable: return g.numbers.empty() ? " = trainable" : " = trainable(" + numbers(g.numbers) + ")";
    case K::Truth: return " = truth(" + numbers(g.numbers) + ")";
    case K::Mlp: return " = " + mlp(g.mlp);
    case K::SelectMlp: return " = select " + mlp(g.mlp);
    case K::SmoothEq: return g.numbers.empty() ? " = smooth_eq" : " = smooth_eq(" + numbers(g.numbers) + ")";
    case K::Distance: return " = distance";
  }
  return "";
}

struct StatementPrinter {
  std::ostringstream& out;

  void operator()(const DomainDecl& d) {
    out << "domain " << d.name;
    if (d.shape != Shape{1}) {
      out << "[";
      for (std::size_t i = 0; i < d.shape.size(); ++i) out << (i ? ", " : "") << d.shape[i];
      out << "]";
    }
  }
  void operator()(const ConstDecl& c) {
    out << "const " << join_names(c.names) << ": " << c.domain << grounding(c.grounding);
  }
  void operator()(const VarDecl& v) {
    out << "var " << join_names(v.names) << ": " << v.domain << grounding(v.grounding);
  }
  void operator()(const DataDecl& d) {
    out << "data \"" << d.path << "\"";
    if (!d.columns.empty()) {
      out << " columns ";
      // Runs of three or more consecutive columns print as a range.
      const auto& c = d.columns;
      for (std::size_t i = 0; i < c.size();) {
        std::size_t j = i;
        while (j + 1 < c.size() && c[j + 1] == c[j] + 1) ++j;
        out << (i ? ", " : "");
        if (j - i >= 2) {
          out << c[i] << "-" << c[j];
          i = j + 1;
        } else {
          out << c[i];
          ++i;
        }
      }
    }
    if (d.where) out << " where " << d.where->first << " = " << format_number(d.where->second);
    out << " as var " << d.var;
    if (!d.domain.empty()) out << ": " << d.domain;
  }
  void operator()(const FuncDecl& f) {
    out << "func " << f.name << ": " << join_names(f.inputs) << " -> " << f.output << grounding(f.grounding);
  }
  void operator()(const PredDecl& p) {
    out << "pred " << p.name;
    if (!p.inputs.empty()) out << ": " << join_names(p.inputs);
    out << grounding(p.grounding);
  }
  void operator()(const AxiomDecl& a) {
    out << "axiom ";
    if (!a.label.empty()) out << a.label << ": ";
    if (a.overrides.forall_p) out << "@forall(p=" << format_number(*a.overrides.forall_p) << ") ";
    if (a.overrides.exists_p) out << "@exists(p=" << format_number(*a.overrides.exists_p) << ") ";
    out << pretty_print(*a.formula);
  }
  void operator()(const ConfigEntry& c) { out << "config " << c.key << " = " << c.value; }
};

bool same_grounding(const GroundingSpec& a, const GroundingSpec& b) {
  if (a.kind != b.kind || a.numbers != b.numbers || a.literal_shape != b.literal_shape ||
      a.names != b.names || a.mlp.layers.size() != b.mlp.layers.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.mlp.layers.size(); ++i) {
    const auto& x = a.mlp.layers[i];
    const auto& y = b.mlp.layers[i];
    if (x.units != y.units || x.activation != y.activation || x.dropout != y.dropout) return false;
  }
  return true;
}

struct SameStatement {
  const Statement& other;

  bool operator()(const DomainDecl& a) const {
    auto& b = std::get<DomainDecl>(other);
    return a.name == b.name && a.shape == b.shape;
  }
  bool operator()(const ConstDecl& a) const {
    auto& b = std::get<ConstDecl>(other);
    return a.names == b.names && a.domain == b.domain && same_grounding(a.grounding, b.grounding);
  }
  bool operator()(const VarDecl& a) const {
    auto& b = std::get<VarDecl>(other);
    return a.names == b.names && a.domain == b.domain && same_grounding(a.grounding, b.grounding);
  }
  bool operator()(const DataDecl& a) const {
    auto& b = std::get<DataDecl>(other);
    return a.path == b.path && a.columns == b.columns && a.where == b.where && a.var == b.var &&
           a.domain == b.domain;
  }
  bool operator()(const FuncDecl& a) const {
    auto& b = std::get<FuncDecl>(other);
    return a.name == b.name && a.inputs == b.inputs && a.output == b.output &&
           same_grounding(a.grounding, b.grounding);
  }
  bool operator()(const PredDecl& a) const {
    auto& b = std::get<PredDecl>(other);
    return a.name == b.name && a.inputs == b.inputs && same_grounding(a.grounding, b.grounding);
  }
  bool operator()(const AxiomDecl& a) const {
    auto& b = std::get<AxiomDecl>(other);
    return a.label == b.label && a.overrides == b.overrides && same_formula(*a.formula, *b.formula);
  }
  bool operator()(const ConfigEntry& a) const {
    auto& b = std::get<ConfigEntry>(other);
    return a.key == b.key && a.value == b.value;
  }
};

}  // namespace

std::string pretty_print(const Term& t) {
  if (t.kind == Term::Kind::Symbol) return t.name;
  std::string s = t.name + "(";
  for (std::size_t i = 0; i < t.args.size(); ++i) s += (i ? ", " : "") + pretty_print(*t.args[i]);
  return s + ")";
}

std::string pretty_print(const GuardExpr& e) { return guard_expr(e, 0); }

std::string pretty_print(const Formula& f) { return formula(f, 0, false); }

std::string print_fully_parenthesized(const Formula& f) { return formula(f, 0, true); }

std::string pretty_print(const TheoryDoc& doc) {
  std::ostringstream out;
  std::size_t last = std::variant_npos;
  for (const auto& s : doc.statements) {
    // Blank line between groups of different statement kinds.
    if (last != std::variant_npos && last != s.index()) out << "\n";
    std::visit(StatementPrinter{out}, s);
    out << "\n";
    last = s.index();
  }
  return out.str();
}

bool same_doc(const TheoryDoc& a, const TheoryDoc& b) {
  if (a.statements.size() != b.statements.size()) return false;
  for (std::size_t i = 0; i < a.statements.size(); ++i) {
    if (a.statements[i].index() != b.statements[i].index()) return false;
    if (!std::visit(SameStatement{b.statements[i]}, a.statements[i])) return false;
  }
  return true;
}

}  // namespace rl
