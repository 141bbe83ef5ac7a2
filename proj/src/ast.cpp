#include "rl/ast.hpp"

#include <algorithm>
#include <set>

namespace rl {

std::string to_string(const SourceSpan& span) {
  std::string s = span.file.empty() ? "<input>" : span.file;
  return s + ":" + std::to_string(span.line) + ":" + std::to_string(span.column);
}

LogicError::LogicError(const std::string& message, SourceSpan span)
    : std::runtime_error(span.line > 0 ? to_string(span) + ": " + message : message),
      message_(message),
      span_(std::move(span)) {}

TermPtr Term::symbol(std::string name, SourceSpan span) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Symbol;
  t->name = std::move(name);
  t->span = std::move(span);
  return t;
}

TermPtr Term::apply(std::string name, std::vector<TermPtr> args, SourceSpan span) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Apply;
  t->name = std::move(name);
  t->args = std::move(args);
  t->span = std::move(span);
  return t;
}

GuardExprPtr GuardExpr::constant(double v) {
  auto e = std::make_shared<GuardExpr>();
  e->kind = Kind::Number;
  e->number = v;
  return e;
}

GuardExprPtr GuardExpr::of_term(TermPtr t) {
  auto e = std::make_shared<GuardExpr>();
  e->kind = Kind::Term;
  e->term = std::move(t);
  return e;
}

GuardExprPtr GuardExpr::binary(Kind k, GuardExprPtr a, GuardExprPtr b) {
  auto e = std::make_shared<GuardExpr>();
  e->kind = k;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

GuardExprPtr GuardExpr::unary(Kind k, GuardExprPtr a) {
  auto e = std::make_shared<GuardExpr>();
  e->kind = k;
  e->lhs = std::move(a);
  return e;
}

FormulaPtr Formula::atom(std::string pred, std::vector<TermPtr> args, SourceSpan span) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Atom;
  f->pred = std::move(pred);
  f->args = std::move(args);
  f->span = std::move(span);
  return f;
}

FormulaPtr Formula::equal(TermPtr a, TermPtr b, SourceSpan span) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Equal;
  f->args = {std::move(a), std::move(b)};
  f->span = std::move(span);
  return f;
}

FormulaPtr Formula::negate(FormulaPtr g, SourceSpan span) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Not;
  f->lhs = std::move(g);
  f->span = std::move(span);
  return f;
}

FormulaPtr Formula::binary(Connective op, FormulaPtr a, FormulaPtr b, SourceSpan span) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Binary;
  f->op = op;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  f->span = std::move(span);
  return f;
}

FormulaPtr Formula::quantified(Quantifier q, std::vector<Binder> binders, std::optional<Guard> guard,
                               FormulaPtr body, SourceSpan span) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Quant;
  f->quant = q;
  f->binders = std::move(binders);
  f->guard = std::move(guard);
  f->body = std::move(body);
  f->span = std::move(span);
  return f;
}

bool same_term(const Term& a, const Term& b) {
  if (a.kind != b.kind || a.name != b.name || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_term(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

bool same_guard_expr(const GuardExpr& a, const GuardExpr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case GuardExpr::Kind::Number: return a.number == b.number;
    case GuardExpr::Kind::Term: return same_term(*a.term, *b.term);
    case GuardExpr::Kind::Neg:
    case GuardExpr::Kind::Norm: return same_guard_expr(*a.lhs, *b.lhs);
    default: return same_guard_expr(*a.lhs, *b.lhs) && same_guard_expr(*a.rhs, *b.rhs);
  }
}

bool same_formula(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Equal: {
      if (a.pred != b.pred || a.args.size() != b.args.size()) return false;
      for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (!same_term(*a.args[i], *b.args[i])) return false;
      }
      return true;
    }
    case Formula::Kind::Not: return same_formula(*a.lhs, *b.lhs);
    case Formula::Kind::Binary:
      return a.op == b.op && same_formula(*a.lhs, *b.lhs) && same_formula(*a.rhs, *b.rhs);
    case Formula::Kind::Quant: {
      if (a.quant != b.quant || a.binders != b.binders) return false;
      if (a.guard.has_value() != b.guard.has_value()) return false;
      if (a.guard && (a.guard->op != b.guard->op || !same_guard_expr(*a.guard->lhs, *b.guard->lhs) ||
                      !same_guard_expr(*a.guard->rhs, *b.guard->rhs))) {
        return false;
      }
      return same_formula(*a.body, *b.body);
    }
  }
  return false;
}

bool Signature::is_declared(const std::string& n) const {
  return has_domain(n) || is_constant(n) || is_variable(n) || is_function(n) || is_predicate(n);
}

void Signature::claim(const std::string& name, const SourceSpan& span) {
  if (is_declared(name)) throw LogicError("duplicate symbol '" + name + "'", span);
}

void Signature::require_domain(const std::string& domain, const SourceSpan& span) const {
  if (!has_domain(domain)) throw LogicError("unknown domain '" + domain + "'", span);
}

void Signature::declare_domain(const std::string& name, Shape features, SourceSpan span) {
  claim(name, span);
  domains_[name] = std::move(features);
}

void Signature::declare_constant(const std::string& name, const std::string& domain, SourceSpan span) {
  claim(name, span);
  require_domain(domain, span);
  constants_[name] = domain;
}

void Signature::declare_variable(const std::string& name, const std::string& domain, SourceSpan span) {
  claim(name, span);
  require_domain(domain, span);
  variables_[name] = domain;
}

void Signature::declare_function(const std::string& name, FunctionSig sig, SourceSpan span) {
  claim(name, span);
  for (const auto& d : sig.inputs) require_domain(d, span);
  require_domain(sig.output, span);
  functions_[name] = std::move(sig);
}

void Signature::declare_predicate(const std::string& name, std::vector<std::string> inputs,
                                  SourceSpan span) {
  claim(name, span);
  for (const auto& d : inputs) require_domain(d, span);
  predicates_[name] = std::move(inputs);
}

const Shape& Signature::domain_shape(const std::string& domain) const {
  auto it = domains_.find(domain);
  if (it == domains_.end()) throw LogicError("unknown domain '" + domain + "'");
  return it->second;
}

const std::string& Signature::constant_domain(const std::string& n) const {
  auto it = constants_.find(n);
  if (it == constants_.end()) throw LogicError("unknown constant '" + n + "'");
  return it->second;
}

const std::string& Signature::variable_domain(const std::string& n) const {
  auto it = variables_.find(n);
  if (it == variables_.end()) throw LogicError("unknown variable '" + n + "'");
  return it->second;
}

const FunctionSig& Signature::function(const std::string& n) const {
  auto it = functions_.find(n);
  if (it == functions_.end()) throw LogicError("unknown function '" + n + "'");
  return it->second;
}

const std::vector<std::string>& Signature::predicate(const std::string& n) const {
  auto it = predicates_.find(n);
  if (it == predicates_.end()) throw LogicError("unknown predicate '" + n + "'");
  return it->second;
}

namespace {

void check_args(const std::string& what, const std::string& name,
                const std::vector<TermPtr>& args, const std::vector<std::string>& inputs,
                const Signature& sig, const SourceSpan& span) {
  if (args.size() != inputs.size()) {
    throw LogicError(what + " '" + name + "' expects " + std::to_string(inputs.size()) +
                         " argument(s), got " + std::to_string(args.size()),
                     span);
  }
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string d = term_domain(*args[i], sig);
    if (d != inputs[i]) {
      throw LogicError("argument " + std::to_string(i + 1) + " of '" + name + "' has domain '" + d +
                           "', expected '" + inputs[i] + "'",
                       args[i]->span.line ? args[i]->span : span);
    }
  }
}

void collect_term_vars(const Term& t, const Signature& sig, const std::set<std::string>& bound,
                       std::vector<std::string>& out) {
  if (t.kind == Term::Kind::Symbol) {
    if (sig.is_variable(t.name) && !bound.count(t.name) &&
        std::find(out.begin(), out.end(), t.name) == out.end()) {
      out.push_back(t.name);
    }
    return;
  }
  for (const auto& a : t.args) collect_term_vars(*a, sig, bound, out);
}

void collect_guard_vars(const GuardExpr& e, const Signature& sig, const std::set<std::string>& bound,
                        std::vector<std::string>& out) {
  if (e.kind == GuardExpr::Kind::Term) collect_term_vars(*e.term, sig, bound, out);
  if (e.lhs) collect_guard_vars(*e.lhs, sig, bound, out);
  if (e.rhs) collect_guard_vars(*e.rhs, sig, bound, out);
}

void collect_vars(const Formula& f, const Signature& sig, std::set<std::string> bound,
                  std::vector<std::string>& out) {
  switch (f.kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Equal:
      for (const auto& a : f.args) collect_term_vars(*a, sig, bound, out);
      break;
    case Formula::Kind::Not: collect_vars(*f.lhs, sig, bound, out); break;
    case Formula::Kind::Binary:
      collect_vars(*f.lhs, sig, bound, out);
      collect_vars(*f.rhs, sig, bound, out);
      break;
    case Formula::Kind::Quant:
      for (const auto& b : f.binders) bound.insert(b.vars.begin(), b.vars.end());
      if (f.guard) {
        collect_guard_vars(*f.guard->lhs, sig, bound, out);
        collect_guard_vars(*f.guard->rhs, sig, bound, out);
      }
      collect_vars(*f.body, sig, bound, out);
      break;
  }
}

void check_guard_expr(const GuardExpr& e, const Signature& sig) {
  if (e.kind == GuardExpr::Kind::Term) term_domain(*e.term, sig);
  if (e.lhs) check_guard_expr(*e.lhs, sig);
  if (e.rhs) check_guard_expr(*e.rhs, sig);
}

}  // namespace

std::string term_domain(const Term& t, const Signature& sig) {
  if (t.kind == Term::Kind::Symbol) {
    if (sig.is_variable(t.name)) return sig.variable_domain(t.name);
    if (sig.is_constant(t.name)) return sig.constant_domain(t.name);
    if (sig.is_function(t.name)) {
      const auto& f = sig.function(t.name);
      if (!f.inputs.empty()) throw LogicError("function '" + t.name + "' needs arguments", t.span);
      return f.output;
    }
    throw LogicError("unknown term symbol '" + t.name + "'", t.span);
  }
  if (!sig.is_function(t.name)) throw LogicError("unknown function '" + t.name + "'", t.span);
  const auto& f = sig.function(t.name);
  check_args("function", t.name, t.args, f.inputs, sig, t.span);
  return f.output;
}

void type_check(const Formula& f, const Signature& sig) {
  switch (f.kind) {
    case Formula::Kind::Atom:
      if (!sig.is_predicate(f.pred)) throw LogicError("unknown predicate '" + f.pred + "'", f.span);
      check_args("predicate", f.pred, f.args, sig.predicate(f.pred), sig, f.span);
      return;
    case Formula::Kind::Equal: {
      std::string a = term_domain(*f.args[0], sig), b = term_domain(*f.args[1], sig);
      if (a != b) {
        throw LogicError("equality between domains '" + a + "' and '" + b + "'", f.span);
      }
      return;
    }
    case Formula::Kind::Not: type_check(*f.lhs, sig); return;
    case Formula::Kind::Binary:
      type_check(*f.lhs, sig);
      type_check(*f.rhs, sig);
      return;
    case Formula::Kind::Quant: {
      std::set<std::string> seen;
      for (const auto& b : f.binders) {
        if (b.diag && b.vars.size() < 2) throw LogicError("Diag needs at least two variables", f.span);
        for (const auto& v : b.vars) {
          if (!sig.is_variable(v)) throw LogicError("'" + v + "' is not a declared variable", f.span);
          if (!seen.insert(v).second) throw LogicError("variable '" + v + "' bound twice", f.span);
        }
      }
      if (f.guard) {
        check_guard_expr(*f.guard->lhs, sig);
        check_guard_expr(*f.guard->rhs, sig);
      }
      type_check(*f.body, sig);
      // Every bound variable must occur in the scope it is bound over.
      auto inner = Formula::quantified(f.quant, {}, f.guard, f.body);
      auto used = free_variables(*inner, sig);
      for (const auto& v : seen) {
        if (std::find(used.begin(), used.end(), v) == used.end()) {
          throw LogicError("quantified variable '" + v + "' does not occur in its scope", f.span);
        }
      }
      return;
    }
  }
}

std::vector<std::string> free_variables(const Formula& f, const Signature& sig) {
  std::vector<std::string> out;
  collect_vars(f, sig, {}, out);
  return out;
}

}  // namespace rl
