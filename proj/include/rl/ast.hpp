#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rl/tensor.hpp"

namespace rl {

struct SourceSpan {
  std::string file;
  int line = 0;
  int column = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::string to_string(const SourceSpan& span);

// Error tied to a location in a theory text.
class LogicError : public std::runtime_error {
 public:
  LogicError(const std::string& message, SourceSpan span = {});
  const SourceSpan& span() const { return span_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  SourceSpan span_;
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// A bare symbol is a variable or a constant depending on the signature.
struct Term {
  enum class Kind { Symbol, Apply };
  Kind kind = Kind::Symbol;
  std::string name;
  std::vector<TermPtr> args;
  SourceSpan span;

  static TermPtr symbol(std::string name, SourceSpan span = {});
  static TermPtr apply(std::string name, std::vector<TermPtr> args, SourceSpan span = {});
};

struct GuardExpr;
using GuardExprPtr = std::shared_ptr<const GuardExpr>;

// Arithmetic used by quantifier guards. |e| is the Euclidean norm.
struct GuardExpr {
  enum class Kind { Number, Term, Add, Sub, Mul, Div, Neg, Norm };
  Kind kind = Kind::Number;
  double number = 0.0;
  TermPtr term;
  GuardExprPtr lhs, rhs;

  static GuardExprPtr constant(double v);
  static GuardExprPtr of_term(TermPtr t);
  static GuardExprPtr binary(Kind k, GuardExprPtr a, GuardExprPtr b);
  static GuardExprPtr unary(Kind k, GuardExprPtr a);
};

enum class Comparison { Lt, Le, Gt, Ge, Eq, Ne };

struct Guard {
  GuardExprPtr lhs;
  Comparison op = Comparison::Lt;
  GuardExprPtr rhs;
  SourceSpan span;
};

enum class Connective { And, Or, Implies, Iff };
enum class Quantifier { Forall, Exists };

// One binder group: a single variable, or a Diag tuple bound jointly.
struct Binder {
  std::vector<std::string> vars;
  bool diag = false;

  bool operator==(const Binder&) const = default;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind { Atom, Equal, Not, Binary, Quant };
  Kind kind = Kind::Atom;
  std::string pred;              // Atom
  std::vector<TermPtr> args;     // Atom arguments; Equal uses two
  Connective op = Connective::And;
  FormulaPtr lhs, rhs;           // Not uses lhs
  Quantifier quant = Quantifier::Forall;
  std::vector<Binder> binders;
  std::optional<Guard> guard;
  FormulaPtr body;
  SourceSpan span;

  static FormulaPtr atom(std::string pred, std::vector<TermPtr> args, SourceSpan span = {});
  static FormulaPtr equal(TermPtr a, TermPtr b, SourceSpan span = {});
  static FormulaPtr negate(FormulaPtr f, SourceSpan span = {});
  static FormulaPtr binary(Connective op, FormulaPtr a, FormulaPtr b, SourceSpan span = {});
  static FormulaPtr quantified(Quantifier q, std::vector<Binder> binders, std::optional<Guard> guard,
                               FormulaPtr body, SourceSpan span = {});
};

// Structural equality, ignoring source spans.
bool same_term(const Term& a, const Term& b);
bool same_guard_expr(const GuardExpr& a, const GuardExpr& b);
bool same_formula(const Formula& a, const Formula& b);

struct FunctionSig {
  std::vector<std::string> inputs;
  std::string output;
};

// Symbol names share one namespace across all kinds.
class Signature {
 public:
  void declare_domain(const std::string& name, Shape features, SourceSpan span = {});
  void declare_constant(const std::string& name, const std::string& domain, SourceSpan span = {});
  void declare_variable(const std::string& name, const std::string& domain, SourceSpan span = {});
  void declare_function(const std::string& name, FunctionSig sig, SourceSpan span = {});
  void declare_predicate(const std::string& name, std::vector<std::string> inputs, SourceSpan span = {});

  bool has_domain(const std::string& n) const { return domains_.count(n) > 0; }
  bool is_constant(const std::string& n) const { return constants_.count(n) > 0; }
  bool is_variable(const std::string& n) const { return variables_.count(n) > 0; }
  bool is_function(const std::string& n) const { return functions_.count(n) > 0; }
  bool is_predicate(const std::string& n) const { return predicates_.count(n) > 0; }
  bool is_declared(const std::string& n) const;

  const Shape& domain_shape(const std::string& domain) const;
  const std::string& constant_domain(const std::string& n) const;
  const std::string& variable_domain(const std::string& n) const;
  const FunctionSig& function(const std::string& n) const;
  const std::vector<std::string>& predicate(const std::string& n) const;

  const std::map<std::string, Shape>& domains() const { return domains_; }
  const std::map<std::string, std::string>& constants() const { return constants_; }
  const std::map<std::string, std::string>& variables() const { return variables_; }
  const std::map<std::string, FunctionSig>& functions() const { return functions_; }
  const std::map<std::string, std::vector<std::string>>& predicates() const { return predicates_; }

 private:
  void claim(const std::string& name, const SourceSpan& span);
  void require_domain(const std::string& domain, const SourceSpan& span) const;

  std::map<std::string, Shape> domains_;
  std::map<std::string, std::string> constants_;
  std::map<std::string, std::string> variables_;
  std::map<std::string, FunctionSig> functions_;
  std::map<std::string, std::vector<std::string>> predicates_;
};

// Domain of a term; throws LogicError on arity or domain mismatches.
std::string term_domain(const Term& t, const Signature& sig);
// Checks well-typedness of every atom, equality, binder and guard.
void type_check(const Formula& f, const Signature& sig);
// Variables occurring unbound, in first-occurrence order.
std::vector<std::string> free_variables(const Formula& f, const Signature& sig);

}  // namespace rl
