#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rl/ast.hpp"
#include "rl/fuzzy.hpp"
#include "rl/mlp.hpp"

namespace rl {

// Right-hand side of a const/var/func/pred declaration.
struct GroundingSpec {
  enum class Kind {
    None,        // bound elsewhere (data statement) or a trainable constant with default range
    Literal,     // [1, 2] or [[1, 2], [3, 4]]
    Constants,   // {a, b, c}, variables only
    Trainable,   // trainable(lo, hi) for constants, trainable(init) for 0-ary predicates
    Truth,       // truth(v), 0-ary predicates
    Mlp,         // mlp(16 elu, 1 sigmoid)
    SelectMlp,   // select mlp(16 elu, 3 softmax)
    SmoothEq,    // smooth_eq(alpha)
    Distance,    // distance
  };
  Kind kind = Kind::None;
  std::vector<double> numbers;  // flattened literal, or call arguments
  Shape literal_shape;
  std::vector<std::string> names;
  MlpSpec mlp;
  SourceSpan span;
};

struct DomainDecl {
  std::string name;
  Shape shape;
  SourceSpan span;
};

struct ConstDecl {
  std::vector<std::string> names;
  std::string domain;
  GroundingSpec grounding;
  SourceSpan span;
};

struct VarDecl {
  std::vector<std::string> names;
  std::string domain;
  GroundingSpec grounding;
  SourceSpan span;
};

// data "file.csv" [columns 0, 1] [where 2 = 1] as var x [: domain]
struct DataDecl {
  std::string path;
  std::vector<std::size_t> columns;  // empty: every column
  std::optional<std::pair<std::size_t, double>> where;
  std::string var;
  std::string domain;  // empty when the variable is declared separately
  SourceSpan span;
};

struct FuncDecl {
  std::string name;
  std::vector<std::string> inputs;
  std::string output;
  GroundingSpec grounding;
  SourceSpan span;
};

struct PredDecl {
  std::string name;
  std::vector<std::string> inputs;
  GroundingSpec grounding;
  SourceSpan span;
};

struct AxiomDecl {
  std::string label;  // may be empty
  QuantifierOverrides overrides;
  FormulaPtr formula;
  SourceSpan span;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  SourceSpan span;
};

using Statement =
    std::variant<DomainDecl, ConstDecl, VarDecl, DataDecl, FuncDecl, PredDecl, AxiomDecl, ConfigEntry>;

struct TheoryDoc {
  std::vector<Statement> statements;  // includes already expanded
  std::vector<std::string> included_files;

  std::vector<const AxiomDecl*> axioms() const;
  std::vector<const ConfigEntry*> config() const;
  // Declarations only; throws LogicError on duplicates or unknown domains.
  Signature signature() const;
};

struct Diagnostic {
  SourceSpan span;
  std::string message;
};

std::string to_string(const Diagnostic& d);

// Structural equality, ignoring source spans.
bool same_doc(const TheoryDoc& a, const TheoryDoc& b);

struct ParseResult {
  TheoryDoc doc;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
  // Throws LogicError with the first diagnostic when not ok().
  const TheoryDoc& value() const;
};

// base_dir resolves include paths; empty means the current directory.
ParseResult parse_theory(const std::string& text, const std::string& file = "<input>",
                         const std::string& base_dir = "");
ParseResult load_theory_file(const std::string& path);

// A single formula, type-checked against sig. Free variables are allowed.
FormulaPtr parse_formula(const std::string& text, const Signature& sig);
// A single term, type-checked against sig.
TermPtr parse_term(const std::string& text, const Signature& sig);
// Syntax only, no type check.
FormulaPtr parse_formula_syntax(const std::string& text);

std::string pretty_print(const TheoryDoc& doc);
std::string pretty_print(const Formula& f);
std::string pretty_print(const Term& t);
std::string pretty_print(const GuardExpr& e);
// Every binary and negation operand parenthesized.
std::string print_fully_parenthesized(const Formula& f);
// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

}  // namespace rl
