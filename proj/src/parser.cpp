#include "rl/parser.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rl/lexer.hpp"

namespace rl {

namespace fs = std::filesystem;

std::string to_string(const Diagnostic& d) { return to_string(d.span) + ": " + d.message; }

const TheoryDoc& ParseResult::value() const {
  if (!ok()) throw LogicError(diagnostics.front().message, diagnostics.front().span);
  return doc;
}

std::vector<const AxiomDecl*> TheoryDoc::axioms() const {
  std::vector<const AxiomDecl*> out;
  for (const auto& s : statements) {
    if (auto* a = std::get_if<AxiomDecl>(&s)) out.push_back(a);
  }
  return out;
}

std::vector<const ConfigEntry*> TheoryDoc::config() const {
  std::vector<const ConfigEntry*> out;
  for (const auto& s : statements) {
    if (auto* c = std::get_if<ConfigEntry>(&s)) out.push_back(c);
  }
  return out;
}

Signature TheoryDoc::signature() const {
  Signature sig;
  for (const auto& s : statements) {
    if (auto* d = std::get_if<DomainDecl>(&s)) {
      sig.declare_domain(d->name, d->shape, d->span);
    } else if (auto* c = std::get_if<ConstDecl>(&s)) {
      for (const auto& n : c->names) sig.declare_constant(n, c->domain, c->span);
    } else if (auto* v = std::get_if<VarDecl>(&s)) {
      for (const auto& n : v->names) sig.declare_variable(n, v->domain, v->span);
    } else if (auto* dd = std::get_if<DataDecl>(&s)) {
      if (!dd->domain.empty()) sig.declare_variable(dd->var, dd->domain, dd->span);
    } else if (auto* f = std::get_if<FuncDecl>(&s)) {
      sig.declare_function(f->name, {f->inputs, f->output}, f->span);
    } else if (auto* p = std::get_if<PredDecl>(&s)) {
      sig.declare_predicate(p->name, p->inputs, p->span);
    }
  }
  return sig;
}

namespace {

const std::set<std::string, std::less<>> kStatementKeywords = {
    "domain", "const", "var", "func", "pred", "axiom", "config", "include", "data"};

struct SyntaxError {
  Diagnostic diag;
};

SourceSpan join(const SourceSpan& a, const SourceSpan& b) {
  SourceSpan s = a;
  s.end = std::max(a.end, b.end);
  return s;
}

class Parser {
 public:
  Parser(std::string_view text, std::string file, std::string base_dir, TheoryDoc* doc,
         std::vector<Diagnostic>* diags, std::vector<std::string>* include_stack)
      : lex_(text, std::move(file)),
        base_dir_(std::move(base_dir)),
        doc_(doc),
        diags_(diags),
        include_stack_(include_stack) {
    bump();
  }

  void document() {
    while (cur_.kind != TokenKind::End) {
      std::size_t start = cur_.span.begin;
      try {
        statement();
        if (cur_.kind != TokenKind::End && !at_statement_keyword()) {
          fail("expected a new statement, found " + describe(cur_));
        }
      } catch (const SyntaxError& e) {
        diags_->push_back(e.diag);
        recover(start);
      }
    }
  }

  TermPtr single_term() {
    TermPtr t = term(false);
    if (cur_.kind != TokenKind::End) fail("unexpected " + describe(cur_) + " after term");
    return t;
  }

  FormulaPtr single_formula() {
    FormulaPtr f = formula();
    if (cur_.kind != TokenKind::End) fail("unexpected " + describe(cur_) + " after formula");
    return f;
  }

 private:
  struct Snapshot {
    Lexer::State state;
    Token cur;
    Token prev;
  };

  Snapshot snapshot() const { return {lex_.state(), cur_, prev_}; }
  void restore(const Snapshot& s) {
    lex_.restore(s.state);
    cur_ = s.cur;
    prev_ = s.prev;
  }

  void bump() {
    prev_ = cur_;
    cur_ = lex_.next();
  }

  static std::string describe(const Token& t) {
    if (t.kind == TokenKind::End) return "end of input";
    if (t.kind == TokenKind::Invalid && t.text == "unterminated string") return t.text;
    return "'" + t.text + "'";
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError{{cur_.span, msg}}; }
  [[noreturn]] static void fail_at(const SourceSpan& span, const std::string& msg) {
    throw SyntaxError{{span, msg}};
  }

  bool at(TokenKind k) const { return cur_.kind == k; }
  bool at_word(std::string_view w) const { return cur_.kind == TokenKind::Ident && cur_.text == w; }
  bool at_statement_keyword() const {
    return cur_.kind == TokenKind::Ident && kStatementKeywords.count(cur_.text) > 0;
  }

  bool accept(TokenKind k) {
    if (!at(k)) return false;
    bump();
    return true;
  }

  Token expect(TokenKind k, std::string_view what = {}) {
    if (!at(k)) {
      std::string want = what.empty() ? std::string(to_string(k)) : std::string(what);
      fail("expected " + want + ", found " + describe(cur_));
    }
    Token t = cur_;
    bump();
    return t;
  }

  void expect_word(std::string_view w) {
    if (!at_word(w)) fail("expected '" + std::string(w) + "', found " + describe(cur_));
    bump();
  }

  std::string name(std::string_view what = "a name") {
    if (cur_.kind == TokenKind::Ident && (kStatementKeywords.count(cur_.text) || cur_.text == "Diag")) {
      fail("'" + cur_.text + "' is a reserved word");
    }
    return expect(TokenKind::Ident, what).text;
  }

  std::vector<std::string> name_list(std::string_view what) {
    std::vector<std::string> out{name(what)};
    while (accept(TokenKind::Comma)) out.push_back(name(what));
    return out;
  }

  double number() {
    bool neg = accept(TokenKind::Minus);
    double v = expect(TokenKind::Number, "a number").number;
    return neg ? -v : v;
  }

  std::size_t count() {
    Token t = cur_;
    double v = expect(TokenKind::Number, "a non-negative integer").number;
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      fail_at(t.span, "expected a non-negative integer, found '" + t.text + "'");
    }
    return static_cast<std::size_t>(v);
  }

  // Skip to the next statement keyword, always making progress.
  void recover(std::size_t start) {
    if (cur_.kind != TokenKind::End && cur_.span.begin == start) bump();
    while (cur_.kind != TokenKind::End && !at_statement_keyword()) bump();
  }

  SourceSpan span_since(const SourceSpan& start) const { return join(start, prev_.span); }

  // ---- statements ----

  void statement() {
    if (cur_.kind == TokenKind::Invalid) fail("unexpected " + describe(cur_));
    if (!at_statement_keyword()) fail("expected a statement keyword, found " + describe(cur_));
    Token kw = cur_;
    bump();
    const std::string& k = kw.text;
    if (k == "domain") return domain(kw.span);
    if (k == "const") return constant(kw.span);
    if (k == "var") return variable(kw.span);
    if (k == "data") return data(kw.span);
    if (k == "func") return function(kw.span);
    if (k == "pred") return predicate(kw.span);
    if (k == "axiom") return axiom(kw.span);
    if (k == "config") return config(kw.span);
    if (k == "include") return include(kw.span);
  }

  void domain(const SourceSpan& start) {
    DomainDecl d;
    d.name = name("a domain name");
    if (accept(TokenKind::LBracket)) {
      d.shape.push_back(count());
      while (accept(TokenKind::Comma)) d.shape.push_back(count());
      expect(TokenKind::RBracket);
    } else {
      d.shape = {1};
    }
    d.span = span_since(start);
    doc_->statements.emplace_back(std::move(d));
  }

  void constant(const SourceSpan& start) {
    ConstDecl c;
    c.names = name_list("a constant name");
    expect(TokenKind::Colon);
    c.domain = name("a domain name");
    if (accept(TokenKind::Eq)) c.grounding = grounding();
    c.span = span_since(start);
    doc_->statements.emplace_back(std::move(c));
  }

  void variable(const SourceSpan& start) {
    VarDecl v;
    v.names = name_list("a variable name");
    expect(TokenKind::Colon);
    v.domain = name("a domain name");
    if (accept(TokenKind::Eq)) v.grounding = grounding();
    v.span = span_since(start);
    doc_->statements.emplace_back(std::move(v));
  }

  void data(const SourceSpan& start) {
    DataDecl d;
    d.path = expect(TokenKind::String, "a quoted file name").text;
    if (at_word("columns")) {
      bump();
      do {
        Token t = cur_;
        std::size_t lo = count(), hi = lo;
        if (accept(TokenKind::Minus)) hi = count();
        if (hi < lo) fail_at(span_since(t.span), "empty column range");
        for (std::size_t c = lo; c <= hi; ++c) d.columns.push_back(c);
      } while (accept(TokenKind::Comma));
    }
    if (at_word("where")) {
      bump();
      std::size_t col = count();
      expect(TokenKind::Eq);
      d.where = std::make_pair(col, number());
    }
    expect_word("as");
    if (!at_word("var")) fail("expected 'var', found " + describe(cur_));
    bump();
    d.var = name("a variable name");
    if (accept(TokenKind::Colon)) d.domain = name("a domain name");
    d.span = span_since(start);
    doc_->statements.emplace_back(std::move(d));
  }

  void function(const SourceSpan& start) {
    FuncDecl f;
    f.name = name("a function name");
    expect(TokenKind::Colon);
    f.inputs = name_list("a domain name");
    expect(TokenKind::Implies, "'->'");
    f.output = name("a domain name");
    expect(TokenKind::Eq);
    f.grounding = grounding();
    f.span = span_since(start);
    doc_->statements.emplace_back(std::move(f));
  }

  void predicate(const SourceSpan& start) {
    PredDecl p;
    p.name = name("a predicate name");
    if (accept(TokenKind::Colon)) p.inputs = name_list("a domain name");
    expect(TokenKind::Eq);
    p.grounding = grounding();
    p.span = span_since(start);
    doc_->statements.emplace_back(std::move(p));
  }

  void axiom(const SourceSpan& start) {
    AxiomDecl a;
    if (cur_.kind == TokenKind::Ident && !kStatementKeywords.count(cur_.text)) {
      Snapshot s = snapshot();
      std::string label = cur_.text;
      bump();
      if (accept(TokenKind::Colon)) {
        a.label = label;
      } else {
        restore(s);
      }
    }
    while (at(TokenKind::At)) {
      bump();
      Token q = cur_;
      if (!accept(TokenKind::Forall) && !accept(TokenKind::Exists)) {
        fail("expected 'forall' or 'exists' after '@'");
      }
      expect(TokenKind::LParen);
      expect_word("p");
      expect(TokenKind::Eq);
      Token pt = cur_;
      double p = number();
      if (!(p >= 1.0)) fail_at(pt.span, "p must be at least 1");
      expect(TokenKind::RParen);
      (q.kind == TokenKind::Forall ? a.overrides.forall_p : a.overrides.exists_p) = p;
    }
    a.formula = formula();
    a.span = span_since(start);
    doc_->statements.emplace_back(std::move(a));
  }

  void config(const SourceSpan& start) {
    if (cur_.kind == TokenKind::End || cur_.span.line != start.line) {
      fail_at(start, "expected 'key = value' after config");
    }
    Token first = cur_;
    std::string line = lex_.rest_of_line(first);
    auto eq = line.find('=');
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    ConfigEntry c;
    c.span = start;
    c.span.end = first.span.begin + line.size();
    if (eq == std::string::npos) fail_at(c.span, "expected 'key = value' after config");
    c.key = trim(line.substr(0, eq));
    c.value = trim(line.substr(eq + 1));
    if (c.key.empty()) fail_at(c.span, "empty config key");
    bump();
    doc_->statements.emplace_back(std::move(c));
  }

  void include(const SourceSpan& start) {
    Token path = expect(TokenKind::String, "a quoted file name");
    fs::path p = base_dir_.empty() ? fs::path(path.text) : fs::path(base_dir_) / path.text;
    std::error_code ec;
    fs::path canon = fs::weakly_canonical(p, ec);
    std::string key = ec ? p.string() : canon.string();
    SourceSpan span = span_since(start);
    if (std::find(include_stack_->begin(), include_stack_->end(), key) != include_stack_->end()) {
      fail_at(span, "include cycle through '" + path.text + "'");
    }
    std::ifstream in(p, std::ios::binary);
    if (!in) fail_at(span, "cannot open included file '" + p.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    doc_->included_files.push_back(p.string());
    include_stack_->push_back(key);
    Parser sub(text, p.string(), p.parent_path().string(), doc_, diags_, include_stack_);
    sub.document();
    include_stack_->pop_back();
  }

  // ---- groundings ----

  void literal_into(std::vector<double>& out, Shape& shape, std::size_t depth, std::vector<std::size_t>& seen) {
    Token open = expect(TokenKind::LBracket);
    std::size_t n = 0;
    bool nested = at(TokenKind::LBracket);
    if (!at(TokenKind::RBracket)) {
      do {
        if (nested) {
          literal_into(out, shape, depth + 1, seen);
        } else {
          if (at(TokenKind::LBracket)) fail("ragged literal");
          out.push_back(number());
        }
        ++n;
      } while (accept(TokenKind::Comma));
    }
    expect(TokenKind::RBracket);
    if (shape.size() <= depth) {
      shape.resize(depth + 1, 0);
      seen.resize(depth + 1, 0);
    }
    if (seen[depth]++ == 0) {
      shape[depth] = n;
      if (!nested && shape.size() > depth + 1) fail_at(open.span, "ragged literal");
    } else if (shape[depth] != n || (!nested && shape.size() != depth + 1)) {
      fail_at(open.span, "ragged literal");
    }
  }

  std::vector<double> call_numbers() {
    std::vector<double> v;
    if (accept(TokenKind::LParen)) {
      if (!at(TokenKind::RParen)) {
        v.push_back(number());
        while (accept(TokenKind::Comma)) v.push_back(number());
      }
      expect(TokenKind::RParen);
    }
    return v;
  }

  MlpSpec mlp_layers() {
    MlpSpec spec;
    expect(TokenKind::LParen);
    do {
      DenseLayer layer;
      layer.units = count();
      if (layer.units == 0) fail_at(prev_.span, "a layer needs at least one unit");
      Token act = expect(TokenKind::Ident, "an activation");
      try {
        layer.activation = parse_activation(act.text);
      } catch (const std::exception&) {
        fail_at(act.span, "unknown activation '" + act.text + "'");
      }
      if (at_word("dropout")) {
        bump();
        Token t = cur_;
        layer.dropout = number();
        if (layer.dropout < 0 || layer.dropout >= 1) fail_at(t.span, "dropout must be in [0, 1)");
      }
      spec.layers.push_back(layer);
    } while (accept(TokenKind::Comma));
    expect(TokenKind::RParen);
    return spec;
  }

  GroundingSpec grounding() {
    GroundingSpec g;
    SourceSpan start = cur_.span;
    using K = GroundingSpec::Kind;
    if (at(TokenKind::LBracket)) {
      g.kind = K::Literal;
      std::vector<std::size_t> seen;
      literal_into(g.numbers, g.literal_shape, 0, seen);
    } else if (at(TokenKind::Number) || at(TokenKind::Minus)) {
      g.kind = K::Literal;
      g.numbers.push_back(number());
    } else if (accept(TokenKind::LBrace)) {
      g.kind = K::Constants;
      g.names = name_list("a constant name");
      expect(TokenKind::RBrace);
    } else if (at(TokenKind::Ident)) {
      std::string w = cur_.text;
      bump();
      if (w == "trainable") {
        g.kind = K::Trainable;
        g.numbers = call_numbers();
      } else if (w == "truth") {
        g.kind = K::Truth;
        g.numbers = call_numbers();
        if (g.numbers.size() != 1) fail_at(span_since(start), "truth takes one value");
      } else if (w == "mlp") {
        g.kind = K::Mlp;
        g.mlp = mlp_layers();
      } else if (w == "select") {
        expect_word("mlp");
        g.kind = K::SelectMlp;
        g.mlp = mlp_layers();
      } else if (w == "smooth_eq") {
        g.kind = K::SmoothEq;
        g.numbers = call_numbers();
        if (g.numbers.size() > 1) fail_at(span_since(start), "smooth_eq takes at most one value");
      } else if (w == "distance") {
        g.kind = K::Distance;
      } else {
        fail_at(prev_.span, "unknown grounding '" + w + "'");
      }
    } else {
      fail("expected a grounding, found " + describe(cur_));
    }
    g.span = span_since(start);
    return g;
  }

  // ---- formulas ----

  FormulaPtr formula() { return iff(); }

  FormulaPtr iff() {
    FormulaPtr lhs = implies();
    while (at(TokenKind::Iff)) {
      bump();
      FormulaPtr rhs = implies();
      lhs = Formula::binary(Connective::Iff, lhs, rhs, join(lhs->span, rhs->span));
    }
    return lhs;
  }

  FormulaPtr implies() {
    FormulaPtr lhs = disjunction();
    if (!at(TokenKind::Implies)) return lhs;
    bump();
    FormulaPtr rhs = implies();
    return Formula::binary(Connective::Implies, lhs, rhs, join(lhs->span, rhs->span));
  }

  FormulaPtr disjunction() {
    FormulaPtr lhs = conjunction();
    while (at(TokenKind::Or)) {
      bump();
      FormulaPtr rhs = conjunction();
      lhs = Formula::binary(Connective::Or, lhs, rhs, join(lhs->span, rhs->span));
    }
    return lhs;
  }

  FormulaPtr conjunction() {
    FormulaPtr lhs = unary();
    while (at(TokenKind::And)) {
      bump();
      FormulaPtr rhs = unary();
      lhs = Formula::binary(Connective::And, lhs, rhs, join(lhs->span, rhs->span));
    }
    return lhs;
  }

  FormulaPtr unary() {
    if (at(TokenKind::Not)) {
      SourceSpan start = cur_.span;
      bump();
      FormulaPtr f = unary();
      return Formula::negate(f, join(start, f->span));
    }
    return primary();
  }

  FormulaPtr primary() {
    if (accept(TokenKind::LParen)) {
      FormulaPtr f = formula();
      expect(TokenKind::RParen);
      return f;
    }
    if (at(TokenKind::Forall) || at(TokenKind::Exists)) return quantified();
    if (at(TokenKind::Ident) || at(TokenKind::Invalid)) {
      TermPtr t = term(false);
      if (at(TokenKind::Eq)) {
        bump();
        TermPtr u = term(false);
        return Formula::equal(t, u, join(t->span, u->span));
      }
      return Formula::atom(t->name, t->args, t->span);
    }
    fail("expected a formula, found " + describe(cur_));
  }

  Binder binder() {
    Binder b;
    if (at_word("Diag")) {
      SourceSpan start = cur_.span;
      bump();
      expect(TokenKind::LParen);
      b.diag = true;
      b.vars = name_list("a variable name");
      expect(TokenKind::RParen);
      if (b.vars.size() < 2) fail_at(span_since(start), "Diag needs at least two variables");
    } else {
      b.vars.push_back(name("a variable name"));
    }
    return b;
  }

  FormulaPtr quantified() {
    SourceSpan start = cur_.span;
    Quantifier q = at(TokenKind::Forall) ? Quantifier::Forall : Quantifier::Exists;
    bump();
    std::vector<Binder> binders{binder()};
    while (accept(TokenKind::Comma)) binders.push_back(binder());
    expect(TokenKind::Colon);

    // A guard is a comparison followed by a body; otherwise the colon is
    // followed directly by the body.
    Snapshot s = snapshot();
    std::optional<SyntaxError> guarded_error;
    try {
      Guard g = guard();
      FormulaPtr body = formula();
      return Formula::quantified(q, std::move(binders), std::move(g), body, join(start, body->span));
    } catch (const SyntaxError& e) {
      guarded_error = e;
    }
    restore(s);
    try {
      FormulaPtr body = formula();
      return Formula::quantified(q, std::move(binders), std::nullopt, body, join(start, body->span));
    } catch (const SyntaxError& e) {
      // Report whichever reading got further.
      if (guarded_error->diag.span.begin > e.diag.span.begin) throw *guarded_error;
      throw;
    }
  }

  TermPtr term(bool in_guard) {
    if (cur_.kind == TokenKind::Invalid) fail("unexpected " + describe(cur_));
    Token id = cur_;
    std::string n = name("a term");
    // In guards the argument list must touch the name, so that a guard like
    // 'x > y (P(x))' keeps y as a symbol.
    if (at(TokenKind::LParen) && (!in_guard || !cur_.space_before)) {
      bump();
      std::vector<TermPtr> args;
      if (!at(TokenKind::RParen)) {
        args.push_back(term(in_guard));
        while (accept(TokenKind::Comma)) args.push_back(term(in_guard));
      }
      expect(TokenKind::RParen);
      return Term::apply(n, std::move(args), span_since(id.span));
    }
    return Term::symbol(n, id.span);
  }

  Guard guard() {
    Guard g;
    SourceSpan start = cur_.span;
    g.lhs = guard_sum();
    switch (cur_.kind) {
      case TokenKind::Lt: g.op = Comparison::Lt; break;
      case TokenKind::Le: g.op = Comparison::Le; break;
      case TokenKind::Gt: g.op = Comparison::Gt; break;
      case TokenKind::Ge: g.op = Comparison::Ge; break;
      case TokenKind::Eq: g.op = Comparison::Eq; break;
      case TokenKind::Ne: g.op = Comparison::Ne; break;
      default: fail("expected a comparison, found " + describe(cur_));
    }
    bump();
    g.rhs = guard_sum();
    g.span = span_since(start);
    return g;
  }

  GuardExprPtr guard_sum() {
    GuardExprPtr lhs = guard_product();
    while (at(TokenKind::Plus) || at(TokenKind::Minus)) {
      auto k = at(TokenKind::Plus) ? GuardExpr::Kind::Add : GuardExpr::Kind::Sub;
      bump();
      lhs = GuardExpr::binary(k, lhs, guard_product());
    }
    return lhs;
  }

  GuardExprPtr guard_product() {
    GuardExprPtr lhs = guard_unary();
    while (at(TokenKind::Star) || at(TokenKind::Slash)) {
      auto k = at(TokenKind::Star) ? GuardExpr::Kind::Mul : GuardExpr::Kind::Div;
      bump();
      lhs = GuardExpr::binary(k, lhs, guard_unary());
    }
    return lhs;
  }

  GuardExprPtr guard_unary() {
    if (accept(TokenKind::Minus)) {
      if (at(TokenKind::Number)) {
        double v = cur_.number;
        bump();
        return GuardExpr::constant(-v);
      }
      return GuardExpr::unary(GuardExpr::Kind::Neg, guard_unary());
    }
    if (at(TokenKind::Number)) {
      double v = cur_.number;
      bump();
      return GuardExpr::constant(v);
    }
    if (accept(TokenKind::LParen)) {
      GuardExprPtr e = guard_sum();
      expect(TokenKind::RParen);
      return e;
    }
    if (accept(TokenKind::Or)) {
      GuardExprPtr e = guard_sum();
      expect(TokenKind::Or, "closing '|'");
      return GuardExpr::unary(GuardExpr::Kind::Norm, e);
    }
    if (at(TokenKind::Ident)) return GuardExpr::of_term(term(true));
    fail("expected a guard expression, found " + describe(cur_));
  }

  Lexer lex_;
  Token cur_, prev_;
  std::string base_dir_;
  TheoryDoc* doc_;
  std::vector<Diagnostic>* diags_;
  std::vector<std::string>* include_stack_;
};

std::size_t literal_rows(const GroundingSpec& g) {
  return g.literal_shape.empty() ? 0 : g.literal_shape[0];
}

// Declarations, literal shapes and axioms against the assembled signature.
void check_semantics(const TheoryDoc& doc, std::vector<Diagnostic>& diags) {
  Signature sig;
  try {
    sig = doc.signature();
  } catch (const LogicError& e) {
    diags.push_back({e.span(), e.message()});
    return;
  }
  std::set<std::string> data_bound;
  for (const auto& s : doc.statements) {
    if (auto* d = std::get_if<DataDecl>(&s)) {
      if (!sig.is_variable(d->var)) {
        diags.push_back({d->span, "data bound to undeclared variable '" + d->var + "'"});
      } else if (!data_bound.insert(d->var).second) {
        diags.push_back({d->span, "variable '" + d->var + "' bound to data twice"});
      }
    }
  }
  using K = GroundingSpec::Kind;
  for (const auto& s : doc.statements) {
    if (auto* c = std::get_if<ConstDecl>(&s)) {
      const Shape& ds = sig.domain_shape(c->domain);
      const auto& g = c->grounding;
      if (g.kind == K::Literal) {
        Shape want = ds;
        if (c->names.size() > 1) want.insert(want.begin(), c->names.size());
        if (g.literal_shape != want && !(want == Shape{1} && g.literal_shape.empty())) {
          diags.push_back({g.span, "literal of shape " + to_string(g.literal_shape) +
                                       " does not fit domain '" + c->domain + "'"});
        }
      } else if (g.kind == K::Trainable) {
        if (g.numbers.size() != 0 && g.numbers.size() != 2) {
          diags.push_back({g.span, "trainable constants take (lo, hi)"});
        }
      } else if (g.kind != K::None) {
        diags.push_back({g.span, "constants take a literal or trainable(lo, hi)"});
      }
    } else if (auto* v = std::get_if<VarDecl>(&s)) {
      const auto& g = v->grounding;
      for (const auto& n : v->names) {
        if (g.kind == K::None && !data_bound.count(n)) {
          diags.push_back({v->span, "variable '" + n + "' has no values and no data binding"});
        } else if (g.kind != K::None && data_bound.count(n)) {
          diags.push_back({v->span, "variable '" + n + "' has both values and a data binding"});
        }
      }
      if (g.kind == K::Literal) {
        Shape want = sig.domain_shape(v->domain);
        want.insert(want.begin(), literal_rows(g));
        if (g.literal_shape != want && !(want.size() == 2 && want[1] == 1 && g.literal_shape.size() == 1)) {
          diags.push_back({g.span, "literal of shape " + to_string(g.literal_shape) +
                                       " does not fit domain '" + v->domain + "'"});
        }
        if (literal_rows(g) == 0) diags.push_back({g.span, "variable needs at least one instance"});
      } else if (g.kind == K::Constants) {
        for (const auto& c : g.names) {
          if (!sig.is_constant(c)) {
            diags.push_back({g.span, "'" + c + "' is not a constant"});
          } else if (sig.constant_domain(c) != v->domain) {
            diags.push_back({g.span, "constant '" + c + "' is not in domain '" + v->domain + "'"});
          }
        }
      } else if (g.kind != K::None) {
        diags.push_back({g.span, "variables take a literal or a list of constants"});
      }
    } else if (auto* f = std::get_if<FuncDecl>(&s)) {
      auto k = f->grounding.kind;
      if (k != K::Mlp && k != K::Distance) {
        diags.push_back({f->grounding.span, "functions take mlp(...) or distance"});
      }
    } else if (auto* p = std::get_if<PredDecl>(&s)) {
      const auto& g = p->grounding;
      bool nullary = p->inputs.empty();
      bool ok = nullary ? (g.kind == K::Truth || (g.kind == K::Trainable && g.numbers.size() <= 1))
                        : (g.kind == K::Mlp || g.kind == K::SelectMlp ||
                           (g.kind == K::SmoothEq && p->inputs.size() == 2));
      if (!ok) {
        diags.push_back({g.span, nullary ? "propositions take truth(v) or trainable(init)"
                                         : "predicates take mlp(...), select mlp(...) or smooth_eq"});
      } else if (g.kind == K::Mlp && g.mlp.output_width() != 1) {
        diags.push_back({g.span, "predicate mlp must end with a single unit"});
      } else if (g.kind == K::SelectMlp && p->inputs.size() < 2) {
        diags.push_back({g.span, "select mlp needs a selector argument"});
      }
    } else if (auto* a = std::get_if<AxiomDecl>(&s)) {
      try {
        type_check(*a->formula, sig);
        auto free = free_variables(*a->formula, sig);
        if (!free.empty()) {
          std::string names;
          for (const auto& n : free) names += (names.empty() ? "" : ", ") + n;
          diags.push_back({a->formula->span, "axiom is not closed; free: " + names});
        }
      } catch (const LogicError& e) {
        diags.push_back({e.span().line > 0 ? e.span() : a->span, e.message()});
      }
    }
  }
}

}  // namespace

ParseResult parse_theory(const std::string& text, const std::string& file, const std::string& base_dir) {
  ParseResult r;
  std::vector<std::string> stack;
  if (file != "<input>") {
    std::error_code ec;
    auto canon = fs::weakly_canonical(file, ec);
    stack.push_back(ec ? file : canon.string());
  }
  Parser p(text, file, base_dir, &r.doc, &r.diagnostics, &stack);
  p.document();
  if (r.ok()) check_semantics(r.doc, r.diagnostics);
  return r;
}

ParseResult load_theory_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParseResult r;
    r.diagnostics.push_back({SourceSpan{path, 0, 0, 0, 0}, "cannot open '" + path + "'"});
    return r;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_theory(ss.str(), path, fs::path(path).parent_path().string());
}

FormulaPtr parse_formula_syntax(const std::string& text) {
  TheoryDoc doc;
  std::vector<Diagnostic> diags;
  std::vector<std::string> stack;
  try {
    Parser p(text, "<formula>", "", &doc, &diags, &stack);
    return p.single_formula();
  } catch (const SyntaxError& e) {
    throw LogicError(e.diag.message, e.diag.span);
  }
}

FormulaPtr parse_formula(const std::string& text, const Signature& sig) {
  FormulaPtr f = parse_formula_syntax(text);
  type_check(*f, sig);
  return f;
}

TermPtr parse_term(const std::string& text, const Signature& sig) {
  TheoryDoc doc;
  std::vector<Diagnostic> diags;
  std::vector<std::string> stack;
  TermPtr t;
  try {
    Parser p(text, "<term>", "", &doc, &diags, &stack);
    t = p.single_term();
  } catch (const SyntaxError& e) {
    throw LogicError(e.diag.message, e.diag.span);
  }
  term_domain(*t, sig);
  return t;
}

}  // namespace rl
