#include "rl/lexer.hpp"

#include <cctype>
#include <charconv>
#include <utility>

namespace rl {

std::string_view to_string(TokenKind k) {
  switch (k) {
    case TokenKind::Ident: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::String: return "string";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::LBracket: return "'['";
    case TokenKind::RBracket: return "']'";
    case TokenKind::LBrace: return "'{'";
    case TokenKind::RBrace: return "'}'";
    case TokenKind::Comma: return "','";
    case TokenKind::Colon: return "':'";
    case TokenKind::At: return "'@'";
    case TokenKind::Not: return "'~'";
    case TokenKind::And: return "'&'";
    case TokenKind::Or: return "'|'";
    case TokenKind::Implies: return "'->'";
    case TokenKind::Iff: return "'<->'";
    case TokenKind::Plus: return "'+'";
    case TokenKind::Minus: return "'-'";
    case TokenKind::Star: return "'*'";
    case TokenKind::Slash: return "'/'";
    case TokenKind::Lt: return "'<'";
    case TokenKind::Le: return "'<='";
    case TokenKind::Gt: return "'>'";
    case TokenKind::Ge: return "'>='";
    case TokenKind::Eq: return "'='";
    case TokenKind::Ne: return "'!='";
    case TokenKind::Forall: return "'forall'";
    case TokenKind::Exists: return "'exists'";
    case TokenKind::End: return "end of input";
    case TokenKind::Invalid: return "invalid character";
  }
  return "?";
}

Lexer::Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

char Lexer::peek(std::size_t ahead) const {
  std::size_t i = st_.pos + ahead;
  return i < text_.size() ? text_[i] : '\0';
}

void Lexer::advance(std::size_t n) {
  for (std::size_t i = 0; i < n && st_.pos < text_.size(); ++i) {
    char c = text_[st_.pos++];
    if (c == '\n') {
      ++st_.line;
      st_.column = 1;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++st_.column;  // count code points, not bytes
    }
  }
}

bool Lexer::skip_space_and_comments() {
  bool skipped = false;
  while (st_.pos < text_.size()) {
    char c = peek();
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
    } else if (c == '#' || (c == '/' && peek(1) == '/')) {
      while (st_.pos < text_.size() && peek() != '\n') advance();
    } else {
      break;
    }
    skipped = true;
  }
  return skipped;
}

SourceSpan Lexer::span_from(State start) const {
  return SourceSpan{file_, start.line, start.column, start.pos, st_.pos};
}

namespace {

struct Utf8Symbol {
  std::string_view bytes;
  TokenKind kind;
};

constexpr Utf8Symbol kUnicode[] = {
    {"\xE2\x88\x80", TokenKind::Forall},   // ∀
    {"\xE2\x88\x83", TokenKind::Exists},   // ∃
    {"\xE2\x88\xA7", TokenKind::And},      // ∧
    {"\xE2\x88\xA8", TokenKind::Or},       // ∨
    {"\xC2\xAC", TokenKind::Not},          // ¬
    {"\xE2\x86\x92", TokenKind::Implies},  // →
    {"\xE2\x86\x94", TokenKind::Iff},      // ↔
    {"\xE2\x89\xA4", TokenKind::Le},       // ≤
    {"\xE2\x89\xA5", TokenKind::Ge},       // ≥
    {"\xE2\x89\xA0", TokenKind::Ne},       // ≠
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

Token Lexer::next() {
  Token tok;
  tok.space_before = skip_space_and_comments() || st_.pos == 0;
  State start = st_;
  auto finish = [&](TokenKind k, std::size_t len) {
    advance(len);
    tok.kind = k;
    tok.text = std::string(text_.substr(start.pos, st_.pos - start.pos));
    tok.span = span_from(start);
    return tok;
  };
  if (st_.pos >= text_.size()) return finish(TokenKind::End, 0);

  char c = peek();
  std::string_view rest = text_.substr(st_.pos);
  for (const auto& u : kUnicode) {
    if (rest.substr(0, u.bytes.size()) == u.bytes) return finish(u.kind, u.bytes.size());
  }
  if (ident_start(c)) {
    std::size_t n = 1;
    while (ident_char(peek(n))) ++n;
    finish(TokenKind::Ident, n);
    if (tok.text == "forall") tok.kind = TokenKind::Forall;
    if (tok.text == "exists") tok.kind = TokenKind::Exists;
    return tok;
  }
  if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
    std::size_t n = 0;
    while (std::isdigit(static_cast<unsigned char>(peek(n)))) ++n;
    if (peek(n) == '.') {
      ++n;
      while (std::isdigit(static_cast<unsigned char>(peek(n)))) ++n;
    }
    if (peek(n) == 'e' || peek(n) == 'E') {
      std::size_t m = n + 1;
      if (peek(m) == '+' || peek(m) == '-') ++m;
      if (std::isdigit(static_cast<unsigned char>(peek(m)))) {
        while (std::isdigit(static_cast<unsigned char>(peek(m)))) ++m;
        n = m;
      }
    }
    finish(TokenKind::Number, n);
    auto r = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
    if (r.ec != std::errc()) tok.kind = TokenKind::Invalid;
    return tok;
  }
  if (c == '"') {
    std::size_t n = 1;
    while (peek(n) != '"' && peek(n) != '\n' && peek(n) != '\0') ++n;
    if (peek(n) != '"') {
      finish(TokenKind::Invalid, n);
      tok.text = "unterminated string";
      return tok;
    }
    finish(TokenKind::String, n + 1);
    tok.text = tok.text.substr(1, tok.text.size() - 2);
    return tok;
  }
  switch (c) {
    case '(': return finish(TokenKind::LParen, 1);
    case ')': return finish(TokenKind::RParen, 1);
    case '[': return finish(TokenKind::LBracket, 1);
    case ']': return finish(TokenKind::RBracket, 1);
    case '{': return finish(TokenKind::LBrace, 1);
    case '}': return finish(TokenKind::RBrace, 1);
    case ',': return finish(TokenKind::Comma, 1);
    case ':': return finish(TokenKind::Colon, 1);
    case '@': return finish(TokenKind::At, 1);
    case '~': return finish(TokenKind::Not, 1);
    case '&': return finish(TokenKind::And, 1);
    case '|': return finish(TokenKind::Or, 1);
    case '+': return finish(TokenKind::Plus, 1);
    case '*': return finish(TokenKind::Star, 1);
    case '/': return finish(TokenKind::Slash, 1);
    case '=': return finish(TokenKind::Eq, peek(1) == '=' ? 2 : 1);
    case '-': return finish(peek(1) == '>' ? TokenKind::Implies : TokenKind::Minus, peek(1) == '>' ? 2 : 1);
    case '!': if (peek(1) == '=') return finish(TokenKind::Ne, 2); break;
    case '>': return finish(peek(1) == '=' ? TokenKind::Ge : TokenKind::Gt, peek(1) == '=' ? 2 : 1);
    case '<':
      if (peek(1) == '-' && peek(2) == '>') return finish(TokenKind::Iff, 3);
      return finish(peek(1) == '=' ? TokenKind::Le : TokenKind::Lt, peek(1) == '=' ? 2 : 1);
    default: break;
  }
  // One whole code point so that spans stay on character boundaries.
  std::size_t n = 1;
  while ((static_cast<unsigned char>(peek(n)) & 0xC0) == 0x80) ++n;
  return finish(TokenKind::Invalid, n);
}

std::string Lexer::rest_of_line(const Token& from) {
  st_ = State{from.span.begin, from.span.line, from.span.column};
  std::size_t end = st_.pos;
  while (end < text_.size() && text_[end] != '\n') {
    if (text_[end] == '#' || (text_[end] == '/' && end + 1 < text_.size() && text_[end + 1] == '/')) break;
    ++end;
  }
  std::string raw(text_.substr(st_.pos, end - st_.pos));
  while (st_.pos < text_.size() && text_[st_.pos] != '\n') advance();
  while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.pop_back();
  return raw;
}

}  // namespace rl
