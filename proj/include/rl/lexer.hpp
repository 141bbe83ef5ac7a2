#pragma once

#include <string>
#include <string_view>

#include "rl/ast.hpp"

namespace rl {

enum class TokenKind {
  Ident, Number, String,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace,
  Comma, Colon, At,
  Not, And, Or, Implies, Iff,
  Plus, Minus, Star, Slash,
  Lt, Le, Gt, Ge, Eq, Ne,
  Forall, Exists,
  End, Invalid,
};

std::string_view to_string(TokenKind k);

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // identifier, string contents, or the raw lexeme
  double number = 0.0;
  SourceSpan span;
  bool space_before = false;
};

// Pull lexer. '#' and '//' start comments. Unicode connectives and
// quantifiers are mapped onto their ASCII token kinds.
class Lexer {
 public:
  struct State {
    std::size_t pos = 0;
    int line = 1;
    int column = 1;
  };

  Lexer(std::string_view text, std::string file);

  Token next();
  State state() const { return st_; }
  void restore(State s) { st_ = s; }
  // Raw text from byte offset begin to the end of its line, comments
  // stripped; the lexer resumes on the next line.
  std::string rest_of_line(const Token& from);
  const std::string& file() const { return file_; }
  std::string_view text() const { return text_; }

 private:
  char peek(std::size_t ahead = 0) const;
  void advance(std::size_t n = 1);
  bool skip_space_and_comments();
  SourceSpan span_from(State start) const;

  std::string_view text_;
  std::string file_;
  State st_;
};

}  // namespace rl
