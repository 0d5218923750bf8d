#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gadgetforge/ast.h"

namespace gadgetforge {

enum class TokenKind {
  Let,
  Function,
  Return,
  If,
  Else,
  While,
  For,
  Of,
  True,
  False,
  Null,
  Undefined,
  Typeof,
  Require,
  Export,
  This,
  Ident,
  Num,
  Str,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Dot,
  Comma,
  Semi,
  Colon,
  Question,
  Eq,
  EqEq,
  EqEqEq,
  NotEq,
  NotEqEq,
  Lt,
  LtEq,
  Gt,
  GtEq,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  Bang,
  AndAnd,
  OrOr,
  QuestionQuestion,
  End,
};

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // identifier name, decoded string contents, or lexeme
  double number = 0;
  SourceLocation loc;
};

// Errors carrying a location render as "file:line:col: message".
class LocatedError : public std::runtime_error {
 public:
  LocatedError(std::string message, SourceLocation loc);
  const SourceLocation& location() const { return loc_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  SourceLocation loc_;
};

class LexError : public LocatedError {
 public:
  using LocatedError::LocatedError;
};

std::vector<Token> tokenize(std::string_view source, const std::string& file);

}  // namespace gadgetforge
