#include "gadgetforge/lexer.h"

#include <cctype>
#include <charconv>
#include <unordered_map>

namespace gadgetforge {

std::string SourceLocation::to_string() const {
  return file + ":" + std::to_string(line) + ":" + std::to_string(column);
}

LocatedError::LocatedError(std::string message, SourceLocation loc)
    : std::runtime_error(loc.to_string() + ": " + message),
      message_(std::move(message)),
      loc_(std::move(loc)) {}

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Let: return "Let";
    case TokenKind::Function: return "Function";
    case TokenKind::Return: return "Return";
    case TokenKind::If: return "If";
    case TokenKind::Else: return "Else";
    case TokenKind::While: return "While";
    case TokenKind::For: return "For";
    case TokenKind::Of: return "Of";
    case TokenKind::True: return "True";
    case TokenKind::False: return "False";
    case TokenKind::Null: return "Null";
    case TokenKind::Undefined: return "Undefined";
    case TokenKind::Typeof: return "Typeof";
    case TokenKind::Require: return "Require";
    case TokenKind::Export: return "Export";
    case TokenKind::This: return "This";
    case TokenKind::Ident: return "Ident";
    case TokenKind::Num: return "Num";
    case TokenKind::Str: return "Str";
    case TokenKind::LParen: return "LParen";
    case TokenKind::RParen: return "RParen";
    case TokenKind::LBrace: return "LBrace";
    case TokenKind::RBrace: return "RBrace";
    case TokenKind::LBracket: return "LBracket";
    case TokenKind::RBracket: return "RBracket";
    case TokenKind::Dot: return "Dot";
    case TokenKind::Comma: return "Comma";
    case TokenKind::Semi: return "Semi";
    case TokenKind::Colon: return "Colon";
    case TokenKind::Question: return "Question";
    case TokenKind::Eq: return "Eq";
    case TokenKind::EqEq: return "EqEq";
    case TokenKind::EqEqEq: return "EqEqEq";
    case TokenKind::NotEq: return "NotEq";
    case TokenKind::NotEqEq: return "NotEqEq";
    case TokenKind::Lt: return "Lt";
    case TokenKind::LtEq: return "LtEq";
    case TokenKind::Gt: return "Gt";
    case TokenKind::GtEq: return "GtEq";
    case TokenKind::Plus: return "Plus";
    case TokenKind::Minus: return "Minus";
    case TokenKind::Star: return "Star";
    case TokenKind::Slash: return "Slash";
    case TokenKind::Percent: return "Percent";
    case TokenKind::Bang: return "Bang";
    case TokenKind::AndAnd: return "AndAnd";
    case TokenKind::OrOr: return "OrOr";
    case TokenKind::QuestionQuestion: return "QuestionQuestion";
    case TokenKind::End: return "End";
  }
  return "?";
}

namespace {

const std::unordered_map<std::string_view, TokenKind>& keywords() {
  static const std::unordered_map<std::string_view, TokenKind> table = {
      {"let", TokenKind::Let},       {"function", TokenKind::Function},
      {"return", TokenKind::Return}, {"if", TokenKind::If},
      {"else", TokenKind::Else},     {"while", TokenKind::While},
      {"for", TokenKind::For},       {"of", TokenKind::Of},
      {"true", TokenKind::True},     {"false", TokenKind::False},
      {"null", TokenKind::Null},     {"undefined", TokenKind::Undefined},
      {"typeof", TokenKind::Typeof}, {"require", TokenKind::Require},
      {"export", TokenKind::Export}, {"this", TokenKind::This},
  };
  return table;
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool is_ident_part(char c) {
  return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

class Lexer {
 public:
  Lexer(std::string_view src, const std::string& file) : src_(src), file_(file) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      if (pos_ >= src_.size()) {
        Token end;
        end.kind = TokenKind::End;
        end.loc = here(pos_);
        end.loc.byte_end = pos_;
        out.push_back(std::move(end));
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  SourceLocation here(std::size_t start) const {
    SourceLocation loc;
    loc.file = file_;
    loc.line = line_;
    loc.column = static_cast<int>(start - line_start_) + 1;
    loc.byte_start = start;
    return loc;
  }

  void advance_newline() {
    ++line_;
    line_start_ = pos_;
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++pos_;
        advance_newline();
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '/' && peek(1) == '*') {
        SourceLocation open = here(pos_);
        pos_ += 2;
        for (;;) {
          if (pos_ >= src_.size())
            throw LexError("unterminated block comment", open);
          if (src_[pos_] == '*' && peek(1) == '/') {
            pos_ += 2;
            break;
          }
          if (src_[pos_++] == '\n') advance_newline();
        }
      } else {
        return;
      }
    }
  }

  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  Token make(TokenKind kind, std::size_t start, SourceLocation loc) {
    Token t;
    t.kind = kind;
    t.text = std::string(src_.substr(start, pos_ - start));
    loc.byte_end = pos_;
    t.loc = std::move(loc);
    return t;
  }

  Token next() {
    const std::size_t start = pos_;
    SourceLocation loc = here(start);
    const char c = src_[pos_];

    if (is_ident_start(c)) {
      while (pos_ < src_.size() && is_ident_part(src_[pos_])) ++pos_;
      std::string_view word = src_.substr(start, pos_ - start);
      auto kw = keywords().find(word);
      return make(kw == keywords().end() ? TokenKind::Ident : kw->second, start,
                  loc);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '.' &&
          std::isdigit(static_cast<unsigned char>(peek(1)))) {
        ++pos_;
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          ++pos_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
          ++pos_;
        if (pos_ < src_.size() &&
            std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() &&
                 std::isdigit(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        } else {
          pos_ = save;
        }
      }
      Token t = make(TokenKind::Num, start, loc);
      t.number = std::stod(t.text);
      return t;
    }
    if (c == '"' || c == '\'') return string_token(start, loc, c);

    auto op = [&](TokenKind kind, std::size_t len) {
      pos_ += len;
      return make(kind, start, loc);
    };
    switch (c) {
      case '(': return op(TokenKind::LParen, 1);
      case ')': return op(TokenKind::RParen, 1);
      case '{': return op(TokenKind::LBrace, 1);
      case '}': return op(TokenKind::RBrace, 1);
      case '[': return op(TokenKind::LBracket, 1);
      case ']': return op(TokenKind::RBracket, 1);
      case '.': return op(TokenKind::Dot, 1);
      case ',': return op(TokenKind::Comma, 1);
      case ';': return op(TokenKind::Semi, 1);
      case ':': return op(TokenKind::Colon, 1);
      case '+': return op(TokenKind::Plus, 1);
      case '-': return op(TokenKind::Minus, 1);
      case '*': return op(TokenKind::Star, 1);
      case '/': return op(TokenKind::Slash, 1);
      case '%': return op(TokenKind::Percent, 1);
      case '?':
        return peek(1) == '?' ? op(TokenKind::QuestionQuestion, 2)
                              : op(TokenKind::Question, 1);
      case '=':
        if (peek(1) == '=')
          return peek(2) == '=' ? op(TokenKind::EqEqEq, 3)
                                : op(TokenKind::EqEq, 2);
        return op(TokenKind::Eq, 1);
      case '!':
        if (peek(1) == '=')
          return peek(2) == '=' ? op(TokenKind::NotEqEq, 3)
                                : op(TokenKind::NotEq, 2);
        return op(TokenKind::Bang, 1);
      case '<':
        return peek(1) == '=' ? op(TokenKind::LtEq, 2) : op(TokenKind::Lt, 1);
      case '>':
        return peek(1) == '=' ? op(TokenKind::GtEq, 2) : op(TokenKind::Gt, 1);
      case '&':
        if (peek(1) == '&') return op(TokenKind::AndAnd, 2);
        break;
      case '|':
        if (peek(1) == '|') return op(TokenKind::OrOr, 2);
        break;
      default:
        break;
    }
    throw LexError(std::string("illegal character '") + c + "'", loc);
  }

  Token string_token(std::size_t start, SourceLocation loc, char quote) {
    ++pos_;
    std::string decoded;
    for (;;) {
      if (pos_ >= src_.size() || src_[pos_] == '\n')
        throw LexError("unterminated string literal", loc);
      char c = src_[pos_++];
      if (c == quote) break;
      if (c != '\\') {
        decoded.push_back(c);
        continue;
      }
      if (pos_ >= src_.size()) throw LexError("unterminated string literal", loc);
      char e = src_[pos_++];
      switch (e) {
        case 'n': decoded.push_back('\n'); break;
        case 't': decoded.push_back('\t'); break;
        case '\\': decoded.push_back('\\'); break;
        case '\'': decoded.push_back('\''); break;
        case '"': decoded.push_back('"'); break;
        default: {
          SourceLocation bad = here(pos_ - 2);
          throw LexError(std::string("unsupported escape '\\") + e + "'", bad);
        }
      }
    }
    Token t = make(TokenKind::Str, start, loc);
    t.text = std::move(decoded);
    return t;
  }

  std::string_view src_;
  const std::string& file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source, const std::string& file) {
  return Lexer(source, file).run();
}

}  // namespace gadgetforge
