#include "gadgetforge/parser.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace gadgetforge {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Program: return "Program";
    case NodeKind::FunctionDecl: return "FunctionDecl";
    case NodeKind::FunctionExpr: return "FunctionExpr";
    case NodeKind::VarDecl: return "VarDecl";
    case NodeKind::Assign: return "Assign";
    case NodeKind::Identifier: return "Identifier";
    case NodeKind::Literal: return "Literal";
    case NodeKind::ObjectLiteral: return "ObjectLiteral";
    case NodeKind::ArrayLiteral: return "ArrayLiteral";
    case NodeKind::MemberRead: return "MemberRead";
    case NodeKind::MemberWrite: return "MemberWrite";
    case NodeKind::Call: return "Call";
    case NodeKind::MethodCall: return "MethodCall";
    case NodeKind::Binary: return "Binary";
    case NodeKind::Unary: return "Unary";
    case NodeKind::LogicalOr: return "LogicalOr";
    case NodeKind::LogicalAnd: return "LogicalAnd";
    case NodeKind::NullishCoalesce: return "NullishCoalesce";
    case NodeKind::Ternary: return "Ternary";
    case NodeKind::If: return "If";
    case NodeKind::While: return "While";
    case NodeKind::For: return "For";
    case NodeKind::Return: return "Return";
    case NodeKind::RequireExpr: return "RequireExpr";
    case NodeKind::ExportStmt: return "ExportStmt";
    case NodeKind::ExpressionStmt: return "ExpressionStmt";
    case NodeKind::Block: return "Block";
    case NodeKind::This: return "This";
  }
  return "?";
}

bool same_structure(const AstNode& a, const AstNode& b) {
  if (a.kind != b.kind || a.text != b.text || !(a.literal == b.literal) ||
      a.params != b.params || a.computed != b.computed ||
      a.for_of != b.for_of || a.declares != b.declares ||
      (a.conditional_owner == nullptr) != (b.conditional_owner == nullptr) ||
      a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    const auto& x = a.children[i];
    const auto& y = b.children[i];
    if (!x || !y) {
      if (x || y) return false;
      continue;
    }
    if (!same_structure(*x, *y)) return false;
  }
  return true;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Infinity" : "-Infinity";
  if (value == 0) return "0";
  std::string sign = value < 0 ? "-" : "";
  double mag = std::fabs(value);

  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, mag, std::chars_format::scientific);
  std::string sci(buf, res.ptr);
  auto epos = sci.find('e');
  std::string mantissa = sci.substr(0, epos);
  int exponent = std::atoi(sci.c_str() + epos + 1);
  std::string digits;
  for (char c : mantissa)
    if (c != '.') digits.push_back(c);
  const int k = static_cast<int>(digits.size());
  const int n = exponent + 1;

  std::string out;
  if (k <= n && n <= 21) {
    out = digits + std::string(n - k, '0');
  } else if (0 < n && n <= 21) {
    out = digits.substr(0, n) + "." + digits.substr(n);
  } else if (-6 < n && n <= 0) {
    out = "0." + std::string(-n, '0') + digits;
  } else {
    int e = n - 1;
    out = digits.substr(0, 1);
    if (k > 1) out += "." + digits.substr(1);
    out += e < 0 ? "e-" : "e+";
    out += std::to_string(std::abs(e));
  }
  return sign + out;
}

namespace {

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

  std::unique_ptr<AstNode> program() {
    auto node = make(NodeKind::Program, cur().loc);
    while (!at(TokenKind::End)) node->children.push_back(statement());
    node->declares = block_declares(*node);
    finish(*node, cur());
    if (!node->children.empty()) {
      node->loc.byte_start = node->children.front()->loc.byte_start;
      node->loc.line = node->children.front()->loc.line;
      node->loc.column = node->children.front()->loc.column;
    }
    return node;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& prev() const { return toks_[pos_ - 1]; }
  bool at(TokenKind k) const { return cur().kind == k; }
  bool at_next(TokenKind k) const {
    return pos_ + 1 < toks_.size() && toks_[pos_ + 1].kind == k;
  }
  bool accept(TokenKind k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    std::string found(to_string(cur().kind));
    if (cur().kind == TokenKind::Ident || cur().kind == TokenKind::Num)
      found += "(" + cur().text + ")";
    throw ParseError("expected " + expected + ", found " + found, cur().loc);
  }

  const Token& expect(TokenKind k, std::string_view what) {
    if (!at(k)) fail(std::string(what));
    return toks_[pos_++];
  }

  std::unique_ptr<AstNode> make(NodeKind kind, const SourceLocation& start) {
    auto n = std::make_unique<AstNode>();
    n->id = next_id_++;
    n->kind = kind;
    n->loc = start;
    return n;
  }

  // Extends node's span to end at `last`.
  static void finish(AstNode& n, const Token& last) {
    n.loc.byte_end = std::max(last.loc.byte_end, n.loc.byte_start + 1);
  }
  // A missing ';' is tolerated before '}' and at the end of input.
  void end_statement(AstNode& n) {
    if (pos_ > 0 && (at(TokenKind::RBrace) || at(TokenKind::End))) {
      finish(n, toks_[pos_ - 1]);
      return;
    }
    finish(n, expect(TokenKind::Semi, "';'"));
  }

  static void finish_at(AstNode& n, const AstNode& last) {
    n.loc.byte_end = last.loc.byte_end;
  }

  static bool block_declares(const AstNode& block) {
    for (const auto& s : block.children)
      if (s->kind == NodeKind::VarDecl || s->kind == NodeKind::FunctionDecl)
        return true;
    return false;
  }

  // ---- statements ----

  std::unique_ptr<AstNode> statement() {
    const SourceLocation start = cur().loc;
    switch (cur().kind) {
      case TokenKind::Let: {
        ++pos_;
        auto n = make(NodeKind::VarDecl, start);
        n->text = expect(TokenKind::Ident, "identifier").text;
        if (accept(TokenKind::Eq)) n->children.push_back(expression());
        end_statement(*n);
        return n;
      }
      case TokenKind::Function:
        if (at_next(TokenKind::Ident)) {
          ++pos_;
          auto n = make(NodeKind::FunctionDecl, start);
          n->text = expect(TokenKind::Ident, "function name").text;
          function_rest(*n);
          return n;
        }
        break;
      case TokenKind::If: {
        ++pos_;
        auto n = make(NodeKind::If, start);
        expect(TokenKind::LParen, "'('");
        n->children.push_back(expression());
        expect(TokenKind::RParen, "')'");
        n->children.push_back(statement());
        if (accept(TokenKind::Else)) n->children.push_back(statement());
        finish_at(*n, *n->children.back());
        return n;
      }
      case TokenKind::While: {
        ++pos_;
        auto n = make(NodeKind::While, start);
        expect(TokenKind::LParen, "'('");
        n->children.push_back(expression());
        expect(TokenKind::RParen, "')'");
        n->children.push_back(statement());
        finish_at(*n, *n->children.back());
        return n;
      }
      case TokenKind::For:
        return for_statement(start);
      case TokenKind::Return: {
        ++pos_;
        auto n = make(NodeKind::Return, start);
        if (!at(TokenKind::Semi) && !at(TokenKind::RBrace) && !at(TokenKind::End))
          n->children.push_back(expression());
        end_statement(*n);
        return n;
      }
      case TokenKind::Export: {
        ++pos_;
        auto n = make(NodeKind::ExportStmt, start);
        n->children.push_back(expression());
        end_statement(*n);
        return n;
      }
      case TokenKind::LBrace:
        return block();
      default:
        break;
    }
    auto n = make(NodeKind::ExpressionStmt, start);
    n->children.push_back(expression());
    end_statement(*n);
    return n;
  }

  std::unique_ptr<AstNode> block() {
    auto n = make(NodeKind::Block, cur().loc);
    expect(TokenKind::LBrace, "'{'");
    while (!at(TokenKind::RBrace)) {
      if (at(TokenKind::End)) fail("'}'");
      n->children.push_back(statement());
    }
    finish(*n, expect(TokenKind::RBrace, "'}'"));
    n->declares = block_declares(*n);
    return n;
  }

  std::unique_ptr<AstNode> for_statement(const SourceLocation& start) {
    ++pos_;
    auto n = make(NodeKind::For, start);
    expect(TokenKind::LParen, "'('");
    if (at(TokenKind::Let) && pos_ + 2 < toks_.size() &&
        toks_[pos_ + 1].kind == TokenKind::Ident &&
        toks_[pos_ + 2].kind == TokenKind::Of) {
      pos_ += 1;
      n->for_of = true;
      n->text = expect(TokenKind::Ident, "identifier").text;
      expect(TokenKind::Of, "'of'");
      n->children.push_back(expression());
      expect(TokenKind::RParen, "')'");
      n->children.push_back(statement());
      finish_at(*n, *n->children.back());
      return n;
    }
    // init
    if (at(TokenKind::Let)) {
      n->children.push_back(statement());  // consumes ';'
    } else if (accept(TokenKind::Semi)) {
      n->children.push_back(nullptr);
    } else {
      auto init = make(NodeKind::ExpressionStmt, cur().loc);
      init->children.push_back(expression());
      finish(*init, expect(TokenKind::Semi, "';'"));
      n->children.push_back(std::move(init));
    }
    if (at(TokenKind::Semi))
      n->children.push_back(nullptr);
    else
      n->children.push_back(expression());
    expect(TokenKind::Semi, "';'");
    if (at(TokenKind::RParen))
      n->children.push_back(nullptr);
    else
      n->children.push_back(expression());
    expect(TokenKind::RParen, "')'");
    n->children.push_back(statement());
    finish_at(*n, *n->children.back());
    return n;
  }

  void function_rest(AstNode& fn) {
    expect(TokenKind::LParen, "'('");
    if (!at(TokenKind::RParen)) {
      do {
        fn.params.push_back(expect(TokenKind::Ident, "parameter name").text);
      } while (accept(TokenKind::Comma));
    }
    expect(TokenKind::RParen, "')'");
    auto body = block();
    body->declares = true;  // parameters and `this` live in the body scope
    fn.children.push_back(std::move(body));
    finish_at(fn, *fn.children.back());
  }

  // ---- expressions ----

  std::unique_ptr<AstNode> expression() { return assignment(); }

  std::unique_ptr<AstNode> assignment() {
    auto target = ternary();
    if (!at(TokenKind::Eq)) return target;
    const Token& eq = cur();
    ++pos_;
    auto value = assignment();
    if (target->parenthesized) throw ParseError("invalid assignment target", eq.loc);
    if (target->kind == NodeKind::Identifier) {
      auto n = make(NodeKind::Assign, target->loc);
      n->text = target->text;
      finish_at(*n, *value);
      n->children.push_back(std::move(value));
      return n;
    }
    if (target->kind == NodeKind::MemberRead) {
      auto n = make(NodeKind::MemberWrite, target->loc);
      n->text = target->text;
      n->computed = target->computed;
      for (auto& c : target->children) n->children.push_back(std::move(c));
      finish_at(*n, *value);
      n->children.push_back(std::move(value));
      return n;
    }
    throw ParseError("invalid assignment target", eq.loc);
  }

  std::unique_ptr<AstNode> ternary() {
    auto test = nullish();
    if (!accept(TokenKind::Question)) return test;
    auto n = make(NodeKind::Ternary, test->loc);
    n->children.push_back(std::move(test));
    n->children.push_back(assignment());
    expect(TokenKind::Colon, "':'");
    n->children.push_back(assignment());
    finish_at(*n, *n->children.back());
    return n;
  }

  static bool is_bare_logical(const AstNode& n) {
    return !n.parenthesized &&
           (n.kind == NodeKind::LogicalOr || n.kind == NodeKind::LogicalAnd);
  }

  std::unique_ptr<AstNode> logical(NodeKind kind, std::unique_ptr<AstNode> left,
                                   std::unique_ptr<AstNode> right) {
    auto n = make(kind, left->loc);
    finish_at(*n, *right);
    if (kind != NodeKind::LogicalAnd && left->kind == NodeKind::MemberRead)
      left->conditional_owner = n.get();
    n->children.push_back(std::move(left));
    n->children.push_back(std::move(right));
    return n;
  }

  std::unique_ptr<AstNode> nullish() {
    auto left = logical_or();
    while (at(TokenKind::QuestionQuestion)) {
      const SourceLocation op = cur().loc;
      ++pos_;
      if (is_bare_logical(*left))
        throw ParseError("cannot mix '??' with '||' or '&&' without parentheses", op);
      auto right = logical_or();
      if (is_bare_logical(*right))
        throw ParseError("cannot mix '??' with '||' or '&&' without parentheses", op);
      left = logical(NodeKind::NullishCoalesce, std::move(left), std::move(right));
    }
    return left;
  }

  std::unique_ptr<AstNode> logical_or() {
    auto left = logical_and();
    while (accept(TokenKind::OrOr)) {
      auto right = logical_and();
      left = logical(NodeKind::LogicalOr, std::move(left), std::move(right));
    }
    return left;
  }

  std::unique_ptr<AstNode> logical_and() {
    auto left = equality();
    while (accept(TokenKind::AndAnd)) {
      auto right = equality();
      left = logical(NodeKind::LogicalAnd, std::move(left), std::move(right));
    }
    return left;
  }

  template <typename Next>
  std::unique_ptr<AstNode> binary_level(std::initializer_list<TokenKind> ops,
                                        Next next) {
    auto left = (this->*next)();
    for (;;) {
      bool matched = false;
      for (TokenKind k : ops) matched = matched || at(k);
      if (!matched) return left;
      std::string op = cur().text;
      ++pos_;
      auto right = (this->*next)();
      auto n = make(NodeKind::Binary, left->loc);
      n->text = std::move(op);
      finish_at(*n, *right);
      n->children.push_back(std::move(left));
      n->children.push_back(std::move(right));
      left = std::move(n);
    }
  }

  std::unique_ptr<AstNode> equality() {
    return binary_level({TokenKind::EqEq, TokenKind::EqEqEq, TokenKind::NotEq,
                         TokenKind::NotEqEq},
                        &Parser::comparison);
  }
  std::unique_ptr<AstNode> comparison() {
    return binary_level(
        {TokenKind::Lt, TokenKind::LtEq, TokenKind::Gt, TokenKind::GtEq},
        &Parser::additive);
  }
  std::unique_ptr<AstNode> additive() {
    return binary_level({TokenKind::Plus, TokenKind::Minus},
                        &Parser::multiplicative);
  }
  std::unique_ptr<AstNode> multiplicative() {
    return binary_level({TokenKind::Star, TokenKind::Slash, TokenKind::Percent},
                        &Parser::unary);
  }

  std::unique_ptr<AstNode> unary() {
    if (at(TokenKind::Bang) || at(TokenKind::Minus) || at(TokenKind::Typeof)) {
      auto n = make(NodeKind::Unary, cur().loc);
      n->text = cur().text;
      ++pos_;
      auto operand = unary();
      finish_at(*n, *operand);
      n->children.push_back(std::move(operand));
      return n;
    }
    return postfix();
  }

  std::unique_ptr<AstNode> postfix() {
    auto expr = primary();
    for (;;) {
      if (accept(TokenKind::Dot)) {
        const Token& name = cur();
        if (name.kind != TokenKind::Ident && !is_keyword(name.kind))
          fail("property name");
        ++pos_;
        auto n = make(NodeKind::MemberRead, expr->loc);
        n->text = name.text;
        finish(*n, name);
        n->children.push_back(std::move(expr));
        expr = std::move(n);
      } else if (accept(TokenKind::LBracket)) {
        auto key = expression();
        auto n = make(NodeKind::MemberRead, expr->loc);
        n->computed = true;
        finish(*n, expect(TokenKind::RBracket, "']'"));
        n->children.push_back(std::move(expr));
        n->children.push_back(std::move(key));
        expr = std::move(n);
      } else if (at(TokenKind::LParen)) {
        std::unique_ptr<AstNode> n;
        if (expr->kind == NodeKind::MemberRead && !expr->parenthesized) {
          n = make(NodeKind::MethodCall, expr->loc);
          n->text = expr->text;
          n->computed = expr->computed;
          for (auto& c : expr->children) n->children.push_back(std::move(c));
        } else {
          n = make(NodeKind::Call, expr->loc);
          n->children.push_back(std::move(expr));
        }
        arguments(*n);
        expr = std::move(n);
      } else {
        return expr;
      }
    }
  }

  void arguments(AstNode& call) {
    expect(TokenKind::LParen, "'('");
    if (!at(TokenKind::RParen)) {
      do {
        call.children.push_back(assignment());
      } while (accept(TokenKind::Comma));
    }
    finish(call, expect(TokenKind::RParen, "')'"));
  }

  static bool is_keyword(TokenKind k) {
    return k >= TokenKind::Let && k <= TokenKind::This;
  }

  std::unique_ptr<AstNode> literal(LiteralValue v) {
    auto n = make(NodeKind::Literal, cur().loc);
    n->literal = std::move(v);
    finish(*n, cur());
    ++pos_;
    return n;
  }

  std::unique_ptr<AstNode> primary() {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::Num: return literal(t.number);
      case TokenKind::Str: return literal(t.text);
      case TokenKind::True: return literal(true);
      case TokenKind::False: return literal(false);
      case TokenKind::Null: return literal(NullLiteral{});
      case TokenKind::Undefined: return literal(UndefinedLiteral{});
      case TokenKind::Ident: {
        auto n = make(NodeKind::Identifier, t.loc);
        n->text = t.text;
        ++pos_;
        return n;
      }
      case TokenKind::This: {
        auto n = make(NodeKind::This, t.loc);
        ++pos_;
        return n;
      }
      case TokenKind::LParen: {
        const SourceLocation open = t.loc;
        ++pos_;
        auto inner = expression();
        inner->parenthesized = true;
        expect(TokenKind::RParen, "')'");
        (void)open;
        return inner;
      }
      case TokenKind::LBrace: return object_literal();
      case TokenKind::LBracket: {
        auto n = make(NodeKind::ArrayLiteral, t.loc);
        ++pos_;
        while (!at(TokenKind::RBracket)) {
          n->children.push_back(assignment());
          if (!accept(TokenKind::Comma)) break;
        }
        finish(*n, expect(TokenKind::RBracket, "']'"));
        return n;
      }
      case TokenKind::Function: {
        auto n = make(NodeKind::FunctionExpr, t.loc);
        ++pos_;
        if (at(TokenKind::Ident)) n->text = toks_[pos_++].text;
        function_rest(*n);
        return n;
      }
      case TokenKind::Require: {
        auto n = make(NodeKind::RequireExpr, t.loc);
        ++pos_;
        expect(TokenKind::LParen, "'('");
        n->text = expect(TokenKind::Str, "module path string").text;
        finish(*n, expect(TokenKind::RParen, "')'"));
        return n;
      }
      default:
        fail("expression");
    }
  }

  std::unique_ptr<AstNode> object_literal() {
    auto n = make(NodeKind::ObjectLiteral, cur().loc);
    ++pos_;
    while (!at(TokenKind::RBrace)) {
      const Token& key = cur();
      if (key.kind != TokenKind::Ident && key.kind != TokenKind::Str &&
          !is_keyword(key.kind))
        fail("property key");
      ++pos_;
      if (accept(TokenKind::Colon)) {
        n->children.push_back(assignment());
      } else {
        if (key.kind != TokenKind::Ident) fail("':'");
        auto ref = make(NodeKind::Identifier, key.loc);
        ref->text = key.text;
        n->children.push_back(std::move(ref));
      }
      n->params.push_back(key.text);
      if (!accept(TokenKind::Comma)) break;
    }
    finish(*n, expect(TokenKind::RBrace, "'}'"));
    return n;
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  int next_id_ = 1;
};

// ---- printer ----

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

class Printer {
 public:
  std::string str() const { return out_.str(); }

  void stmt(const AstNode& n, int depth) {
    indent(depth);
    switch (n.kind) {
      case NodeKind::VarDecl:
        out_ << "let " << n.text;
        if (!n.children.empty()) {
          out_ << " = ";
          expr(n.child(0));
        }
        out_ << ";\n";
        return;
      case NodeKind::FunctionDecl:
        out_ << "function " << n.text;
        function_tail(n, depth);
        out_ << "\n";
        return;
      case NodeKind::If:
        out_ << "if (";
        expr(n.child(0));
        out_ << ")\n";
        stmt(n.child(1), depth + 1);
        if (n.children.size() > 2) {
          indent(depth);
          out_ << "else\n";
          stmt(n.child(2), depth + 1);
        }
        return;
      case NodeKind::While:
        out_ << "while (";
        expr(n.child(0));
        out_ << ")\n";
        stmt(n.child(1), depth + 1);
        return;
      case NodeKind::For:
        out_ << "for (";
        if (n.for_of) {
          out_ << "let " << n.text << " of ";
          expr(n.child(0));
          out_ << ")\n";
          stmt(n.child(1), depth + 1);
          return;
        }
        if (const auto& init = n.children[0]) {
          if (init->kind == NodeKind::VarDecl) {
            out_ << "let " << init->text;
            if (!init->children.empty()) {
              out_ << " = ";
              expr(init->child(0));
            }
          } else {
            expr(init->child(0));
          }
        }
        out_ << "; ";
        if (n.children[1]) expr(*n.children[1]);
        out_ << "; ";
        if (n.children[2]) expr(*n.children[2]);
        out_ << ")\n";
        stmt(n.child(3), depth + 1);
        return;
      case NodeKind::Return:
        out_ << "return";
        if (!n.children.empty()) {
          out_ << " ";
          expr(n.child(0));
        }
        out_ << ";\n";
        return;
      case NodeKind::ExportStmt:
        out_ << "export ";
        expr(n.child(0));
        out_ << ";\n";
        return;
      case NodeKind::ExpressionStmt:
        if (starts_with_object(n.child(0))) {
          out_ << "(";
          expr(n.child(0));
          out_ << ")";
        } else {
          expr(n.child(0));
        }
        out_ << ";\n";
        return;
      case NodeKind::Block:
        out_ << "{\n";
        for (const auto& s : n.children) stmt(*s, depth + 1);
        indent(depth);
        out_ << "}\n";
        return;
      default:
        expr(n);
        out_ << ";\n";
    }
  }

  // A statement may not begin with `{`; it would reparse as a block.
  static bool starts_with_object(const AstNode& n) {
    switch (n.kind) {
      case NodeKind::ObjectLiteral: return true;
      case NodeKind::MemberRead:
      case NodeKind::Call:
      case NodeKind::MethodCall: return starts_with_object(n.child(0));
      default: return false;
    }
  }

  void expr(const AstNode& n) {
    switch (n.kind) {
      case NodeKind::Identifier: out_ << n.text; return;
      case NodeKind::This: out_ << "this"; return;
      case NodeKind::Literal: literal(n.literal); return;
      case NodeKind::RequireExpr: out_ << "require(" << quote(n.text) << ")"; return;
      case NodeKind::ArrayLiteral:
        out_ << "[";
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          if (i) out_ << ", ";
          expr(n.child(i));
        }
        out_ << "]";
        return;
      case NodeKind::ObjectLiteral:
        out_ << "{";
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          if (i) out_ << ", ";
          out_ << quote(n.params[i]) << ": ";
          expr(n.child(i));
        }
        out_ << "}";
        return;
      case NodeKind::FunctionExpr:
        out_ << "(function";
        if (!n.text.empty()) out_ << " " << n.text;
        function_tail(n, 0);
        out_ << ")";
        return;
      case NodeKind::MemberRead:
        postfix_base(n.child(0));
        member_key(n, 1);
        return;
      case NodeKind::MemberWrite:
        out_ << "(";
        postfix_base(n.child(0));
        member_key(n, 1);
        out_ << " = ";
        expr(*n.children.back());
        out_ << ")";
        return;
      case NodeKind::Assign:
        out_ << "(" << n.text << " = ";
        expr(n.child(0));
        out_ << ")";
        return;
      case NodeKind::Call:
        postfix_base(n.child(0));
        args(n, 1);
        return;
      case NodeKind::MethodCall:
        postfix_base(n.child(0));
        member_key(n, 1);
        args(n, n.first_argument());
        return;
      case NodeKind::Binary:
        out_ << "(";
        expr(n.child(0));
        out_ << " " << n.text << " ";
        expr(n.child(1));
        out_ << ")";
        return;
      case NodeKind::Unary:
        out_ << "(" << n.text << (n.text == "typeof" ? " " : "");
        expr(n.child(0));
        out_ << ")";
        return;
      case NodeKind::LogicalOr:
      case NodeKind::LogicalAnd:
      case NodeKind::NullishCoalesce: {
        const char* op = n.kind == NodeKind::LogicalOr    ? " || "
                         : n.kind == NodeKind::LogicalAnd ? " && "
                                                          : " ?? ";
        out_ << "(";
        expr(n.child(0));
        out_ << op;
        expr(n.child(1));
        out_ << ")";
        return;
      }
      case NodeKind::Ternary:
        out_ << "(";
        expr(n.child(0));
        out_ << " ? ";
        expr(n.child(1));
        out_ << " : ";
        expr(n.child(2));
        out_ << ")";
        return;
      default:
        out_ << "/*" << to_string(n.kind) << "*/";
    }
  }

 private:
  void indent(int depth) {
    for (int i = 0; i < depth; ++i) out_ << "  ";
  }

  void literal(const LiteralValue& v) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, UndefinedLiteral>) out_ << "undefined";
          else if constexpr (std::is_same_v<T, NullLiteral>) out_ << "null";
          else if constexpr (std::is_same_v<T, bool>) out_ << (x ? "true" : "false");
          else if constexpr (std::is_same_v<T, double>) out_ << format_number(x);
          else out_ << quote(x);
        },
        v);
  }

  void postfix_base(const AstNode& base) {
    bool simple = base.kind == NodeKind::Identifier || base.kind == NodeKind::This ||
                  base.kind == NodeKind::MemberRead || base.kind == NodeKind::Call ||
                  base.kind == NodeKind::MethodCall || base.kind == NodeKind::RequireExpr;
    if (!simple) out_ << "(";
    expr(base);
    if (!simple) out_ << ")";
  }

  void member_key(const AstNode& n, std::size_t key_index) {
    if (n.computed) {
      out_ << "[";
      expr(n.child(key_index));
      out_ << "]";
    } else {
      out_ << "." << n.text;
    }
  }

  void args(const AstNode& n, std::size_t from) {
    out_ << "(";
    for (std::size_t i = from; i < n.children.size(); ++i) {
      if (i > from) out_ << ", ";
      expr(n.child(i));
    }
    out_ << ")";
  }

  void function_tail(const AstNode& n, int depth) {
    out_ << "(";
    for (std::size_t i = 0; i < n.params.size(); ++i) {
      if (i) out_ << ", ";
      out_ << n.params[i];
    }
    out_ << ") {\n";
    for (const auto& s : n.child(0).children) stmt(*s, depth + 1);
    indent(depth);
    out_ << "}";
  }

  std::ostringstream out_;
};

}  // namespace

std::unique_ptr<AstNode> parse(const std::vector<Token>& tokens) {
  return Parser(tokens).program();
}

std::unique_ptr<AstNode> parse_source(std::string_view source,
                                      const std::string& file) {
  return parse(tokenize(source, file));
}

std::string pretty_print(const AstNode& node) {
  Printer p;
  if (node.kind == NodeKind::Program) {
    for (const auto& s : node.children) p.stmt(*s, 0);
  } else {
    p.expr(node);
  }
  return p.str();
}

}  // namespace gadgetforge
