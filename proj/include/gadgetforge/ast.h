#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gadgetforge {

struct SourceLocation {
  std::string file;
  int line = 0;
  int column = 0;
  std::size_t byte_start = 0;
  std::size_t byte_end = 0;

  auto operator<=>(const SourceLocation&) const = default;
  bool operator==(const SourceLocation&) const = default;

  // "file:line:col"
  std::string to_string() const;
};

enum class NodeKind {
  Program,
  FunctionDecl,
  FunctionExpr,
  VarDecl,
  Assign,
  Identifier,
  Literal,
  ObjectLiteral,
  ArrayLiteral,
  MemberRead,
  MemberWrite,
  Call,
  MethodCall,
  Binary,
  Unary,
  LogicalOr,
  LogicalAnd,
  NullishCoalesce,
  Ternary,
  If,
  While,
  For,
  Return,
  RequireExpr,
  ExportStmt,
  ExpressionStmt,
  Block,
  This,
};

std::string_view to_string(NodeKind kind);

struct UndefinedLiteral {
  bool operator==(const UndefinedLiteral&) const = default;
};
struct NullLiteral {
  bool operator==(const NullLiteral&) const = default;
};

using LiteralValue =
    std::variant<UndefinedLiteral, NullLiteral, bool, double, std::string>;

// Child layout per kind:
//   Program, Block          statements
//   FunctionDecl/Expr       text = name, params, children[0] = Block body
//   VarDecl                 text = name, children[0] = initializer (optional)
//   Assign                  text = name, children[0] = value
//   Identifier              text = name
//   Literal                 literal
//   ObjectLiteral           params = keys, children = values
//   ArrayLiteral            children = elements
//   MemberRead              children[0] = base; static key in text, or
//                           computed key in children[1]
//   MemberWrite             children[0] = base, [children[1] = computed key],
//                           last child = value
//   Call                    children[0] = callee, then arguments
//   MethodCall              children[0] = base, [children[1] = computed key],
//                           then arguments (see first_argument())
//   Binary, Unary           text = operator
//   LogicalOr/And, Nullish  children[0] = left, children[1] = right
//   Ternary, If             test, consequent, [alternate]
//   While                   test, body
//   For                     init, test, update (each may be null), body;
//                           for_of: text = binding, children = iterable, body
//   Return                  [value]
//   RequireExpr             text = path
//   ExportStmt, ExprStmt    children[0]
struct AstNode {
  int id = 0;
  NodeKind kind = NodeKind::Program;
  SourceLocation loc;
  std::string text;
  LiteralValue literal;
  std::vector<std::unique_ptr<AstNode>> children;
  std::vector<std::string> params;
  bool computed = false;
  bool parenthesized = false;
  bool for_of = false;
  // Block/Program/function body introduces let or function bindings.
  bool declares = false;
  // Set on a MemberRead that is the left operand of `||` or `??`.
  const AstNode* conditional_owner = nullptr;

  std::size_t first_argument() const {
    if (kind == NodeKind::MethodCall)
      return computed ? 2 : 1;
    return 1;
  }
  const AstNode& child(std::size_t i) const { return *children.at(i); }
};

// Structural equality ignoring ids, locations and redundant parentheses.
bool same_structure(const AstNode& a, const AstNode& b);

}  // namespace gadgetforge
