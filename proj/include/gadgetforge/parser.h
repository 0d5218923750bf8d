#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gadgetforge/ast.h"
#include "gadgetforge/lexer.h"

namespace gadgetforge {

class ParseError : public LocatedError {
 public:
  using LocatedError::LocatedError;
};

std::unique_ptr<AstNode> parse(const std::vector<Token>& tokens);

// tokenize + parse
std::unique_ptr<AstNode> parse_source(std::string_view source,
                                      const std::string& file);

// Renders a program back to MiniJS. Compound expressions are fully
// parenthesized, so the output reparses to the same structure.
std::string pretty_print(const AstNode& node);

// Shortest round-trip rendering of a number, as the host language prints it.
std::string format_number(double value);

}  // namespace gadgetforge
