#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gadgetforge/ast.h"
#include "gadgetforge/value.h"

namespace gadgetforge {

enum class CoerceHint { Default, Text, Number, Boolean };

enum class LookupHit { Own, Prototype, NotFound };

struct LookupResult {
  Value value;
  LookupHit found = LookupHit::NotFound;
  int depth = 0;  // prototype depth of the hit (0 = own)
  bool chain_hits_root = false;
  // The prototype that answered, when found == Prototype.
  const Object* holder = nullptr;
};

// Instrumentation contract. Every callback receives the already evaluated
// inputs plus the raw result and may return a replacement; none of them may
// evaluate AST children again. The base class is the no-op hook set: with it
// the interpreter is a plain evaluator.
class Hooks {
 public:
  virtual ~Hooks() = default;

  // Called once by the interpreter constructor, before any evaluation.
  virtual void attach(Interpreter& /*interp*/) {}

  virtual Value on_property_read(const Value& /*base*/, const std::string& /*key*/,
                                 const LookupResult& raw, const AstNode& /*node*/) {
    return raw.value;
  }
  virtual Value on_property_write(const Value& /*base*/, const std::string& /*key*/,
                                  Value value, const AstNode& /*node*/) {
    return value;
  }
  virtual Value on_binary(std::string_view /*op*/, const Value& /*left*/,
                          const Value& /*right*/, Value raw, const AstNode& /*node*/) {
    return raw;
  }
  virtual Value on_unary(std::string_view /*op*/, const Value& /*operand*/, Value raw,
                         const AstNode& /*node*/) {
    return raw;
  }
  virtual Value on_logical_start(NodeKind /*kind*/, const AstNode& /*node*/, Value v) {
    return v;
  }
  virtual Value on_logical_end(NodeKind /*kind*/, const AstNode& /*node*/, Value v) {
    return v;
  }
  // Decision for if/while/for/ternary tests and for short-circuit operators.
  // For `??` the decision is "left operand is not nullish"; everywhere else
  // it is truthiness.
  virtual bool on_condition_test(const Value& v, const AstNode& node);
  virtual std::vector<Value> on_call_pre(const Value& /*callee*/, const Value& /*self*/,
                                         std::vector<Value> args,
                                         const AstNode& /*node*/) {
    return args;
  }
  virtual Value on_call_post(const Value& /*callee*/, const Value& /*self*/,
                             const std::vector<Value>& /*args*/, Value raw,
                             const AstNode& /*node*/) {
    return raw;
  }
  // Returns the value a tainted operand contributes to a primitive
  // conversion. The interpreter finishes the conversion on the result.
  virtual Value on_coerce(TaintValue& taint, CoerceHint /*hint*/) {
    return taint.underlying;
  }

  // Operations whose receiver is a taint wrapper.
  virtual Value on_tainted_get(Interpreter& interp, TaintValue& taint,
                               const std::string& key, const AstNode& node);
  virtual Value on_tainted_invoke(Interpreter& interp, TaintValue& callee,
                                  const Value& self, std::vector<Value> args,
                                  const AstNode& node);
  virtual std::vector<Value> on_tainted_iterate(Interpreter& interp, TaintValue& taint,
                                                const AstNode& node);
};

}  // namespace gadgetforge
