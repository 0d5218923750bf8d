#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "gadgetforge/ast.h"

namespace gadgetforge {

class Interpreter;
struct Object;
struct TaintValue;
struct HostFunctionInfo;

struct Undefined {
  bool operator==(const Undefined&) const = default;
};
struct Null {
  bool operator==(const Null&) const = default;
};

// Tainted values are represented by a TaintValue pointer; a TaintValue never
// wraps another TaintValue.
using Value = std::variant<Undefined, Null, bool, double, std::string, Object*,
                           TaintValue*>;

inline bool is_undefined(const Value& v) { return std::holds_alternative<Undefined>(v); }
inline bool is_null(const Value& v) { return std::holds_alternative<Null>(v); }
inline bool is_text(const Value& v) { return std::holds_alternative<std::string>(v); }
inline bool is_number(const Value& v) { return std::holds_alternative<double>(v); }
inline bool is_tainted(const Value& v) { return std::holds_alternative<TaintValue*>(v); }
inline Object* as_object(const Value& v) {
  auto p = std::get_if<Object*>(&v);
  return p ? *p : nullptr;
}
inline TaintValue* as_taint(const Value& v) {
  auto p = std::get_if<TaintValue*>(&v);
  return p ? *p : nullptr;
}

enum class TypeTag { Unknown, Text, Number, Boolean, Array, Object, Function };
std::string_view to_string(TypeTag tag);

enum class FlowKind {
  Read,
  BinaryOp,
  UnaryOp,
  Coercion,
  BuiltinPropagation,
  ConditionTest,
  SinkArg,
};
std::string_view to_string(FlowKind kind);

struct FlowStep {
  FlowKind kind = FlowKind::Read;
  // Property name for Read; operator or function name otherwise.
  std::string detail;
  SourceLocation loc;
  bool operator==(const FlowStep&) const = default;
};

enum class InjectionMode { Immediate, DelayedConditional };

struct SourceRecord {
  std::string property;
  SourceLocation loc;
  bool base_has_root_proto = false;
  InjectionMode mode = InjectionMode::Immediate;
  bool operator==(const SourceRecord&) const = default;
};

// Heap-independent literal, used for forcing candidates and pollution values.
using Literal = std::variant<std::monostate, bool, double, std::string,
                             std::vector<std::string>>;

struct TaintValue {
  std::uint64_t id = 0;
  Value underlying;
  TypeTag type = TypeTag::Unknown;
  SourceRecord source;
  // Every root source that contributed, `source` first. Merged taints
  // (binary operations, built-in propagation) union their operands' sources.
  std::vector<SourceRecord> sources;
  std::vector<FlowStep> flow;
  // Delayed injection marker waiting for its `||`/`??` expression to finish.
  bool pending = false;
  // Object a method taint was read from; used as `this` on invocation.
  Value receiver;
  // Comparison and typeof results remember the taint they inspected.
  TaintValue* compared = nullptr;
  TaintValue* typeof_of = nullptr;

  // Property names of `sources`, in first-seen order.
  std::vector<std::string> source_properties() const;
};

enum class ObjectKind { Plain, Array, Function, Native };

using NativeImpl = std::function<Value(Interpreter&, const Value& self,
                                       std::vector<Value>& args,
                                       const AstNode& call)>;

struct NativeFunction {
  std::string name;
  NativeImpl impl;
  const HostFunctionInfo* host = nullptr;
};

struct Environment;

struct Object {
  ObjectKind kind = ObjectKind::Plain;
  Object* proto = nullptr;
  bool is_root = false;
  std::vector<std::pair<std::string, Value>> props;
  std::vector<Value> elements;
  const AstNode* function = nullptr;
  Environment* closure = nullptr;
  const NativeFunction* native = nullptr;

  const Value* find_own(std::string_view key) const;
  Value* find_own(std::string_view key);
  void set_own(std::string_view key, Value v);
  bool callable() const {
    return kind == ObjectKind::Function || kind == ObjectKind::Native;
  }
};

struct Environment {
  Environment* parent = nullptr;
  std::unordered_map<std::string, Value> vars;

  Value* find(const std::string& name);
};

// Owns every object, scope and taint created during one run. Nothing is
// reclaimed before the heap itself goes away.
class Heap {
 public:
  Object* make_object(Object* proto, ObjectKind kind = ObjectKind::Plain);
  Environment* make_environment(Environment* parent);
  TaintValue* make_taint();
  std::size_t object_count() const { return objects_.size(); }

 private:
  std::deque<Object> objects_;
  std::deque<Environment> environments_;
  std::deque<TaintValue> taints_;
  std::uint64_t next_taint_id_ = 1;
};

// Truthiness with tainted values answering through their underlying value.
bool truthy(const Value& v);
bool nullish(const Value& v);
// The value a taint stands for, or v itself.
const Value& peel(const Value& v);

// Name `typeof` reports for a plain value.
std::string_view type_name(const Value& v);
TypeTag type_tag_of(const Value& v);

bool strict_equals(const Value& a, const Value& b);

}  // namespace gadgetforge
