#include "gadgetforge/value.h"

#include <algorithm>
#include <cmath>

namespace gadgetforge {

std::string_view to_string(TypeTag tag) {
  switch (tag) {
    case TypeTag::Unknown: return "unknown";
    case TypeTag::Text: return "text";
    case TypeTag::Number: return "number";
    case TypeTag::Boolean: return "boolean";
    case TypeTag::Array: return "array";
    case TypeTag::Object: return "object";
    case TypeTag::Function: return "function";
  }
  return "?";
}

std::string_view to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::Read: return "Read";
    case FlowKind::BinaryOp: return "BinaryOp";
    case FlowKind::UnaryOp: return "UnaryOp";
    case FlowKind::Coercion: return "Coercion";
    case FlowKind::BuiltinPropagation: return "BuiltinPropagation";
    case FlowKind::ConditionTest: return "ConditionTest";
    case FlowKind::SinkArg: return "SinkArg";
  }
  return "?";
}

std::vector<std::string> TaintValue::source_properties() const {
  std::vector<std::string> out;
  for (const auto& src : sources)
    if (std::find(out.begin(), out.end(), src.property) == out.end())
      out.push_back(src.property);
  return out;
}

const Value* Object::find_own(std::string_view key) const {
  for (const auto& [k, v] : props)
    if (k == key) return &v;
  return nullptr;
}

Value* Object::find_own(std::string_view key) {
  for (auto& [k, v] : props)
    if (k == key) return &v;
  return nullptr;
}

void Object::set_own(std::string_view key, Value v) {
  if (Value* slot = find_own(key)) {
    *slot = std::move(v);
    return;
  }
  props.emplace_back(std::string(key), std::move(v));
}

Value* Environment::find(const std::string& name) {
  for (Environment* env = this; env; env = env->parent) {
    auto it = env->vars.find(name);
    if (it != env->vars.end()) return &it->second;
  }
  return nullptr;
}

Object* Heap::make_object(Object* proto, ObjectKind kind) {
  Object& o = objects_.emplace_back();
  o.proto = proto;
  o.kind = kind;
  return &o;
}

Environment* Heap::make_environment(Environment* parent) {
  Environment& e = environments_.emplace_back();
  e.parent = parent;
  return &e;
}

TaintValue* Heap::make_taint() {
  TaintValue& t = taints_.emplace_back();
  t.id = next_taint_id_++;
  return &t;
}

const Value& peel(const Value& v) {
  if (auto t = as_taint(v)) return t->underlying;
  return v;
}

bool truthy(const Value& raw) {
  const Value& v = peel(raw);
  return std::visit(
      [](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Undefined> || std::is_same_v<T, Null>)
          return false;
        else if constexpr (std::is_same_v<T, bool>)
          return x;
        else if constexpr (std::is_same_v<T, double>)
          return x != 0 && !std::isnan(x);
        else if constexpr (std::is_same_v<T, std::string>)
          return !x.empty();
        else
          return true;
      },
      v);
}

bool nullish(const Value& raw) {
  const Value& v = peel(raw);
  return is_undefined(v) || is_null(v);
}

std::string_view type_name(const Value& raw) {
  const Value& v = peel(raw);
  switch (v.index()) {
    case 0: return "undefined";
    case 1: return "object";
    case 2: return "boolean";
    case 3: return "number";
    case 4: return "string";
    default: {
      Object* o = as_object(v);
      return o && o->callable() ? "function" : "object";
    }
  }
}

TypeTag type_tag_of(const Value& raw) {
  const Value& v = peel(raw);
  switch (v.index()) {
    case 2: return TypeTag::Boolean;
    case 3: return TypeTag::Number;
    case 4: return TypeTag::Text;
    case 5: {
      Object* o = as_object(v);
      if (o->callable()) return TypeTag::Function;
      if (o->kind == ObjectKind::Array) return TypeTag::Array;
      return TypeTag::Object;
    }
    default: return TypeTag::Unknown;
  }
}

bool strict_equals(const Value& ra, const Value& rb) {
  const Value& a = peel(ra);
  const Value& b = peel(rb);
  if (a.index() != b.index()) return false;
  if (is_number(a)) return std::get<double>(a) == std::get<double>(b);
  return a == b;
}

}  // namespace gadgetforge
