#include "builtins.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "gadgetforge/interpreter.h"

namespace gadgetforge {

namespace {

const Value& arg(const std::vector<Value>& args, std::size_t i) {
  static const Value undefined = Undefined{};
  return i < args.size() ? args[i] : undefined;
}

long long to_integer(Interpreter& interp, const Value& v, long long fallback) {
  if (is_undefined(peel(v))) return fallback;
  double d = interp.to_number(v);
  if (std::isnan(d)) return 0;
  if (std::isinf(d)) return d > 0 ? (1LL << 53) : -(1LL << 53);
  return static_cast<long long>(std::trunc(d));
}

// Clamps a possibly negative relative index into [0, size].
std::size_t relative_index(long long rel, std::size_t size) {
  long long n = static_cast<long long>(size);
  if (rel < 0) return static_cast<std::size_t>(std::max(0LL, n + rel));
  return static_cast<std::size_t>(std::min(rel, n));
}

Object& self_array(Interpreter& interp, const Value& self, const AstNode& call) {
  Object* o = as_object(peel(self));
  if (!o || o->kind != ObjectKind::Array)
    interp.fail("array method called on a non-array", call.loc);
  return *o;
}

std::string self_text(Interpreter& interp, const Value& self, const AstNode& call) {
  const Value& v = peel(self);
  if (is_undefined(v) || is_null(v))
    interp.fail("string method called on undefined", call.loc);
  return interp.to_text(self);
}

// ---- arrays ----

Value array_push(Interpreter& interp, const Value& self, std::vector<Value>& args,
                 const AstNode& call) {
  Object& a = self_array(interp, self, call);
  for (auto& v : args) a.elements.push_back(v);
  return static_cast<double>(a.elements.size());
}

Value array_pop(Interpreter& interp, const Value& self, std::vector<Value>&,
                const AstNode& call) {
  Object& a = self_array(interp, self, call);
  if (a.elements.empty()) return Undefined{};
  Value v = a.elements.back();
  a.elements.pop_back();
  return v;
}

Value array_shift(Interpreter& interp, const Value& self, std::vector<Value>&,
                  const AstNode& call) {
  Object& a = self_array(interp, self, call);
  if (a.elements.empty()) return Undefined{};
  Value v = a.elements.front();
  a.elements.erase(a.elements.begin());
  return v;
}

Value array_join(Interpreter& interp, const Value& self, std::vector<Value>& args,
                 const AstNode& call) {
  Object& a = self_array(interp, self, call);
  std::string sep = is_undefined(peel(arg(args, 0))) ? "," : interp.to_text(arg(args, 0));
  std::string out;
  for (std::size_t i = 0; i < a.elements.size(); ++i) {
    if (i) out += sep;
    const Value& e = a.elements[i];
    if (!nullish(e) || is_tainted(e)) out += interp.to_text(e);
  }
  return out;
}

Value array_concat(Interpreter& interp, const Value& self, std::vector<Value>& args,
                   const AstNode& call) {
  Object& a = self_array(interp, self, call);
  std::vector<Value> out = a.elements;
  for (auto& v : args) {
    Object* o = as_object(v);
    if (o && o->kind == ObjectKind::Array)
      out.insert(out.end(), o->elements.begin(), o->elements.end());
    else
      out.push_back(v);
  }
  return interp.make_array(std::move(out));
}

Value array_slice(Interpreter& interp, const Value& self, std::vector<Value>& args,
                  const AstNode& call) {
  Object& a = self_array(interp, self, call);
  const std::size_t n = a.elements.size();
  std::size_t begin = relative_index(to_integer(interp, arg(args, 0), 0), n);
  std::size_t end = relative_index(to_integer(interp, arg(args, 1), static_cast<long long>(n)), n);
  std::vector<Value> out;
  for (std::size_t i = begin; i < end; ++i) out.push_back(a.elements[i]);
  return interp.make_array(std::move(out));
}

Value array_index_of(Interpreter& interp, const Value& self, std::vector<Value>& args,
                     const AstNode& call) {
  Object& a = self_array(interp, self, call);
  for (std::size_t i = 0; i < a.elements.size(); ++i)
    if (strict_equals(a.elements[i], arg(args, 0))) return static_cast<double>(i);
  return -1.0;
}

Value array_includes(Interpreter& interp, const Value& self, std::vector<Value>& args,
                     const AstNode& call) {
  Value idx = array_index_of(interp, self, args, call);
  return std::get<double>(idx) >= 0;
}

Value array_for_each(Interpreter& interp, const Value& self, std::vector<Value>& args,
                     const AstNode& call) {
  Object& a = self_array(interp, self, call);
  const Value fn = arg(args, 0);
  for (std::size_t i = 0; i < a.elements.size(); ++i)
    interp.call(fn, Undefined{}, {a.elements[i], static_cast<double>(i)}, call);
  return Undefined{};
}

Value array_map(Interpreter& interp, const Value& self, std::vector<Value>& args,
                const AstNode& call) {
  Object& a = self_array(interp, self, call);
  const Value fn = arg(args, 0);
  std::vector<Value> out;
  for (std::size_t i = 0; i < a.elements.size(); ++i)
    out.push_back(interp.call(fn, Undefined{}, {a.elements[i], static_cast<double>(i)}, call));
  return interp.make_array(std::move(out));
}

Value array_filter(Interpreter& interp, const Value& self, std::vector<Value>& args,
                   const AstNode& call) {
  Object& a = self_array(interp, self, call);
  const Value fn = arg(args, 0);
  std::vector<Value> out;
  for (std::size_t i = 0; i < a.elements.size(); ++i)
    if (truthy(interp.call(fn, Undefined{}, {a.elements[i], static_cast<double>(i)}, call)))
      out.push_back(a.elements[i]);
  return interp.make_array(std::move(out));
}

// ---- text ----

Value text_substring(Interpreter& interp, const Value& self, std::vector<Value>& args,
                     const AstNode& call) {
  std::string s = self_text(interp, self, call);
  long long n = static_cast<long long>(s.size());
  long long a = std::clamp(to_integer(interp, arg(args, 0), 0), 0LL, n);
  long long b = std::clamp(to_integer(interp, arg(args, 1), n), 0LL, n);
  if (a > b) std::swap(a, b);
  return s.substr(static_cast<std::size_t>(a), static_cast<std::size_t>(b - a));
}

Value text_slice(Interpreter& interp, const Value& self, std::vector<Value>& args,
                 const AstNode& call) {
  std::string s = self_text(interp, self, call);
  std::size_t begin = relative_index(to_integer(interp, arg(args, 0), 0), s.size());
  std::size_t end = relative_index(
      to_integer(interp, arg(args, 1), static_cast<long long>(s.size())), s.size());
  if (begin >= end) return std::string();
  return s.substr(begin, end - begin);
}

Value text_split(Interpreter& interp, const Value& self, std::vector<Value>& args,
                 const AstNode& call) {
  std::string s = self_text(interp, self, call);
  std::vector<Value> parts;
  if (is_undefined(peel(arg(args, 0)))) {
    parts.emplace_back(s);
    return interp.make_array(std::move(parts));
  }
  std::string sep = interp.to_text(arg(args, 0));
  if (sep.empty()) {
    for (char c : s) parts.emplace_back(std::string(1, c));
    return interp.make_array(std::move(parts));
  }
  std::size_t start = 0;
  for (;;) {
    std::size_t hit = s.find(sep, start);
    if (hit == std::string::npos) {
      parts.emplace_back(s.substr(start));
      break;
    }
    parts.emplace_back(s.substr(start, hit - start));
    start = hit + sep.size();
  }
  return interp.make_array(std::move(parts));
}

Value text_replace(Interpreter& interp, const Value& self, std::vector<Value>& args,
                   const AstNode& call) {
  std::string s = self_text(interp, self, call);
  std::string pattern = interp.to_text(arg(args, 0));
  std::string replacement = interp.to_text(arg(args, 1));
  std::size_t hit = s.find(pattern);
  if (hit == std::string::npos) return s;
  return s.substr(0, hit) + replacement + s.substr(hit + pattern.size());
}

Value text_concat(Interpreter& interp, const Value& self, std::vector<Value>& args,
                  const AstNode& call) {
  std::string s = self_text(interp, self, call);
  for (auto& v : args) s += interp.to_text(v);
  return s;
}

Value text_index_of(Interpreter& interp, const Value& self, std::vector<Value>& args,
                    const AstNode& call) {
  std::string s = self_text(interp, self, call);
  std::size_t hit = s.find(interp.to_text(arg(args, 0)));
  return hit == std::string::npos ? -1.0 : static_cast<double>(hit);
}

Value text_includes(Interpreter& interp, const Value& self, std::vector<Value>& args,
                    const AstNode& call) {
  std::string s = self_text(interp, self, call);
  return s.find(interp.to_text(arg(args, 0))) != std::string::npos;
}

Value text_starts_with(Interpreter& interp, const Value& self, std::vector<Value>& args,
                       const AstNode& call) {
  std::string s = self_text(interp, self, call);
  return s.starts_with(interp.to_text(arg(args, 0)));
}

Value text_ends_with(Interpreter& interp, const Value& self, std::vector<Value>& args,
                     const AstNode& call) {
  std::string s = self_text(interp, self, call);
  return s.ends_with(interp.to_text(arg(args, 0)));
}

Value text_upper(Interpreter& interp, const Value& self, std::vector<Value>&,
                 const AstNode& call) {
  std::string s = self_text(interp, self, call);
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

Value text_lower(Interpreter& interp, const Value& self, std::vector<Value>&,
                 const AstNode& call) {
  std::string s = self_text(interp, self, call);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Value text_trim(Interpreter& interp, const Value& self, std::vector<Value>&,
                const AstNode& call) {
  std::string s = self_text(interp, self, call);
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  std::size_t b = 0, e = s.size();
  while (b < e && ws(s[b])) ++b;
  while (e > b && ws(s[e - 1])) --e;
  return s.substr(b, e - b);
}

Value text_char_at(Interpreter& interp, const Value& self, std::vector<Value>& args,
                   const AstNode& call) {
  std::string s = self_text(interp, self, call);
  long long i = to_integer(interp, arg(args, 0), 0);
  if (i < 0 || i >= static_cast<long long>(s.size())) return std::string();
  return std::string(1, s[static_cast<std::size_t>(i)]);
}

const std::vector<NativeFunction>& array_methods() {
  static const std::vector<NativeFunction> table = {
      {"push", array_push},       {"pop", array_pop},
      {"shift", array_shift},     {"join", array_join},
      {"concat", array_concat},   {"slice", array_slice},
      {"indexOf", array_index_of}, {"includes", array_includes},
      {"forEach", array_for_each}, {"map", array_map},
      {"filter", array_filter},
  };
  return table;
}

const std::vector<NativeFunction>& text_methods() {
  static const std::vector<NativeFunction> table = {
      {"substring", text_substring}, {"slice", text_slice},
      {"split", text_split},         {"replace", text_replace},
      {"concat", text_concat},       {"indexOf", text_index_of},
      {"includes", text_includes},   {"startsWith", text_starts_with},
      {"endsWith", text_ends_with},  {"toUpperCase", text_upper},
      {"toLowerCase", text_lower},   {"trim", text_trim},
      {"charAt", text_char_at},
  };
  return table;
}

}  // namespace

void install_builtins(Interpreter& interp, Object& array_proto, Object& string_proto) {
  for (const auto& fn : array_methods()) array_proto.set_own(fn.name, interp.make_native(fn));
  for (const auto& fn : text_methods()) string_proto.set_own(fn.name, interp.make_native(fn));
}

}  // namespace gadgetforge
