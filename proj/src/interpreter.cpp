#include "gadgetforge/interpreter.h"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "builtins.h"
#include "gadgetforge/parser.h"

namespace gadgetforge {

std::string_view to_string(SinkCategory category) {
  switch (category) {
    case SinkCategory::ACE: return "ACE";
    case SinkCategory::ACI: return "ACI";
    case SinkCategory::LFI: return "LFI";
    case SinkCategory::FileWrite: return "FileWrite";
    case SinkCategory::FileRead: return "FileRead";
    case SinkCategory::Network: return "Network";
    case SinkCategory::None: return "None";
  }
  return "?";
}

std::optional<SinkCategory> sink_category_from_string(std::string_view text) {
  for (auto c : {SinkCategory::ACE, SinkCategory::ACI, SinkCategory::LFI,
                 SinkCategory::FileWrite, SinkCategory::FileRead,
                 SinkCategory::Network, SinkCategory::None})
    if (to_string(c) == text) return c;
  return std::nullopt;
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed: return "Completed";
    case RunStatus::UncaughtError: return "UncaughtError";
    case RunStatus::BudgetExceeded: return "BudgetExceeded";
  }
  return "?";
}

bool RunOutcome::same_observable(const RunOutcome& other) const {
  return status == other.status && stdout_log == other.stdout_log &&
         effects_log == other.effects_log && error == other.error;
}

bool is_array_index(std::string_view key) {
  if (key.empty() || key.size() > 9) return false;
  if (key.size() > 1 && key[0] == '0') return false;
  for (char c : key)
    if (c < '0' || c > '9') return false;
  return true;
}

std::optional<std::string> resolve_package_path(const std::string& from_file,
                                                const std::string& spec) {
  std::vector<std::string> parts;
  auto push_segments = [&](const std::string& path) -> bool {
    std::size_t start = 0;
    while (start <= path.size()) {
      std::size_t slash = path.find('/', start);
      std::string seg = path.substr(start, slash == std::string::npos ? std::string::npos
                                                                      : slash - start);
      if (seg == "..") {
        if (parts.empty()) return false;
        parts.pop_back();
      } else if (!seg.empty() && seg != ".") {
        parts.push_back(seg);
      }
      if (slash == std::string::npos) break;
      start = slash + 1;
    }
    return true;
  };
  if (!spec.empty() && spec[0] == '/') return std::nullopt;
  if (spec.starts_with("./") || spec.starts_with("../")) {
    std::size_t slash = from_file.rfind('/');
    if (slash != std::string::npos && !push_segments(from_file.substr(0, slash)))
      return std::nullopt;
  }
  if (!push_segments(spec) || parts.empty()) return std::nullopt;
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '/';
    out += p;
  }
  return out;
}

namespace {

struct BudgetExhausted {};

constexpr int kMaxCallDepth = 400;

double text_to_number(const std::string& s) {
  std::size_t b = 0, e = s.size();
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (b < e && ws(s[b])) ++b;
  while (e > b && ws(s[e - 1])) --e;
  if (b == e) return 0;
  std::string t = s.substr(b, e - b);
  if (t == "Infinity" || t == "+Infinity") return INFINITY;
  if (t == "-Infinity") return -INFINITY;
  char* end = nullptr;
  double d = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return NAN;
  // strtod accepts forms the host language does not (hex floats, "inf", "nan").
  for (char c : t)
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' ||
          c == 'E' || c == '+' || c == '-'))
      return NAN;
  return d;
}

Value literal_value(const LiteralValue& lit) {
  return std::visit(
      [](const auto& x) -> Value {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, UndefinedLiteral>) return Undefined{};
        else if constexpr (std::is_same_v<T, NullLiteral>) return Null{};
        else return x;
      },
      lit);
}

std::string callee_description(const AstNode& node) {
  if (node.kind == NodeKind::MethodCall && !node.computed) return node.text;
  if (node.kind == NodeKind::Call && node.child(0).kind == NodeKind::Identifier)
    return node.child(0).text;
  return "expression";
}

}  // namespace

// ---- default hook behavior for taint wrappers ----

bool Hooks::on_condition_test(const Value& v, const AstNode& node) {
  if (node.kind == NodeKind::NullishCoalesce) return !nullish(v);
  return truthy(v);
}

Value Hooks::on_tainted_get(Interpreter& interp, TaintValue& taint,
                            const std::string& key, const AstNode& node) {
  return interp.read_member_raw(taint.underlying, key, node);
}

Value Hooks::on_tainted_invoke(Interpreter& interp, TaintValue& callee,
                               const Value& self, std::vector<Value> args,
                               const AstNode& node) {
  return interp.call(callee.underlying, self, std::move(args), node);
}

std::vector<Value> Hooks::on_tainted_iterate(Interpreter& interp, TaintValue& taint,
                                             const AstNode& node) {
  Object* o = as_object(taint.underlying);
  if (!o || o->kind != ObjectKind::Array) interp.fail("value is not iterable", node.loc);
  return o->elements;
}

// ---- interpreter ----

Interpreter::Interpreter(HostBridge& host, Hooks& hooks, std::uint64_t budget)
    : host_(host), hooks_(hooks), budget_(budget) {
  hooks_.attach(*this);
  root_ = heap_.make_object(nullptr);
  root_->is_root = true;
  array_proto_ = heap_.make_object(root_);
  string_proto_ = heap_.make_object(root_);
  install_builtins(*this, *array_proto_, *string_proto_);
  globals_ = heap_.make_environment(nullptr);
  host_.install(*this, *globals_);
}

void Interpreter::fail(const std::string& message, const SourceLocation& loc) {
  throw ScriptError(message, loc);
}

void Interpreter::tick() {
  if (steps_ >= budget_) throw BudgetExhausted{};
  ++steps_;
}

RunOutcome Interpreter::finish(RunStatus status) {
  outcome_.status = status;
  outcome_.steps_used = steps_;
  return outcome_;
}

RunOutcome Interpreter::run_module(const std::string& path) {
  try {
    load_module(path, nullptr);
    return finish(RunStatus::Completed);
  } catch (const LocatedError& e) {
    outcome_.error = e.what();
    outcome_.error_loc = e.location();
    return finish(RunStatus::UncaughtError);
  } catch (const BudgetExhausted&) {
    return finish(RunStatus::BudgetExceeded);
  } catch (const std::runtime_error& e) {
    outcome_.error = e.what();
    return finish(RunStatus::UncaughtError);
  }
}

RunOutcome Interpreter::run_program(const AstNode& program) {
  try {
    modules_[program.loc.file] = Undefined{};
    evaluate_module_body(program);
    return finish(RunStatus::Completed);
  } catch (const LocatedError& e) {
    outcome_.error = e.what();
    outcome_.error_loc = e.location();
    return finish(RunStatus::UncaughtError);
  } catch (const BudgetExhausted&) {
    return finish(RunStatus::BudgetExceeded);
  } catch (const std::runtime_error& e) {
    outcome_.error = e.what();
    return finish(RunStatus::UncaughtError);
  }
}

RunOutcome evaluate_program(const AstNode& program, HostBridge& host, Hooks& hooks,
                            std::uint64_t budget) {
  Interpreter interp(host, hooks, budget);
  return interp.run_program(program);
}

Value Interpreter::load_module(const std::string& path, const AstNode* from) {
  if (auto it = modules_.find(path); it != modules_.end()) return it->second;
  const AstNode* program = nullptr;
  try {
    program = &host_.load_program(path);
  } catch (const LocatedError&) {
    throw;
  } catch (const std::exception& e) {
    if (from) fail(std::string("cannot load module '") + path + "': " + e.what(), from->loc);
    throw;
  }
  modules_[path] = Undefined{};
  evaluate_module_body(*program);
  return modules_[path];
}

Value Interpreter::evaluate_module_body(const AstNode& program) {
  Environment* env = heap_.make_environment(globals_);
  hoist(program, env);
  Value ret = Undefined{};
  Value last = Undefined{};
  for (const auto& stmt : program.children) {
    if (stmt->kind == NodeKind::ExpressionStmt) {
      tick();
      last = eval(stmt->child(0), env);
      continue;
    }
    if (exec(*stmt, env, ret) == Completion::Return) return ret;
  }
  return last;
}

Value Interpreter::require_module(const std::string& from_file, const std::string& spec,
                                  const AstNode& node) {
  auto resolved = resolve_package_path(from_file, spec);
  if (!resolved) fail("module path '" + spec + "' escapes the package root", node.loc);
  return load_module(*resolved, &node);
}

Value Interpreter::eval_text(const std::string& text, const std::string& label) {
  auto program = parse_source(text, label);
  const AstNode& ref = *program;
  owned_programs_.push_back(std::move(program));
  return evaluate_module_body(ref);
}

Value Interpreter::make_function_from_text(const std::vector<std::string>& params,
                                           const std::string& body,
                                           const std::string& label) {
  std::string src = "(function anonymous(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) src += ", ";
    src += params[i];
  }
  src += ") {\n" + body + "\n});";
  auto program = parse_source(src, label);
  const AstNode& ref = *program;
  owned_programs_.push_back(std::move(program));
  Environment* env = heap_.make_environment(globals_);
  return eval(ref.child(0).child(0), env);
}

// ---- objects ----

Object* Interpreter::make_object() { return heap_.make_object(root_); }
Object* Interpreter::make_bare_object() { return heap_.make_object(nullptr); }

Object* Interpreter::make_array(std::vector<Value> elements) {
  Object* a = heap_.make_object(array_proto_, ObjectKind::Array);
  a->elements = std::move(elements);
  return a;
}

Object* Interpreter::make_native(const NativeFunction& fn) {
  Object* o = heap_.make_object(root_, ObjectKind::Native);
  o->native = &fn;
  return o;
}

Object* Interpreter::make_function(const AstNode& fn, Environment* closure) {
  Object* o = heap_.make_object(root_, ObjectKind::Function);
  o->function = &fn;
  o->closure = closure;
  return o;
}

namespace {

const Value* own_slot(const Object& o, std::string_view key, Value& scratch) {
  if (o.kind == ObjectKind::Array) {
    if (key == "length") {
      scratch = static_cast<double>(o.elements.size());
      return &scratch;
    }
    if (is_array_index(key)) {
      std::size_t i = std::stoul(std::string(key));
      if (i < o.elements.size()) return &o.elements[i];
      return nullptr;
    }
  }
  return o.find_own(key);
}

}  // namespace

LookupResult Interpreter::lookup_property(const Object& base, std::string_view key) const {
  LookupResult r;
  for (const Object* o = &base; o; o = o->proto)
    if (o->is_root) r.chain_hits_root = true;
  int depth = 0;
  Value scratch;
  for (const Object* o = &base; o; o = o->proto, ++depth) {
    if (const Value* v = own_slot(*o, key, scratch)) {
      r.value = *v;
      r.found = depth == 0 ? LookupHit::Own : LookupHit::Prototype;
      r.depth = depth;
      r.holder = o;
      return r;
    }
  }
  r.value = Undefined{};
  r.found = LookupHit::NotFound;
  return r;
}

Value Interpreter::read_member_raw(const Value& base, const std::string& key,
                                   const AstNode& node) {
  const Value& b = peel(base);
  if (is_undefined(b) || is_null(b))
    fail("cannot read property '" + key + "' of " + std::string(is_null(b) ? "null" : "undefined"),
         node.loc);
  if (auto s = std::get_if<std::string>(&b)) {
    if (key == "length") return static_cast<double>(s->size());
    if (is_array_index(key)) {
      std::size_t i = std::stoul(key);
      return i < s->size() ? Value(std::string(1, (*s)[i])) : Value(Undefined{});
    }
    return lookup_property(*string_proto_, key).value;
  }
  if (Object* o = as_object(b)) return lookup_property(*o, key).value;
  return lookup_property(*root_, key).value;
}

void Interpreter::write_member_raw(const Value& base, const std::string& key, Value value,
                                   const AstNode& node) {
  const Value& b = peel(base);
  if (is_undefined(b) || is_null(b))
    fail("cannot set property '" + key + "' of " + std::string(is_null(b) ? "null" : "undefined"),
         node.loc);
  Object* o = as_object(b);
  if (!o) return;
  if (o->kind == ObjectKind::Array) {
    if (key == "length") {
      double n = to_number(value);
      if (n >= 0 && n == std::floor(n) && n < 1e9)
        o->elements.resize(static_cast<std::size_t>(n), Undefined{});
      return;
    }
    if (is_array_index(key)) {
      std::size_t i = std::stoul(key);
      if (i >= o->elements.size()) o->elements.resize(i + 1, Undefined{});
      o->elements[i] = std::move(value);
      return;
    }
  }
  o->set_own(key, std::move(value));
}

Value Interpreter::member_get(const Value& base, const std::string& key, const AstNode& node) {
  if (TaintValue* t = as_taint(base)) return hooks_.on_tainted_get(*this, *t, key, node);
  if (is_undefined(base) || is_null(base))
    fail("cannot read property '" + key + "' of " +
             std::string(is_null(base) ? "null" : "undefined"),
         node.loc);
  LookupResult r;
  if (Object* o = as_object(base)) {
    r = lookup_property(*o, key);
  } else {
    r.value = read_member_raw(base, key, node);
    r.found = is_undefined(r.value) ? LookupHit::NotFound : LookupHit::Prototype;
    r.chain_hits_root = true;
  }
  return hooks_.on_property_read(base, key, r, node);
}

Value Interpreter::member_key(const AstNode& node, std::size_t index, Environment* env) {
  if (!node.computed) return node.text;
  Value k = eval(node.child(index), env);
  return to_text(k);
}

// ---- coercion ----

Value Interpreter::to_primitive(const Value& in, CoerceHint hint) {
  Value v = in;
  if (TaintValue* t = as_taint(v)) v = hooks_.on_coerce(*t, hint);
  Object* o = as_object(v);
  if (!o) return v;
  if (o->callable()) return std::string("function");
  if (o->kind == ObjectKind::Array) {
    std::string out;
    for (std::size_t i = 0; i < o->elements.size(); ++i) {
      if (i) out += ",";
      const Value& e = o->elements[i];
      if (!nullish(e) || is_tainted(e)) out += to_text(e);
    }
    return out;
  }
  return std::string("[object Object]");
}

std::string Interpreter::to_text(const Value& in) {
  Value v = to_primitive(in, CoerceHint::Text);
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Undefined>) return "undefined";
        else if constexpr (std::is_same_v<T, Null>) return "null";
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, double>) return format_number(x);
        else if constexpr (std::is_same_v<T, std::string>) return x;
        else return "";
      },
      v);
}

double Interpreter::to_number(const Value& in) {
  Value v = to_primitive(in, CoerceHint::Number);
  return std::visit(
      [](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Undefined>) return NAN;
        else if constexpr (std::is_same_v<T, Null>) return 0;
        else if constexpr (std::is_same_v<T, bool>) return x ? 1 : 0;
        else if constexpr (std::is_same_v<T, double>) return x;
        else if constexpr (std::is_same_v<T, std::string>) return text_to_number(x);
        else return NAN;
      },
      v);
}

bool Interpreter::loose_equals(const Value& ra, const Value& rb) {
  const Value& a = peel(ra);
  const Value& b = peel(rb);
  if (a.index() == b.index()) return strict_equals(a, b);
  if (nullish(a) || nullish(b)) return nullish(a) && nullish(b);
  if (auto x = std::get_if<bool>(&a)) return loose_equals(Value(*x ? 1.0 : 0.0), b);
  if (auto x = std::get_if<bool>(&b)) return loose_equals(a, Value(*x ? 1.0 : 0.0));
  if (is_number(a) && is_text(b)) return std::get<double>(a) == text_to_number(std::get<std::string>(b));
  if (is_text(a) && is_number(b)) return text_to_number(std::get<std::string>(a)) == std::get<double>(b);
  return false;
}

std::string Interpreter::display(const Value& in, int depth) {
  const Value& v = peel(in);
  if (auto s = std::get_if<std::string>(&v)) {
    if (depth == 0) return *s;
    std::string out = "\"";
    for (char c : *s) {
      if (c == '"' || c == '\\') out += '\\';
      if (c == '\n') {
        out += "\\n";
        continue;
      }
      out += c;
    }
    return out + "\"";
  }
  Object* o = as_object(v);
  if (!o) return to_text(v);
  if (o->callable()) return "[Function]";
  if (depth >= 3) return o->kind == ObjectKind::Array ? "[Array]" : "[Object]";
  std::string out;
  if (o->kind == ObjectKind::Array) {
    out = "[";
    for (std::size_t i = 0; i < o->elements.size(); ++i) {
      if (i) out += ", ";
      out += display(o->elements[i], depth + 1);
    }
    return out + "]";
  }
  out = "{";
  for (std::size_t i = 0; i < o->props.size(); ++i) {
    if (i) out += ", ";
    out += o->props[i].first + ": " + display(o->props[i].second, depth + 1);
  }
  return out + "}";
}

// ---- statements ----

void Interpreter::hoist(const AstNode& block, Environment* env) {
  for (const auto& s : block.children)
    if (s->kind == NodeKind::FunctionDecl) env->vars[s->text] = make_function(*s, env);
}

Interpreter::Completion Interpreter::exec_statements(const AstNode& block, Environment* env,
                                                     Value& ret) {
  for (const auto& s : block.children)
    if (exec(*s, env, ret) == Completion::Return) return Completion::Return;
  return Completion::Normal;
}

Interpreter::Completion Interpreter::exec(const AstNode& node, Environment* env, Value& ret) {
  tick();
  switch (node.kind) {
    case NodeKind::ExpressionStmt:
      eval(node.child(0), env);
      return Completion::Normal;
    case NodeKind::VarDecl:
      env->vars[node.text] = node.children.empty() ? Value(Undefined{}) : eval(node.child(0), env);
      return Completion::Normal;
    case NodeKind::FunctionDecl:
      return Completion::Normal;  // hoisted
    case NodeKind::Block: {
      Environment* scope = env;
      if (node.declares) {
        scope = heap_.make_environment(env);
        hoist(node, scope);
      }
      return exec_statements(node, scope, ret);
    }
    case NodeKind::If:
      if (test(eval(node.child(0), env), node))
        return exec(node.child(1), env, ret);
      if (node.children.size() > 2) return exec(node.child(2), env, ret);
      return Completion::Normal;
    case NodeKind::While:
      while (test(eval(node.child(0), env), node))
        if (exec(node.child(1), env, ret) == Completion::Return) return Completion::Return;
      return Completion::Normal;
    case NodeKind::For:
      return exec_for(node, env, ret);
    case NodeKind::Return:
      ret = node.children.empty() ? Value(Undefined{}) : eval(node.child(0), env);
      return Completion::Return;
    case NodeKind::ExportStmt:
      modules_[node.loc.file] = eval(node.child(0), env);
      return Completion::Normal;
    default:
      eval(node, env);
      return Completion::Normal;
  }
}

Interpreter::Completion Interpreter::exec_for(const AstNode& node, Environment* env, Value& ret) {
  if (node.for_of) {
    std::vector<Value> items = iterate(eval(node.child(0), env), node);
    for (auto& item : items) {
      Environment* scope = heap_.make_environment(env);
      scope->vars[node.text] = item;
      if (exec(node.child(1), scope, ret) == Completion::Return) return Completion::Return;
    }
    return Completion::Normal;
  }
  Environment* scope = heap_.make_environment(env);
  if (node.children[0]) {
    Value ignored;
    exec(*node.children[0], scope, ignored);
  }
  for (;;) {
    if (node.children[1] && !test(eval(*node.children[1], scope), node)) break;
    if (exec(node.child(3), scope, ret) == Completion::Return) return Completion::Return;
    if (node.children[2]) eval(*node.children[2], scope);
  }
  return Completion::Normal;
}

std::vector<Value> Interpreter::iterate(const Value& v, const AstNode& node) {
  if (TaintValue* t = as_taint(v)) return hooks_.on_tainted_iterate(*this, *t, node);
  if (auto s = std::get_if<std::string>(&v)) {
    std::vector<Value> out;
    for (char c : *s) out.emplace_back(std::string(1, c));
    return out;
  }
  Object* o = as_object(v);
  if (!o || o->kind != ObjectKind::Array) fail("value is not iterable", node.loc);
  return o->elements;
}

// ---- expressions ----

Value Interpreter::eval(const AstNode& node, Environment* env) {
  tick();
  switch (node.kind) {
    case NodeKind::Literal:
      return literal_value(node.literal);
    case NodeKind::Identifier: {
      Value* v = env->find(node.text);
      if (!v) fail(node.text + " is not defined", node.loc);
      return *v;
    }
    case NodeKind::This: {
      Value* v = env->find("this");
      return v ? *v : Value(Undefined{});
    }
    case NodeKind::Assign: {
      Value value = eval(node.child(0), env);
      Value* slot = env->find(node.text);
      if (!slot) fail("assignment to undeclared variable " + node.text, node.loc);
      *slot = value;
      return value;
    }
    case NodeKind::ObjectLiteral: {
      Object* o = make_object();
      for (std::size_t i = 0; i < node.children.size(); ++i)
        o->set_own(node.params[i], eval(node.child(i), env));
      return o;
    }
    case NodeKind::ArrayLiteral: {
      std::vector<Value> elements;
      for (const auto& c : node.children) elements.push_back(eval(*c, env));
      return make_array(std::move(elements));
    }
    case NodeKind::FunctionExpr:
      return make_function(node, env);
    case NodeKind::MemberRead:
      return eval_member_read(node, env);
    case NodeKind::MemberWrite: {
      Value base = eval(node.child(0), env);
      std::string key = std::get<std::string>(member_key(node, 1, env));
      Value value = eval(*node.children.back(), env);
      value = hooks_.on_property_write(base, key, std::move(value), node);
      if (TaintValue* t = as_taint(base)) {
        if (as_object(t->underlying)) write_member_raw(t->underlying, key, value, node);
        return value;
      }
      write_member_raw(base, key, value, node);
      return value;
    }
    case NodeKind::Call: {
      Value callee = eval(node.child(0), env);
      return invoke_with_hooks(callee, Undefined{}, eval_arguments(node, 1, env), node);
    }
    case NodeKind::MethodCall: {
      Value base = eval(node.child(0), env);
      std::string key = std::get<std::string>(member_key(node, 1, env));
      Value fn = member_get(base, key, node);
      return invoke_with_hooks(fn, base, eval_arguments(node, node.first_argument(), env), node);
    }
    case NodeKind::Binary:
      return eval_binary(node, env);
    case NodeKind::Unary:
      return eval_unary(node, env);
    case NodeKind::LogicalOr:
    case NodeKind::LogicalAnd:
    case NodeKind::NullishCoalesce:
      return eval_logical(node, env);
    case NodeKind::Ternary:
      return test(eval(node.child(0), env), node) ? eval(node.child(1), env)
                                                  : eval(node.child(2), env);
    case NodeKind::RequireExpr:
      return require_module(node.loc.file, node.text, node);
    default:
      fail(std::string("unexpected ") + std::string(to_string(node.kind)), node.loc);
  }
}

Value Interpreter::eval_member_read(const AstNode& node, Environment* env) {
  Value base = eval(node.child(0), env);
  std::string key = std::get<std::string>(member_key(node, 1, env));
  return member_get(base, key, node);
}

std::vector<Value> Interpreter::eval_arguments(const AstNode& node, std::size_t from,
                                               Environment* env) {
  std::vector<Value> args;
  args.reserve(node.children.size() - from);
  for (std::size_t i = from; i < node.children.size(); ++i) args.push_back(eval(node.child(i), env));
  return args;
}

Value Interpreter::invoke_with_hooks(const Value& callee, const Value& self,
                                     std::vector<Value> args, const AstNode& node) {
  args = hooks_.on_call_pre(callee, self, std::move(args), node);
  Value raw = call(callee, self, args, node);
  return hooks_.on_call_post(callee, self, args, std::move(raw), node);
}

Value Interpreter::call(const Value& callee, const Value& self, std::vector<Value> args,
                        const AstNode& node) {
  if (TaintValue* t = as_taint(callee))
    return hooks_.on_tainted_invoke(*this, *t, self, std::move(args), node);
  Object* fn = as_object(callee);
  if (!fn || !fn->callable()) fail(callee_description(node) + " is not a function", node.loc);
  if (call_stack_.size() >= kMaxCallDepth) fail("maximum call stack size exceeded", node.loc);

  struct Frame {
    std::vector<const AstNode*>& stack;
    Frame(std::vector<const AstNode*>& s, const AstNode* n) : stack(s) { stack.push_back(n); }
    ~Frame() { stack.pop_back(); }
  } frame(call_stack_, &node);

  if (fn->kind == ObjectKind::Native) {
    if (fn->native->host) return host_.invoke(*this, *fn->native->host, self, args, node);
    return fn->native->impl(*this, self, args, node);
  }
  const AstNode& decl = *fn->function;
  Environment* scope = heap_.make_environment(fn->closure);
  scope->vars["this"] = self;
  for (std::size_t i = 0; i < decl.params.size(); ++i)
    scope->vars[decl.params[i]] = i < args.size() ? args[i] : Value(Undefined{});
  const AstNode& body = decl.child(0);
  hoist(body, scope);
  Value ret = Undefined{};
  exec_statements(body, scope, ret);
  return ret;
}

Value Interpreter::eval_binary(const AstNode& node, Environment* env) {
  Value left = eval(node.child(0), env);
  Value right = eval(node.child(1), env);
  const std::string& op = node.text;
  Value raw;
  if (op == "+") {
    Value l = to_primitive(left, CoerceHint::Default);
    Value r = to_primitive(right, CoerceHint::Default);
    if (is_text(l) || is_text(r))
      raw = to_text(l) + to_text(r);
    else
      raw = to_number(l) + to_number(r);
  } else if (op == "-") {
    raw = to_number(left) - to_number(right);
  } else if (op == "*") {
    raw = to_number(left) * to_number(right);
  } else if (op == "/") {
    raw = to_number(left) / to_number(right);
  } else if (op == "%") {
    raw = std::fmod(to_number(left), to_number(right));
  } else if (op == "===") {
    raw = strict_equals(left, right);
  } else if (op == "!==") {
    raw = !strict_equals(left, right);
  } else if (op == "==") {
    raw = loose_equals(left, right);
  } else if (op == "!=") {
    raw = !loose_equals(left, right);
  } else {
    Value l = to_primitive(left, CoerceHint::Number);
    Value r = to_primitive(right, CoerceHint::Number);
    int cmp = 0;
    bool unordered = false;
    if (is_text(l) && is_text(r)) {
      cmp = std::get<std::string>(l).compare(std::get<std::string>(r));
    } else {
      double a = to_number(l), b = to_number(r);
      if (std::isnan(a) || std::isnan(b)) unordered = true;
      cmp = a < b ? -1 : (a > b ? 1 : 0);
    }
    if (unordered) raw = false;
    else if (op == "<") raw = cmp < 0;
    else if (op == "<=") raw = cmp <= 0;
    else if (op == ">") raw = cmp > 0;
    else raw = cmp >= 0;
  }
  return hooks_.on_binary(op, left, right, std::move(raw), node);
}

Value Interpreter::eval_unary(const AstNode& node, Environment* env) {
  Value operand = eval(node.child(0), env);
  Value raw;
  if (node.text == "!") raw = !truthy(operand);
  else if (node.text == "-") raw = -to_number(operand);
  else raw = std::string(type_name(operand));
  return hooks_.on_unary(node.text, operand, std::move(raw), node);
}

Value Interpreter::eval_logical(const AstNode& node, Environment* env) {
  Value left = hooks_.on_logical_start(node.kind, node, eval(node.child(0), env));
  const bool decision = test(left, node);
  Value result;
  if (node.kind == NodeKind::LogicalAnd)
    result = decision ? eval(node.child(1), env) : left;
  else
    result = decision ? left : eval(node.child(1), env);
  return hooks_.on_logical_end(node.kind, node, std::move(result));
}

}  // namespace gadgetforge
