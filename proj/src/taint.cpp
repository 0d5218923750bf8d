#include "gadgetforge/taint.h"

#include <algorithm>

namespace gadgetforge {

namespace {

constexpr std::size_t kMaxFlowSteps = 256;

bool is_comparison(std::string_view op) {
  return op == "==" || op == "===" || op == "!=" || op == "!==" || op == "<" || op == "<=" ||
         op == ">" || op == ">=";
}

bool is_equality(std::string_view op) {
  return op == "==" || op == "===" || op == "!=" || op == "!==";
}

std::optional<TypeTag> type_from_typeof_name(const std::string& name) {
  if (name == "string") return TypeTag::Text;
  if (name == "number") return TypeTag::Number;
  if (name == "boolean") return TypeTag::Boolean;
  if (name == "object") return TypeTag::Object;
  if (name == "function") return TypeTag::Function;
  return std::nullopt;
}

void append_flow(std::vector<FlowStep>& flow, const std::vector<FlowStep>& more) {
  for (const auto& step : more) {
    if (flow.size() >= kMaxFlowSteps) return;
    flow.push_back(step);
  }
}

void merge_sources(std::vector<SourceRecord>& into, const std::vector<SourceRecord>& more) {
  for (const auto& s : more) {
    bool seen = std::any_of(into.begin(), into.end(), [&](const SourceRecord& r) {
      return r.property == s.property && r.loc == s.loc;
    });
    if (!seen) into.push_back(s);
  }
}

void infer(TaintValue& t, TypeTag tag) {
  if (t.type == TypeTag::Unknown && tag != TypeTag::Unknown) t.type = tag;
}

Value noop_impl(Interpreter&, const Value&, std::vector<Value>&, const AstNode&) {
  return Undefined{};
}

const NativeFunction& noop_function() {
  static const NativeFunction fn{"noop", noop_impl};
  return fn;
}

template <typename Visit>
void walk_taints(const Value& v, int depth, std::vector<std::string>& path, Visit&& visit) {
  if (TaintValue* t = as_taint(v)) {
    visit(t, path);
    walk_taints(t->underlying, depth, path, visit);
    return;
  }
  Object* o = as_object(v);
  if (!o || depth <= 0 || o->callable()) return;
  if (o->kind == ObjectKind::Array) {
    for (std::size_t i = 0; i < o->elements.size(); ++i) {
      path.push_back(std::to_string(i));
      walk_taints(o->elements[i], depth - 1, path, visit);
      path.pop_back();
    }
    return;
  }
  for (const auto& [k, pv] : o->props) {
    path.push_back(k);
    walk_taints(pv, depth - 1, path, visit);
    path.pop_back();
  }
}

struct Unwrapper {
  Interpreter& interp;
  std::vector<FoundTaint> found;
  std::vector<std::string> path;

  Value walk(const Value& v, int depth) {
    if (TaintValue* t = as_taint(v)) {
      found.push_back({t, path});
      Value inner = is_undefined(t->underlying) ? default_value(interp, t->type) : t->underlying;
      return walk(inner, depth);
    }
    Object* o = as_object(v);
    if (!o || depth <= 0 || o->callable()) return v;
    const std::size_t before = found.size();
    if (o->kind == ObjectKind::Array) {
      std::vector<Value> elements;
      elements.reserve(o->elements.size());
      for (std::size_t i = 0; i < o->elements.size(); ++i) {
        path.push_back(std::to_string(i));
        elements.push_back(walk(o->elements[i], depth - 1));
        path.pop_back();
      }
      if (found.size() == before) return v;
      Object* copy = interp.make_array(std::move(elements));
      copy->proto = o->proto;
      return copy;
    }
    std::vector<std::pair<std::string, Value>> props;
    props.reserve(o->props.size());
    for (const auto& [k, pv] : o->props) {
      path.push_back(k);
      props.emplace_back(k, walk(pv, depth - 1));
      path.pop_back();
    }
    if (found.size() == before) return v;
    Object* copy = interp.heap().make_object(o->proto);
    copy->props = std::move(props);
    return copy;
  }
};

}  // namespace

std::string_view to_string(RunMode mode) {
  return mode == RunMode::Unintrusive ? "unintrusive" : "forced";
}

std::set<std::string> default_ignore_list() {
  return {"toString", "valueOf", "constructor", "prototype", "then", "length", "@@iterator"};
}

std::optional<TypeTag> type_implied_by_method(std::string_view key) {
  static const std::set<std::string, std::less<>> text = {
      "substring", "substr",     "charAt",      "charCodeAt", "startsWith", "endsWith",
      "toUpperCase", "toLowerCase", "trim",     "split",      "replace",    "padStart",
      "padEnd"};
  static const std::set<std::string, std::less<>> array = {"push", "pop", "shift", "unshift",
                                                           "forEach", "map", "filter", "join"};
  if (text.count(key)) return TypeTag::Text;
  if (array.count(key)) return TypeTag::Array;
  return std::nullopt;
}

Value default_value(Interpreter& interp, TypeTag type) {
  switch (type) {
    case TypeTag::Unknown:
    case TypeTag::Text: return std::string();
    case TypeTag::Number: return 0.0;
    case TypeTag::Boolean: return false;
    case TypeTag::Array: return interp.make_array({});
    case TypeTag::Object: return interp.make_object();
    case TypeTag::Function: return interp.make_native(noop_function());
  }
  return std::string();
}

Value literal_to_value(Interpreter& interp, const Literal& literal) {
  return std::visit(
      [&](const auto& x) -> Value {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return Undefined{};
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
          std::vector<Value> elements(x.begin(), x.end());
          return interp.make_array(std::move(elements));
        } else {
          return x;
        }
      },
      literal);
}

Unwrapped unwrap_deep(Interpreter& interp, const Value& v, int max_depth) {
  Unwrapper u{interp, {}, {}};
  Value plain = u.walk(v, max_depth);
  return {std::move(plain), std::move(u.found)};
}

std::vector<FoundTaint> find_taints(const Value& v, int max_depth) {
  std::vector<FoundTaint> out;
  std::vector<std::string> path;
  walk_taints(v, max_depth, path, [&](TaintValue* t, const std::vector<std::string>& p) {
    out.push_back({t, p});
  });
  return out;
}

// ---- analysis ----

TaintAnalysis::TaintAnalysis(TaintConfig config) : config_(std::move(config)) {}

TaintValue* TaintAnalysis::derive(Interpreter& interp,
                                  const std::vector<const TaintValue*>& parents,
                                  Value underlying, FlowStep step) {
  TaintValue* t = interp.heap().make_taint();
  t->underlying = peel(underlying);
  t->type = type_tag_of(t->underlying);
  for (const TaintValue* p : parents) {
    if (!p) continue;
    if (t->sources.empty()) t->source = p->source;
    merge_sources(t->sources, p->sources);
    append_flow(t->flow, p->flow);
  }
  if (t->flow.size() >= kMaxFlowSteps) t->flow.pop_back();
  t->flow.push_back(std::move(step));
  return t;
}

TaintValue* TaintAnalysis::inject(const std::string& key, const AstNode& node,
                                  InjectionMode mode) {
  TaintValue* t = interp_->heap().make_taint();
  t->underlying = Undefined{};
  t->source = SourceRecord{key, node.loc, true, mode};
  t->sources = {t->source};
  t->flow.push_back(FlowStep{FlowKind::Read, key, node.loc});
  if (mode == InjectionMode::DelayedConditional) {
    t->pending = true;
  } else if (applied_.count(key)) {
    if (auto c = candidate_for(key)) apply_candidate(*t, *c);
  }
  injected_.push_back(t);
  return t;
}

Value TaintAnalysis::on_property_read(const Value& base, const std::string& key,
                                      const LookupResult& raw, const AstNode& node) {
  if (!config_.inject || !as_object(base)) return raw.value;
  LookupLogEntry entry;
  entry.key = key;
  entry.loc = node.loc;
  entry.found = raw.found;
  entry.chain_hits_root = raw.chain_hits_root;
  entry.ignored = config_.ignore.count(key) > 0;
  entry.intermediate_hit =
      raw.found == LookupHit::Prototype && raw.holder && !raw.holder->is_root;
  Value result = raw.value;
  if (raw.found == LookupHit::NotFound && raw.chain_hits_root && !entry.ignored) {
    const bool delayed = node.conditional_owner != nullptr;
    TaintValue* t = inject(key, node, delayed ? InjectionMode::DelayedConditional
                                              : InjectionMode::Immediate);
    if (delayed) pending_[node.conditional_owner] = t;
    entry.injected = true;
    result = t;
  }
  lookup_log_.push_back(std::move(entry));
  return result;
}

Value TaintAnalysis::on_logical_end(NodeKind kind, const AstNode& node, Value v) {
  auto it = pending_.find(&node);
  if (it == pending_.end()) return v;
  TaintValue* t = it->second;
  pending_.erase(it);
  t->pending = false;
  if (TaintValue* other = as_taint(v)) {
    t->underlying = other->underlying;
    t->type = other->type;
    merge_sources(t->sources, other->sources);
    append_flow(t->flow, other->flow);
  } else {
    t->underlying = v;
    t->type = type_tag_of(v);
  }
  t->flow.push_back(
      FlowStep{FlowKind::BinaryOp, kind == NodeKind::NullishCoalesce ? "??" : "||", node.loc});
  return t;
}

Value TaintAnalysis::on_binary(std::string_view op, const Value& left, const Value& right,
                               Value raw, const AstNode& node) {
  TaintValue* lt = as_taint(left);
  TaintValue* rt = as_taint(right);
  if (!lt && !rt) return raw;
  if (op == "+") {
    if (lt && is_text(peel(right))) infer(*lt, TypeTag::Text);
    if (rt && is_text(peel(left))) infer(*rt, TypeTag::Text);
  }
  TaintValue* result = derive(*interp_, {lt, rt}, std::move(raw),
                              FlowStep{FlowKind::BinaryOp, std::string(op), node.loc});
  if (!is_comparison(op)) return result;
  TaintValue* inspected = lt ? lt : rt;
  result->compared = inspected;
  if (!is_equality(op)) return result;
  const AstNode& other = lt ? node.child(1) : node.child(0);
  if (other.kind != NodeKind::Literal) return result;

  std::optional<Candidate> candidate;
  const TaintValue* subject = inspected;
  if (inspected->typeof_of) {
    if (auto name = std::get_if<std::string>(&other.literal))
      if (auto tag = type_from_typeof_name(*name)) {
        candidate = Candidate{std::monostate{}, *tag};
        subject = inspected->typeof_of;
      }
  } else if (auto s = std::get_if<std::string>(&other.literal)) {
    candidate = Candidate{*s, TypeTag::Text};
  } else if (auto d = std::get_if<double>(&other.literal)) {
    candidate = Candidate{*d, TypeTag::Number};
  } else if (auto b = std::get_if<bool>(&other.literal)) {
    candidate = Candidate{*b, TypeTag::Boolean};
  }
  if (candidate)
    for (const auto& property : subject->source_properties()) observed_.emplace(property, *candidate);
  return result;
}

Value TaintAnalysis::on_unary(std::string_view op, const Value& operand, Value raw,
                              const AstNode& node) {
  TaintValue* t = as_taint(operand);
  if (!t) return raw;
  TaintValue* result = derive(*interp_, {t}, std::move(raw),
                              FlowStep{FlowKind::UnaryOp, std::string(op), node.loc});
  if (op == "typeof") result->typeof_of = t;
  return result;
}

bool TaintAnalysis::on_condition_test(const Value& v, const AstNode& node) {
  const bool natural = Hooks::on_condition_test(v, node);
  TaintValue* t = as_taint(v);
  if (!t || !config_.inject || t->pending) return natural;
  record_branch(*t, node, natural);
  if (config_.mode == RunMode::Forced) return forced_decision(*t, natural);
  return natural;
}

void TaintAnalysis::record_branch(const TaintValue& t, const AstNode& node, bool natural) {
  BranchRecord r;
  r.loc = node.loc;
  r.properties = t.source_properties();
  std::sort(r.properties.begin(), r.properties.end());
  r.natural_outcome = natural;
  if (r.properties.empty()) return;
  for (const auto& existing : records_)
    if (existing.same_key(r)) return;
  records_.push_back(std::move(r));
}

std::optional<Candidate> TaintAnalysis::candidate_for(const std::string& property) const {
  if (auto it = observed_.find(property); it != observed_.end()) return it->second;
  if (auto it = config_.candidates.find(property); it != config_.candidates.end())
    return it->second;
  return std::nullopt;
}

void TaintAnalysis::apply_candidate(TaintValue& target, const Candidate& c) {
  if (std::holds_alternative<std::monostate>(c.value))
    target.underlying = default_value(*interp_, c.type);
  else
    target.underlying = literal_to_value(*interp_, c.value);
  target.type = c.type;
}

bool TaintAnalysis::forced_decision(TaintValue& t, bool natural) {
  bool flip = false;
  for (const auto& property : t.source_properties()) {
    if (!config_.forced.count(property) || applied_.count(property)) continue;
    flip = true;
    if (auto c = candidate_for(property)) {
      TaintValue* target = t.compared ? t.compared : &t;
      if (target->typeof_of) target = target->typeof_of;
      apply_candidate(*target, *c);
      applied_.insert(property);
    }
  }
  return flip ? !natural : natural;
}

Value TaintAnalysis::on_call_post(const Value& callee, const Value& self,
                                  const std::vector<Value>& args, Value raw,
                                  const AstNode& node) {
  if (!config_.inject) return raw;
  Object* fn = as_object(peel(callee));
  if (!fn || fn->kind != ObjectKind::Native) return raw;
  const std::string& name = fn->native->name;
  if (fn->native->host) {
    if (name == "util.format") return builtin_propagation(name, self, args, std::move(raw), node);
    return raw;
  }
  const Value& receiver = peel(self);
  Object* ro = as_object(receiver);
  const bool array_mock = ro && ro->kind == ObjectKind::Array &&
                          (name == "join" || name == "concat");
  const bool text_mock = is_text(receiver) && (name == "concat" || name == "slice" ||
                                               name == "substring" || name == "replace" ||
                                               name == "split");
  if (!array_mock && !text_mock) return raw;
  return builtin_propagation(name, self, args, std::move(raw), node);
}

Value TaintAnalysis::builtin_propagation(const std::string& name, const Value& self,
                                         const std::vector<Value>& args, Value raw,
                                         const AstNode& node) {
  std::vector<const TaintValue*> parents;
  for (const auto& f : find_taints(self, 2)) parents.push_back(f.taint);
  for (const auto& a : args)
    for (const auto& f : find_taints(a, 2)) parents.push_back(f.taint);
  if (parents.empty() || is_tainted(raw)) return raw;
  return derive(*interp_, parents, std::move(raw),
                FlowStep{FlowKind::BuiltinPropagation, name, node.loc});
}

Value TaintAnalysis::on_coerce(TaintValue& taint, CoerceHint hint) {
  switch (hint) {
    case CoerceHint::Text: infer(taint, TypeTag::Text); break;
    case CoerceHint::Number: infer(taint, TypeTag::Number); break;
    case CoerceHint::Boolean: infer(taint, TypeTag::Boolean); break;
    case CoerceHint::Default: break;
  }
  if (!is_undefined(taint.underlying)) return taint.underlying;
  return default_value(*interp_, taint.type);
}

Value TaintAnalysis::on_tainted_get(Interpreter& interp, TaintValue& taint,
                                    const std::string& key, const AstNode& node) {
  if (auto implied = type_implied_by_method(key)) infer(taint, *implied);
  Value target = taint.underlying;
  const bool from_default = nullish(target);
  if (from_default) target = default_value(interp, taint.type);
  Value found = interp.read_member_raw(target, key, node);
  FlowStep step{FlowKind::Read, key, node.loc};
  if (is_undefined(found)) {
    TaintValue* child = derive(interp, {&taint}, Undefined{}, std::move(step));
    child->type = TypeTag::Unknown;
    return child;
  }
  if (from_default) {
    taint.underlying = target;
    infer(taint, type_tag_of(target));
  }
  return derive(interp, {&taint}, std::move(found), std::move(step));
}

Value TaintAnalysis::on_tainted_invoke(Interpreter& interp, TaintValue& callee, const Value& self,
                                       std::vector<Value> args, const AstNode& node) {
  Object* fn = as_object(callee.underlying);
  if (fn && fn->callable()) return interp.call(callee.underlying, self, std::move(args), node);
  TaintValue* child = derive(interp, {&callee}, Undefined{},
                             FlowStep{FlowKind::UnaryOp, "call", node.loc});
  child->type = TypeTag::Unknown;
  return child;
}

std::vector<Value> TaintAnalysis::on_tainted_iterate(Interpreter& interp, TaintValue& taint,
                                                     const AstNode& node) {
  infer(taint, TypeTag::Array);
  if (nullish(taint.underlying)) taint.underlying = default_value(interp, taint.type);
  std::vector<Value> items;
  if (auto s = std::get_if<std::string>(&taint.underlying)) {
    for (char c : *s) items.emplace_back(std::string(1, c));
  } else if (Object* o = as_object(taint.underlying); o && o->kind == ObjectKind::Array) {
    items = o->elements;
  } else {
    interp.fail("value is not iterable", node.loc);
  }
  for (auto& item : items)
    if (!is_tainted(item))
      item = derive(interp, {&taint}, item, FlowStep{FlowKind::Read, "[]", node.loc});
  return items;
}

}  // namespace gadgetforge
