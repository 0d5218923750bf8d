#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "program_gen.h"
#include "support.h"

using namespace gadgetforge;
using namespace gadgetforge::testing;

namespace {

Sandbox gadget_package() {
  return Sandbox({{"index.mjs.txt", kGadgetIndex}, {"test/test.mjs.txt", kGadgetTest}});
}

std::vector<FlowKind> kinds(const std::vector<FlowStep>& flow) {
  std::vector<FlowKind> out;
  for (const auto& s : flow) out.push_back(s.kind);
  return out;
}

TaintValue* taint_of(const Value& v) {
  TaintValue* t = as_taint(v);
  REQUIRE(t != nullptr);
  return t;
}

}  // namespace

// ---- source injection ----

TEST_CASE("conditional assignment delays injection until the fallback is known") {
  Sandbox box = gadget_package();
  auto run = box.run_analyzed("test/test.mjs.txt");
  REQUIRE(run.outcome.status == RunStatus::Completed);
  TaintValue* bin = run.injected("bin");
  REQUIRE(bin);
  CHECK(std::get<std::string>(bin->underlying) == "./default.exe");
  CHECK(bin->type == TypeTag::Text);
  CHECK(bin->source.mode == InjectionMode::DelayedConditional);
  CHECK_FALSE(bin->pending);
  CHECK(bin->source.loc.line == 3);
  CHECK(bin->flow.front().kind == FlowKind::Read);
  CHECK(bin->flow.back().detail == "||");

  TaintValue* np = run.injected("newProcess");
  REQUIRE(np);
  CHECK(np->source.mode == InjectionMode::Immediate);
  CHECK(is_undefined(np->underlying));
}

TEST_CASE("own properties are not sources") {
  Sandbox box({{"main.mjs.txt", "let opts = {bin: 'x'};\nlet b = opts.bin;\nstd.console.log(b);"}});
  auto run = box.run_analyzed("main.mjs.txt");
  CHECK(run.analysis->injected().empty());
  CHECK(run.outcome.stdout_log == std::vector<std::string>{"x"});
}

TEST_CASE("ignore list keys are never injected") {
  Sandbox box({{"main.mjs.txt", "let o = {};\nlet t = o.toString;\nlet c = o.constructor;\n"
                                "let l = o.length;\nlet v = o.valueOf;\n"}});
  auto run = box.run_analyzed("main.mjs.txt");
  CHECK(run.analysis->injected().empty());
  for (const auto& e : run.analysis->lookup_log()) {
    CHECK(e.ignored);
    CHECK_FALSE(e.injected);
  }

  TaintConfig no_ignore;
  no_ignore.ignore.clear();
  auto without = box.run_analyzed("main.mjs.txt", no_ignore);
  CHECK(without.analysis->injected().size() == 4);
}

TEST_CASE("bare objects and intermediate prototypes do not inject") {
  Sandbox box({{"main.mjs.txt", "let b = std.obj.bare();\nlet x = b.missing;\n"
                                "let s = 'text';\nlet y = s.missing;\n"}});
  auto run = box.run_analyzed("main.mjs.txt");
  CHECK(run.analysis->injected().empty());
}

TEST_CASE("injection happens exactly on root-reaching misses") {
  const char* src = R"(
    let a = {k: 1, inner: {z: 2}};
    let r1 = a.k; let r2 = a.nope; let r3 = a.inner.z; let r4 = a.inner.q;
    let arr = [1, 2]; let r5 = arr[0]; let r6 = arr[5]; let r7 = arr.length;
    let b = std.obj.bare(); let r8 = b.x;
    let f = function() {}; let r9 = f.prop;
    let s = 'abc'; let r10 = s.nothing;
  )";
  Sandbox box({{"main.mjs.txt", src}});
  auto run = box.run_analyzed("main.mjs.txt");
  std::size_t predicted = 0;
  for (const auto& e : run.analysis->lookup_log()) {
    bool expect = e.found == LookupHit::NotFound && e.chain_hits_root && !e.ignored;
    CHECK(e.injected == expect);
    predicted += expect;
  }
  CHECK(predicted == run.analysis->injected().size());
  std::vector<std::string> props;
  for (TaintValue* t : run.analysis->injected()) props.push_back(t->source.property);
  CHECK(props == std::vector<std::string>{"nope", "q", "5", "prop"});
}

// ---- propagation ----

TEST_CASE("binary propagation") {
  Sandbox box = gadget_package();
  auto run = box.run_analyzed("test/test.mjs.txt");
  const auto& hits = run.analysis->hits();
  REQUIRE(hits.size() == 1);
  const SinkHit& hit = hits[0];
  CHECK(kinds(hit.flow) == std::vector<FlowKind>{FlowKind::Read, FlowKind::BinaryOp,
                                                 FlowKind::BinaryOp, FlowKind::SinkArg});
  CHECK(hit.flow[2].detail == "+");
  CHECK(hit.flow[2].loc.line == 5);

  Rig rig;
  TaintValue* t = rig.source("bin", std::string("./default.exe"), TypeTag::Text);
  Value r = rig.analysis.on_binary("+", t, std::string(" --flag"),
                                   std::string("./default.exe --flag"), rig.stmt(0));
  TaintValue* rt = taint_of(r);
  CHECK(std::get<std::string>(rt->underlying) == "./default.exe --flag");
  CHECK(rt->flow.back().kind == FlowKind::BinaryOp);
  CHECK(rt->flow.back().detail == "+");
  CHECK(rt->source.property == "bin");

  Value plain = rig.analysis.on_binary("+", 2.0, 3.0, 5.0, rig.stmt(0));
  CHECK(std::get<double>(plain) == 5.0);
}

TEST_CASE("comparison against a literal records a candidate") {
  Rig rig({}, "a === 'html';\n");
  TaintValue* t = rig.source("mode");
  Value r = rig.analysis.on_binary("===", t, std::string("html"), false, rig.stmt(0));
  TaintValue* rt = taint_of(r);
  CHECK(std::get<bool>(rt->underlying) == false);
  CHECK(rt->compared == t);
  auto it = rig.analysis.observed_candidates().find("mode");
  REQUIRE(it != rig.analysis.observed_candidates().end());
  CHECK(it->second == Candidate{std::string("html"), TypeTag::Text});
  CHECK(t->type == TypeTag::Unknown);
}

TEST_CASE("unary propagation") {
  Rig rig({}, "!a;\ntypeof a;\n-a;\n");
  TaintValue* u = rig.source("p");
  TaintValue* n = taint_of(rig.analysis.on_unary("!", u, true, rig.stmt(0)));
  CHECK(std::get<bool>(n->underlying) == true);
  CHECK(n->flow.back().kind == FlowKind::UnaryOp);

  TaintValue* text = rig.source("q", std::string(""), TypeTag::Text);
  TaintValue* ty = taint_of(rig.analysis.on_unary("typeof", text, std::string("string"), rig.stmt(1)));
  CHECK(std::get<std::string>(ty->underlying) == "string");
  CHECK(ty->typeof_of == text);

  Value neg = rig.analysis.on_unary("-", 5.0, -5.0, rig.stmt(2));
  CHECK(std::get<double>(neg) == -5.0);
}

// ---- conditionals ----

TEST_CASE("tainted conditionals are recorded and keep their natural outcome") {
  Sandbox box = gadget_package();
  auto run = box.run_analyzed("test/test.mjs.txt");
  const auto& records = run.analysis->records();
  REQUIRE(records.size() == 1);
  CHECK(records[0].properties == std::vector<std::string>{"newProcess"});
  CHECK_FALSE(records[0].natural_outcome);
  CHECK(records[0].loc.line == 6);

  Rig rig({}, "if (true) {}\n");
  CHECK(rig.analysis.on_condition_test(true, rig.stmt(0)));
  CHECK(rig.analysis.records().empty());
}

TEST_CASE("forced runs negate decisions on scheduled properties") {
  Sandbox box = gadget_package();
  TaintConfig forced;
  forced.mode = RunMode::Forced;
  forced.forced = {"newProcess"};
  auto run = box.run_analyzed("test/test.mjs.txt", forced);
  REQUIRE(run.outcome.status == RunStatus::Completed);
  // Test 1 now reaches the sink; test 2's own flag is a plain value.
  CHECK(run.outcome.effects_log.size() == 2);
  REQUIRE(run.analysis->hits().size() == 2);
  CHECK(run.analysis->hits()[0].call_stack.front().line == 4);

  TaintConfig other;
  other.mode = RunMode::Forced;
  other.forced = {"p"};
  Rig rig2(other, "if (a) {}\n");
  TaintValue* q = rig2.source("q");
  CHECK_FALSE(rig2.analysis.on_condition_test(q, rig2.stmt(0)));
  TaintValue* p = rig2.source("p");
  CHECK(rig2.analysis.on_condition_test(p, rig2.stmt(0)));
  CHECK(rig2.analysis.on_condition_test(p, rig2.stmt(0)));
}

TEST_CASE("forcing with a candidate adopts the compared value") {
  const char* src = R"(function pick(opts) {
  if (opts.mode === 'fast') { std.console.log('fast path', opts.mode); }
  else { std.console.log('slow path'); }
  if (opts.mode === 'fast') { std.console.log('again'); }
}
pick({});
)";
  Sandbox box({{"main.mjs.txt", src}});
  auto unintrusive = box.run_analyzed("main.mjs.txt");
  CHECK(unintrusive.outcome.stdout_log == std::vector<std::string>{"slow path"});

  TaintConfig forced;
  forced.mode = RunMode::Forced;
  forced.forced = {"mode"};
  auto run = box.run_analyzed("main.mjs.txt", forced);
  CHECK(run.outcome.stdout_log == std::vector<std::string>{"fast path fast", "again"});
  CHECK(run.analysis->applied_candidates().count("mode"));
}

// ---- wrapper operations ----

TEST_CASE("property access on a taint") {
  Rig rig;
  TaintValue* t = rig.source("name");
  Value child = rig.analysis.on_tainted_get(rig.interp, *t, "substring", rig.stmt(3));
  TaintValue* c = taint_of(child);
  Object* fn = as_object(c->underlying);
  REQUIRE(fn);
  CHECK(fn->callable());
  CHECK(t->type == TypeTag::Text);
  CHECK(c->source.property == "name");
  CHECK(c->id != t->id);

  TaintValue* list = rig.source("list");
  rig.analysis.on_tainted_get(rig.interp, *list, "push", rig.stmt(3));
  CHECK(list->type == TypeTag::Array);

  TaintValue* x = rig.source("x", std::string("x"), TypeTag::Text);
  CHECK(std::get<std::string>(rig.analysis.on_coerce(*x, CoerceHint::Text)) == "x");

  TaintValue* missing = rig.source("m");
  Value deeper = rig.analysis.on_tainted_get(rig.interp, *missing, "field", rig.stmt(3));
  CHECK(is_undefined(taint_of(deeper)->underlying));
  CHECK(taint_of(deeper)->sources.front().property == "m");
}

TEST_CASE("invoking and iterating taints") {
  Rig rig;
  TaintValue* t = rig.source("cb");
  Value r = rig.analysis.on_tainted_invoke(rig.interp, *t, Undefined{}, {}, rig.stmt(0));
  CHECK(is_tainted(r));

  TaintValue* items = rig.source("items");
  auto elems = rig.analysis.on_tainted_iterate(rig.interp, *items, rig.stmt(0));
  CHECK(elems.empty());
  CHECK(items->type == TypeTag::Array);

  Sandbox box({{"main.mjs.txt", R"(let o = {};
let n = 0;
for (let e of o.args) { n = n + 1; }
let s = o.name.substring(0, 2);
std.console.log(n, s === '');)"}});
  auto run = box.run_analyzed("main.mjs.txt");
  CHECK(run.outcome.status == RunStatus::Completed);
  CHECK(run.outcome.stdout_log == std::vector<std::string>{"0 true"});
}

TEST_CASE("built-in propagation") {
  Sandbox box({{"main.mjs.txt", R"(let o = {};
let v = o.value || 'b';
let j = ['a', v].join(',');
let p = ['a', 'b'].join(',');
let w = o.word || 'abc';
let s = w.slice(1);
let f = std.util.format('%s!', v);
std.console.log(j, p, s, f);
)"}});
  auto run = box.run_analyzed("main.mjs.txt");
  REQUIRE(run.outcome.status == RunStatus::Completed);
  CHECK(run.outcome.stdout_log == std::vector<std::string>{"a,b a,b bc b!"});

  Rig rig;
  TaintValue* b = rig.source("value", std::string("b"), TypeTag::Text);
  Object* arr = rig.interp.make_array({std::string("a"), b});
  Object* join = as_object(rig.interp.read_member_raw(arr, "join", rig.stmt(0)));
  std::vector<Value> args{std::string(",")};
  Value raw = rig.interp.call(join, arr, args, rig.stmt(0));
  Value wrapped = rig.analysis.on_call_post(join, arr, args, raw, rig.stmt(0));
  CHECK(std::get<std::string>(taint_of(wrapped)->underlying) == "a,b");
  CHECK(taint_of(wrapped)->flow.back().kind == FlowKind::BuiltinPropagation);

  Object* plain = rig.interp.make_array({std::string("a"), std::string("b")});
  Value plain_raw = rig.interp.call(join, plain, args, rig.stmt(0));
  CHECK(is_text(rig.analysis.on_call_post(join, plain, args, plain_raw, rig.stmt(0))));

  TaintValue* abc = rig.source("w", std::string("abc"), TypeTag::Text);
  Value slice = rig.interp.read_member_raw(std::string("abc"), "slice", rig.stmt(0));
  std::vector<Value> one{1.0};
  Value sliced = rig.interp.call(slice, abc, one, rig.stmt(0));
  Value wrapped_slice = rig.analysis.on_call_post(slice, abc, one, sliced, rig.stmt(0));
  CHECK(std::get<std::string>(taint_of(wrapped_slice)->underlying) == "bc");
}

// ---- unwrapping ----

TEST_CASE("deep unwrap") {
  Rig rig;
  TaintValue* cmd = rig.source("bin", std::string("./default.exe --flag"), TypeTag::Text);
  Unwrapped u = unwrap_deep(rig.interp, cmd);
  CHECK(std::get<std::string>(u.plain) == "./default.exe --flag");
  REQUIRE(u.taints.size() == 1);
  CHECK(u.taints[0].path.empty());

  TaintValue* two = rig.source("n", 2.0, TypeTag::Number);
  Object* inner = rig.interp.make_array({1.0, two});
  Object* outer = rig.interp.make_object();
  outer->set_own("a", inner);
  Unwrapped v = unwrap_deep(rig.interp, outer);
  Object* copy = as_object(v.plain);
  REQUIRE(copy);
  CHECK(copy != outer);
  Object* copy_inner = as_object(*copy->find_own("a"));
  CHECK(std::get<double>(copy_inner->elements[1]) == 2.0);
  REQUIRE(v.taints.size() == 1);
  CHECK(v.taints[0].path == std::vector<std::string>{"a", "1"});
  CHECK(is_tainted(inner->elements[1]));

  Unwrapped h = unwrap_deep(rig.interp, std::string("hello"));
  CHECK(std::get<std::string>(h.plain) == "hello");
  CHECK(h.taints.empty());

  Object* clean = rig.interp.make_object();
  clean->set_own("k", 1.0);
  CHECK(as_object(unwrap_deep(rig.interp, clean).plain) == clean);
}

namespace {

// Independent structural walk used as the unwrap oracle.
void oracle_walk(const Value& v, int depth, std::vector<std::string>& path,
                 std::vector<std::vector<std::string>>& out) {
  if (TaintValue* t = as_taint(v)) {
    out.push_back(path);
    oracle_walk(t->underlying, depth, path, out);
    return;
  }
  Object* o = as_object(v);
  if (!o || depth == 0 || o->callable()) return;
  for (std::size_t i = 0; i < o->elements.size(); ++i) {
    path.push_back(std::to_string(i));
    oracle_walk(o->elements[i], depth - 1, path, out);
    path.pop_back();
  }
  for (const auto& [k, pv] : o->props) {
    path.push_back(k);
    oracle_walk(pv, depth - 1, path, out);
    path.pop_back();
  }
}

}  // namespace

TEST_CASE("unwrap finds what a structural walk finds, and is idempotent") {
  Rig rig;
  std::mt19937 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::function<Value(int)> build = [&](int depth) -> Value {
      int pick = static_cast<int>(rng() % 6);
      if (depth == 0 || pick < 2) {
        if (rng() % 3 == 0)
          return rig.source("p" + std::to_string(rng() % 5), std::string("v"), TypeTag::Text);
        return static_cast<double>(rng() % 10);
      }
      if (pick < 4) {
        std::vector<Value> elems;
        for (int i = 0; i < static_cast<int>(rng() % 4); ++i) elems.push_back(build(depth - 1));
        return rig.interp.make_array(std::move(elems));
      }
      Object* o = rig.interp.make_object();
      for (int i = 0; i < static_cast<int>(rng() % 4); ++i)
        o->set_own("k" + std::to_string(i), build(depth - 1));
      return o;
    };
    Value v = build(6);
    std::vector<std::vector<std::string>> expected;
    std::vector<std::string> path;
    oracle_walk(v, kDefaultUnwrapDepth, path, expected);
    Unwrapped u = unwrap_deep(rig.interp, v);
    std::vector<std::vector<std::string>> got;
    for (const auto& f : u.taints) got.push_back(f.path);
    CHECK(got == expected);
    CHECK(find_taints(u.plain).empty());
    CHECK(unwrap_deep(rig.interp, u.plain).taints.empty());
  }
}

// ---- type inference ----

TEST_CASE("type inference heuristics") {
  // rule 1: conditional assignment adopts the fallback's type and value
  {
    Sandbox box({{"main.mjs.txt", "let o = {};\nlet n = o.count || 3;\nlet l = o.list ?? [];\n"}});
    auto run = box.run_analyzed("main.mjs.txt");
    CHECK(run.injected("count")->type == TypeTag::Number);
    CHECK(std::get<double>(run.injected("count")->underlying) == 3.0);
    CHECK(run.injected("list")->type == TypeTag::Array);
  }
  // rule 2: `+` with a text operand
  {
    Rig rig;
    TaintValue* t = rig.source("p");
    rig.analysis.on_binary("+", t, std::string("a"), std::string("a"), rig.stmt(0));
    CHECK(t->type == TypeTag::Text);
    TaintValue* n = rig.source("q");
    rig.analysis.on_binary("+", n, 1.0, 1.0, rig.stmt(0));
    CHECK(n->type == TypeTag::Unknown);
  }
  // rule 3: known methods
  {
    Rig rig;
    TaintValue* s = rig.source("s");
    rig.analysis.on_tainted_get(rig.interp, *s, "substring", rig.stmt(3));
    CHECK(s->type == TypeTag::Text);
    TaintValue* a = rig.source("a");
    rig.analysis.on_tainted_get(rig.interp, *a, "push", rig.stmt(3));
    CHECK(a->type == TypeTag::Array);
    // concrete types are not overwritten by a later method name
    rig.analysis.on_tainted_get(rig.interp, *a, "substring", rig.stmt(3));
    CHECK(a->type == TypeTag::Array);
  }
  // rule 4: coercion hints
  {
    Rig rig;
    TaintValue* n = rig.source("n");
    CHECK(std::get<double>(rig.analysis.on_coerce(*n, CoerceHint::Number)) == 0.0);
    CHECK(n->type == TypeTag::Number);
    TaintValue* b = rig.source("b");
    CHECK(std::get<bool>(rig.analysis.on_coerce(*b, CoerceHint::Boolean)) == false);
    CHECK(b->type == TypeTag::Boolean);
    TaintValue* t = rig.source("t");
    CHECK(std::get<std::string>(rig.analysis.on_coerce(*t, CoerceHint::Text)).empty());
    CHECK(t->type == TypeTag::Text);
    TaintValue* d = rig.source("d");
    rig.analysis.on_coerce(*d, CoerceHint::Default);
    CHECK(d->type == TypeTag::Unknown);
  }
  // rule 5: typeof comparisons in a forced run
  {
    Sandbox box({{"main.mjs.txt", R"(let o = {};
let opt = o.options;
if (typeof opt === 'object') { std.console.log('object branch', typeof opt); }
)"}});
    TaintConfig forced;
    forced.mode = RunMode::Forced;
    forced.forced = {"options"};
    auto run = box.run_analyzed("main.mjs.txt", forced);
    CHECK(run.outcome.stdout_log == std::vector<std::string>{"object branch object"});
    CHECK(run.injected("options")->type == TypeTag::Object);
  }
  // rule 6: comparison candidates in a forced run
  {
    Sandbox box({{"main.mjs.txt", R"(let o = {};
let m = o.mode;
if (m === 'fast') { std.console.log(m); }
)"}});
    TaintConfig forced;
    forced.mode = RunMode::Forced;
    forced.forced = {"mode"};
    auto run = box.run_analyzed("main.mjs.txt", forced);
    CHECK(run.outcome.stdout_log == std::vector<std::string>{"fast"});
    TaintValue* m = run.injected("mode");
    CHECK(m->type == TypeTag::Text);
    CHECK(std::get<std::string>(m->underlying) == "fast");
  }
  // unknown defaults to text when unwrapped
  {
    Rig rig;
    TaintValue* u = rig.source("u");
    CHECK(std::get<std::string>(unwrap_deep(rig.interp, u).plain).empty());
  }
}

TEST_CASE("type inference never reverts and is idempotent") {
  Rig rig;
  for (TypeTag start : {TypeTag::Unknown, TypeTag::Text, TypeTag::Array}) {
    TaintValue* t = rig.source("p", Undefined{}, start);
    rig.analysis.on_coerce(*t, CoerceHint::Number);
    TypeTag after_once = t->type;
    rig.analysis.on_coerce(*t, CoerceHint::Number);
    CHECK(t->type == after_once);
    CHECK(t->type != TypeTag::Unknown);
  }
}

TEST_CASE("flows start with a read at the source") {
  Sandbox box({{"main.mjs.txt", R"(let o = {};
let a = o.a || 'x';
let b = a + o.b;
let c = [b, 'q'].join('/');
let d = !o.c;
std.child_process.exec(c + d);
)"}});
  auto run = box.run_analyzed("main.mjs.txt");
  REQUIRE(run.outcome.status == RunStatus::Completed);
  for (TaintValue* t : run.analysis->injected()) {
    REQUIRE_FALSE(t->flow.empty());
    CHECK(t->flow.front().kind == FlowKind::Read);
    CHECK(t->flow.front().loc == t->source.loc);
  }
  REQUIRE(run.analysis->hits().size() == 1);
  const SinkHit& hit = run.analysis->hits()[0];
  std::vector<std::string> props;
  for (const auto& s : hit.sources) props.push_back(s.property);
  CHECK(props == std::vector<std::string>{"a", "b", "c"});
  CHECK(hit.flow.front().kind == FlowKind::Read);
  CHECK(hit.flow.back().kind == FlowKind::SinkArg);
}

TEST_CASE("taint-free programs behave as without analysis") {
  for (unsigned seed = 0; seed < 200; ++seed) {
    TaintFreeProgram gen(seed);
    std::string src = gen.generate();
    Sandbox box({{"main.mjs.txt", src}});
    RunOutcome plain = box.run_plain("main.mjs.txt");
    INFO(src);
    INFO(plain.error);
    REQUIRE(plain.status == RunStatus::Completed);
    auto analyzed = box.run_analyzed("main.mjs.txt");
    CHECK(analyzed.analysis->injected().empty());
    CHECK(analyzed.outcome.same_observable(plain));
  }
}
