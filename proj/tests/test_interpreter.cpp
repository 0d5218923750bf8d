#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gadgetforge/parser.h"
#include "support.h"

using namespace gadgetforge;
using namespace gadgetforge::testing;

namespace {

// Returns every raw result unchanged, but through the override path.
class PassThroughHooks : public Hooks {
 public:
  int calls = 0;
  Value on_property_read(const Value&, const std::string&, const LookupResult& raw,
                         const AstNode&) override {
    ++calls;
    return raw.value;
  }
  Value on_binary(std::string_view, const Value&, const Value&, Value raw,
                  const AstNode&) override {
    ++calls;
    return raw;
  }
  Value on_unary(std::string_view, const Value&, Value raw, const AstNode&) override {
    ++calls;
    return raw;
  }
  bool on_condition_test(const Value& v, const AstNode& node) override {
    ++calls;
    return Hooks::on_condition_test(v, node);
  }
};

std::vector<std::string> lines(const RunOutcome& o) { return o.stdout_log; }

}  // namespace

TEST_CASE("listing runs plainly and logs the exec intent") {
  Sandbox box({{"index.mjs.txt", kGadgetIndex}, {"test/test.mjs.txt", kGadgetTest}});
  RunOutcome out = box.run_plain("test/test.mjs.txt");
  REQUIRE(out.status == RunStatus::Completed);
  REQUIRE(out.effects_log.size() == 1);
  CHECK(out.effects_log[0].module == "child_process");
  CHECK(out.effects_log[0].name == "execSync");
  CHECK(out.effects_log[0].text == "./default.exe --flag");
  CHECK(out.effects_log[0].category == SinkCategory::ACI);
}

TEST_CASE("console output") {
  CHECK(lines(run_source("std.console.log(1+2);")) == std::vector<std::string>{"3"});
  CHECK(lines(run_source("std.console.log('a', 1.5, true, null, undefined);")) ==
        std::vector<std::string>{"a 1.5 true null undefined"});
  CHECK(lines(run_source("std.console.log({a: [1, 'x'], b: {}});")) ==
        std::vector<std::string>{"{a: [1, \"x\"], b: {}}"});
}

TEST_CASE("step budget") {
  RunOutcome out = run_source("while(true){}", 10'000);
  CHECK(out.status == RunStatus::BudgetExceeded);
  CHECK(out.steps_used == 10'000);
  RunOutcome ok = run_source("let x = 1;", 10'000);
  CHECK(ok.status == RunStatus::Completed);
  CHECK(ok.steps_used < 10'000);
}

TEST_CASE("lookup reports where a key was found") {
  PackageFiles files(std::map<std::string, std::string>{});
  HostEnvironment host(files, {});
  Hooks hooks;
  Interpreter interp(host, hooks);

  Object* a = interp.make_object();
  a->set_own("a", 1.0);
  LookupResult r = interp.lookup_property(*a, "a");
  CHECK(std::get<double>(r.value) == 1.0);
  CHECK(r.found == LookupHit::Own);
  CHECK(r.chain_hits_root);

  Object* empty = interp.make_object();
  r = interp.lookup_property(*empty, "bin");
  CHECK(is_undefined(r.value));
  CHECK(r.found == LookupHit::NotFound);
  CHECK(r.chain_hits_root);

  Object* bare = interp.make_bare_object();
  r = interp.lookup_property(*bare, "x");
  CHECK(r.found == LookupHit::NotFound);
  CHECK_FALSE(r.chain_hits_root);

  Object* child = interp.heap().make_object(a);
  r = interp.lookup_property(*child, "a");
  CHECK(r.found == LookupHit::Prototype);
  CHECK(r.depth == 1);
  CHECK(r.holder == a);
}

TEST_CASE("bare objects from the host have no root prototype") {
  auto out = run_source("let o = std.obj.bare(); std.console.log(typeof o.x, o.x === undefined);");
  CHECK(lines(out) == std::vector<std::string>{"undefined true"});
}

TEST_CASE("coercion") {
  PackageFiles files(std::map<std::string, std::string>{});
  HostEnvironment host(files, {});
  Hooks hooks;
  Interpreter interp(host, hooks);
  CHECK_FALSE(truthy(Undefined{}));
  Object* arr = interp.make_array({std::string("a"), std::string("b")});
  CHECK(interp.to_text(arr) == "a,b");
  TaintValue* t = interp.heap().make_taint();
  t->underlying = std::string("./default.exe");
  CHECK(interp.to_text(t) == "./default.exe");
  CHECK(interp.to_number(std::string(" 12 ")) == 12);
  CHECK(std::isnan(interp.to_number(std::string("0x10"))));
  CHECK(interp.to_number(Null{}) == 0);
  CHECK(std::isnan(interp.to_number(Undefined{})));
}

TEST_CASE("operators") {
  auto out = run_source(R"(
    std.console.log(1 + '2', '3' * 2, 7 % 4, 10 / 4, -'5');
    std.console.log(null == undefined, 0 == '', 1 == true, '1' === 1, null === undefined);
    std.console.log('b' > 'a', 2 < 10, '2' < '10', undefined < 1);
    std.console.log(typeof 1, typeof 'a', typeof null, typeof {}, typeof [], typeof std.console.log);
    std.console.log(0 || 'x', 1 && 'y', null ?? 'z', 0 ?? 'w', !'');
    std.console.log([1, 2] + '', {} + '', true ? 'yes' : 'no');
  )");
  REQUIRE(out.status == RunStatus::Completed);
  CHECK(lines(out) == std::vector<std::string>{
                          "12 6 3 2.5 -5",
                          "true true true false false",
                          "true true false false",
                          "number string object object object function",
                          "x y z 0 true",
                          "1,2 [object Object] yes",
                      });
}

TEST_CASE("closures, loops and methods") {
  auto out = run_source(R"(
    function counter() {
      let n = 0;
      return function() { n = n + 1; return n; };
    }
    let c = counter();
    c(); c();
    std.console.log(c());
    let acc = [];
    for (let i = 0; i < 3; i = i + 1) { acc.push(i * 2); }
    for (let v of ['p', 'q']) { acc.push(v); }
    std.console.log(acc.join('-'), acc.length);
    let obj = {name: 'n', greet: function(x) { return this.name + x; }};
    std.console.log(obj.greet('!'));
    let s = 'Hello, World';
    std.console.log(s.substring(0, 5), s.slice(-5), s.split(', ').length, s.replace('World', 'you'));
    std.console.log(s.toUpperCase(), s.indexOf('W'), s.length, s[1]);
    std.console.log([3, 4].map(function(x) { return x * x; }).join(','));
    let o = {};
    o['k' + 1] = 5;
    std.console.log(o.k1, std.obj.keys(o).join());
    let a = [1];
    a[3] = 4;
    std.console.log(a.length, a.join());
  )");
  REQUIRE(out.status == RunStatus::Completed);
  CHECK(lines(out) == std::vector<std::string>{
                          "3",
                          "0-2-4-p-q 5",
                          "n!",
                          "Hello World 2 Hello, you",
                          "HELLO, WORLD 7 12 e",
                          "9,16",
                          "5 k1",
                          "4 1,,,4",
                      });
}

TEST_CASE("uncaught errors carry a location") {
  auto out = run_source("let x = 1;\nlet y = x();");
  CHECK(out.status == RunStatus::UncaughtError);
  REQUIRE(out.error_loc.has_value());
  CHECK(out.error_loc->line == 2);
  CHECK(out.error.find("x is not a function") != std::string::npos);

  auto undef = run_source("let o;\no.k;");
  CHECK(undef.status == RunStatus::UncaughtError);
  CHECK(undef.error.find("of undefined") != std::string::npos);

  auto deep = run_source("function f() { return f(); }\nf();");
  CHECK(deep.status == RunStatus::UncaughtError);
  CHECK(deep.error.find("call stack") != std::string::npos);
}

TEST_CASE("modules") {
  Sandbox box({{"main.mjs.txt",
                "let a = require('./lib/a.mjs.txt');\nlet b = require('./lib/a.mjs.txt');\n"
                "std.console.log(a.v, a === b);"},
               {"lib/a.mjs.txt", "std.console.log('loading');\nexport {v: 7};"}});
  auto out = box.run_plain("main.mjs.txt");
  CHECK(lines(out) == std::vector<std::string>{"loading", "7 true"});

  Sandbox escape({{"main.mjs.txt", "require('../outside.mjs.txt');"}});
  auto bad = escape.run_plain("main.mjs.txt");
  CHECK(bad.status == RunStatus::UncaughtError);

  CHECK(resolve_package_path("test/t.mjs.txt", "../index.mjs.txt") == "index.mjs.txt");
  CHECK(resolve_package_path("a/b/c.mjs.txt", "./d.mjs.txt") == "a/b/d.mjs.txt");
  CHECK(resolve_package_path("a.mjs.txt", "lib/x.mjs.txt") == "lib/x.mjs.txt");
  CHECK_FALSE(resolve_package_path("a.mjs.txt", "../x").has_value());
  CHECK_FALSE(resolve_package_path("a.mjs.txt", "/etc/passwd").has_value());
}

TEST_CASE("host code evaluation") {
  auto out = run_source(R"(std.vm.evalCode("std.console.log(\"PWNED\");");
    let f = std.vm.makeFunction('a', 'b', 'return a + b;');
    std.console.log(f(2, 3));
    std.console.log(std.json.stringify({a: [1, 'x', true], b: null, c: 1.5}));
    std.console.log(std.json.parse('{"k": [1, 2]}').k.length);
    std.console.log(std.util.format('%s-%d', 'a', 4, 'extra'));)");
  REQUIRE(out.status == RunStatus::Completed);
  CHECK(lines(out) == std::vector<std::string>{
                          "PWNED", "5", "{\"a\":[1,\"x\",true],\"b\":null,\"c\":1.5}", "2",
                          "a-4 extra"});
  REQUIRE(out.effects_log.size() == 2);
  CHECK(out.effects_log[0].category == SinkCategory::ACE);
  CHECK(out.effects_log[1].name == "makeFunction");
}

TEST_CASE("hook transparency") {
  const char* programs[] = {
      kGadgetIndex,
      "let a = [1, 2, 3]; let s = 0; for (let x of a) { s = s + x; } std.console.log(s);",
      "let o = {k: 'v'}; if (o.k === 'v') { std.console.log(o.k + '!'); } else { std.console.log('no'); }",
      "function f(n) { return n <= 1 ? 1 : n * f(n - 1); } std.console.log(f(10));",
  };
  for (const char* src : programs) {
    Sandbox box({{"main.mjs.txt", src}});
    RunOutcome plain = box.run_plain("main.mjs.txt");
    PassThroughHooks hooks;
    RunOutcome hooked = box.run_with(hooks, "main.mjs.txt");
    CHECK(plain.same_observable(hooked));
    CHECK(plain.steps_used == hooked.steps_used);
  }
}

TEST_CASE("budget monotonicity") {
  const char* src =
      "let s = ''; for (let i = 0; i < 20; i = i + 1) { s = s + i; std.console.log(s); }";
  RunOutcome reference = run_source(src, 1'000'000);
  REQUIRE(reference.status == RunStatus::Completed);
  for (std::uint64_t budget = reference.steps_used; budget < reference.steps_used + 50; budget += 7) {
    RunOutcome o = run_source(src, budget);
    REQUIRE(o.status == RunStatus::Completed);
    CHECK(o.stdout_log == reference.stdout_log);
  }
  RunOutcome short_run = run_source(src, reference.steps_used - 1);
  CHECK(short_run.status == RunStatus::BudgetExceeded);
}

TEST_CASE("chain walk matches an explicit scan") {
  PackageFiles files(std::map<std::string, std::string>{});
  HostEnvironment host(files, {});
  Hooks hooks;
  Interpreter interp(host, hooks);
  std::mt19937 rng(7);
  const std::vector<std::string> keys = {"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 500; ++trial) {
    // A random forest of objects whose parents always come earlier, so every
    // chain is acyclic.
    std::vector<Object*> objs;
    int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      Object* proto = nullptr;
      int choice = static_cast<int>(rng() % (objs.size() + 2));
      if (choice < static_cast<int>(objs.size())) proto = objs[choice];
      else if (choice == static_cast<int>(objs.size())) proto = interp.root_prototype();
      Object* o = interp.heap().make_object(proto);
      for (const auto& k : keys)
        if (rng() % 4 == 0) o->set_own(k, static_cast<double>(i));
      objs.push_back(o);
    }
    for (Object* o : objs) {
      std::vector<const Object*> chain;
      for (const Object* p = o; p; p = p->proto) chain.push_back(p);
      bool has_root = std::find(chain.begin(), chain.end(), interp.root_prototype()) != chain.end();
      for (const auto& k : keys) {
        LookupResult r = interp.lookup_property(*o, k);
        int expected_depth = -1;
        for (std::size_t d = 0; d < chain.size(); ++d)
          if (chain[d]->find_own(k)) {
            expected_depth = static_cast<int>(d);
            break;
          }
        CHECK(r.chain_hits_root == has_root);
        if (expected_depth < 0) {
          CHECK(r.found == LookupHit::NotFound);
          CHECK(is_undefined(r.value));
        } else {
          CHECK(r.depth == expected_depth);
          CHECK(r.found == (expected_depth == 0 ? LookupHit::Own : LookupHit::Prototype));
          CHECK(strict_equals(r.value, *chain[expected_depth]->find_own(k)));
        }
      }
    }
  }
}
