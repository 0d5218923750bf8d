// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <unistd.h>

#include <json.hpp>

#include "gadgetforge/pipeline.h"
#include "gadgetforge/sarif.h"
#include "gadgetforge/store.h"
#include "program_gen.h"
#include "support.h"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gadgetforge;
using namespace gadgetforge::testing;

namespace {

constexpr double kRunningExampleSeconds = 1.0;
constexpr int kGeneratedPrograms = 200;
constexpr int kDeployMaxRuns = 4;
constexpr std::size_t kMinGadgets = 6;
constexpr int kDeterminismThreads = 4;

// Collects failed expectations for one criterion.
struct Check {
  std::vector<std::string> failures;
  bool expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
    return ok;
  }
};

fs::path corpus(const std::string& name) { return fs::path(GADGETFORGE_CORPUS_DIR) / name; }

std::vector<std::string> corpus_packages() {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(GADGETFORGE_CORPUS_DIR))
    if (fs::exists(e.path() / "package.json")) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

struct CommandRun {
  std::string package;
  std::string target;
};

std::vector<CommandRun> corpus_commands(const AnalysisContext& ctx) {
  std::vector<CommandRun> out;
  for (const auto& name : corpus_packages()) {
    PackageManifest m;
    try {
      m = PackageManifest::load(corpus(name));
    } catch (const std::exception&) {
      continue;
    }
    for (const auto& c : ctx.strategy.runnable(m))
      if (auto target = command_target(c)) out.push_back({name, *target});
  }
  return out;
}

RunOutcome run_plain(PackageFiles& files, const std::string& target, const AnalysisContext& ctx) {
  HostEnvironment host(files, ctx.special_table);
  Hooks hooks;
  Interpreter interp(host, hooks, ctx.step_budget);
  return interp.run_module(target);
}

struct AnalyzedRun {
  RunOutcome outcome;
  std::size_t injected = 0;
};

AnalyzedRun run_unintrusive(PackageFiles& files, const std::string& target,
                            const AnalysisContext& ctx) {
  GadgetAnalysis analysis(unintrusive_plan().config());
  HostEnvironment host(files, ctx.special_table, &analysis);
  Interpreter interp(host, analysis, ctx.step_budget);
  AnalyzedRun out;
  out.outcome = interp.run_module(target);
  out.injected = analysis.injected().size();
  return out;
}

// ---- criteria ----

void running_example(Check& c) {
  auto start = std::chrono::steady_clock::now();
  PackageReport r = analyze_package(corpus("gadget-example"), AnalysisContext{});
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(seconds < kRunningExampleSeconds, "took " + std::to_string(seconds) + " s");
  if (!c.expect(r.hits.size() == 1, "expected exactly one hit, got " + std::to_string(r.hits.size())))
    return;
  const SinkHit& hit = r.hits[0].hit;
  c.expect(hit.mode == SinkMode::Standard, "mode is not standard");
  c.expect(hit.category == SinkCategory::ACI, "category is not ACI");
  c.expect(hit.sink == "child_process.execSync", "sink is " + hit.sink);
  c.expect(!hit.sources.empty() && hit.sources.front().property == "bin", "source is not bin");
  bool read_bin = !hit.flow.empty() && hit.flow.front().kind == FlowKind::Read &&
                  hit.flow.front().detail == "bin" && hit.flow.front().loc.line == 3;
  c.expect(read_bin, "flow does not start with the opts.bin read on line 3");
  bool plus = std::any_of(hit.flow.begin(), hit.flow.end(), [](const FlowStep& s) {
    return s.kind == FlowKind::BinaryOp && s.detail == "+";
  });
  c.expect(plus, "flow has no BinaryOp +");
  c.expect(r.runs.size() == 2, "runs = " + std::to_string(r.runs.size()));
  bool forced_origin = false;
  for (const auto& run : r.runs)
    if (run.plan.mode == RunMode::Forced)
      for (const auto& o : run.hits)
        forced_origin = forced_origin || (o.origin.file == "test/test.mjs.txt" && o.origin.line == 4);
  c.expect(forced_origin, "no forced-run hit originating at test line 4");
}

void delayed_injection(Check& c) {
  Sandbox box({{"index.mjs.txt", kGadgetIndex}, {"test/test.mjs.txt", kGadgetTest}});
  auto run = box.run_analyzed("test/test.mjs.txt");
  TaintValue* bin = run.injected("bin");
  if (!c.expect(bin != nullptr, "bin was not injected")) return;
  auto* text = std::get_if<std::string>(&bin->underlying);
  c.expect(text && *text == "./default.exe", "underlying value of bin is not ./default.exe");
  c.expect(bin->source.mode == InjectionMode::DelayedConditional, "bin was injected immediately");
  RunOutcome plain = box.run_plain("test/test.mjs.txt");
  c.expect(run.outcome.effects_log == plain.effects_log, "unintrusive effects differ from a plain run");
}

void non_interference(Check& c) {
  AnalysisContext ctx;
  std::size_t compared = 0;
  for (const auto& cmd : corpus_commands(ctx)) {
    PackageFiles files(corpus(cmd.package));
    RunOutcome plain = run_plain(files, cmd.target, ctx);
    AnalyzedRun analyzed = run_unintrusive(files, cmd.target, ctx);
    c.expect(plain.same_observable(analyzed.outcome), cmd.package + " " + cmd.target + " differs");
    ++compared;
  }
  c.expect(compared > 0, "no corpus commands");
  for (int seed = 0; seed < kGeneratedPrograms; ++seed) {
    TaintFreeProgram gen(static_cast<unsigned>(seed) + 1000);
    PackageFiles files(std::map<std::string, std::string>{{"main.mjs.txt", gen.generate()}});
    RunOutcome plain = run_plain(files, "main.mjs.txt", ctx);
    AnalyzedRun analyzed = run_unintrusive(files, "main.mjs.txt", ctx);
    std::string tag = "generated program " + std::to_string(seed);
    c.expect(plain.status == RunStatus::Completed, tag + " did not complete");
    c.expect(analyzed.injected == 0, tag + " injected a source");
    c.expect(plain.same_observable(analyzed.outcome), tag + " differs");
  }
}

void special_subsets(Check& c) {
  std::vector<SpecialRow> table = load_special_table(GADGETFORGE_DATA_DIR "/special_sinks.json");
  c.expect(table.size() == default_special_table().size(), "shipped table size differs");
  struct Case {
    const char* options;
    const char* expected;  // satisfied group, or "" for no hit
  };
  const Case cases[] = {
      {"{}", "shell,env"},
      {"{env: {}}", "shell,NODE_OPTIONS"},
      {"{shell: false}", ""},
      {"{shell: false, env: {}}", ""},
  };
  AnalysisContext ctx;
  ctx.special_table = table;
  PackageReport corpus_report = analyze_package(corpus("spawn-special"), ctx);
  bool corpus_hit = std::any_of(corpus_report.hits.begin(), corpus_report.hits.end(), [](const HitRecord& h) {
    return h.hit.mode == SinkMode::Special && h.hit.sink == "child_process.spawn" && h.hit.sources.empty();
  });
  c.expect(corpus_hit, "spawn-special has no sourceless special hit");
  for (const auto& k : cases) {
    Sandbox box({{"main.mjs.txt", std::string("std.child_process.spawn('node', ['a.mjs.txt'], ") +
                                      k.options + ");\n"}});
    box.table = table;
    auto run = box.run_analyzed("main.mjs.txt");
    const auto& hits = run.analysis->hits();
    std::string label = std::string("options ") + k.options;
    if (*k.expected == '\0') {
      c.expect(hits.empty(), label + " should not hit");
      continue;
    }
    if (!c.expect(hits.size() == 1, label + " should hit once")) continue;
    c.expect(hits[0].mode == SinkMode::Special, label + " hit is not special");
    c.expect(hits[0].arg_path == k.expected, label + " satisfied " + hits[0].arg_path);
    c.expect(hits[0].sources.empty(), label + " hit has sources");
  }
}

void name_matched(Check& c) {
  PackageReport r = analyze_package(corpus("mail-transport"), AnalysisContext{});
  bool found = false;
  for (const auto& h : r.hits)
    if (h.hit.mode == SinkMode::NameMatched && h.hit.sink == "_spawn")
      for (const auto& s : h.hit.sources) found = found || s.property == "path";
  c.expect(found, "no name-matched _spawn hit with source path");

  std::vector<Pollution> pollutions;
  for (const char* p : {"sendmail=1", "path=X", "args=[\"-e\",\"M\"]"}) pollutions.push_back(parse_pollution(p));
  bool spawned = false;
  for (const auto& run : verify_with_pollution(corpus("mail-transport"), pollutions, "", AnalysisContext{}))
    for (const auto& e : run.outcome.effects_log)
      spawned = spawned || (e.module == "child_process" && e.name == "spawn" &&
                            e.text.find('X') != std::string::npos &&
                            e.text.find('M') != std::string::npos);
  c.expect(spawned, "verify did not spawn X with M");
}

void scheduler_expansion(Check& c) {
  AnalysisContext ctx;
  PackageReport r = analyze_package(corpus("deploy-tool"), ctx);
  bool planned = std::any_of(r.hits.begin(), r.hits.end(), [](const HitRecord& h) {
    return h.forced == std::set<std::string>{"remote", "useShell"};
  });
  c.expect(planned, "no hit under plan {remote, useShell}");
  c.expect(r.runs.size() <= static_cast<std::size_t>(kDeployMaxRuns),
           "runs = " + std::to_string(r.runs.size()));
  ctx.max_runs = 1;
  c.expect(analyze_package(corpus("deploy-tool"), ctx).hits.empty(), "hits with maxRuns = 1");
}

TypeTag injected_type(const std::string& src, const std::string& property, TaintConfig config = {}) {
  Sandbox box({{"main.mjs.txt", src}});
  auto run = box.run_analyzed("main.mjs.txt", std::move(config));
  TaintValue* t = run.injected(property);
  return t ? t->type : TypeTag::Unknown;
}

void type_inference(Check& c) {
  c.expect(injected_type("let o = {};\nlet n = o.count || 3;\n", "count") == TypeTag::Number,
           "rule 1: fallback number");
  c.expect(injected_type("let o = {};\nlet l = o.list ?? [];\n", "list") == TypeTag::Array,
           "rule 1: fallback array");
  {
    Rig rig;
    TaintValue* t = rig.source("p");
    rig.analysis.on_binary("+", t, std::string("a"), std::string("a"), rig.stmt(0));
    c.expect(t->type == TypeTag::Text, "rule 2: + with text");
  }
  {
    Rig rig;
    TaintValue* s = rig.source("s");
    rig.analysis.on_tainted_get(rig.interp, *s, "substring", rig.stmt(3));
    c.expect(s->type == TypeTag::Text, "rule 3: substring");
    TaintValue* a = rig.source("a");
    rig.analysis.on_tainted_get(rig.interp, *a, "push", rig.stmt(3));
    c.expect(a->type == TypeTag::Array, "rule 3: push");
  }
  {
    Rig rig;
    TaintValue* n = rig.source("n");
    rig.analysis.on_coerce(*n, CoerceHint::Number);
    c.expect(n->type == TypeTag::Number, "rule 4: number hint");
    TaintValue* b = rig.source("b");
    rig.analysis.on_coerce(*b, CoerceHint::Boolean);
    c.expect(b->type == TypeTag::Boolean, "rule 4: boolean hint");
  }
  TaintConfig forced_options;
  forced_options.mode = RunMode::Forced;
  forced_options.forced = {"options"};
  c.expect(injected_type("let o = {};\nlet x = o.options;\nif (typeof x === 'object') {}\n", "options",
                         forced_options) == TypeTag::Object,
           "rule 5: typeof comparison");
  TaintConfig forced_mode;
  forced_mode.mode = RunMode::Forced;
  forced_mode.forced = {"mode"};
  c.expect(injected_type("let o = {};\nlet m = o.mode;\nif (m === 'fast') {}\n", "mode", forced_mode) ==
               TypeTag::Text,
           "rule 6: comparison candidate");
  {
    Rig rig;
    TaintValue* u = rig.source("u");
    Unwrapped unwrapped = unwrap_deep(rig.interp, u);
    auto* text = std::get_if<std::string>(&unwrapped.plain);
    c.expect(text && text->empty(), "unknown does not unwrap to empty text");
  }
}

void sarif_stability(Check& c) {
  AnalysisContext ctx;
  for (const auto& name : corpus_packages()) {
    json first = export_sarif(analyze_package(corpus(name), ctx));
    auto problems = validate_sarif(first);
    c.expect(problems.empty(), name + ": " + (problems.empty() ? "" : problems.front()));
    json second = export_sarif(analyze_package(corpus(name), ctx));
    c.expect(first.dump(2) == second.dump(2), name + ": SARIF differs between analyses");
  }
}

void oracle_agreement(Check& c) {
  AnalysisContext ctx;
  std::size_t gadgets = 0, agreed = 0;
  for (const auto& name : corpus_packages()) {
    fs::path oracle_path = corpus(name) / "gadget.json";
    if (!fs::exists(oracle_path)) continue;
    ++gadgets;
    json oracle = json::parse(std::ifstream(oracle_path));
    PackageReport r = analyze_package(corpus(name), ctx);
    auto category = sink_category_from_string(oracle["category"].get<std::string>());
    auto mode = sink_mode_from_string(oracle["mode"].get<std::string>());
    bool hit_ok = std::any_of(r.hits.begin(), r.hits.end(), [&](const HitRecord& h) {
      if (h.hit.category != category || h.hit.mode != mode || h.hit.sink != oracle["sink"]) return false;
      if (oracle["sourceProperty"].is_null()) return h.hit.sources.empty();
      return std::any_of(h.hit.sources.begin(), h.hit.sources.end(), [&](const SourceRecord& s) {
        return s.property == oracle["sourceProperty"];
      });
    });
    c.expect(hit_ok, name + ": expected hit missing");

    std::vector<Pollution> pollutions;
    for (const auto& p : oracle["pollutions"]) pollutions.push_back(parse_pollution(p.get<std::string>()));
    bool fired = false;
    for (const auto& run : verify_with_pollution(corpus(name), pollutions, "", ctx))
      for (const auto& e : run.outcome.effects_log) {
        if (e.module + "." + e.name != oracle["effect"]["sink"]) continue;
        bool all = true;
        for (const auto& marker : oracle["effect"]["contains"])
          all = all && e.text.find(marker.get<std::string>()) != std::string::npos;
        fired = fired || all;
      }
    c.expect(fired, name + ": verify did not produce the expected effect");
    if (hit_ok && fired) ++agreed;
  }
  c.expect(gadgets >= kMinGadgets, "only " + std::to_string(gadgets) + " gadgets");
  c.expect(agreed == gadgets,
           "agreement " + std::to_string(agreed) + "/" + std::to_string(gadgets));
}

std::vector<std::string> stored_report_lines(const fs::path& path) {
  std::vector<std::string> out;
  for (const auto& line : ResultsStore(path).lines())
    if (line.value("kind", "") == "report") out.push_back(line.dump());
  return out;
}

void determinism(Check& c) {
  AnalysisContext ctx;
  std::vector<std::string> names = corpus_packages();
  fs::path dir = fs::temp_directory_path() / ("gadgetforge-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  ResultsStore sequential(dir / "sequential.jsonl");
  for (const auto& n : names) sequential.append(analyze_package(corpus(n), ctx));

  std::vector<PackageReport> reports(names.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < kDeterminismThreads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < names.size(); i = next++) reports[i] = analyze_package(corpus(names[i]), ctx);
    });
  for (auto& t : pool) t.join();
  ResultsStore threaded(dir / "threaded.jsonl");
  for (const auto& r : reports) threaded.append(r);

  auto a = stored_report_lines(sequential.path());
  auto b = stored_report_lines(threaded.path());
  fs::remove_all(dir);
  c.expect(a.size() == names.size(), "sequential pass stored " + std::to_string(a.size()) + " reports");
  c.expect(a == b, "report lines differ between passes");
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Check&)>> criteria[] = {
      {"running example", running_example},
      {"delayed injection", delayed_injection},
      {"non-interference", non_interference},
      {"special sinks", special_subsets},
      {"name-matched sinks", name_matched},
      {"scheduler expansion", scheduler_expansion},
      {"type inference", type_inference},
      {"SARIF stability", sarif_stability},
      {"oracle agreement", oracle_agreement},
      {"determinism", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      run(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    ++index;
    std::printf("%s %2d %s", c.failures.empty() ? "PASS" : "FAIL", index, name);
    if (!c.failures.empty()) {
      ++failed;
      std::printf(": %s", c.failures.front().c_str());
      if (c.failures.size() > 1) std::printf(" (+%zu more)", c.failures.size() - 1);
    }
    std::printf("\n");
  }
  return failed == 0 ? 0 : 1;
}
