#include "gadgetforge/pipeline.h"

#include <fnmatch.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gadgetforge {

using json = nlohmann::json;

std::string_view to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::Unreadable: return "Unreadable";
    case SkipReason::NameFiltered: return "NameFiltered";
    case SkipReason::NoTests: return "NoTests";
    case SkipReason::NoHostApi: return "NoHostApi";
    case SkipReason::DryRunFailed: return "DryRunFailed";
  }
  return "?";
}

std::optional<SkipReason> skip_reason_from_string(std::string_view text) {
  for (auto r : {SkipReason::Unreadable, SkipReason::NameFiltered, SkipReason::NoTests,
                 SkipReason::NoHostApi, SkipReason::DryRunFailed})
    if (to_string(r) == text) return r;
  return std::nullopt;
}

// ---- manifest and strategy ----

PackageManifest PackageManifest::parse(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw std::runtime_error("package.json is not an object");
  PackageManifest m;
  auto text_field = [&](const char* key) -> std::string {
    if (!doc.contains(key)) return {};
    if (!doc[key].is_string()) throw std::runtime_error(std::string("package.json: '") + key + "' must be a string");
    return doc[key].get<std::string>();
  };
  auto text_list = [](const json& j, const std::string& what) {
    std::vector<std::string> out;
    if (j.is_string()) return std::vector<std::string>{j.get<std::string>()};
    if (!j.is_array()) throw std::runtime_error("package.json: '" + what + "' must be a list");
    for (const auto& e : j) {
      if (!e.is_string()) throw std::runtime_error("package.json: '" + what + "' entries must be strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  };
  m.name = text_field("name");
  if (m.name.empty()) throw std::runtime_error("package.json: missing name");
  m.main = text_field("main");
  if (doc.contains("keywords")) m.keywords = text_list(doc["keywords"], "keywords");
  if (doc.contains("scripts")) {
    const json& scripts = doc["scripts"];
    if (!scripts.is_object()) throw std::runtime_error("package.json: 'scripts' must be an object");
    if (scripts.contains("test")) m.test_commands = text_list(scripts["test"], "scripts.test");
  }
  return m;
}

PackageManifest PackageManifest::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "package.json", std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + (dir / "package.json").string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool pattern_matches(const std::string& pattern, const std::string& command) {
  if (pattern.find_first_of("*?[") != std::string::npos)
    return fnmatch(pattern.c_str(), command.c_str(), 0) == 0;
  return command.find(pattern) != std::string::npos;
}

std::vector<std::string> default_name_filter_keywords() {
  return {"react", "angular", "vue", "jquery", "browser"};
}

bool ExecutionStrategy::allowed(const std::string& command) const {
  for (const auto& p : deny)
    if (pattern_matches(p, command)) return false;
  for (const auto& p : allow)
    if (pattern_matches(p, command)) return true;
  return false;
}

bool ExecutionStrategy::name_filtered(const std::string& package_name) const {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : package_name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  for (const auto& k : name_filter_keywords)
    for (const auto& t : tokens)
      if (t == k) return true;
  return false;
}

std::vector<std::string> ExecutionStrategy::runnable(const PackageManifest& manifest) const {
  std::vector<std::string> out;
  for (const auto& c : manifest.test_commands)
    if (allowed(c)) out.push_back(c);
  return out;
}

std::optional<std::string> command_target(const std::string& command) {
  static const std::string prefix = "run ";
  if (command.rfind(prefix, 0) != 0) return std::nullopt;
  std::string target = command.substr(prefix.size());
  while (!target.empty() && target.front() == ' ') target.erase(target.begin());
  while (!target.empty() && target.back() == ' ') target.pop_back();
  if (target.empty()) return std::nullopt;
  return target;
}

std::string package_version(const PackageFiles& files) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& path : files.list()) {
    mix(path);
    mix(std::string_view("\0", 1));
    mix(files.read(path).value_or(""));
    mix(std::string_view("\0", 1));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- running ----

namespace {

RunOutcome run_command(const std::string& command, Hooks& hooks,
                       HostEnvironment& host, std::uint64_t budget,
                       const std::vector<Pollution>& pollutions = {}) {
  auto target = command_target(command);
  if (!target) {
    RunOutcome out;
    out.status = RunStatus::UncaughtError;
    out.error = "unsupported test command '" + command + "'";
    return out;
  }
  Interpreter interp(host, hooks, budget);
  for (const auto& [key, literal] : pollutions)
    interp.root_prototype()->set_own(key, literal_to_value(interp, literal));
  return interp.run_module(*target);
}

}  // namespace

PreAnalysis pre_analyze(PackageFiles& files, const PackageManifest& manifest,
                        const AnalysisContext& ctx) {
  PreAnalysis pre;
  if (ctx.strategy.name_filtered(manifest.name)) {
    pre.skip = SkipReason::NameFiltered;
    return pre;
  }
  pre.commands = ctx.strategy.runnable(manifest);
  if (pre.commands.empty()) {
    pre.skip = SkipReason::NoTests;
    return pre;
  }
  for (const auto& command : pre.commands) {
    HostEnvironment host(files, ctx.special_table);
    Hooks hooks;
    RunOutcome out = run_command(command, hooks, host, ctx.step_budget);
    if (host.api_calls() > 0) pre.uses_host_api = true;
    if (out.status == RunStatus::Completed) pre.dry_run_ok = true;
  }
  if (!pre.uses_host_api) pre.skip = SkipReason::NoHostApi;
  else if (!pre.dry_run_ok) pre.skip = SkipReason::DryRunFailed;
  return pre;
}

FlowKey flow_key(const SinkHit& hit) {
  FlowKey k;
  if (!hit.sources.empty()) {
    k.property = hit.sources.front().property;
    k.source_file = hit.sources.front().loc.file;
    k.source_line = hit.sources.front().loc.line;
    k.source_column = hit.sources.front().loc.column;
  }
  k.sink = hit.sink;
  k.sink_file = hit.sink_loc.file;
  k.sink_line = hit.sink_loc.line;
  k.sink_column = hit.sink_loc.column;
  k.mode = hit.mode;
  return k;
}

RunStatus RunMeta::status() const {
  for (const auto& c : commands)
    if (c.status != RunStatus::Completed) return c.status;
  return RunStatus::Completed;
}

std::uint64_t RunMeta::steps_used() const {
  std::uint64_t total = 0;
  for (const auto& c : commands) total += c.steps_used;
  return total;
}

PlanExecution execute_plan(PackageFiles& files, const std::vector<std::string>& commands,
                           const RunPlan& plan, const AnalysisContext& ctx) {
  PlanExecution exec;
  exec.meta.plan = plan;
  for (const auto& command : commands) {
    GadgetAnalysis analysis(plan.config());
    HostEnvironment host(files, ctx.special_table, &analysis);
    RunOutcome out = run_command(command, analysis, host, ctx.step_budget);
    exec.meta.commands.push_back(CommandResult{command, out.status, out.steps_used, out.error});
    for (const auto& r : analysis.records()) {
      bool seen = std::any_of(exec.observed.records.begin(), exec.observed.records.end(),
                              [&](const BranchRecord& e) { return e.same_key(r); });
      if (!seen) exec.observed.records.push_back(r);
    }
    for (const auto& [p, c] : analysis.observed_candidates()) exec.observed.candidates.emplace(p, c);
    for (const auto& hit : analysis.hits())
      exec.hits.push_back(HitRecord{hit, plan.index, plan.forced, command});
  }
  return exec;
}

namespace {

void fold_run(PackageReport& report, std::map<FlowKey, std::size_t>& index, PlanExecution exec,
              std::size_t new_records) {
  exec.meta.new_records = new_records;
  for (auto& h : exec.hits) {
    FlowKey key = flow_key(h.hit);
    auto it = index.find(key);
    std::size_t at;
    if (it == index.end()) {
      at = report.hits.size();
      index.emplace(key, at);
      report.hits.push_back(h);
    } else {
      at = it->second;
    }
    HitOrigin origin{at, h.hit.call_stack.empty() ? h.hit.sink_loc : h.hit.call_stack.front()};
    if (std::find(exec.meta.hits.begin(), exec.meta.hits.end(), origin) == exec.meta.hits.end())
      exec.meta.hits.push_back(origin);
  }
  report.runs.push_back(std::move(exec.meta));
}

}  // namespace

PackageReport analyze_package(const std::filesystem::path& dir, const AnalysisContext& ctx) {
  PackageReport report;
  report.name = dir.filename().string();
  PackageFiles files(dir);
  report.version = package_version(files);
  PackageManifest manifest;
  try {
    manifest = PackageManifest::load(dir);
  } catch (const std::exception&) {
    report.skipped = SkipReason::Unreadable;
    return report;
  }
  report.name = manifest.name;

  PreAnalysis pre;
  try {
    pre = pre_analyze(files, manifest, ctx);
  } catch (const std::exception&) {
    // Syntax errors surface from the dry run as a failed command; anything
    // else means the package cannot be read.
    report.skipped = SkipReason::Unreadable;
    return report;
  }
  if (pre.skip) {
    report.skipped = pre.skip;
    return report;
  }

  std::map<FlowKey, std::size_t> index;
  PlanExecution first = execute_plan(files, pre.commands, unintrusive_plan(), ctx);
  AnalysisState state = seed_from_unintrusive(first.observed, ctx.max_runs);
  std::size_t seeded = state.records.size();
  fold_run(report, index, std::move(first), seeded);

  while (auto plan = next_plan(state)) {
    PlanExecution exec = execute_plan(files, pre.commands, *plan, ctx);
    auto fresh = complete_plan(state, *plan, exec.observed);
    fold_run(report, index, std::move(exec), fresh.size());
  }
  report.records = state.records;
  return report;
}

std::map<SinkCategory, std::size_t> PackageReport::category_summary() const {
  std::map<SinkCategory, std::size_t> out;
  for (const auto& h : hits) ++out[h.hit.category];
  return out;
}

std::map<SinkMode, std::size_t> PackageReport::mode_summary() const {
  std::map<SinkMode, std::size_t> out;
  for (const auto& h : hits) ++out[h.hit.mode];
  return out;
}

SinkCategory PackageReport::best_category() const {
  SinkCategory best = SinkCategory::None;
  for (const auto& h : hits)
    if (h.hit.category < best) best = h.hit.category;
  return best;
}

std::string PackageReport::summary_line() const {
  std::string out = name + ":";
  if (skipped) return out + " skipped " + std::string(to_string(*skipped));
  auto summary = category_summary();
  if (summary.empty()) out += " no hits";
  for (const auto& [category, count] : summary)
    out += " " + std::string(to_string(category)) + "=" + std::to_string(count);
  return out + " runs=" + std::to_string(runs.size());
}

std::vector<PackageReport> prioritize(std::vector<PackageReport> reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const PackageReport& a, const PackageReport& b) {
                     if (a.best_category() != b.best_category())
                       return a.best_category() < b.best_category();
                     if (a.hits.size() != b.hits.size()) return a.hits.size() > b.hits.size();
                     return a.name < b.name;
                   });
  return reports;
}

// ---- verification ----

Pollution parse_pollution(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("pollution must look like key=value: '" + text + "'");
  std::string key = text.substr(0, eq);
  std::string raw = text.substr(eq + 1);
  if (raw.size() >= 2 && raw.front() == '\'' && raw.back() == '\'')
    return {key, raw.substr(1, raw.size() - 2)};
  json j = json::parse(raw, nullptr, false);
  if (!j.is_discarded()) {
    if (j.is_boolean()) return {key, j.get<bool>()};
    if (j.is_number()) return {key, j.get<double>()};
    if (j.is_string()) return {key, j.get<std::string>()};
    if (j.is_array()) {
      std::vector<std::string> items;
      for (const auto& e : j) {
        if (!e.is_string()) throw std::invalid_argument("array pollutions hold strings only: '" + text + "'");
        items.push_back(e.get<std::string>());
      }
      return {key, items};
    }
  }
  return {key, raw};
}

std::vector<VerifyRun> verify_with_pollution(const std::filesystem::path& dir,
                                             const std::vector<Pollution>& pollutions,
                                             const std::string& command,
                                             const AnalysisContext& ctx) {
  PackageManifest manifest = PackageManifest::load(dir);
  PackageFiles files(dir);
  std::vector<std::string> commands;
  if (!command.empty()) commands.push_back(command);
  else commands = ctx.strategy.runnable(manifest);
  std::vector<VerifyRun> out;
  for (const auto& c : commands) {
    HostEnvironment host(files, ctx.special_table);
    Hooks hooks;
    out.push_back(VerifyRun{c, run_command(c, hooks, host, ctx.step_budget, pollutions)});
  }
  return out;
}

}  // namespace gadgetforge
