#include "gadgetforge/store.h"

#include <fstream>
#include <map>
#include <sstream>

namespace gadgetforge {

using json = nlohmann::json;

namespace {

template <typename E, std::size_t N>
E enum_from(const json& j, const E (&values)[N], const char* what) {
  std::string text = j.get<std::string>();
  for (E v : values)
    if (to_string(v) == text) return v;
  throw std::runtime_error(std::string("unknown ") + what + " '" + text + "'");
}

constexpr FlowKind kFlowKinds[] = {FlowKind::Read, FlowKind::BinaryOp, FlowKind::UnaryOp,
                                   FlowKind::Coercion, FlowKind::BuiltinPropagation,
                                   FlowKind::ConditionTest, FlowKind::SinkArg};
constexpr TypeTag kTypeTags[] = {TypeTag::Unknown, TypeTag::Text, TypeTag::Number,
                                 TypeTag::Boolean, TypeTag::Array, TypeTag::Object,
                                 TypeTag::Function};
constexpr RunMode kRunModes[] = {RunMode::Unintrusive, RunMode::Forced};
constexpr RunStatus kRunStatuses[] = {RunStatus::Completed, RunStatus::UncaughtError,
                                      RunStatus::BudgetExceeded};

std::string_view injection_text(InjectionMode m) {
  return m == InjectionMode::Immediate ? "immediate" : "delayed-conditional";
}

InjectionMode injection_from(const json& j) {
  std::string text = j.get<std::string>();
  if (text == "immediate") return InjectionMode::Immediate;
  if (text == "delayed-conditional") return InjectionMode::DelayedConditional;
  throw std::runtime_error("unknown injection mode '" + text + "'");
}

json literal_to_json(const Literal& l) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else return v;
      },
      l);
}

Literal literal_from_json(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  return j.get<std::vector<std::string>>();
}

json strings(const std::set<std::string>& s) { return json(std::vector<std::string>(s.begin(), s.end())); }

std::set<std::string> string_set(const json& j) {
  auto v = j.get<std::vector<std::string>>();
  return {v.begin(), v.end()};
}

json run_meta_to_json(const RunMeta& run) {
  json commands = json::array();
  for (const auto& c : run.commands)
    commands.push_back({{"command", c.command},
                        {"status", to_string(c.status)},
                        {"stepsUsed", c.steps_used},
                        {"error", c.error}});
  json hits = json::array();
  for (const auto& h : run.hits) hits.push_back({{"hit", h.hit}, {"origin", location_to_json(h.origin)}});
  return {{"plan", plan_to_json(run.plan)},
          {"status", to_string(run.status())},
          {"stepsUsed", run.steps_used()},
          {"commands", commands},
          {"hits", hits},
          {"newRecords", run.new_records}};
}

RunMeta run_meta_from_json(const json& j) {
  RunMeta run;
  run.plan = plan_from_json(j.at("plan"));
  for (const auto& c : j.at("commands"))
    run.commands.push_back(CommandResult{c.at("command").get<std::string>(),
                                         enum_from(c.at("status"), kRunStatuses, "run status"),
                                         c.at("stepsUsed").get<std::uint64_t>(),
                                         c.at("error").get<std::string>()});
  for (const auto& h : j.at("hits"))
    run.hits.push_back(HitOrigin{h.at("hit").get<std::size_t>(), location_from_json(h.at("origin"))});
  run.new_records = j.at("newRecords").get<std::size_t>();
  return run;
}

json package_json(const PackageReport& report) {
  return {{"name", report.name}, {"version", report.version}};
}

}  // namespace

json location_to_json(const SourceLocation& loc) {
  return {{"file", loc.file}, {"line", loc.line}, {"column", loc.column}};
}

SourceLocation location_from_json(const json& j) {
  SourceLocation loc;
  loc.file = j.at("file").get<std::string>();
  loc.line = j.at("line").get<int>();
  loc.column = j.at("column").get<int>();
  return loc;
}

json hit_to_json(const SinkHit& hit) {
  json sources = json::array();
  for (const auto& s : hit.sources)
    sources.push_back({{"property", s.property},
                       {"loc", location_to_json(s.loc)},
                       {"baseHasRootProto", s.base_has_root_proto},
                       {"injection", injection_text(s.mode)}});
  json flow = json::array();
  for (const auto& f : hit.flow)
    flow.push_back({{"kind", to_string(f.kind)}, {"detail", f.detail}, {"loc", location_to_json(f.loc)}});
  json stack = json::array();
  for (const auto& l : hit.call_stack) stack.push_back(location_to_json(l));
  return {{"mode", to_string(hit.mode)},
          {"sink", hit.sink},
          {"category", to_string(hit.category)},
          {"sinkLoc", location_to_json(hit.sink_loc)},
          {"sources", sources},
          {"flow", flow},
          {"argPath", hit.arg_path},
          {"callStack", stack},
          {"sinkReachedOnlyFromTestFiles", hit.sink_reached_only_from_test_files}};
}

SinkHit hit_from_json(const json& j) {
  SinkHit hit;
  auto mode = sink_mode_from_string(j.at("mode").get<std::string>());
  auto category = sink_category_from_string(j.at("category").get<std::string>());
  if (!mode || !category) throw std::runtime_error("bad sink hit mode or category");
  hit.mode = *mode;
  hit.category = *category;
  hit.sink = j.at("sink").get<std::string>();
  hit.sink_loc = location_from_json(j.at("sinkLoc"));
  for (const auto& s : j.at("sources"))
    hit.sources.push_back(SourceRecord{s.at("property").get<std::string>(),
                                       location_from_json(s.at("loc")),
                                       s.at("baseHasRootProto").get<bool>(),
                                       injection_from(s.at("injection"))});
  for (const auto& f : j.at("flow"))
    hit.flow.push_back(FlowStep{enum_from(f.at("kind"), kFlowKinds, "flow kind"),
                                f.at("detail").get<std::string>(), location_from_json(f.at("loc"))});
  hit.arg_path = j.at("argPath").get<std::string>();
  for (const auto& l : j.at("callStack")) hit.call_stack.push_back(location_from_json(l));
  hit.sink_reached_only_from_test_files = j.at("sinkReachedOnlyFromTestFiles").get<bool>();
  return hit;
}

json plan_to_json(const RunPlan& plan) {
  json candidates = json::object();
  for (const auto& [p, c] : plan.candidates)
    candidates[p] = {{"value", literal_to_json(c.value)}, {"type", to_string(c.type)}};
  return {{"index", plan.index},
          {"mode", to_string(plan.mode)},
          {"forcedProps", strings(plan.forced)},
          {"candidates", candidates}};
}

RunPlan plan_from_json(const json& j) {
  RunPlan plan;
  plan.index = j.at("index").get<int>();
  plan.mode = enum_from(j.at("mode"), kRunModes, "run mode");
  plan.forced = string_set(j.at("forcedProps"));
  for (const auto& [p, c] : j.at("candidates").items())
    plan.candidates[p] = Candidate{literal_from_json(c.at("value")),
                                   enum_from(c.at("type"), kTypeTags, "type tag")};
  return plan;
}

json record_to_json(const BranchRecord& r) {
  return {{"loc", location_to_json(r.loc)},
          {"properties", r.properties},
          {"naturalOutcome", r.natural_outcome},
          {"discoveredInRun", r.discovered_in_run}};
}

BranchRecord record_from_json(const json& j) {
  BranchRecord r;
  r.loc = location_from_json(j.at("loc"));
  r.properties = j.at("properties").get<std::vector<std::string>>();
  r.natural_outcome = j.at("naturalOutcome").get<bool>();
  r.discovered_in_run = j.at("discoveredInRun").get<int>();
  return r;
}

json run_line(const PackageReport& report, const RunMeta& run) {
  json j = run_meta_to_json(run);
  j["kind"] = "run";
  j["schemaVersion"] = kSchemaVersion;
  j["package"] = package_json(report);
  return j;
}

json report_line(const PackageReport& report) {
  json hits = json::array();
  for (const auto& h : report.hits) {
    json e = hit_to_json(h.hit);
    e["run"] = h.run;
    e["forcedProps"] = strings(h.forced);
    e["command"] = h.command;
    hits.push_back(std::move(e));
  }
  json categories = json::object();
  for (const auto& [c, n] : report.category_summary()) categories[std::string(to_string(c))] = n;
  json modes = json::object();
  for (const auto& [m, n] : report.mode_summary()) modes[std::string(to_string(m))] = n;
  json runs = json::array();
  for (const auto& r : report.runs) runs.push_back(run_meta_to_json(r));
  json records = json::array();
  for (const auto& r : report.records) records.push_back(record_to_json(r));
  return {{"kind", "report"},
          {"schemaVersion", kSchemaVersion},
          {"package", package_json(report)},
          {"skipped", report.skipped ? json(std::string(to_string(*report.skipped))) : json(nullptr)},
          {"categorySummary", categories},
          {"modeSummary", modes},
          {"hits", hits},
          {"runs", runs},
          {"branchRecords", records}};
}

PackageReport report_from_json(const json& j) {
  if (j.at("kind") != "report") throw std::runtime_error("not a report line");
  if (j.at("schemaVersion").get<int>() != kSchemaVersion)
    throw std::runtime_error("unsupported schema version");
  PackageReport report;
  report.name = j.at("package").at("name").get<std::string>();
  report.version = j.at("package").at("version").get<std::string>();
  if (!j.at("skipped").is_null()) {
    report.skipped = skip_reason_from_string(j.at("skipped").get<std::string>());
    if (!report.skipped) throw std::runtime_error("unknown skip reason");
  }
  for (const auto& h : j.at("hits"))
    report.hits.push_back(HitRecord{hit_from_json(h), h.at("run").get<int>(),
                                    string_set(h.at("forcedProps")),
                                    h.at("command").get<std::string>()});
  for (const auto& r : j.at("runs")) report.runs.push_back(run_meta_from_json(r));
  for (const auto& r : j.at("branchRecords")) report.records.push_back(record_from_json(r));
  return report;
}

// ---- store ----

void ResultsStore::append(const PackageReport& report) {
  std::string text;
  for (const auto& run : report.runs) text += run_line(report, run).dump() + "\n";
  text += report_line(report).dump() + "\n";
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open results store " + path_.string());
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("cannot write results store " + path_.string());
}

std::vector<json> ResultsStore::lines() const {
  std::lock_guard lock(mutex_);
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read results store " + path_.string());
  std::vector<json> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("kind"))
      throw std::runtime_error(path_.string() + ":" + std::to_string(number) + ": malformed line");
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<PackageReport> ResultsStore::latest_reports() const {
  std::vector<std::string> order;
  std::map<std::string, json> last;
  for (auto& j : lines()) {
    if (j["kind"] != "report") continue;
    std::string name = j.at("package").at("name").get<std::string>();
    if (!last.count(name)) order.push_back(name);
    last[name] = std::move(j);
  }
  std::vector<PackageReport> out;
  for (const auto& name : order) out.push_back(report_from_json(last[name]));
  return out;
}

std::optional<PackageReport> ResultsStore::latest(const std::string& package_name) const {
  for (auto& r : latest_reports())
    if (r.name == package_name) return r;
  return std::nullopt;
}

std::size_t ResultsStore::compact() {
  auto all = lines();
  std::vector<std::string> order;
  std::map<std::string, std::vector<json>> pending, kept;
  for (auto& j : all) {
    std::string name = j.at("package").at("name").get<std::string>();
    if (j["kind"] == "run") {
      pending[name].push_back(std::move(j));
      continue;
    }
    if (!kept.count(name)) order.push_back(name);
    auto group = std::move(pending[name]);
    pending.erase(name);
    group.push_back(std::move(j));
    kept[name] = std::move(group);
  }
  std::string text;
  std::size_t written = 0;
  for (const auto& name : order)
    for (const auto& j : kept[name]) {
      text += j.dump() + "\n";
      ++written;
    }
  std::lock_guard lock(mutex_);
  auto tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, path_);
  return all.size() - written;
}

}  // namespace gadgetforge
