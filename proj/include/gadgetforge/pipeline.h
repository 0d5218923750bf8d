#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gadgetforge/host_api.h"
#include "gadgetforge/scheduler.h"

namespace gadgetforge {

// Listed in precedence order: the first that applies is the one recorded.
enum class SkipReason { Unreadable, NameFiltered, NoTests, NoHostApi, DryRunFailed };
std::string_view to_string(SkipReason reason);
std::optional<SkipReason> skip_reason_from_string(std::string_view text);

struct PackageManifest {
  std::string name;
  std::string main;
  std::vector<std::string> test_commands;
  std::vector<std::string> keywords;

  // Throws std::runtime_error on malformed manifests.
  static PackageManifest parse(const std::string& json_text);
  static PackageManifest load(const std::filesystem::path& dir);
};

// Glob match when the pattern has wildcards, substring match otherwise.
bool pattern_matches(const std::string& pattern, const std::string& command);

std::vector<std::string> default_name_filter_keywords();

struct ExecutionStrategy {
  std::vector<std::string> allow{"run test/*"};
  std::vector<std::string> deny{"audit*", "install*"};
  std::vector<std::string> name_filter_keywords = default_name_filter_keywords();

  bool allowed(const std::string& command) const;
  bool name_filtered(const std::string& package_name) const;
  std::vector<std::string> runnable(const PackageManifest& manifest) const;
};

// "run <file>" names the module to execute; other commands are not runnable.
std::optional<std::string> command_target(const std::string& command);

struct AnalysisContext {
  ExecutionStrategy strategy;
  int max_runs = kDefaultMaxRuns;
  std::uint64_t step_budget = kDefaultStepBudget;
  std::vector<SpecialRow> special_table = default_special_table();
};

// Content hash of every file in the package, as 16 hex digits.
std::string package_version(const PackageFiles& files);

struct PreAnalysis {
  std::vector<std::string> commands;
  bool uses_host_api = false;
  bool dry_run_ok = false;
  std::optional<SkipReason> skip;
};

PreAnalysis pre_analyze(PackageFiles& files, const PackageManifest& manifest,
                        const AnalysisContext& ctx);

struct FlowKey {
  std::string property;
  std::string source_file;
  int source_line = 0;
  int source_column = 0;
  std::string sink;
  std::string sink_file;
  int sink_line = 0;
  int sink_column = 0;
  SinkMode mode = SinkMode::Standard;

  auto operator<=>(const FlowKey&) const = default;
  bool operator==(const FlowKey&) const = default;
};

FlowKey flow_key(const SinkHit& hit);

struct HitRecord {
  SinkHit hit;
  int run = 0;
  std::set<std::string> forced;
  std::string command;
};

struct CommandResult {
  std::string command;
  RunStatus status = RunStatus::Completed;
  std::uint64_t steps_used = 0;
  std::string error;
};

struct HitOrigin {
  std::size_t hit = 0;
  // Outermost call site of the hit, normally inside a test file.
  SourceLocation origin;
  bool operator==(const HitOrigin&) const = default;
};

struct RunMeta {
  RunPlan plan;
  std::vector<CommandResult> commands;
  std::vector<HitOrigin> hits;
  std::size_t new_records = 0;

  // First failing command status, Completed otherwise.
  RunStatus status() const;
  std::uint64_t steps_used() const;
};

struct PackageReport {
  std::string name;
  std::string version;
  std::optional<SkipReason> skipped;
  std::vector<HitRecord> hits;
  std::vector<RunMeta> runs;
  std::vector<BranchRecord> records;

  std::map<SinkCategory, std::size_t> category_summary() const;
  std::map<SinkMode, std::size_t> mode_summary() const;
  SinkCategory best_category() const;
  // "name: ACI=1 runs=2", "name: no hits runs=1" or "name: skipped NoTests".
  std::string summary_line() const;
};

PackageReport analyze_package(const std::filesystem::path& dir, const AnalysisContext& ctx);

// Executes one plan over the given test commands. Used by analyze_package and
// for replaying stored plans.
struct PlanExecution {
  RunMeta meta;
  RunObservation observed;
  std::vector<HitRecord> hits;  // undeduplicated, in discovery order
};
PlanExecution execute_plan(PackageFiles& files, const std::vector<std::string>& commands,
                           const RunPlan& plan, const AnalysisContext& ctx);

// Best category first; ties by hit count, then name.
std::vector<PackageReport> prioritize(std::vector<PackageReport> reports);

using Pollution = std::pair<std::string, Literal>;

// "key=value", where the value is a JSON literal, a quoted string or bare text.
Pollution parse_pollution(const std::string& text);

struct VerifyRun {
  std::string command;
  RunOutcome outcome;
};

// Plain (untainted) runs with each pollution set on the root prototype first.
// An empty command runs every runnable test command.
std::vector<VerifyRun> verify_with_pollution(const std::filesystem::path& dir,
                                             const std::vector<Pollution>& pollutions,
                                             const std::string& command,
                                             const AnalysisContext& ctx);

}  // namespace gadgetforge
