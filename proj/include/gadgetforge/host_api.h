#pragma once

#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gadgetforge/interpreter.h"
#include "gadgetforge/taint.h"

namespace gadgetforge {

enum class SinkMode { Standard, NameMatched, Special };
// "standard", "name-matched", "special"
std::string_view to_string(SinkMode mode);
std::optional<SinkMode> sink_mode_from_string(std::string_view text);

struct SpecialCondition {
  int arg_index = 0;
  // Satisfied when every property of at least one group is pollutable.
  std::vector<std::vector<std::string>> groups;
  std::string description;
};

struct SpecialRow {
  std::string module;
  std::string name;
  SpecialCondition condition;
};

// Rows for the process-spawning family.
std::vector<SpecialRow> default_special_table();
// Parses [{module, name, argIndex, groups, description?}, ...]. Throws
// std::runtime_error on malformed input.
std::vector<SpecialRow> parse_special_table(const std::string& json_text);
std::vector<SpecialRow> load_special_table(const std::filesystem::path& path);

class HostEnvironment;

using HostSemantics = std::function<Value(Interpreter&, HostEnvironment&,
                                          std::vector<Value>& args, const AstNode& call)>;

struct HostFunctionInfo {
  std::string module;
  std::string name;
  SinkCategory category = SinkCategory::None;
  std::optional<SpecialCondition> special;
  HostSemantics semantics;

  std::string qualified() const { return module + "." + name; }
};

// Every simulated host function, without special conditions attached.
const std::vector<HostFunctionInfo>& host_function_table();

struct SinkHit {
  SinkMode mode = SinkMode::Standard;
  // "module.name" for host sinks, the callee name for name-matched sinks.
  std::string sink;
  SinkCategory category = SinkCategory::None;
  SourceLocation sink_loc;
  std::vector<SourceRecord> sources;
  std::vector<FlowStep> flow;
  // Access path of the tainted argument ("0", "2.env", ...) or, for special
  // hits, the satisfied property group joined by ",".
  std::string arg_path;
  std::vector<SourceLocation> call_stack;
  bool sink_reached_only_from_test_files = false;
};

bool is_test_file(const std::string& path);

// Package sources addressed by normalized package-relative paths. Parsed
// programs are cached and stay alive as long as this object.
class PackageFiles {
 public:
  explicit PackageFiles(std::filesystem::path root);
  explicit PackageFiles(std::map<std::string, std::string> in_memory);

  const std::filesystem::path& root() const { return root_; }
  std::optional<std::string> read(const std::string& path) const;
  // Throws std::runtime_error when missing, LocatedError on syntax errors.
  const AstNode& program(const std::string& path);
  // Sorted relative paths of every source file.
  std::vector<std::string> list() const;

 private:
  std::filesystem::path root_;
  std::optional<std::map<std::string, std::string>> memory_;
  std::map<std::string, std::unique_ptr<AstNode>> parsed_;
};

// Taint analysis plus sink detection for user-level calls.
class GadgetAnalysis : public TaintAnalysis {
 public:
  using TaintAnalysis::TaintAnalysis;

  std::vector<SinkHit>& hits() { return hits_; }
  const std::vector<SinkHit>& hits() const { return hits_; }

  std::vector<Value> on_call_pre(const Value& callee, const Value& self, std::vector<Value> args,
                                 const AstNode& node) override;

  // Host-side recording.
  void record_standard(const HostFunctionInfo& fn, const std::vector<FoundTaint>& taints,
                       int arg_index, const AstNode& call);
  void record_special(const HostFunctionInfo& fn, const std::vector<std::string>& group,
                      const AstNode& call);

 private:
  std::vector<SourceLocation> stack_locations(const AstNode* extra) const;
  std::vector<SinkHit> hits_;
};

// Name a user call site resolves to, for name matching.
std::string call_site_name(const AstNode& call, const Value& callee);
bool name_matches_sink(const std::string& name);

// Returns the satisfied property group for a special-sink call, if any.
std::optional<std::vector<std::string>> check_special(Interpreter& interp,
                                                      const HostFunctionInfo& fn,
                                                      const std::vector<Value>& plain_args);

// A property is pollutable on `v` when `v` is an object whose chain reaches the
// root prototype and no non-root object on the chain defines it.
bool is_pollutable(Interpreter& interp, const Value& v, const std::string& property);

// Simulated standard library exposed to programs as the `std` global.
class HostEnvironment : public HostBridge {
 public:
  HostEnvironment(PackageFiles& files, const std::vector<SpecialRow>& special_table,
                  GadgetAnalysis* analysis = nullptr);

  void install(Interpreter& interp, Environment& globals) override;
  Value invoke(Interpreter& interp, const HostFunctionInfo& fn, const Value& self,
               std::vector<Value>& args, const AstNode& call) override;
  const AstNode& load_program(const std::string& path) override;

  // Calls made to anything other than console, obj and test.
  std::size_t api_calls() const { return api_calls_; }
  const std::map<std::string, std::size_t>& call_counts() const { return call_counts_; }
  PackageFiles& files() { return files_; }

 private:
  PackageFiles& files_;
  GadgetAnalysis* analysis_;
  std::deque<HostFunctionInfo> functions_;
  std::deque<NativeFunction> natives_;
  std::size_t api_calls_ = 0;
  std::map<std::string, std::size_t> call_counts_;
};

}  // namespace gadgetforge
