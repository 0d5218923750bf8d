#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gadgetforge/ast.h"
#include "gadgetforge/hooks.h"
#include "gadgetforge/lexer.h"
#include "gadgetforge/value.h"

namespace gadgetforge {

enum class SinkCategory { ACE, ACI, LFI, FileWrite, FileRead, Network, None };
std::string_view to_string(SinkCategory category);
std::optional<SinkCategory> sink_category_from_string(std::string_view text);

struct Effect {
  std::string module;
  std::string name;
  SinkCategory category = SinkCategory::None;
  std::string text;
  bool operator==(const Effect&) const = default;
};

enum class RunStatus { Completed, UncaughtError, BudgetExceeded };
std::string_view to_string(RunStatus status);

struct RunOutcome {
  RunStatus status = RunStatus::Completed;
  std::vector<std::string> stdout_log;
  std::vector<Effect> effects_log;
  std::uint64_t steps_used = 0;
  std::string error;
  std::optional<SourceLocation> error_loc;

  // Status, printed lines, effects and error text agree.
  bool same_observable(const RunOutcome& other) const;
};

constexpr std::uint64_t kDefaultStepBudget = 5'000'000;

// Uncaught MiniJS error.
class ScriptError : public LocatedError {
 public:
  using LocatedError::LocatedError;
};

// Services the interpreter needs from its embedding: the `std` global,
// host function semantics and package sources.
class HostBridge {
 public:
  virtual ~HostBridge() = default;
  virtual void install(Interpreter& interp, Environment& globals) = 0;
  virtual Value invoke(Interpreter& interp, const HostFunctionInfo& fn,
                       const Value& self, std::vector<Value>& args,
                       const AstNode& call) = 0;
  // Parsed program for a normalized package-relative path. Throws
  // std::runtime_error (or a LocatedError) when it cannot be loaded.
  virtual const AstNode& load_program(const std::string& path) = 0;
};

// Tree-walking evaluator. One instance per run; not shareable across threads.
class Interpreter {
 public:
  Interpreter(HostBridge& host, Hooks& hooks,
              std::uint64_t budget = kDefaultStepBudget);
  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  // Evaluates a package file as the main module.
  RunOutcome run_module(const std::string& path);
  // Evaluates an already parsed program as the main module.
  RunOutcome run_program(const AstNode& program);

  Heap& heap() { return heap_; }
  Hooks& hooks() { return hooks_; }
  HostBridge& host() { return host_; }
  Object* root_prototype() { return root_; }
  Object* array_prototype() { return array_proto_; }
  Object* string_prototype() { return string_proto_; }
  Environment& globals() { return *globals_; }

  LookupResult lookup_property(const Object& base, std::string_view key) const;

  // Member access without instrumentation hooks.
  Value read_member_raw(const Value& base, const std::string& key,
                        const AstNode& node);
  void write_member_raw(const Value& base, const std::string& key, Value value,
                        const AstNode& node);

  Value to_primitive(const Value& v, CoerceHint hint);
  std::string to_text(const Value& v);
  double to_number(const Value& v);
  bool loose_equals(const Value& a, const Value& b);

  Value call(const Value& callee, const Value& self, std::vector<Value> args,
             const AstNode& node);

  Object* make_object();
  Object* make_bare_object();
  Object* make_array(std::vector<Value> elements);
  Object* make_native(const NativeFunction& fn);
  Object* make_function(const AstNode& fn, Environment* closure);

  Value require_module(const std::string& from_file, const std::string& spec,
                       const AstNode& node);
  Value eval_text(const std::string& text, const std::string& label);
  Value make_function_from_text(const std::vector<std::string>& params,
                                const std::string& body, const std::string& label);

  void append_stdout(std::string line) { outcome_.stdout_log.push_back(std::move(line)); }
  void append_effect(Effect effect) { outcome_.effects_log.push_back(std::move(effect)); }
  const std::vector<Effect>& effects() const { return outcome_.effects_log; }

  const std::vector<const AstNode*>& call_stack() const { return call_stack_; }
  std::uint64_t steps_used() const { return steps_; }

  // Debug-style rendering used by console output.
  std::string display(const Value& v, int depth = 0);

  [[noreturn]] void fail(const std::string& message, const SourceLocation& loc);

 private:
  enum class Completion { Normal, Return };

  RunOutcome finish(RunStatus status);
  void tick();
  Value eval(const AstNode& node, Environment* env);
  Completion exec(const AstNode& node, Environment* env, Value& ret);
  Completion exec_statements(const AstNode& block, Environment* env, Value& ret);
  void hoist(const AstNode& block, Environment* env);

  Value eval_member_read(const AstNode& node, Environment* env);
  Value member_get(const Value& base, const std::string& key, const AstNode& node);
  Value member_key(const AstNode& node, std::size_t index, Environment* env);
  Value eval_binary(const AstNode& node, Environment* env);
  Value eval_unary(const AstNode& node, Environment* env);
  Value eval_logical(const AstNode& node, Environment* env);
  Value invoke_with_hooks(const Value& callee, const Value& self,
                          std::vector<Value> args, const AstNode& node);
  std::vector<Value> eval_arguments(const AstNode& node, std::size_t from,
                                    Environment* env);
  Completion exec_for(const AstNode& node, Environment* env, Value& ret);
  std::vector<Value> iterate(const Value& v, const AstNode& node);
  Value load_module(const std::string& path, const AstNode* from);
  Value evaluate_module_body(const AstNode& program);
  bool test(const Value& v, const AstNode& node) { return hooks_.on_condition_test(v, node); }

  HostBridge& host_;
  Hooks& hooks_;
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
  Heap heap_;
  Object* root_ = nullptr;
  Object* array_proto_ = nullptr;
  Object* string_proto_ = nullptr;
  Environment* globals_ = nullptr;
  RunOutcome outcome_;
  std::vector<const AstNode*> call_stack_;
  std::map<std::string, Value> modules_;
  std::vector<std::unique_ptr<AstNode>> owned_programs_;
  int eval_counter_ = 0;
};

// Evaluates `program` with fresh interpreter state.
RunOutcome evaluate_program(const AstNode& program, HostBridge& host,
                            Hooks& hooks, std::uint64_t budget = kDefaultStepBudget);

// Resolves `spec` relative to the directory of `from_file` within the package
// root. Returns nullopt when the path escapes the root.
std::optional<std::string> resolve_package_path(const std::string& from_file,
                                                const std::string& spec);

bool is_array_index(std::string_view key);

}  // namespace gadgetforge
