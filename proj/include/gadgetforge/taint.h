#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "gadgetforge/hooks.h"
#include "gadgetforge/interpreter.h"
#include "gadgetforge/value.h"

namespace gadgetforge {

enum class RunMode { Unintrusive, Forced };
std::string_view to_string(RunMode mode);

// A conditional whose decision depended on tainted input.
struct BranchRecord {
  SourceLocation loc;
  std::vector<std::string> properties;  // sorted, unique
  bool natural_outcome = false;
  int discovered_in_run = 0;

  // Identity ignores the run that discovered the record.
  bool same_key(const BranchRecord& other) const {
    return loc == other.loc && properties == other.properties &&
           natural_outcome == other.natural_outcome;
  }
};

// Forcing value for a property: a concrete literal (comparison against a
// literal) or only a type with its default value (typeof comparison).
struct Candidate {
  Literal value;  // monostate: use the type's default value
  TypeTag type = TypeTag::Unknown;
  bool operator==(const Candidate&) const = default;
};

// Keys never treated as sources.
std::set<std::string> default_ignore_list();

struct TaintConfig {
  RunMode mode = RunMode::Unintrusive;
  std::set<std::string> forced;
  std::map<std::string, Candidate> candidates;
  std::set<std::string> ignore = default_ignore_list();
  // When false no taint is ever injected and every hook is a pass-through.
  bool inject = true;
};

struct LookupLogEntry {
  std::string key;
  SourceLocation loc;
  LookupHit found = LookupHit::NotFound;
  bool chain_hits_root = false;
  bool ignored = false;
  bool injected = false;
  // The key was found on a prototype below the root.
  bool intermediate_hit = false;
};

// Default value of an inferred type; Unknown behaves as Text.
Value default_value(Interpreter& interp, TypeTag type);
Value literal_to_value(Interpreter& interp, const Literal& literal);

struct FoundTaint {
  TaintValue* taint = nullptr;
  std::vector<std::string> path;
};

struct Unwrapped {
  Value plain;
  std::vector<FoundTaint> taints;
};

constexpr int kDefaultUnwrapDepth = 4;

// Replaces every taint reachable within max_depth levels of object properties
// and array elements by the value it stands for. Containers are copied only
// when something inside them changed.
Unwrapped unwrap_deep(Interpreter& interp, const Value& v, int max_depth = kDefaultUnwrapDepth);

// Taints reachable within max_depth levels, without copying.
std::vector<FoundTaint> find_taints(const Value& v, int max_depth = kDefaultUnwrapDepth);

// The taint-tracking hook set.
class TaintAnalysis : public Hooks {
 public:
  explicit TaintAnalysis(TaintConfig config);

  const TaintConfig& config() const { return config_; }
  const std::vector<BranchRecord>& records() const { return records_; }
  const std::vector<LookupLogEntry>& lookup_log() const { return lookup_log_; }
  const std::vector<TaintValue*>& injected() const { return injected_; }
  // Candidates observed during this run, keyed by property.
  const std::map<std::string, Candidate>& observed_candidates() const { return observed_; }
  // Properties whose candidate was applied during a forced decision.
  const std::set<std::string>& applied_candidates() const { return applied_; }

  // Builds a taint that descends from `parents`, wrapping `underlying`.
  TaintValue* derive(Interpreter& interp, const std::vector<const TaintValue*>& parents,
                     Value underlying, FlowStep step);

  Value on_property_read(const Value& base, const std::string& key, const LookupResult& raw,
                         const AstNode& node) override;
  Value on_binary(std::string_view op, const Value& left, const Value& right, Value raw,
                  const AstNode& node) override;
  Value on_unary(std::string_view op, const Value& operand, Value raw,
                 const AstNode& node) override;
  Value on_logical_end(NodeKind kind, const AstNode& node, Value v) override;
  bool on_condition_test(const Value& v, const AstNode& node) override;
  Value on_call_post(const Value& callee, const Value& self, const std::vector<Value>& args,
                     Value raw, const AstNode& node) override;
  Value on_coerce(TaintValue& taint, CoerceHint hint) override;
  Value on_tainted_get(Interpreter& interp, TaintValue& taint, const std::string& key,
                       const AstNode& node) override;
  Value on_tainted_invoke(Interpreter& interp, TaintValue& callee, const Value& self,
                          std::vector<Value> args, const AstNode& node) override;
  std::vector<Value> on_tainted_iterate(Interpreter& interp, TaintValue& taint,
                                        const AstNode& node) override;

  void attach(Interpreter& interp) override { interp_ = &interp; }
  Interpreter* interpreter() const { return interp_; }

 private:
  TaintValue* inject(const std::string& key, const AstNode& node, InjectionMode mode);
  void record_branch(const TaintValue& t, const AstNode& node, bool natural);
  bool forced_decision(TaintValue& t, bool natural);
  void apply_candidate(TaintValue& target, const Candidate& c);
  std::optional<Candidate> candidate_for(const std::string& property) const;
  Value builtin_propagation(const std::string& name, const Value& self,
                            const std::vector<Value>& args, Value raw, const AstNode& node);

  TaintConfig config_;
  Interpreter* interp_ = nullptr;
  std::vector<BranchRecord> records_;
  std::vector<LookupLogEntry> lookup_log_;
  std::vector<TaintValue*> injected_;
  std::unordered_map<const AstNode*, TaintValue*> pending_;
  std::map<std::string, Candidate> observed_;
  std::set<std::string> applied_;
};

// Names of text and array methods that imply a receiver type.
std::optional<TypeTag> type_implied_by_method(std::string_view key);

}  // namespace gadgetforge
