#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gadgetforge/taint.h"

namespace gadgetforge {

constexpr int kDefaultMaxRuns = 25;

struct RunPlan {
  int index = 0;
  RunMode mode = RunMode::Unintrusive;
  std::set<std::string> forced;
  std::map<std::string, Candidate> candidates;

  TaintConfig config() const;
};

RunPlan unintrusive_plan();

struct AnalysisState {
  std::deque<std::string> worklist;
  std::set<std::string> processed;
  std::vector<BranchRecord> records;
  std::map<std::string, Candidate> candidates;
  int run_count = 0;
  int max_runs = kDefaultMaxRuns;

  // Property group currently being forced, grown by expansion.
  std::set<std::string> active;
  bool expand = false;

  bool has_record(const BranchRecord& r) const;
};

// Records and candidates gathered by one run (all test commands of a plan).
struct RunObservation {
  std::vector<BranchRecord> records;
  std::map<std::string, Candidate> candidates;
};

// Starts the schedule from the unintrusive run (which counts as run 0).
AnalysisState seed_from_unintrusive(const RunObservation& unintrusive,
                                    int max_runs = kDefaultMaxRuns);

// Next forced plan, or nullopt once the worklist is drained or the run
// budget is spent.
std::optional<RunPlan> next_plan(AnalysisState& state);

// Folds a finished forced run back in. Returns the records it discovered.
std::vector<BranchRecord> complete_plan(AnalysisState& state, const RunPlan& plan,
                                        const RunObservation& observed);

}  // namespace gadgetforge
