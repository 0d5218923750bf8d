#include "gadgetforge/scheduler.h"

#include <algorithm>

namespace gadgetforge {

TaintConfig RunPlan::config() const {
  TaintConfig c;
  c.mode = mode;
  c.forced = forced;
  c.candidates = candidates;
  return c;
}

RunPlan unintrusive_plan() { return RunPlan{}; }

bool AnalysisState::has_record(const BranchRecord& r) const {
  return std::any_of(records.begin(), records.end(),
                     [&](const BranchRecord& e) { return e.same_key(r); });
}

namespace {

std::vector<BranchRecord> merge(AnalysisState& state, const RunObservation& observed,
                                int run) {
  std::vector<BranchRecord> fresh;
  for (BranchRecord r : observed.records) {
    if (state.has_record(r)) continue;
    r.discovered_in_run = run;
    state.records.push_back(r);
    fresh.push_back(std::move(r));
  }
  for (const auto& [property, candidate] : observed.candidates)
    state.candidates.emplace(property, candidate);
  return fresh;
}

void enqueue(AnalysisState& state, const std::string& property) {
  if (state.processed.count(property)) return;
  if (std::find(state.worklist.begin(), state.worklist.end(), property) != state.worklist.end())
    return;
  state.worklist.push_back(property);
}

void finish_group(AnalysisState& state) {
  for (const auto& p : state.active) {
    state.processed.insert(p);
    state.worklist.erase(std::remove(state.worklist.begin(), state.worklist.end(), p),
                         state.worklist.end());
  }
  state.active.clear();
  state.expand = false;
}

}  // namespace

AnalysisState seed_from_unintrusive(const RunObservation& unintrusive, int max_runs) {
  AnalysisState state;
  state.max_runs = max_runs;
  state.run_count = 1;
  for (const auto& r : merge(state, unintrusive, 0))
    for (const auto& p : r.properties) enqueue(state, p);
  return state;
}

std::optional<RunPlan> next_plan(AnalysisState& state) {
  if (state.run_count >= state.max_runs) return std::nullopt;
  if (!state.expand) {
    if (state.worklist.empty()) return std::nullopt;
    state.active = {state.worklist.front()};
  }
  RunPlan plan;
  plan.index = state.run_count++;
  plan.mode = RunMode::Forced;
  plan.forced = state.active;
  plan.candidates = state.candidates;
  return plan;
}

std::vector<BranchRecord> complete_plan(AnalysisState& state, const RunPlan& plan,
                                        const RunObservation& observed) {
  auto fresh = merge(state, observed, plan.index);
  std::set<std::string> added;
  for (const auto& r : fresh)
    for (const auto& p : r.properties)
      if (!state.processed.count(p) && !state.active.count(p)) added.insert(p);
  if (added.empty()) {
    finish_group(state);
  } else {
    state.active.insert(added.begin(), added.end());
    state.expand = true;
  }
  return fresh;
}

}  // namespace gadgetforge
