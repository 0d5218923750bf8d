#include "gadgetforge/sarif.h"

#include <algorithm>
#include <map>

namespace gadgetforge {

using json = nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

json physical(const SourceLocation& loc) {
  return {{"artifactLocation", {{"uri", loc.file}}},
          {"region", {{"startLine", std::max(loc.line, 1)}, {"startColumn", std::max(loc.column, 1)}}}};
}

std::string message_for(const SinkHit& hit) {
  if (hit.mode == SinkMode::Special)
    return "Pollutable properties " + hit.arg_path + " reach " + hit.sink;
  std::string props;
  for (const auto& s : hit.sources) {
    if (!props.empty()) props += ", ";
    props += "'" + s.property + "'";
  }
  return "Polluted property " + props + " reaches " + hit.sink + " (argument " + hit.arg_path + ")";
}

std::string step_text(const FlowStep& step) {
  std::string text(to_string(step.kind));
  if (!step.detail.empty()) text += " " + step.detail;
  return text;
}

}  // namespace

std::string rule_id(const SinkHit& hit) {
  return std::string(to_string(hit.category)) + "/" + std::string(to_string(hit.mode));
}

json export_sarif(const PackageReport& report) {
  std::vector<const HitRecord*> hits;
  for (const auto& h : report.hits) hits.push_back(&h);
  std::stable_sort(hits.begin(), hits.end(), [](const HitRecord* a, const HitRecord* b) {
    return flow_key(a->hit) < flow_key(b->hit);
  });

  std::map<std::string, json> rules;
  json results = json::array();
  for (const HitRecord* h : hits) {
    const SinkHit& hit = h->hit;
    std::string id = rule_id(hit);
    rules.emplace(id, json{{"id", id},
                           {"shortDescription",
                            {{"text", std::string(to_string(hit.category)) + " sink reached in " +
                                          std::string(to_string(hit.mode)) + " mode"}}}});
    json steps = json::array();
    for (const auto& step : hit.flow)
      steps.push_back({{"location", {{"physicalLocation", physical(step.loc)},
                                     {"message", {{"text", step_text(step)}}}}}});
    json sources = json::array();
    for (const auto& s : hit.sources) sources.push_back(s.property);
    results.push_back({{"ruleId", id},
                       {"level", "warning"},
                       {"message", {{"text", message_for(hit)}}},
                       {"locations", json::array({{{"physicalLocation", physical(hit.sink_loc)}}})},
                       {"codeFlows", json::array({{{"threadFlows", json::array({{{"locations", steps}}})}}})},
                       {"properties",
                        {{"sources", sources},
                         {"forcedProps", std::vector<std::string>(h->forced.begin(), h->forced.end())},
                         {"sinkReachedOnlyFromTestFiles", hit.sink_reached_only_from_test_files}}}});
  }
  json rule_list = json::array();
  for (auto& [id, r] : rules) rule_list.push_back(r);
  return {{"$schema", "https://json.schemastore.org/sarif-2.1.0.json"},
          {"version", "2.1.0"},
          {"runs", json::array({{{"tool", {{"driver", {{"name", "gadgetforge"},
                                                       {"version", kToolVersion},
                                                       {"rules", rule_list}}}}},
                                 {"properties", {{"package", report.name}, {"packageVersion", report.version}}},
                                 {"results", results}}})}};
}

std::vector<std::string> validate_sarif(const json& doc) {
  std::vector<std::string> errors;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) errors.push_back(what);
    return ok;
  };
  if (!need(doc.is_object(), "document is not an object")) return errors;
  need(doc.contains("version") && doc["version"] == "2.1.0", "version must be \"2.1.0\"");
  if (!need(doc.contains("runs") && doc["runs"].is_array() && !doc["runs"].empty(),
            "runs must be a non-empty array"))
    return errors;
  for (std::size_t r = 0; r < doc["runs"].size(); ++r) {
    const json& run = doc["runs"][r];
    std::string at = "runs[" + std::to_string(r) + "]";
    need(run.contains("tool") && run["tool"].contains("driver") &&
             run["tool"]["driver"].contains("name") && run["tool"]["driver"]["name"].is_string(),
         at + ".tool.driver.name is required");
    if (!need(run.contains("results") && run["results"].is_array(), at + ".results must be an array"))
      continue;
    for (std::size_t i = 0; i < run["results"].size(); ++i) {
      const json& res = run["results"][i];
      std::string rat = at + ".results[" + std::to_string(i) + "]";
      need(res.contains("message") && res["message"].contains("text") && res["message"]["text"].is_string(),
           rat + ".message.text is required");
      bool locs = res.contains("locations") && res["locations"].is_array() && !res["locations"].empty();
      if (need(locs, rat + ".locations must be a non-empty array")) {
        for (const auto& loc : res["locations"]) {
          need(loc.contains("physicalLocation") &&
                   loc["physicalLocation"].contains("artifactLocation") &&
                   loc["physicalLocation"]["artifactLocation"].contains("uri"),
               rat + ".locations[].physicalLocation.artifactLocation.uri is required");
          if (loc.contains("physicalLocation") && loc["physicalLocation"].contains("region")) {
            const json& region = loc["physicalLocation"]["region"];
            need(region.value("startLine", 0) >= 1, rat + " region.startLine must be >= 1");
          }
        }
      }
      if (res.contains("codeFlows")) {
        for (const auto& flow : res["codeFlows"]) {
          bool ok = flow.contains("threadFlows") && flow["threadFlows"].is_array() &&
                    !flow["threadFlows"].empty();
          if (!need(ok, rat + ".codeFlows[].threadFlows must be a non-empty array")) continue;
          for (const auto& tf : flow["threadFlows"])
            need(tf.contains("locations") && tf["locations"].is_array() && !tf["locations"].empty(),
                 rat + ".codeFlows[].threadFlows[].locations must be a non-empty array");
        }
      }
    }
  }
  return errors;
}

}  // namespace gadgetforge
