#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gadgetforge/pipeline.h"

namespace gadgetforge {

constexpr int kSchemaVersion = 1;

nlohmann::json location_to_json(const SourceLocation& loc);
SourceLocation location_from_json(const nlohmann::json& j);

nlohmann::json hit_to_json(const SinkHit& hit);
SinkHit hit_from_json(const nlohmann::json& j);

nlohmann::json plan_to_json(const RunPlan& plan);
RunPlan plan_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const BranchRecord& r);
BranchRecord record_from_json(const nlohmann::json& j);

// {"kind": "run", ...} for one run of a report.
nlohmann::json run_line(const PackageReport& report, const RunMeta& run);
// {"kind": "report", ...}
nlohmann::json report_line(const PackageReport& report);
PackageReport report_from_json(const nlohmann::json& j);

// Append-only JSON Lines file of run and report objects.
class ResultsStore {
 public:
  explicit ResultsStore(std::filesystem::path path) : path_(std::move(path)) {}

  const std::filesystem::path& path() const { return path_; }

  // Writes the report's run lines followed by its report line. Throws
  // std::runtime_error on I/O failure.
  void append(const PackageReport& report);

  // Every line in file order. Throws on unreadable files or malformed lines.
  std::vector<nlohmann::json> lines() const;

  // Last report per package name, in order of first appearance.
  std::vector<PackageReport> latest_reports() const;
  std::optional<PackageReport> latest(const std::string& package_name) const;

  // Keeps only each package's most recent report with its run lines.
  // Returns the number of lines dropped.
  std::size_t compact();

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
};

}  // namespace gadgetforge
