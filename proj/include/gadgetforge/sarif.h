#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gadgetforge/pipeline.h"

namespace gadgetforge {

// "<category>/<mode>", e.g. "ACI/standard".
std::string rule_id(const SinkHit& hit);

// SARIF 2.1.0 document with one run and one result per hit, ordered by FlowKey.
nlohmann::json export_sarif(const PackageReport& report);

// Structural problems found in a SARIF document; empty when it is valid.
std::vector<std::string> validate_sarif(const nlohmann::json& doc);

}  // namespace gadgetforge
