#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "citywall/core/projection.hpp"

namespace citywall::frustum {

// Invariant violations plus geometric findings (non-finite, non-invertible,
// degenerate frustum). Empty means the configuration can be deployed.
std::vector<Diagnostic> validate_configuration(const ConfigDocument& doc);
std::vector<Diagnostic> validate_configuration(const ViewConfiguration& config);

// Configuration file format:
//   {"configId": s, "views": [{"deviceId": s, "role": "main"|"auxiliary",
//                              "projection": [16 numbers, column-major]}]}
// Shape errors throw ParseError; content is not validated here.
ConfigDocument parse_config_document(std::string_view json_text);
ConfigDocument config_document_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConfigDocument& doc);

// Throws InvalidConfig (details = formatted diagnostics) when
// validate_configuration reports anything.
ViewConfiguration make_configuration(const ConfigDocument& doc);

ViewConfiguration load_configuration(std::string_view json_text);
std::string dump_configuration(const ViewConfiguration& config);

}  // namespace citywall::frustum
