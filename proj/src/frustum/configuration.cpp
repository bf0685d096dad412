#include "citywall/frustum/configuration.hpp"

#include "citywall/core/error.hpp"

namespace citywall::frustum {

using nlohmann::json;

std::vector<Diagnostic> validate_configuration(const ConfigDocument& doc) {
  auto out = structural_diagnostics(doc);
  for (const auto& view : doc.views) {
    const auto check = inspect_matrix(from_column_major(view.projection));
    if (!check.finite) {
      out.push_back({Severity::Error, "non_finite", view.device_id,
                     "projection has non-finite entries"});
    } else if (!check.invertible) {
      out.push_back({Severity::Error, "non_invertible", view.device_id,
                     "projection is not invertible (|det| <= 1e-12)"});
    } else if (!check.forward_perspective) {
      out.push_back({Severity::Warning, "degenerate_frustum", view.device_id,
                     "projection is not a forward-looking perspective"});
    }
  }
  return out;
}

std::vector<Diagnostic> validate_configuration(const ViewConfiguration& config) {
  return validate_configuration(to_document(config));
}

ConfigDocument config_document_from_json(const json& j) {
  try {
    ConfigDocument doc;
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "configuration must be an object");
    doc.config_id = j.at("configId").get<std::string>();
    const auto& views = j.at("views");
    if (!views.is_array()) throw Error(ErrorCode::ParseError, "views must be an array");
    for (const auto& v : views) {
      ConfigDocument::View view;
      view.device_id = v.at("deviceId").get<std::string>();
      view.role = v.at("role").get<std::string>();
      const auto& m = v.at("projection");
      if (!m.is_array() || m.size() != 16) {
        throw Error(ErrorCode::ParseError, "projection of '" + view.device_id +
                                               "' must hold 16 numbers");
      }
      for (std::size_t i = 0; i < 16; ++i) {
        if (!m[i].is_number()) {
          throw Error(ErrorCode::ParseError, "projection of '" + view.device_id +
                                                 "' must hold 16 numbers");
        }
        view.projection[i] = m[i].get<double>();
      }
      doc.views.push_back(std::move(view));
    }
    return doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("configuration: ") + e.what());
  }
}

ConfigDocument parse_config_document(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("configuration: ") + e.what());
  }
  return config_document_from_json(j);
}

json to_json(const ConfigDocument& doc) {
  json views = json::array();
  for (const auto& v : doc.views) {
    views.push_back(
        {{"deviceId", v.device_id}, {"role", v.role}, {"projection", v.projection}});
  }
  return {{"configId", doc.config_id}, {"views", std::move(views)}};
}

ViewConfiguration make_configuration(const ConfigDocument& doc) {
  const auto diagnostics = validate_configuration(doc);
  if (!diagnostics.empty()) {
    std::vector<std::string> details;
    for (const auto& d : diagnostics) details.push_back(format(d));
    throw Error(ErrorCode::InvalidConfig,
                "configuration '" + doc.config_id + "' is not deployable",
                std::move(details));
  }
  std::vector<DeviceView> views;
  for (const auto& v : doc.views) {
    views.push_back({DeviceId(v.device_id),
                     ProjectionMatrix::from_column_major(v.projection),
                     parse_role(v.role)});
  }
  return ViewConfiguration(doc.config_id, std::move(views));
}

ViewConfiguration load_configuration(std::string_view json_text) {
  return make_configuration(parse_config_document(json_text));
}

std::string dump_configuration(const ViewConfiguration& config) {
  return to_json(to_document(config)).dump(2) + "\n";
}

}  // namespace citywall::frustum
