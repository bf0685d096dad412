#include "citywall/frustum/calibration.hpp"

#include <charconv>
#include <optional>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "citywall/core/error.hpp"

namespace citywall::frustum {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& raw, const std::string& where) {
  const std::string text = trim(raw);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::ParseError,
                where + ": '" + text + "' is not a decimal number");
  }
  return value;
}

int parse_resolution(const pt::ptree& region, const char* name,
                     const std::string& where) {
  auto attr = region.get_optional<std::string>(std::string("<xmlattr>.") + name);
  if (!attr) {
    throw Error(ErrorCode::UnsupportedProfile,
                where + " lacks the " + name + " attribute");
  }
  const std::string text = trim(*attr);
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end || value <= 0) {
    throw Error(ErrorCode::ParseError,
                where + ": " + name + " '" + text + "' is not a positive integer");
  }
  return value;
}

CalibrationRegion read_region(const pt::ptree& region, std::size_t ordinal) {
  const std::string id =
      trim(region.get<std::string>("<xmlattr>.id", std::string{}));
  const std::string where =
      "region " + (id.empty() ? "#" + std::to_string(ordinal) : "'" + id + "'");
  if (id.empty()) {
    throw Error(ErrorCode::UnsupportedProfile, where + " has no id attribute");
  }

  const auto frustum = region.get_child_optional("frustum");
  if (!frustum) {
    throw Error(ErrorCode::UnsupportedProfile, where + " has no <frustum> element");
  }
  const auto angle = [&](const char* name) {
    auto text = frustum->get_optional<std::string>(name);
    if (!text) {
      throw Error(ErrorCode::UnsupportedProfile,
                  where + " frustum lacks <" + name + ">");
    }
    return parse_number(*text, where + " <" + name + ">");
  };

  const double yaw = angle("yaw");
  const double pitch = angle("pitch");
  const double roll = angle("roll");
  const double right = angle("rightAngle");
  const double left = angle("leftAngle");
  const double up = angle("upAngle");
  const double down = angle("downAngle");

  const int xres = parse_resolution(region, "xResolution", where);
  const int yres = parse_resolution(region, "yResolution", where);

  try {
    return {id, xres, yres, FrustumAngles(yaw, pitch, roll, left, right, up, down)};
  } catch (const Error& e) {
    throw Error(ErrorCode::AngleOutOfRange, where + ": " + e.what());
  }
}

void collect_regions(const pt::ptree& node, std::vector<CalibrationRegion>& out) {
  for (const auto& [name, child] : node) {
    if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
    if (name == "region") {
      out.push_back(read_region(child, out.size()));
    } else {
      collect_regions(child, out);
    }
  }
}

}  // namespace

std::vector<CalibrationRegion> parse_calibration(std::string_view document) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::ParseError,
                std::string("malformed calibration XML: ") + e.what());
  }
  std::vector<CalibrationRegion> regions;
  collect_regions(tree, regions);
  if (regions.empty()) {
    throw Error(ErrorCode::UnsupportedProfile,
                "calibration document contains no <region> elements");
  }
  return regions;
}

}  // namespace citywall::frustum
