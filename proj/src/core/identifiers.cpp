#include "citywall/core/identifiers.hpp"

#include <algorithm>

namespace citywall {

bool is_valid_identifier(std::string_view value) noexcept {
  if (value.empty() || value.size() > kMaxIdentifierLength) return false;
  return std::all_of(value.begin(), value.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

}  // namespace citywall
