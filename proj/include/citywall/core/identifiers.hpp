#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

#include "citywall/core/error.hpp"

namespace citywall {

inline constexpr std::size_t kMaxIdentifierLength = 64;

// Non-empty, at most 64 chars of [A-Za-z0-9_-].
bool is_valid_identifier(std::string_view value) noexcept;

template <typename Tag>
class Identifier {
 public:
  explicit Identifier(std::string value) : value_(std::move(value)) {
    if (!is_valid_identifier(value_)) {
      throw Error(ErrorCode::BadIdentifier,
                  std::string(Tag::kind) + " identifier '" + value_ +
                      "' must be 1-64 chars of [A-Za-z0-9_-]");
    }
  }

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const Identifier&, const Identifier&) = default;

 private:
  std::string value_;
};

struct RoomTag {
  static constexpr std::string_view kind = "room";
};
struct DeviceTag {
  static constexpr std::string_view kind = "device";
};

using RoomId = Identifier<RoomTag>;
using DeviceId = Identifier<DeviceTag>;

}  // namespace citywall

template <typename Tag>
struct std::hash<citywall::Identifier<Tag>> {
  std::size_t operator()(const citywall::Identifier<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
