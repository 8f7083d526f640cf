#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>

namespace latdec {

using TokenId = std::int32_t;

// Source words the model vocabulary does not know.
inline constexpr TokenId kUnknownToken = -1;

// Dense node identifier. Ids are handed out in creation order and never
// reused, so they double as insertion timestamps.
struct NodeId {
  std::uint32_t value = std::numeric_limits<std::uint32_t>::max();

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t v) : value(v) {}

  constexpr bool valid() const { return value != std::numeric_limits<std::uint32_t>::max(); }
  constexpr std::size_t index() const { return value; }

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

inline constexpr NodeId kNoNode{};

}  // namespace latdec

template <>
struct std::hash<latdec::NodeId> {
  std::size_t operator()(latdec::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
