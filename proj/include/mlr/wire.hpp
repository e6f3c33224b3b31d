#pragma once

// Binary encoding of round messages. Little-endian, fixed-width fields,
// prefixed by a magic, a format version and a message tag.

#include "mlr/messages.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace mlr::wire {

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Bytes = std::vector<std::uint8_t>;
using Message = std::variant<UavMessage, CuMessage, TrajectoryReply>;

Bytes encode(const UavMessage& m);
Bytes encode(const CuMessage& m);
Bytes encode(const TrajectoryReply& m);
Bytes encode(const Message& m);

// Throws WireError on truncated or malformed input.
Message decode(std::span<const std::uint8_t> bytes);

}  // namespace mlr::wire
