#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "nbci/errors.hpp"

namespace nbci {

/// Decoded movement command. Wire layout (big-endian):
///   magic "NBCI" | version u8=1 | type u8=1 | seq u32 | direction i8
///   | auc_e1 f32 | auc_e2 f32 | crc32 of all prior bytes
/// i.e. a 19-byte payload followed by a 4-byte CRC.
struct Command {
    std::int8_t direction = 0;  // +1 right, -1 left, 0 none (the U outcome)
    float auc_e1 = 0.0f;
    float auc_e2 = 0.0f;
    std::uint32_t sequence = 0;

    bool operator==(const Command&) const = default;
};

/// Transport acknowledgement: magic | version | type u8=2 | seq u32 | crc32.
struct Ack {
    std::uint32_t sequence = 0;

    bool operator==(const Ack&) const = default;
};

/// Simulator telemetry: magic | version | type u8=3 | seq u32
/// | position f64 | crc32.
struct StateMsg {
    std::uint32_t sequence = 0;
    double position_cm = 0.0;

    bool operator==(const StateMsg&) const = default;
};

using Message = std::variant<Command, Ack, StateMsg>;

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::uint8_t kTypeCommand = 1;
inline constexpr std::uint8_t kTypeAck = 2;
inline constexpr std::uint8_t kTypeState = 3;
inline constexpr std::size_t kCommandDatagramSize = 23;  // 19-byte payload + CRC
inline constexpr std::size_t kAckDatagramSize = 14;
inline constexpr std::size_t kStateDatagramSize = 22;

/// CRC-32 (IEEE 802.3 polynomial, reflected).
std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_datagram(const Command& cmd);
std::vector<std::uint8_t> encode_datagram(const Ack& ack);
std::vector<std::uint8_t> encode_datagram(const StateMsg& state);

/// Decodes any protocol datagram. Total over arbitrary input: every byte
/// string either decodes or raises ProtocolError naming the offending
/// field (magic, version, type, length, crc, direction).
Message decode_datagram(std::span<const std::uint8_t> bytes);

/// Convenience for the command case; any other type is a ProtocolError.
Command decode_command(std::span<const std::uint8_t> bytes);

} // namespace nbci
