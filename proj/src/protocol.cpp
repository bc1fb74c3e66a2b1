#include "nbci/protocol.hpp"

#include <array>
#include <bit>
#include <cstring>

namespace nbci {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'N', 'B', 'C', 'I'};

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t n = 0; n < 256; ++n) {
        std::uint32_t c = n;
        for (int bit = 0; bit < 8; ++bit) {
            c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
        }
        table[n] = c;
    }
    return table;
}

const std::array<std::uint32_t, 256> kCrcTable = make_crc_table();

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
    put_u32(out, static_cast<std::uint32_t>(v));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
    return (static_cast<std::uint32_t>(b[off]) << 24) |
           (static_cast<std::uint32_t>(b[off + 1]) << 16) |
           (static_cast<std::uint32_t>(b[off + 2]) << 8) |
           static_cast<std::uint32_t>(b[off + 3]);
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t off) {
    return (static_cast<std::uint64_t>(get_u32(b, off)) << 32) | get_u32(b, off + 4);
}

void append_crc(std::vector<std::uint8_t>& out) {
    put_u32(out, crc32_ieee({out.data(), out.size()}));
}

void check_crc(std::span<const std::uint8_t> bytes) {
    const std::size_t body = bytes.size() - 4;
    const std::uint32_t expected = crc32_ieee(bytes.first(body));
    const std::uint32_t got = get_u32(bytes, body);
    if (expected != got) throw ProtocolError("datagram: crc mismatch");
}

} // namespace

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes) {
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::uint8_t b : bytes) {
        c = kCrcTable[(c ^ b) & 0xFFu] ^ (c >> 8);
    }
    return c ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> encode_datagram(const Command& cmd) {
    if (cmd.direction != +1 && cmd.direction != -1 && cmd.direction != 0) {
        throw ProtocolError("command: direction must be +1, -1 or 0");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kCommandDatagramSize);
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    put_u8(out, kProtocolVersion);
    put_u8(out, kTypeCommand);
    put_u32(out, cmd.sequence);
    put_u8(out, static_cast<std::uint8_t>(cmd.direction));
    put_f32(out, cmd.auc_e1);
    put_f32(out, cmd.auc_e2);
    append_crc(out);
    return out;
}

std::vector<std::uint8_t> encode_datagram(const Ack& ack) {
    std::vector<std::uint8_t> out;
    out.reserve(kAckDatagramSize);
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    put_u8(out, kProtocolVersion);
    put_u8(out, kTypeAck);
    put_u32(out, ack.sequence);
    append_crc(out);
    return out;
}

std::vector<std::uint8_t> encode_datagram(const StateMsg& state) {
    std::vector<std::uint8_t> out;
    out.reserve(kStateDatagramSize);
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    put_u8(out, kProtocolVersion);
    put_u8(out, kTypeState);
    put_u32(out, state.sequence);
    put_f64(out, state.position_cm);
    append_crc(out);
    return out;
}

Message decode_datagram(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 6) throw ProtocolError("datagram: truncated before type byte");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw ProtocolError("datagram: bad magic");
    }
    if (bytes[4] != kProtocolVersion) {
        throw ProtocolError("datagram: unsupported version " + std::to_string(bytes[4]));
    }
    const std::uint8_t type = bytes[5];
    switch (type) {
        case kTypeCommand: {
            if (bytes.size() < kCommandDatagramSize) throw ProtocolError("command: truncated");
            if (bytes.size() > kCommandDatagramSize) throw ProtocolError("command: trailing bytes");
            check_crc(bytes);
            Command cmd;
            cmd.sequence = get_u32(bytes, 6);
            const auto dir = static_cast<std::int8_t>(bytes[10]);
            if (dir != +1 && dir != -1 && dir != 0) {
                throw ProtocolError("command: direction byte " + std::to_string(dir) + " invalid");
            }
            cmd.direction = dir;
            cmd.auc_e1 = std::bit_cast<float>(get_u32(bytes, 11));
            cmd.auc_e2 = std::bit_cast<float>(get_u32(bytes, 15));
            return cmd;
        }
        case kTypeAck: {
            if (bytes.size() < kAckDatagramSize) throw ProtocolError("ack: truncated");
            if (bytes.size() > kAckDatagramSize) throw ProtocolError("ack: trailing bytes");
            check_crc(bytes);
            Ack ack;
            ack.sequence = get_u32(bytes, 6);
            return ack;
        }
        case kTypeState: {
            if (bytes.size() < kStateDatagramSize) throw ProtocolError("state: truncated");
            if (bytes.size() > kStateDatagramSize) throw ProtocolError("state: trailing bytes");
            check_crc(bytes);
            StateMsg state;
            state.sequence = get_u32(bytes, 6);
            state.position_cm = std::bit_cast<double>(get_u64(bytes, 10));
            return state;
        }
        default:
            throw ProtocolError("datagram: unknown type " + std::to_string(type));
    }
}

Command decode_command(std::span<const std::uint8_t> bytes) {
    const Message msg = decode_datagram(bytes);
    if (const Command* cmd = std::get_if<Command>(&msg)) return *cmd;
    throw ProtocolError("datagram: expected a command");
}

} // namespace nbci
