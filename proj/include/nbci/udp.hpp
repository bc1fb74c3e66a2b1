#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nbci/errors.hpp"

namespace nbci {

struct UdpEndpoint {
    std::uint32_t addr = 0;  // host order
    std::uint16_t port = 0;

    bool operator==(const UdpEndpoint&) const = default;
};

UdpEndpoint resolve_ipv4(const std::string& host, std::uint16_t port);

/// Minimal RAII wrapper over an IPv4 UDP socket.
class UdpSocket {
public:
    /// Binds to 127.0.0.1:`port`; port 0 picks an ephemeral port.
    explicit UdpSocket(std::uint16_t port = 0);
    ~UdpSocket();

    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;
    UdpSocket(UdpSocket&& other) noexcept;
    UdpSocket& operator=(UdpSocket&& other) noexcept;

    std::uint16_t local_port() const;

    void send_to(const std::vector<std::uint8_t>& payload, const UdpEndpoint& to);

    struct Received {
        std::vector<std::uint8_t> payload;
        UdpEndpoint from;
    };

    /// Waits up to timeout_ms for a datagram; nullopt on timeout.
    std::optional<Received> recv(int timeout_ms);

private:
    int fd_ = -1;
};

} // namespace nbci
