#include "nbci/udp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <utility>

namespace nbci {

namespace {

std::string errno_text(const std::string& what) {
    return what + ": " + std::strerror(errno);
}

} // namespace

UdpEndpoint resolve_ipv4(const std::string& host, std::uint16_t port) {
    in_addr addr{};
    if (inet_pton(AF_INET, host.c_str(), &addr) != 1) {
        throw StreamError("udp: cannot parse IPv4 address '" + host + "'");
    }
    return {ntohl(addr.s_addr), port};
}

UdpSocket::UdpSocket(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw StreamError(errno_text("udp: socket"));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    sa.sin_port = htons(port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
        const std::string msg = errno_text("udp: bind to port " + std::to_string(port));
        ::close(fd_);
        throw StreamError(msg);
    }
}

UdpSocket::~UdpSocket() {
    if (fd_ >= 0) ::close(fd_);
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

std::uint16_t UdpSocket::local_port() const {
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len) != 0) {
        throw StreamError(errno_text("udp: getsockname"));
    }
    return ntohs(sa.sin_port);
}

void UdpSocket::send_to(const std::vector<std::uint8_t>& payload, const UdpEndpoint& to) {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(to.addr);
    sa.sin_port = htons(to.port);
    const ssize_t n = ::sendto(fd_, payload.data(), payload.size(), 0,
                               reinterpret_cast<sockaddr*>(&sa), sizeof(sa));
    if (n < 0 || static_cast<std::size_t>(n) != payload.size()) {
        throw StreamError(errno_text("udp: sendto"));
    }
}

std::optional<UdpSocket::Received> UdpSocket::recv(int timeout_ms) {
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, timeout_ms);
    if (ready < 0) throw StreamError(errno_text("udp: poll"));
    if (ready == 0) return std::nullopt;

    std::vector<std::uint8_t> buf(2048);
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    const ssize_t n =
        ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&sa), &len);
    if (n < 0) throw StreamError(errno_text("udp: recvfrom"));
    buf.resize(static_cast<std::size_t>(n));
    return Received{std::move(buf), {ntohl(sa.sin_addr.s_addr), ntohs(sa.sin_port)}};
}

} // namespace nbci
