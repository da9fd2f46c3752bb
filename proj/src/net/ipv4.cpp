#include "fgiot/net/ipv4.hpp"

#include <charconv>

#include "fgiot/error.hpp"

namespace fgiot::net {

std::optional<Ipv4> Ipv4::try_parse(std::string_view text) noexcept
{
    std::uint32_t v = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int octet = 0; octet < 4; ++octet) {
        if (octet > 0) {
            if (p == end || *p != '.') {
                return std::nullopt;
            }
            ++p;
        }
        unsigned part = 0;
        auto [next, ec] = std::from_chars(p, end, part);
        if (ec != std::errc{} || next == p || part > 255 || next - p > 3) {
            return std::nullopt;
        }
        v = (v << 8) | part;
        p = next;
    }
    if (p != end) {
        return std::nullopt;
    }
    return Ipv4{v};
}

Ipv4 Ipv4::parse(std::string_view text)
{
    auto ip = try_parse(text);
    if (!ip) {
        throw Error(Errc::ParseError, "bad IPv4 address '" + std::string(text) + "'");
    }
    return *ip;
}

std::string Ipv4::str() const
{
    return std::to_string(value >> 24) + '.' + std::to_string((value >> 16) & 0xFF) + '.' +
           std::to_string((value >> 8) & 0xFF) + '.' + std::to_string(value & 0xFF);
}

Cidr Cidr::parse(std::string_view text)
{
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        return host(Ipv4::parse(text));
    }
    const auto ip = Ipv4::parse(text.substr(0, slash));
    const auto len_text = text.substr(slash + 1);
    unsigned len = 0;
    auto [next, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
    if (ec != std::errc{} || next != len_text.data() + len_text.size() || len > 32) {
        throw Error(Errc::ParseError, "bad prefix length in '" + std::string(text) + "'");
    }
    Cidr c{ip, static_cast<std::uint8_t>(len)};
    if ((ip.value & c.mask()) != ip.value) {
        throw Error(Errc::ParseError, "host bits set in '" + std::string(text) + "'");
    }
    return c;
}

std::string Cidr::str() const
{
    return base.str() + '/' + std::to_string(length);
}

bool is_private(Ipv4 ip) noexcept
{
    return Cidr{Ipv4{0x0A000000}, 8}.contains(ip) || Cidr{Ipv4{0xAC100000}, 12}.contains(ip) ||
           Cidr{Ipv4{0xC0A80000}, 16}.contains(ip);
}

} // namespace fgiot::net
