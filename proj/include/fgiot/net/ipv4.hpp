#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fgiot::net {

struct Ipv4 {
    std::uint32_t value = 0;

    auto operator<=>(const Ipv4&) const = default;

    static Ipv4 parse(std::string_view text);
    static std::optional<Ipv4> try_parse(std::string_view text) noexcept;
    std::string str() const;
};

struct Cidr {
    Ipv4 base;
    std::uint8_t length = 0;

    auto operator<=>(const Cidr&) const = default;

    static Cidr parse(std::string_view text);
    static Cidr host(Ipv4 ip) { return Cidr{ip, 32}; }
    static Cidr any() { return Cidr{}; }

    std::uint32_t mask() const noexcept
    {
        return length == 0 ? 0u : ~std::uint32_t{0} << (32 - length);
    }
    bool contains(Ipv4 ip) const noexcept { return (ip.value & mask()) == base.value; }
    std::string str() const;
};

/// RFC 1918 space; anything outside it is "red side" from the PEP's view.
bool is_private(Ipv4 ip) noexcept;

} // namespace fgiot::net
