#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fgiot::iot {

/// Three-level group address, packed 5/3/8 bits.
struct GroupAddress {
    std::uint8_t main = 0;   // 0..31
    std::uint8_t middle = 0; // 0..7
    std::uint8_t sub = 0;    // 0..255

    auto operator<=>(const GroupAddress&) const = default;

    static GroupAddress parse(std::string_view text); // "m/mm/sss"
    std::string str() const;
};

std::uint16_t ga_encode(const GroupAddress& ga);
std::uint16_t ga_encode(unsigned main, unsigned middle, unsigned sub);
GroupAddress ga_decode(std::uint16_t raw) noexcept;

struct IndividualAddress {
    std::uint8_t area = 0;   // 0..15
    std::uint8_t line = 0;   // 0..15
    std::uint8_t device = 0; // 0..255

    auto operator<=>(const IndividualAddress&) const = default;

    static IndividualAddress parse(std::string_view text); // "a.l.d"
    std::string str() const;
    std::uint16_t raw() const noexcept { return static_cast<std::uint16_t>(area << 12 | line << 8 | device); }
};

inline constexpr double kDpt9Min = -671088.64;
inline constexpr double kDpt9Max = 670433.28;
inline constexpr std::uint16_t kDpt9Invalid = 0x7FFF;

/// KNX 2-byte float: value = 0.01 * M * 2^E, with the smallest E for which
/// the rounded mantissa fits in 12-bit two's complement.
std::uint16_t dpt9_encode_raw(double value);
double dpt9_decode_raw(std::uint16_t raw);
std::array<std::uint8_t, 2> dpt9_encode(double value);
double dpt9_decode(std::array<std::uint8_t, 2> bytes);

enum class DptFamily { Boolean, UnsignedByte, Float16 };

/// "1.xxx" boolean, "5.xxx" unsigned byte, "9.xxx" 2-byte float.
DptFamily dpt_family(std::string_view dpt);
std::size_t dpt_payload_size(std::string_view dpt);

using DatapointValue = std::variant<bool, std::uint8_t, double>;

struct Datapoint {
    std::string dpt;
    DatapointValue value;
};

std::vector<std::uint8_t> encode_datapoint(const Datapoint& dp);
Datapoint decode_datapoint(std::string_view dpt, const std::vector<std::uint8_t>& payload);

/// Fixed text schema used on pub/sub topics: booleans "0"/"1", bytes as
/// integers, floats with exactly two decimals.
std::string render_value(const Datapoint& dp);
Datapoint parse_value(std::string_view dpt, std::string_view text);

} // namespace fgiot::iot
