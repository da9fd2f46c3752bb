#include "fgiot/iot/knx.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "fgiot/error.hpp"

namespace fgiot::iot {

namespace {

std::vector<unsigned> split_numbers(std::string_view text, char sep, std::size_t parts)
{
    std::vector<unsigned> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        const auto piece = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        unsigned v = 0;
        auto [next, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
        if (piece.empty() || ec != std::errc{} || next != piece.data() + piece.size()) {
            throw Error(Errc::ParseError, "bad address '" + std::string(text) + "'");
        }
        out.push_back(v);
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    if (out.size() != parts) {
        throw Error(Errc::ParseError, "bad address '" + std::string(text) + "'");
    }
    return out;
}

} // namespace

std::uint16_t ga_encode(unsigned main, unsigned middle, unsigned sub)
{
    if (main > 31 || middle > 7 || sub > 255) {
        throw Error(Errc::RangeError, "group address " + std::to_string(main) + '/' + std::to_string(middle) + '/' +
                                          std::to_string(sub));
    }
    return static_cast<std::uint16_t>(main << 11 | middle << 8 | sub);
}

std::uint16_t ga_encode(const GroupAddress& ga)
{
    return ga_encode(ga.main, ga.middle, ga.sub);
}

GroupAddress ga_decode(std::uint16_t raw) noexcept
{
    return GroupAddress{static_cast<std::uint8_t>(raw >> 11), static_cast<std::uint8_t>((raw >> 8) & 0x7),
                        static_cast<std::uint8_t>(raw & 0xFF)};
}

GroupAddress GroupAddress::parse(std::string_view text)
{
    const auto n = split_numbers(text, '/', 3);
    return ga_decode(ga_encode(n[0], n[1], n[2]));
}

std::string GroupAddress::str() const
{
    return std::to_string(main) + '/' + std::to_string(middle) + '/' + std::to_string(sub);
}

IndividualAddress IndividualAddress::parse(std::string_view text)
{
    const auto n = split_numbers(text, '.', 3);
    if (n[0] > 15 || n[1] > 15 || n[2] > 255) {
        throw Error(Errc::RangeError, "individual address " + std::string(text));
    }
    return IndividualAddress{static_cast<std::uint8_t>(n[0]), static_cast<std::uint8_t>(n[1]),
                             static_cast<std::uint8_t>(n[2])};
}

std::string IndividualAddress::str() const
{
    return std::to_string(area) + '.' + std::to_string(line) + '.' + std::to_string(device);
}

std::uint16_t dpt9_encode_raw(double value)
{
    if (!std::isfinite(value) || value < kDpt9Min || value > kDpt9Max) {
        throw Error(Errc::OutOfRange, "DPT9 value " + std::to_string(value));
    }
    const double scaled = value * 100.0;
    for (int exponent = 0; exponent <= 15; ++exponent) {
        const long long mantissa = std::llround(std::ldexp(scaled, -exponent));
        if (mantissa < -2048 || mantissa > 2047) {
            continue;
        }
        const auto raw = static_cast<std::uint16_t>((mantissa < 0 ? 0x8000 : 0) | exponent << 11 |
                                                    (static_cast<std::uint16_t>(mantissa) & 0x07FF));
        if (raw == kDpt9Invalid) {
            break;
        }
        return raw;
    }
    throw Error(Errc::OutOfRange, "DPT9 value " + std::to_string(value));
}

double dpt9_decode_raw(std::uint16_t raw)
{
    if (raw == kDpt9Invalid) {
        throw Error(Errc::InvalidEncoding, "DPT9 0x7FFF");
    }
    const int exponent = (raw >> 11) & 0xF;
    int mantissa = raw & 0x07FF;
    if (raw & 0x8000) {
        mantissa -= 2048;
    }
    return std::ldexp(0.01 * mantissa, exponent);
}

std::array<std::uint8_t, 2> dpt9_encode(double value)
{
    const auto raw = dpt9_encode_raw(value);
    return {static_cast<std::uint8_t>(raw >> 8), static_cast<std::uint8_t>(raw & 0xFF)};
}

double dpt9_decode(std::array<std::uint8_t, 2> bytes)
{
    return dpt9_decode_raw(static_cast<std::uint16_t>(bytes[0] << 8 | bytes[1]));
}

DptFamily dpt_family(std::string_view dpt)
{
    if (dpt.starts_with("1.")) return DptFamily::Boolean;
    if (dpt.starts_with("5.")) return DptFamily::UnsignedByte;
    if (dpt.starts_with("9.")) return DptFamily::Float16;
    throw Error(Errc::InvalidEncoding, "unsupported dpt '" + std::string(dpt) + "'");
}

std::size_t dpt_payload_size(std::string_view dpt)
{
    return dpt_family(dpt) == DptFamily::Float16 ? 2 : 1;
}

std::vector<std::uint8_t> encode_datapoint(const Datapoint& dp)
{
    switch (dpt_family(dp.dpt)) {
    case DptFamily::Boolean:
        if (!std::holds_alternative<bool>(dp.value)) break;
        return {static_cast<std::uint8_t>(std::get<bool>(dp.value) ? 1 : 0)};
    case DptFamily::UnsignedByte:
        if (!std::holds_alternative<std::uint8_t>(dp.value)) break;
        return {std::get<std::uint8_t>(dp.value)};
    case DptFamily::Float16: {
        if (!std::holds_alternative<double>(dp.value)) break;
        const auto b = dpt9_encode(std::get<double>(dp.value));
        return {b[0], b[1]};
    }
    }
    throw Error(Errc::InvalidEncoding, "value type does not fit dpt " + dp.dpt);
}

Datapoint decode_datapoint(std::string_view dpt, const std::vector<std::uint8_t>& payload)
{
    const auto family = dpt_family(dpt);
    if (payload.size() != dpt_payload_size(dpt)) {
        throw Error(Errc::InvalidEncoding, "payload length " + std::to_string(payload.size()) + " for dpt " +
                                               std::string(dpt));
    }
    switch (family) {
    case DptFamily::Boolean: return {std::string(dpt), (payload[0] & 0x01) != 0};
    case DptFamily::UnsignedByte: return {std::string(dpt), payload[0]};
    case DptFamily::Float16: return {std::string(dpt), dpt9_decode({payload[0], payload[1]})};
    }
    throw Error(Errc::InvalidEncoding, std::string(dpt));
}

std::string render_value(const Datapoint& dp)
{
    if (const auto* b = std::get_if<bool>(&dp.value)) {
        return *b ? "1" : "0";
    }
    if (const auto* u = std::get_if<std::uint8_t>(&dp.value)) {
        return std::to_string(*u);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", std::get<double>(dp.value));
    return buf;
}

Datapoint parse_value(std::string_view dpt, std::string_view text)
{
    switch (dpt_family(dpt)) {
    case DptFamily::Boolean:
        if (text == "1" || text == "on" || text == "true") return {std::string(dpt), true};
        if (text == "0" || text == "off" || text == "false") return {std::string(dpt), false};
        break;
    case DptFamily::UnsignedByte: {
        unsigned v = 0;
        auto [next, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec == std::errc{} && next == text.data() + text.size() && v <= 255) {
            return {std::string(dpt), static_cast<std::uint8_t>(v)};
        }
        break;
    }
    case DptFamily::Float16: {
        double v = 0;
        auto [next, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec == std::errc{} && next == text.data() + text.size()) {
            return {std::string(dpt), v};
        }
        break;
    }
    }
    throw Error(Errc::InvalidEncoding, "cannot parse '" + std::string(text) + "' as dpt " + std::string(dpt));
}

} // namespace fgiot::iot
