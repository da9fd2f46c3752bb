#include <doctest.h>

#include <cmath>
#include <random>

#include "fgiot/error.hpp"
#include "fgiot/iot/knx.hpp"
#include "oracles.hpp"

using namespace fgiot;
using namespace fgiot::iot;

TEST_CASE("group address packing")
{
    CHECK(ga_encode(0, 0, 0) == 0x0000);
    CHECK(ga_encode(1, 2, 3) == 0x0A03);
    CHECK(ga_encode(31, 7, 255) == 0xFFFF);
    CHECK(GroupAddress::parse("1/2/3").str() == "1/2/3");
    CHECK(ga_decode(0x0A03) == GroupAddress{1, 2, 3});
    CHECK_THROWS_AS(ga_encode(32, 0, 0), Error);
    CHECK_THROWS_AS(ga_encode(0, 8, 0), Error);
    CHECK_THROWS_AS(ga_encode(0, 0, 256), Error);
    CHECK_THROWS_AS(GroupAddress::parse("1/2"), Error);
}

TEST_CASE("group address formula over a grid")
{
    for (unsigned m = 0; m < 32; m += 5) {
        for (unsigned mid = 0; mid < 8; ++mid) {
            for (unsigned s = 0; s < 256; s += 17) {
                CHECK(ga_encode(m, mid, s) == oracle::ga_pack(m, mid, s));
            }
        }
    }
}

TEST_CASE("individual addresses")
{
    const auto ia = IndividualAddress::parse("1.1.10");
    CHECK(ia.str() == "1.1.10");
    CHECK(ia.raw() == 0x110A);
    CHECK_THROWS_AS(IndividualAddress::parse("16.0.1"), Error);
}

TEST_CASE("dpt9 reference encodings")
{
    CHECK(dpt9_encode_raw(0.0) == 0x0000);
    CHECK(dpt9_encode_raw(21.0) == 0x0C1A);
    CHECK(dpt9_encode_raw(-30.0) == 0x8A24);
    CHECK(oracle::dpt9_value(0x0C1A) == doctest::Approx(21.0));
    CHECK(oracle::dpt9_value(0x8A24) == doctest::Approx(-30.0));
    CHECK(dpt9_decode_raw(0x0C1A) == doctest::Approx(21.0));
    const auto b = dpt9_encode(21.0);
    CHECK(b[0] == 0x0C);
    CHECK(b[1] == 0x1A);
}

TEST_CASE("dpt9 range and reserved code")
{
    CHECK_NOTHROW(dpt9_encode_raw(kDpt9Max));
    CHECK_NOTHROW(dpt9_encode_raw(kDpt9Min));
    CHECK_THROWS_AS(dpt9_encode_raw(670433.29 + 1), Error);
    CHECK_THROWS_AS(dpt9_encode_raw(-671088.65 - 1), Error);
    try {
        dpt9_decode_raw(kDpt9Invalid);
        FAIL("0x7FFF must not decode");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InvalidEncoding);
    }
}

TEST_CASE("dpt9 decode agrees with the formula for every code")
{
    for (std::uint32_t raw = 0; raw <= 0xFFFF; ++raw) {
        if (raw == kDpt9Invalid) {
            continue;
        }
        REQUIRE(dpt9_decode_raw(static_cast<std::uint16_t>(raw)) == oracle::dpt9_value(static_cast<std::uint16_t>(raw)));
    }
}

TEST_CASE("dpt9 encoder picks the smallest exponent")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> dist(-5000.0, 5000.0);
    for (int i = 0; i < 2000; ++i) {
        const double v = dist(rng);
        const auto raw = dpt9_encode_raw(v);
        const int e = (raw >> 11) & 0xF;
        if (e > 0) {
            // the next smaller exponent cannot hold the mantissa
            const double m = std::round(v * 100.0 / std::pow(2.0, e - 1));
            CHECK((m > 2047 || m < -2048));
        }
    }
}

TEST_CASE("datapoint families")
{
    CHECK(encode_datapoint({"1.001", true}) == std::vector<std::uint8_t>{0x01});
    CHECK(encode_datapoint({"5.001", std::uint8_t{2}}) == std::vector<std::uint8_t>{0x02});
    CHECK(encode_datapoint({"9.008", 850.0}).size() == 2);
    CHECK(dpt_payload_size("1.001") == 1);
    CHECK(dpt_payload_size("9.001") == 2);
    CHECK_THROWS_AS(decode_datapoint("9.008", {0x01}), Error);
    CHECK_THROWS_AS(dpt_family("14.056"), Error);
}

TEST_CASE("text rendering is fixed-point with two decimals")
{
    CHECK(render_value(decode_datapoint("9.008", encode_datapoint({"9.008", 800.0}))) == "800.00");
    // 850 is not representable: 85000 / 2^6 rounds to mantissa 1328.
    CHECK(render_value(decode_datapoint("9.008", encode_datapoint({"9.008", 850.0}))) == "849.92");
    CHECK(render_value({"9.001", 21.0}) == "21.00");
    CHECK(render_value({"1.001", true}) == "1");
    CHECK(render_value({"5.001", std::uint8_t{7}}) == "7");
    CHECK(std::get<bool>(parse_value("1.001", "1").value));
    CHECK(std::get<std::uint8_t>(parse_value("5.001", "2").value) == 2);
    CHECK(std::get<double>(parse_value("9.008", "1100").value) == doctest::Approx(1100.0));
    CHECK_THROWS_AS(parse_value("1.001", "maybe"), Error);
}
