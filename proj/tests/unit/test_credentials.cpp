#include <doctest.h>

#include <openssl/sha.h>

#include "fgiot/error.hpp"
#include "fgiot/gateway/credentials.hpp"

using namespace fgiot;
using namespace fgiot::gateway;

namespace {

Key key_of(std::string_view text)
{
    Key k{};
    std::copy(text.begin(), text.end(), k.begin());
    return k;
}

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

/// HMAC from its definition over plain SHA-256.
Mac reference_hmac(const Key& key, const std::vector<std::uint8_t>& msg)
{
    std::array<std::uint8_t, 64> ipad{};
    std::array<std::uint8_t, 64> opad{};
    for (std::size_t i = 0; i < 64; ++i) {
        const std::uint8_t k = i < key.size() ? key[i] : 0;
        ipad[i] = k ^ 0x36;
        opad[i] = k ^ 0x5c;
    }
    std::vector<std::uint8_t> inner(ipad.begin(), ipad.end());
    inner.insert(inner.end(), msg.begin(), msg.end());
    std::array<std::uint8_t, 32> ih{};
    SHA256(inner.data(), inner.size(), ih.data());
    std::vector<std::uint8_t> outer(opad.begin(), opad.end());
    outer.insert(outer.end(), ih.begin(), ih.end());
    Mac out{};
    SHA256(outer.data(), outer.size(), out.data());
    return out;
}

void frame(std::vector<std::uint8_t>& out, std::string_view s)
{
    const auto n = static_cast<std::uint32_t>(s.size());
    out.insert(out.end(), {std::uint8_t(n >> 24), std::uint8_t(n >> 16), std::uint8_t(n >> 8), std::uint8_t(n)});
    out.insert(out.end(), s.begin(), s.end());
}

} // namespace

TEST_CASE("HMAC-SHA256 known answer (key zero-padded to 32 bytes)")
{
    const auto mac = hmac_sha256(key_of("Jefe"), bytes_of("what do ya want for nothing?"));
    CHECK(to_hex(mac) == "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST_CASE("HMAC agrees with the definition")
{
    const auto key = key_from_hex("6b1f0c2e9a4d7385f0e1b2c3d4a5968778695a4b3c2d1e0f1a2b3c4d5e6f7081");
    for (std::size_t n : {0u, 1u, 63u, 64u, 65u, 1000u}) {
        std::vector<std::uint8_t> msg(n);
        for (std::size_t i = 0; i < n; ++i) {
            msg[i] = static_cast<std::uint8_t>(i * 7 + 3);
        }
        CHECK(hmac_sha256(key, msg) == reference_hmac(key, msg));
    }
}

TEST_CASE("hex keys")
{
    CHECK_THROWS_AS(key_from_hex("abcd"), Error);
    CHECK_THROWS_AS(key_from_hex(std::string(63, 'a') + "g"), Error);
    const auto k = key_from_hex(std::string(62, '0') + "Ff");
    CHECK(k[31] == 0xFF);
}

TEST_CASE("access token canonical framing")
{
    AccessToken t;
    t.token_id = "ab";
    t.imsi = "1";
    t.domain = "d";
    t.roles = {"x"};
    t.permitted = {{Action::Access, "s"}};
    t.issued_at = 1;
    t.expires_at = 2;

    std::vector<std::uint8_t> want;
    frame(want, "fgiot-access-token/1");
    frame(want, "ab");
    frame(want, "1");
    frame(want, "d");
    // roles: nested frame { count=1, "x" }
    want.insert(want.end(), {0, 0, 0, 9, 0, 0, 0, 1, 0, 0, 0, 1, 'x'});
    // permissions: nested frame { count=1, frame{ "access", "s" } }
    want.insert(want.end(), {0, 0, 0, 23, 0, 0, 0, 1, 0, 0, 0, 15});
    frame(want, "access");
    frame(want, "s");
    want.insert(want.end(), {0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0, 1});
    want.insert(want.end(), {0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0, 2});
    CHECK(canonical_bytes(t) == want);
}

TEST_CASE("sealed tokens verify until expiry and detect tampering")
{
    const auto key = key_of("domain-key");
    AccessToken t;
    t.token_id = "0011223344556677";
    t.imsi = "001010000000001";
    t.domain = "private";
    t.roles = {"shed-manager"};
    t.permitted = {{Action::Access, "home-assistant"}};
    t.issued_at = 100;
    t.expires_at = 200;
    seal(t, key);
    CHECK(verify_token(t, key, 100));
    CHECK(verify_token(t, key, 199));
    CHECK_FALSE(verify_token(t, key, 200)); // expiry is exclusive
    CHECK_FALSE(verify_token(t, key_of("other-key"), 150));
    auto forged = t;
    forged.permitted.insert({Action::Internet, "red-side"});
    CHECK_FALSE(verify_token(forged, key, 150));
    auto backdated = t;
    backdated.expires_at = 100;
    seal(backdated, key);
    CHECK_FALSE(verify_token(backdated, key, 100));
}

TEST_CASE("assertion MAC covers every field")
{
    const auto key = key_of("federation");
    FederationAssertion a;
    a.imsi = "001010000000001";
    a.home_domain = "private";
    a.roles = {"shed-manager"};
    a.posture = 3;
    a.permitted = {{Action::Access, "home-assistant"}};
    a.continuity = {42, "private"};
    a.expires_at = 30000;
    seal(a, key);
    CHECK(mac_valid(a, key));
    auto b = a;
    b.posture = 2;
    CHECK_FALSE(mac_valid(b, key));
    b = a;
    b.continuity.service_session_id = 43;
    CHECK_FALSE(mac_valid(b, key));
    b = a;
    b.roles.insert("installer");
    CHECK_FALSE(mac_valid(b, key));
}
