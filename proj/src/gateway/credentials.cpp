#include "fgiot/gateway/credentials.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "fgiot/error.hpp"

namespace fgiot::gateway {

namespace {

class Writer {
public:
    void bytes(std::string_view s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }

    void u64(std::uint64_t v)
    {
        u32(8);
        for (int shift = 56; shift >= 0; shift -= 8) {
            out_.push_back(static_cast<std::uint8_t>(v >> shift));
        }
    }

    void strings(const std::set<std::string>& set)
    {
        Writer inner;
        inner.u32(static_cast<std::uint32_t>(set.size()));
        for (const auto& s : set) {
            inner.bytes(s);
        }
        nested(inner);
    }

    void permissions(const PermissionSet& set)
    {
        Writer inner;
        inner.u32(static_cast<std::uint32_t>(set.size()));
        for (const auto& p : set) {
            Writer pair;
            pair.bytes(to_string(p.action));
            pair.bytes(p.resource);
            inner.nested(pair);
        }
        nested(inner);
    }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    void u32(std::uint32_t v)
    {
        for (int shift = 24; shift >= 0; shift -= 8) {
            out_.push_back(static_cast<std::uint8_t>(v >> shift));
        }
    }

    void nested(const Writer& inner)
    {
        u32(static_cast<std::uint32_t>(inner.out_.size()));
        out_.insert(out_.end(), inner.out_.begin(), inner.out_.end());
    }

    std::vector<std::uint8_t> out_;
};

} // namespace

Key key_from_hex(std::string_view hex)
{
    if (hex.size() != 64) {
        throw Error(Errc::ParseError, "key must be 64 hex characters");
    }
    Key key{};
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    for (std::size_t i = 0; i < key.size(); ++i) {
        const int hi = nibble(hex[2 * i]);
        const int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw Error(Errc::ParseError, "non-hex character in key");
        }
        key[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return key;
}

std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out += digits[b >> 4];
        out += digits[b & 0xF];
    }
    return out;
}

Mac hmac_sha256(const Key& key, std::span<const std::uint8_t> message)
{
    Mac mac{};
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), message.data(), message.size(), mac.data(), &len) ==
            nullptr ||
        len != mac.size()) {
        throw std::runtime_error("HMAC-SHA256 failed");
    }
    return mac;
}

std::vector<std::uint8_t> canonical_bytes(const AccessToken& t)
{
    Writer w;
    w.bytes("fgiot-access-token/1");
    w.bytes(t.token_id);
    w.bytes(t.imsi);
    w.bytes(t.domain);
    w.strings(t.roles);
    w.permissions(t.permitted);
    w.u64(t.issued_at);
    w.u64(t.expires_at);
    return w.take();
}

std::vector<std::uint8_t> canonical_bytes(const FederationAssertion& a)
{
    Writer w;
    w.bytes("fgiot-federation-assertion/1");
    w.bytes(a.imsi);
    w.bytes(a.home_domain);
    w.strings(a.roles);
    w.u64(static_cast<std::uint64_t>(a.posture));
    w.permissions(a.permitted);
    w.u64(a.continuity.service_session_id);
    w.bytes(a.continuity.issued_in);
    w.u64(a.expires_at);
    return w.take();
}

void seal(AccessToken& t, const Key& key)
{
    t.mac = hmac_sha256(key, canonical_bytes(t));
}

void seal(FederationAssertion& a, const Key& key)
{
    a.mac = hmac_sha256(key, canonical_bytes(a));
}

bool mac_valid(const AccessToken& t, const Key& key)
{
    const auto expected = hmac_sha256(key, canonical_bytes(t));
    return CRYPTO_memcmp(expected.data(), t.mac.data(), expected.size()) == 0;
}

bool mac_valid(const FederationAssertion& a, const Key& key)
{
    const auto expected = hmac_sha256(key, canonical_bytes(a));
    return CRYPTO_memcmp(expected.data(), a.mac.data(), expected.size()) == 0;
}

bool verify_token(const AccessToken& t, const Key& key, sim::Timestamp now)
{
    return t.expires_at > t.issued_at && now < t.expires_at && mac_valid(t, key);
}

} // namespace fgiot::gateway
