#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fgiot/gateway/policy.hpp"
#include "fgiot/sim/kernel.hpp"

namespace fgiot::gateway {

using Key = std::array<std::uint8_t, 32>;
using Mac = std::array<std::uint8_t, 32>;

Key key_from_hex(std::string_view hex);
std::string to_hex(std::span<const std::uint8_t> bytes);

Mac hmac_sha256(const Key& key, std::span<const std::uint8_t> message);

struct AccessToken {
    std::string token_id;
    std::string imsi;
    core5g::DomainId domain;
    std::set<std::string> roles;
    PermissionSet permitted;
    sim::Timestamp issued_at = 0;
    sim::Timestamp expires_at = 0;
    Mac mac{};
};

struct ContinuityToken {
    std::uint64_t service_session_id = 0;
    core5g::DomainId issued_in;

    bool operator==(const ContinuityToken&) const = default;
};

struct FederationAssertion {
    std::string imsi;
    core5g::DomainId home_domain;
    std::set<std::string> roles;
    int posture = 0;
    PermissionSet permitted;
    ContinuityToken continuity;
    sim::Timestamp expires_at = 0;
    Mac mac{};
};

/// Canonical byte strings covered by the MAC. Layout is documented in
/// docs/wire-format.md and must not change without bumping the tag.
std::vector<std::uint8_t> canonical_bytes(const AccessToken& t);
std::vector<std::uint8_t> canonical_bytes(const FederationAssertion& a);

void seal(AccessToken& t, const Key& key);
void seal(FederationAssertion& a, const Key& key);

bool mac_valid(const AccessToken& t, const Key& key);
bool mac_valid(const FederationAssertion& a, const Key& key);

/// True iff the MAC verifies and now < expires_at.
bool verify_token(const AccessToken& t, const Key& key, sim::Timestamp now);

} // namespace fgiot::gateway
