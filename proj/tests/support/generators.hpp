#pragma once

// Random inputs for property tests. All draws come from a caller-owned
// engine so every failure is reproducible from its seed.

#include <random>
#include <string>
#include <vector>

#include "fgiot/gateway/policy.hpp"

namespace gen {

using namespace fgiot;
using Rng = std::mt19937_64;

inline const std::vector<std::string> kRoles{"r0", "r1", "r2", "r3", "r4"};
inline const std::vector<std::string> kDeviceTypes{"ue", "iot", "cam"};
inline const std::vector<std::string> kDomains{"private", "public"};
inline const std::vector<std::string> kServices{"svc-a", "svc-b", "svc-c", "web-d"};

inline bool chance(Rng& rng, int percent) { return static_cast<int>(rng() % 100) < percent; }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v)
{
    return v[rng() % v.size()];
}

inline gateway::AttrSet attr(Rng& rng, const std::vector<std::string>& pool, int wildcard_percent)
{
    if (chance(rng, wildcard_percent)) {
        return std::nullopt;
    }
    std::set<std::string> out;
    const auto n = 1 + rng() % 2;
    for (std::size_t i = 0; i < n; ++i) {
        out.insert(pick(rng, pool));
    }
    return out;
}

inline std::string resource(Rng& rng, gateway::Action action)
{
    switch (action) {
    case gateway::Action::Internet:
        return chance(rng, 80) ? std::string(gateway::kRedSide) : "*";
    case gateway::Action::Attach:
        return "*";
    default:
        break;
    }
    const auto r = rng() % 10;
    if (r < 2) {
        return "*";
    }
    if (r < 4) {
        return "svc-*";
    }
    return pick(rng, kServices);
}

struct RuleOptions {
    int manual_percent = 0;
    int scope_any_percent = 60;
    bool attach_rules = true;
};

inline gateway::AuthorizationPolicy rule(Rng& rng, int index, const RuleOptions& opt = {})
{
    gateway::AuthorizationPolicy p;
    p.rule_id = "rule-" + std::to_string(index);
    p.priority = static_cast<std::uint32_t>(rng() % 12);
    p.subject.roles = attr(rng, kRoles, 25);
    p.subject.device_types = attr(rng, kDeviceTypes, 70);
    p.subject.domains = attr(rng, kDomains, 70);
    p.subject.min_posture = static_cast<int>(rng() % 3);
    p.subject.require_active_subscription = chance(rng, 20);
    p.subject.require_vpn = chance(rng, 10);
    const auto a = rng() % 10;
    p.action = a < (opt.attach_rules ? 2u : 0u) ? gateway::Action::Attach
               : a < 8                          ? gateway::Action::Access
               : a < 9                          ? gateway::Action::Internet
                                                : gateway::Action::Manage;
    p.resource = resource(rng, p.action);
    p.effect = chance(rng, opt.manual_percent) ? gateway::Effect::Manual
               : chance(rng, 65)               ? gateway::Effect::Permit
                                               : gateway::Effect::Deny;
    p.scope = chance(rng, opt.scope_any_percent) ? gateway::Scope::Any
              : chance(rng, 50)                  ? gateway::Scope::Local
                                                 : gateway::Scope::Federated;
    return p;
}

inline std::vector<gateway::AuthorizationPolicy> rules(Rng& rng, std::size_t n, const RuleOptions& opt = {})
{
    std::vector<gateway::AuthorizationPolicy> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(rule(rng, static_cast<int>(i), opt));
    }
    return out;
}

inline core5g::SubscriberContext context(Rng& rng, const std::string& imsi = "001010000000001")
{
    core5g::SubscriberContext c;
    c.imsi = imsi;
    c.subscription_active = chance(rng, 85);
    c.device_type = pick(rng, kDeviceTypes);
    c.posture = static_cast<int>(rng() % 4);
    const auto n = rng() % 3;
    for (std::size_t i = 0; i < n; ++i) {
        c.roles.insert(pick(rng, kRoles));
    }
    c.home_domain = pick(rng, kDomains);
    return c;
}

inline gateway::AccessRequest request(Rng& rng)
{
    gateway::AccessRequest r;
    r.session_id = 1 + rng() % 1000;
    r.imsi = "001010000000001";
    r.domain = pick(rng, kDomains);
    const auto a = rng() % 4;
    r.requested_action = static_cast<gateway::Action>(a);
    r.resource = r.requested_action == gateway::Action::Internet ? std::string(gateway::kRedSide)
                 : r.requested_action == gateway::Action::Attach ? "*"
                                                                 : pick(rng, kServices);
    r.via_federation = chance(rng, 30);
    r.vpn_tunnel = chance(rng, 30);
    return r;
}

inline gateway::ServiceCatalog catalog()
{
    gateway::ServiceCatalog c;
    std::uint32_t host = 10;
    for (const auto& s : kServices) {
        c[s] = gateway::ServiceEndpoint{net::Ipv4{0x0A0A0000u + host}, static_cast<std::uint16_t>(8000 + host), "tcp",
                                        "slice-" + s};
        host += 10;
    }
    return c;
}

} // namespace gen
