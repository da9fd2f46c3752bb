#pragma once

// Brute-force reference implementations. Each one is written from the
// definition, not from the production code, and favors obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "fgiot/gateway/policy.hpp"
#include "fgiot/pep/router.hpp"

namespace oracle {

using namespace fgiot;

inline bool prefix_contains(const net::Cidr& c, net::Ipv4 ip)
{
    for (unsigned bit = 0; bit < c.length; ++bit) {
        const unsigned shift = 31 - bit;
        if (((c.base.value >> shift) & 1u) != ((ip.value >> shift) & 1u)) {
            return false;
        }
    }
    return true;
}

/// Longest matching prefix by scanning every route; "drop" when none.
inline std::string lpm(const std::vector<pep::RouteEntry>& routes, net::Ipv4 dst)
{
    int best = -1;
    std::string hop = "drop";
    for (const auto& r : routes) {
        if (prefix_contains(r.prefix, dst) && static_cast<int>(r.prefix.length) > best) {
            best = static_cast<int>(r.prefix.length);
            hop = r.next_hop;
        }
    }
    return hop;
}

/// First match in priority order, default deny.
inline std::pair<pep::AclAction, std::optional<std::uint32_t>> first_match(std::vector<pep::AclRule> acls,
                                                                           const pep::FlowQuery& q)
{
    std::sort(acls.begin(), acls.end(), [](const auto& a, const auto& b) { return a.priority < b.priority; });
    for (const auto& a : acls) {
        const bool port_ok = !a.dst_port || *a.dst_port == q.dst_port;
        const bool proto_ok = a.proto == "*" || a.proto == q.proto;
        if (prefix_contains(a.src, q.src) && prefix_contains(a.dst, q.dst) && port_ok && proto_ok) {
            return {a.action, a.priority};
        }
    }
    return {pep::AclAction::Deny, std::nullopt};
}

/// Glob where only a trailing '*' is special.
inline bool glob(const std::string& pattern, const std::string& value)
{
    if (!pattern.empty() && pattern.back() == '*') {
        const auto stem = pattern.substr(0, pattern.size() - 1);
        return value.size() >= stem.size() && value.compare(0, stem.size(), stem) == 0;
    }
    return pattern == value;
}

inline bool subject_ok(const gateway::AuthorizationPolicy& p, const gateway::AccessRequest& req,
                       const core5g::SubscriberContext& ctx)
{
    const auto& s = p.subject;
    if (s.roles) {
        bool any = false;
        for (const auto& r : ctx.roles) {
            any = any || std::find(s.roles->begin(), s.roles->end(), r) != s.roles->end();
        }
        if (!any) {
            return false;
        }
    }
    if (s.device_types && std::find(s.device_types->begin(), s.device_types->end(), ctx.device_type) == s.device_types->end()) {
        return false;
    }
    if (s.domains && std::find(s.domains->begin(), s.domains->end(), req.domain) == s.domains->end()) {
        return false;
    }
    if (ctx.posture < s.min_posture) {
        return false;
    }
    if (s.require_active_subscription && !ctx.subscription_active) {
        return false;
    }
    if (s.require_vpn && !req.vpn_tunnel) {
        return false;
    }
    return true;
}

inline bool scope_ok(gateway::Scope s, bool federated)
{
    switch (s) {
    case gateway::Scope::Local:
        return !federated;
    case gateway::Scope::Federated:
        return federated;
    case gateway::Scope::Any:
        return true;
    }
    return false;
}

/// Rule scan: collect every matching rule, then rank them.
inline std::pair<gateway::Effect, std::string> evaluate(const gateway::AccessRequest& req,
                                                        const core5g::SubscriberContext& ctx,
                                                        const std::vector<gateway::AuthorizationPolicy>& rules)
{
    auto rank = [](gateway::Effect e) {
        return e == gateway::Effect::Deny ? 0 : e == gateway::Effect::Manual ? 1 : 2;
    };
    std::vector<std::tuple<std::uint32_t, int, std::string, gateway::Effect>> hits;
    for (const auto& p : rules) {
        if (p.action == req.requested_action && glob(p.resource, req.resource) && scope_ok(p.scope, req.via_federation) &&
            subject_ok(p, req, ctx)) {
            hits.emplace_back(p.priority, rank(p.effect), p.rule_id, p.effect);
        }
    }
    if (hits.empty()) {
        return {gateway::Effect::Deny, "default"};
    }
    std::sort(hits.begin(), hits.end());
    return {std::get<3>(hits.front()), std::get<2>(hits.front())};
}

/// Segment-wise topic filter matching straight from the MQTT definition.
inline bool topic_match(const std::string& filter, const std::string& topic)
{
    auto split = [](const std::string& s) {
        std::vector<std::string> out{""};
        for (char c : s) {
            if (c == '/') {
                out.emplace_back();
            } else {
                out.back() += c;
            }
        }
        return out;
    };
    const auto f = split(filter);
    const auto t = split(topic);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == "#") {
            return true;
        }
        if (i >= t.size()) {
            return false;
        }
        if (f[i] != "+" && f[i] != t[i]) {
            return false;
        }
    }
    return f.size() == t.size();
}

/// value = 0.01 * M * 2^E with sign bit, 4-bit exponent, 11-bit mantissa.
inline double dpt9_value(std::uint16_t raw)
{
    const int e = (raw >> 11) & 0x0F;
    int m = raw & 0x07FF;
    if (raw & 0x8000) {
        m -= 2048;
    }
    return 0.01 * m * std::pow(2.0, e);
}

inline std::uint16_t ga_pack(unsigned main, unsigned middle, unsigned sub)
{
    return static_cast<std::uint16_t>(main * 2048 + middle * 256 + sub);
}

} // namespace oracle
