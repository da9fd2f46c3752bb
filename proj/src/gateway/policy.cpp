#include "fgiot/gateway/policy.hpp"

#include <algorithm>

#include "fgiot/error.hpp"

namespace fgiot::gateway {

std::string_view to_string(Action a) noexcept
{
    switch (a) {
    case Action::Attach: return "attach";
    case Action::Access: return "access";
    case Action::Internet: return "internet";
    case Action::Manage: return "manage";
    }
    return "?";
}

std::string_view to_string(Effect e) noexcept
{
    switch (e) {
    case Effect::Permit: return "permit";
    case Effect::Deny: return "deny";
    case Effect::Manual: return "manual";
    }
    return "?";
}

std::string_view to_string(Scope s) noexcept
{
    switch (s) {
    case Scope::Local: return "local";
    case Scope::Federated: return "federated";
    case Scope::Any: return "any";
    }
    return "?";
}

Action parse_action(std::string_view s)
{
    if (s == "attach") return Action::Attach;
    if (s == "access") return Action::Access;
    if (s == "internet") return Action::Internet;
    if (s == "manage") return Action::Manage;
    throw Error(Errc::MalformedPolicy, "unknown action '" + std::string(s) + "'");
}

Effect parse_effect(std::string_view s)
{
    if (s == "permit") return Effect::Permit;
    if (s == "deny") return Effect::Deny;
    if (s == "manual") return Effect::Manual;
    throw Error(Errc::MalformedPolicy, "unknown effect '" + std::string(s) + "'");
}

Scope parse_scope(std::string_view s)
{
    if (s == "local") return Scope::Local;
    if (s == "federated") return Scope::Federated;
    if (s == "any") return Scope::Any;
    throw Error(Errc::MalformedPolicy, "unknown scope '" + std::string(s) + "'");
}

std::string policy_problem(const AuthorizationPolicy& p)
{
    if (p.rule_id.empty()) {
        return "empty rule_id";
    }
    if (p.priority >= (1u << 16)) {
        return "rule " + p.rule_id + ": priority must be < 65536";
    }
    const auto star = p.resource.find('*');
    if (star != std::string::npos && star != p.resource.size() - 1) {
        return "rule " + p.rule_id + ": resource pattern '" + p.resource + "' may only end with '*'";
    }
    if (p.resource.empty()) {
        return "rule " + p.rule_id + ": empty resource";
    }
    if (p.subject.min_posture < 0 || p.subject.min_posture > 3) {
        return "rule " + p.rule_id + ": min_posture outside 0..3";
    }
    return {};
}

void validate_policy(const AuthorizationPolicy& p)
{
    if (auto problem = policy_problem(p); !problem.empty()) {
        throw Error(Errc::MalformedPolicy, problem);
    }
}

void validate_policies(const std::vector<AuthorizationPolicy>& ps)
{
    std::set<std::string> ids;
    for (const auto& p : ps) {
        validate_policy(p);
        if (!ids.insert(p.rule_id).second) {
            throw Error(Errc::MalformedPolicy, "duplicate rule_id " + p.rule_id);
        }
    }
}

bool resource_matches(std::string_view pattern, std::string_view resource) noexcept
{
    if (!pattern.empty() && pattern.back() == '*') {
        pattern.remove_suffix(1);
        return resource.substr(0, pattern.size()) == pattern;
    }
    return pattern == resource;
}

namespace {

bool contains(const AttrSet& set, const std::string& value)
{
    return !set || set->contains(value);
}

bool intersects(const AttrSet& set, const std::set<std::string>& values)
{
    if (!set) {
        return true;
    }
    return std::any_of(values.begin(), values.end(), [&](const auto& v) { return set->contains(v); });
}

int effect_strength(Effect e)
{
    switch (e) {
    case Effect::Deny: return 0;
    case Effect::Manual: return 1;
    case Effect::Permit: return 2;
    }
    return 3;
}

} // namespace

bool policy_matches(const AuthorizationPolicy& p, const AccessRequest& req, const core5g::SubscriberContext& ctx) noexcept
{
    const auto& s = p.subject;
    if (p.action != req.requested_action || !resource_matches(p.resource, req.resource)) {
        return false;
    }
    if (p.scope == Scope::Local && req.via_federation) {
        return false;
    }
    if (p.scope == Scope::Federated && !req.via_federation) {
        return false;
    }
    if (!intersects(s.roles, ctx.roles) || !contains(s.device_types, ctx.device_type) ||
        !contains(s.domains, req.domain)) {
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

AuthzDecision evaluate_access(const AccessRequest& req, const core5g::SubscriberContext& ctx,
                              const std::vector<AuthorizationPolicy>& policies)
{
    const AuthorizationPolicy* best = nullptr;
    for (const auto& p : policies) {
        validate_policy(p);
        if (!policy_matches(p, req, ctx)) {
            continue;
        }
        if (best == nullptr || p.priority < best->priority ||
            (p.priority == best->priority &&
             (effect_strength(p.effect) < effect_strength(best->effect) ||
              (p.effect == best->effect && p.rule_id < best->rule_id)))) {
            best = &p;
        }
    }
    AuthzDecision d;
    if (best == nullptr) {
        d.reason = "no matching rule";
        return d;
    }
    d.effect = best->effect;
    d.matched_rule = best->rule_id;
    return d;
}

std::vector<Permission> catalog_pairs(const ServiceCatalog& catalog)
{
    std::vector<Permission> out;
    for (const auto& [name, ep] : catalog) {
        out.push_back({Action::Access, name});
    }
    out.push_back({Action::Internet, std::string(kRedSide)});
    return out;
}

PermissionSet permitted_pairs(const core5g::SubscriberContext& ctx, const core5g::DomainId& domain, bool via_federation,
                              bool vpn_tunnel, const std::vector<AuthorizationPolicy>& policies,
                              const ServiceCatalog& catalog)
{
    PermissionSet out;
    for (const auto& pair : catalog_pairs(catalog)) {
        AccessRequest req;
        req.imsi = ctx.imsi;
        req.domain = domain;
        req.requested_action = pair.action;
        req.resource = pair.resource;
        req.via_federation = via_federation;
        req.vpn_tunnel = vpn_tunnel;
        if (evaluate_access(req, ctx, policies).effect == Effect::Permit) {
            out.insert(pair);
        }
    }
    return out;
}

std::string resolve_slice(const core5g::SubscriberContext& ctx, const std::map<std::string, std::string>& role_slice_map)
{
    for (const auto& role : ctx.roles) {
        if (auto it = role_slice_map.find(role); it != role_slice_map.end()) {
            return it->second;
        }
    }
    if (auto it = role_slice_map.find(ctx.device_type); it != role_slice_map.end()) {
        return it->second;
    }
    return "default";
}

} // namespace fgiot::gateway
