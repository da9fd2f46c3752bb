#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fgiot/core5g/core.hpp"
#include "fgiot/net/ipv4.hpp"

namespace fgiot::gateway {

enum class Action { Attach, Access, Internet, Manage };
enum class Effect { Permit, Deny, Manual };
enum class Scope { Local, Federated, Any };

std::string_view to_string(Action a) noexcept;
std::string_view to_string(Effect e) noexcept;
std::string_view to_string(Scope s) noexcept;
Action parse_action(std::string_view s);
Effect parse_effect(std::string_view s);
Scope parse_scope(std::string_view s);

/// Resource used for internet ("red side") grants.
inline constexpr std::string_view kRedSide = "red-side";

/// A set-valued subject attribute; nullopt stands for "*".
using AttrSet = std::optional<std::set<std::string>>;

struct Subject {
    AttrSet roles;
    AttrSet device_types;
    int min_posture = 0;
    AttrSet domains;
    bool require_active_subscription = false;
    bool require_vpn = false;
};

struct AuthorizationPolicy {
    std::string rule_id;
    std::uint32_t priority = 0; // lower is stronger
    Subject subject;
    Action action = Action::Access;
    std::string resource = "*";
    Effect effect = Effect::Deny;
    Scope scope = Scope::Any;
};

struct AccessRequest {
    core5g::SessionId session_id = 0;
    std::string imsi;
    core5g::DomainId domain;
    Action requested_action = Action::Attach;
    std::string resource = "*";
    bool via_federation = false;
    bool vpn_tunnel = false;
};

struct Permission {
    Action action = Action::Access;
    std::string resource;

    auto operator<=>(const Permission&) const = default;
};
using PermissionSet = std::set<Permission>;

struct AuthzDecision {
    Effect effect = Effect::Deny;
    std::string matched_rule = "default";
    std::optional<std::string> slice_id;
    std::vector<std::string> obligations;
    std::string reason;
};

struct ServiceEndpoint {
    net::Ipv4 ip;
    std::uint16_t port = 0;
    std::string proto = "tcp";
    std::string slice_id;
};
using ServiceCatalog = std::map<std::string, ServiceEndpoint>;

/// Rules plus the scenario data the gateway needs to act on them.
struct PolicySet {
    std::uint64_t version = 0;
    std::vector<AuthorizationPolicy> rules;
    std::map<std::string, std::string> role_slice_map;
    ServiceCatalog service_catalog;
};

/// Empty string when well-formed, else the first problem found.
std::string policy_problem(const AuthorizationPolicy& p);
void validate_policy(const AuthorizationPolicy& p);
void validate_policies(const std::vector<AuthorizationPolicy>& ps);

bool resource_matches(std::string_view pattern, std::string_view resource) noexcept;
bool policy_matches(const AuthorizationPolicy& p, const AccessRequest& req, const core5g::SubscriberContext& ctx) noexcept;

/// Winner is the lowest priority; ties resolve deny > manual > permit, then
/// the smallest rule_id. No match yields deny/"default".
AuthzDecision evaluate_access(const AccessRequest& req, const core5g::SubscriberContext& ctx,
                              const std::vector<AuthorizationPolicy>& policies);

/// Every (action, resource) pair the catalog makes grantable: access to each
/// service plus internet to the red side.
std::vector<Permission> catalog_pairs(const ServiceCatalog& catalog);

/// Pairs in the catalog that evaluate to permit for `ctx` requesting from `domain`.
PermissionSet permitted_pairs(const core5g::SubscriberContext& ctx, const core5g::DomainId& domain, bool via_federation,
                              bool vpn_tunnel, const std::vector<AuthorizationPolicy>& policies,
                              const ServiceCatalog& catalog);

/// Role lookup in sorted role order, then device type, then "default".
std::string resolve_slice(const core5g::SubscriberContext& ctx, const std::map<std::string, std::string>& role_slice_map);

} // namespace fgiot::gateway
