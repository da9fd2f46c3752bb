#pragma once

#include <vector>

#include "fgiot/gateway/policy.hpp"
#include "fgiot/pep/router.hpp"

namespace fgiot::gateway {

struct RouteProgram {
    std::vector<pep::RouteEntry> routes;
    std::vector<pep::AclRule> acls; // priorities local to this program: 10, 20, ...

    bool operator==(const RouteProgram&) const = default;
};

inline constexpr std::uint32_t kAclStep = 10;

/// Host routes for permitted services plus a per-source ACL block that
/// permits exactly the permitted (src, service) pairs, admits the red side
/// only when internet is granted, and ends in a deny-all for the source.
RouteProgram derive_route_program(net::Ipv4 session_ip, const PermissionSet& permitted, const ServiceCatalog& catalog);

/// Overload taking the permit decision; a non-permit decision is a
/// precondition violation reported as Unauthorized.
RouteProgram derive_route_program(net::Ipv4 session_ip, const AuthzDecision& decision, const PermissionSet& permitted,
                                  const ServiceCatalog& catalog);

} // namespace fgiot::gateway
