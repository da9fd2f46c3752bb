#include "fgiot/gateway/route_program.hpp"

#include "fgiot/error.hpp"

namespace fgiot::gateway {

namespace {

const std::vector<net::Cidr>& internal_ranges()
{
    static const std::vector<net::Cidr> ranges{net::Cidr::parse("10.0.0.0/8"), net::Cidr::parse("172.16.0.0/12"),
                                               net::Cidr::parse("192.168.0.0/16")};
    return ranges;
}

} // namespace

RouteProgram derive_route_program(net::Ipv4 session_ip, const PermissionSet& permitted, const ServiceCatalog& catalog)
{
    RouteProgram prog;
    const auto src = net::Cidr::host(session_ip);
    std::uint32_t prio = 0;
    auto next_prio = [&] { return prio += kAclStep; };

    bool internet = false;
    for (const auto& perm : permitted) {
        if (perm.action == Action::Internet) {
            internet = internet || perm.resource == kRedSide;
            continue;
        }
        if (perm.action != Action::Access) {
            continue;
        }
        auto it = catalog.find(perm.resource);
        if (it == catalog.end()) {
            throw Error(Errc::UnknownService, perm.resource);
        }
        const auto& ep = it->second;
        prog.routes.push_back({net::Cidr::host(ep.ip), "svc:" + perm.resource});
        prog.acls.push_back({next_prio(), src, net::Cidr::host(ep.ip), ep.port, ep.proto, pep::AclAction::Permit});
    }
    if (internet) {
        for (const auto& range : internal_ranges()) {
            prog.acls.push_back({next_prio(), src, range, std::nullopt, "*", pep::AclAction::Deny});
        }
        prog.acls.push_back({next_prio(), src, net::Cidr::any(), std::nullopt, "*", pep::AclAction::Permit});
        prog.routes.push_back({net::Cidr::any(), std::string(pep::kRedSide)});
    }
    prog.acls.push_back({next_prio(), src, net::Cidr::any(), std::nullopt, "*", pep::AclAction::Deny});
    return prog;
}

RouteProgram derive_route_program(net::Ipv4 session_ip, const AuthzDecision& decision, const PermissionSet& permitted,
                                  const ServiceCatalog& catalog)
{
    if (decision.effect != Effect::Permit) {
        throw Error(Errc::Unauthorized, "route program requires a permit decision");
    }
    return derive_route_program(session_ip, permitted, catalog);
}

} // namespace fgiot::gateway
