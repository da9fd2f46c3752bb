#include "fgiot/pep/router.hpp"

#include <algorithm>
#include <set>

#include "fgiot/error.hpp"

namespace fgiot::pep {

bool acl_matches(const AclRule& rule, const FlowQuery& q) noexcept
{
    return rule.src.contains(q.src) && rule.dst.contains(q.dst) && (!rule.dst_port || *rule.dst_port == q.dst_port) &&
           (rule.proto == "*" || rule.proto == q.proto);
}

Tables::Tables(std::vector<RouteEntry> routes, std::vector<AclRule> acls, std::uint64_t version)
    : routes_(std::move(routes)), acls_(std::move(acls)), version_(version)
{
    std::sort(routes_.begin(), routes_.end(), [](const RouteEntry& a, const RouteEntry& b) {
        if (a.prefix.length != b.prefix.length) {
            return a.prefix.length > b.prefix.length;
        }
        return a.prefix.base < b.prefix.base;
    });
    for (std::size_t i = 1; i < routes_.size(); ++i) {
        if (routes_[i].prefix == routes_[i - 1].prefix) {
            throw Error(Errc::DuplicatePrefix, routes_[i].prefix.str());
        }
    }
    for (std::size_t i = 0; i < routes_.size(); ++i) {
        const auto& p = routes_[i].prefix;
        by_length_[p.length].emplace(p.base.value, i);
        present_lengths_ |= std::uint64_t{1} << p.length;
    }
    std::stable_sort(acls_.begin(), acls_.end(),
                     [](const AclRule& a, const AclRule& b) { return a.priority < b.priority; });
    for (std::size_t i = 1; i < acls_.size(); ++i) {
        if (acls_[i].priority == acls_[i - 1].priority) {
            throw Error(Errc::DuplicatePriority, std::to_string(acls_[i].priority));
        }
    }
}

std::string Tables::lookup(net::Ipv4 dst) const
{
    for (int len = 32; len >= 0; --len) {
        if ((present_lengths_ & (std::uint64_t{1} << len)) == 0) {
            continue;
        }
        const net::Cidr probe{dst, static_cast<std::uint8_t>(len)};
        const auto& bucket = by_length_[len];
        if (auto it = bucket.find(dst.value & probe.mask()); it != bucket.end()) {
            return routes_[it->second].next_hop;
        }
    }
    return std::string(kDrop);
}

FlowDecision Tables::evaluate_flow(const FlowQuery& q) const
{
    for (const auto& acl : acls_) {
        if (!acl_matches(acl, q)) {
            continue;
        }
        FlowDecision d;
        d.action = acl.action;
        d.matched_priority = acl.priority;
        if (acl.action == AclAction::Permit) {
            d.egress = lookup(q.dst);
        }
        return d;
    }
    return FlowDecision{};
}

std::string to_string(AclAction a)
{
    return a == AclAction::Permit ? "permit" : "deny";
}

std::string to_string(const RouteEntry& r)
{
    return "route " + r.prefix.str() + " -> " + r.next_hop;
}

std::string to_string(const AclRule& a)
{
    return "acl " + std::to_string(a.priority) + ' ' + to_string(a.action) + " src " + a.src.str() + " dst " +
           a.dst.str() + " port " + (a.dst_port ? std::to_string(*a.dst_port) : std::string("*")) + " proto " + a.proto;
}

std::string Tables::dump() const
{
    std::string out = "version " + std::to_string(version_) + '\n';
    for (const auto& r : routes_) {
        out += to_string(r) + '\n';
    }
    for (const auto& a : acls_) {
        out += to_string(a) + '\n';
    }
    return out;
}

void Router::apply_program(std::vector<RouteEntry> routes, std::vector<AclRule> acls, std::uint64_t version)
{
    // Validation happens while building; a throw leaves the old tables installed.
    auto next = std::make_shared<const Tables>(std::move(routes), std::move(acls), version);
    std::lock_guard lock(mutex_);
    tables_ = std::move(next);
}

} // namespace fgiot::pep
