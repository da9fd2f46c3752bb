#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fgiot/net/ipv4.hpp"

namespace fgiot::pep {

inline constexpr std::string_view kRedSide = "red-side";
inline constexpr std::string_view kDrop = "drop";

struct RouteEntry {
    net::Cidr prefix;
    std::string next_hop; // "svc:<name>" | "red-side" | "drop"

    bool operator==(const RouteEntry&) const = default;
};

enum class AclAction { Permit, Deny };

struct AclRule {
    std::uint32_t priority = 0;
    net::Cidr src;
    net::Cidr dst;
    std::optional<std::uint16_t> dst_port; // nullopt = "*"
    std::string proto = "*";               // "tcp" | "udp" | "*"
    AclAction action = AclAction::Deny;

    bool operator==(const AclRule&) const = default;
};

struct FlowQuery {
    net::Ipv4 src;
    net::Ipv4 dst;
    std::uint16_t dst_port = 0;
    std::string proto = "tcp";
};

struct FlowDecision {
    AclAction action = AclAction::Deny;
    std::optional<std::uint32_t> matched_priority; // nullopt = "default"
    std::string egress = "none";

    bool operator==(const FlowDecision&) const = default;
};

bool acl_matches(const AclRule& rule, const FlowQuery& q) noexcept;

/// Immutable, validated route and ACL tables. Lookups never observe a
/// partially built instance.
class Tables {
public:
    Tables() = default;
    /// Throws DuplicatePrefix / DuplicatePriority.
    Tables(std::vector<RouteEntry> routes, std::vector<AclRule> acls, std::uint64_t version);

    std::string lookup(net::Ipv4 dst) const;
    FlowDecision evaluate_flow(const FlowQuery& q) const;

    std::uint64_t version() const noexcept { return version_; }
    const std::vector<RouteEntry>& routes() const noexcept { return routes_; }
    const std::vector<AclRule>& acls() const noexcept { return acls_; }

    /// One entry per line: routes by (prefix length desc, prefix), then ACLs by priority.
    std::string dump() const;

private:
    std::vector<RouteEntry> routes_; // sorted longest prefix first
    // Per prefix length: masked base -> index into routes_.
    std::array<std::unordered_map<std::uint32_t, std::size_t>, 33> by_length_;
    std::uint64_t present_lengths_ = 0;
    std::vector<AclRule> acls_;      // sorted by priority
    std::uint64_t version_ = 0;
};

/// Policy enforcement point. apply_program swaps whole tables; concurrent
/// readers see either the old or the new snapshot, never a mixture.
class Router {
public:
    Router() : tables_(std::make_shared<const Tables>()) {}

    void apply_program(std::vector<RouteEntry> routes, std::vector<AclRule> acls, std::uint64_t version);

    std::string lookup(net::Ipv4 dst) const { return snapshot()->lookup(dst); }
    FlowDecision evaluate_flow(const FlowQuery& q) const { return snapshot()->evaluate_flow(q); }
    std::uint64_t installed_version() const { return snapshot()->version(); }
    std::string dump() const { return snapshot()->dump(); }

    std::shared_ptr<const Tables> snapshot() const
    {
        std::lock_guard lock(mutex_);
        return tables_;
    }

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const Tables> tables_;
};

std::string to_string(AclAction a);
std::string to_string(const RouteEntry& r);
std::string to_string(const AclRule& a);

} // namespace fgiot::pep
