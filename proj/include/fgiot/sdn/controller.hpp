#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fgiot/gateway/gateway.hpp"
#include "fgiot/gateway/policy.hpp"
#include "fgiot/pep/router.hpp"
#include "fgiot/sim/kernel.hpp"

namespace fgiot::sdn {

using CanonicalPolicySet = gateway::PolicySet;

struct SessionView {
    std::vector<gateway::SessionRecord> entries;
    sim::Timestamp as_of = 0;
    std::vector<core5g::DomainId> unreachable;
};

/// Complete table set for one PEP. Ordering is canonical so equal inputs
/// render to identical bytes.
struct EnforcementProgram {
    std::vector<pep::RouteEntry> routes;
    std::vector<pep::AclRule> acls;

    std::string render() const;
    bool operator==(const EnforcementProgram&) const = default;
};

inline constexpr std::uint32_t kSessionBlock = 10'000;
inline constexpr std::uint32_t kGlobalDenyPriority = 0xFFFFFFFFu;

/// Program for `domain`: static service routes, one ACL block per active
/// session (ordered by session IP) and a global default deny.
EnforcementProgram compile_enforcement(const SessionView& view, const CanonicalPolicySet& policies,
                                       const core5g::DomainId& domain);
std::map<core5g::DomainId, EnforcementProgram> compile_enforcement(const SessionView& view,
                                                                   const CanonicalPolicySet& policies,
                                                                   const std::vector<core5g::DomainId>& domains);

struct ControllerConfig {
    sim::Timestamp reconcile_period_ms = 1000;
    sim::Timestamp retry_backoff_ms = 500;
    int max_retries = 10;
};

struct DomainState {
    gateway::Gateway* gateway = nullptr;
    pep::Router* pep = nullptr;
    std::uint64_t applied_policy_version = 0;
    int outstanding_pushes = 0;
    int drops_pending = 0;  // fault injection: pushes to discard
    bool reachable = true;  // fault injection: domain down
};

struct AuditRecord {
    std::uint64_t version = 0;
    std::string actor;
    std::string description;
    sim::Timestamp ts = 0;
    bool concurrent = false;
};

using PolicyMutation = std::function<void(CanonicalPolicySet&)>;

/// Federation SDN controller. All state changes run on the kernel loop.
class Controller {
public:
    Controller(sim::Kernel& kernel, CanonicalPolicySet initial, ControllerConfig config = {});

    void register_domain(gateway::Gateway& gw, pep::Router& router);
    /// Schedules the initial push to every domain and the periodic reconcile.
    void start();

    const CanonicalPolicySet& policies() const noexcept { return *canonical_; }
    std::uint64_t version() const noexcept { return canonical_->version; }
    const std::map<core5g::DomainId, DomainState>& registry() const noexcept { return domains_; }
    const std::vector<AuditRecord>& audit() const noexcept { return audit_; }
    const ControllerConfig& config() const noexcept { return config_; }

    /// Applies `mutation` to a copy; on success bumps the version by one and
    /// schedules a push to every domain. MalformedPolicy leaves state untouched.
    std::uint64_t update_policies(const std::string& actor, const std::string& description, const PolicyMutation& mutation);
    std::uint64_t add_rule(const std::string& actor, gateway::AuthorizationPolicy rule);
    std::uint64_t remove_rule(const std::string& actor, const std::string& rule_id);

    SessionView poll_sessions();

    /// Installs `program` on the domain's PEP and `policies` on its gateway.
    /// Throws DomainUnreachable for unknown, down or fault-dropped domains.
    void push_program(const core5g::DomainId& domain, const EnforcementProgram& program,
                      const CanonicalPolicySet& policies);

    /// Schedules a compile-and-push to `domain` carrying the current canonical set.
    void schedule_push(const core5g::DomainId& domain, const std::string& reason);

    std::vector<std::pair<core5g::DomainId, std::string>> reconcile();
    bool converged() const;

    void inject_push_drops(const core5g::DomainId& domain, int count);
    void set_reachable(const core5g::DomainId& domain, bool reachable);

    gateway::Gateway* gateway_for(const core5g::DomainId& domain) const;
    std::vector<core5g::DomainId> domain_ids() const;

private:
    void deliver_push(const core5g::DomainId& domain, std::shared_ptr<const CanonicalPolicySet> snapshot,
                      std::string reason, int attempt);
    void reconcile_tick();

    sim::Kernel& kernel_;
    ControllerConfig config_;
    std::shared_ptr<const CanonicalPolicySet> canonical_;
    std::map<core5g::DomainId, DomainState> domains_;
    std::vector<AuditRecord> audit_;
};

} // namespace fgiot::sdn
