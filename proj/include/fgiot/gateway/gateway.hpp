#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "fgiot/core5g/core.hpp"
#include "fgiot/gateway/credentials.hpp"
#include "fgiot/gateway/policy.hpp"
#include "fgiot/gateway/route_program.hpp"
#include "fgiot/sim/kernel.hpp"

namespace fgiot::gateway {

struct GatewayConfig {
    core5g::DomainId domain;
    Key domain_key{};
    Key federation_key{};
    sim::Timestamp token_ttl_ms = 3'600'000;
    sim::Timestamp assertion_ttl_ms = 30'000;
};

/// A live session joined with the identity context it was admitted under.
struct SessionRecord {
    core5g::PduSession session;
    core5g::SubscriberContext ctx;
    std::optional<PermissionSet> federated_ceiling; // assertion.permitted for roamed-in sessions
};

/// Permissions a session holds under `policies`: the local evaluation over
/// the catalog, intersected with the federation ceiling when roamed in.
PermissionSet session_permissions(const SessionRecord& rec, const PolicySet& policies);

struct OnboardingItem {
    AccessRequest request;
    core5g::SubscriberContext ctx;
    std::string matched_rule;
    sim::Timestamp requested_at = 0;
};

/// Open gateway for one domain: attach mediation, token issue/verify,
/// route-program derivation and the federation channel to a peer gateway.
class Gateway {
public:
    using ProgramHook = std::function<void(const core5g::PduSession&, const RouteProgram&)>;

    Gateway(sim::Kernel& kernel, core5g::Core& core, GatewayConfig config);

    const core5g::DomainId& domain() const noexcept { return config_.domain; }
    core5g::Core& core() noexcept { return core_; }
    const GatewayConfig& config() const noexcept { return config_; }

    void apply_policies(PolicySet policies) { policies_ = std::move(policies); }
    const PolicySet& policies() const noexcept { return policies_; }

    /// Links both gateways; each watches the other's core to finish roams.
    static void federate(Gateway& a, Gateway& b);
    Gateway* peer() const noexcept { return peer_; }

    AuthzDecision handle_attach(const AccessRequest& req);

    AccessToken issue_token(const std::string& imsi, const std::set<std::string>& roles, const PermissionSet& permitted);
    bool verify_token(const AccessToken& t) const;
    std::optional<AccessToken> token_for(core5g::SessionId id) const;

    FederationAssertion federate_out(const std::string& imsi, const core5g::DomainId& to);
    AuthzDecision federate_in(const FederationAssertion& a);

    /// Roam sequence for an active session: federate out, have the peer
    /// admit the new session, then release `from` once the peer's session
    /// is active (make-before-break).
    void roam(const core5g::PduSession& from, const core5g::DomainId& to);

    std::vector<SessionRecord> live_sessions() const;
    std::optional<SessionRecord> session_record(core5g::SessionId id) const;

    const std::map<core5g::SessionId, OnboardingItem>& pending_onboarding() const noexcept { return onboarding_; }
    void approve_onboarding(core5g::SessionId id, const std::string& actor);
    void deny_onboarding(core5g::SessionId id, const std::string& actor);

    void on_program(ProgramHook hook) { program_hook_ = std::move(hook); }

private:
    struct Grant {
        core5g::SubscriberContext ctx;
        std::optional<PermissionSet> federated_ceiling;
    };
    struct FederatedAdmission {
        FederationAssertion assertion;
        core5g::SubscriberContext ctx;
        PermissionSet effective;
    };

    void admit(const AccessRequest& req, const core5g::SubscriberContext& ctx, AuthzDecision& decision,
               std::optional<PermissionSet> ceiling);
    void log_decision(const AccessRequest& req, const AuthzDecision& d);
    core5g::SubscriberContext visited_context(const FederationAssertion& a) const;
    void watch_peer_core();

    sim::Kernel& kernel_;
    core5g::Core& core_;
    GatewayConfig config_;
    PolicySet policies_;
    Gateway* peer_ = nullptr;
    std::map<core5g::SessionId, Grant> grants_;
    std::map<core5g::SessionId, AccessToken> tokens_;
    std::map<std::string, FederatedAdmission> federated_;
    std::map<std::string, core5g::SessionId> pending_roams_; // imsi -> session to release
    std::map<core5g::SessionId, OnboardingItem> onboarding_;
    ProgramHook program_hook_;
};

} // namespace fgiot::gateway
