#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fgiot/net/ipv4.hpp"
#include "fgiot/sim/kernel.hpp"

namespace fgiot::core5g {

using DomainId = std::string;
using SessionId = std::uint64_t;

struct Subscriber {
    std::string imsi;
    DomainId home_domain;
    std::vector<DomainId> sim_profiles;
    std::set<std::string> roles;
    std::string device_type = "ue";
    int posture = 0; // 0 unknown .. 3 hardened
    bool subscription_active = true;
};

/// Read-only projection handed to the gateway.
struct SubscriberContext {
    std::string imsi;
    bool subscription_active = false;
    std::string device_type;
    int posture = 0;
    std::set<std::string> roles;
    DomainId home_domain;

    bool operator==(const SubscriberContext&) const = default;
};

struct Slice {
    std::string slice_id;
    std::string qos_class; // "rt" | "bulk" | "telemetry"
    std::string isolation_tag;
};

enum class SessionState { Pending, Active, Released };
std::string_view to_string(SessionState s) noexcept;

struct PduSession {
    SessionId session_id = 0;
    std::string imsi;
    DomainId domain;
    std::optional<net::Ipv4> ip;
    std::string slice_id;
    SessionState state = SessionState::Pending;
    bool vpn_tunnel = false;
    bool via_federation = false;
    std::uint64_t service_session_id = 0; // 0 until minted by the gateway
    sim::Timestamp activated_at = 0;
    sim::Timestamp released_at = 0;
};

struct DomainConfig {
    DomainId name;
    net::Cidr pool;
    std::vector<Slice> slice_catalog;
    SessionId first_session_id = 1; // keeps ids unique across domains in one scenario
};

struct AttachOptions {
    bool vpn_tunnel = false;
    bool via_federation = false;
    std::uint64_t service_session_id = 0;
};

bool is_valid_imsi(std::string_view imsi) noexcept;

/// Simulated 5G core for one domain. Attach admission is delegated: attach()
/// only creates a pending session and hands it to the access-request hook,
/// and the gateway later calls admit_session() or reject_session().
class Core {
public:
    using AccessRequestHook = std::function<void(const PduSession&)>;
    using SessionChangeHook = std::function<void(const PduSession&)>;
    using RoamHook = std::function<void(const PduSession& from_session, const DomainId& to)>;

    Core(sim::Kernel& kernel, DomainConfig config);

    const DomainId& domain() const noexcept { return config_.name; }
    const DomainConfig& config() const noexcept { return config_; }

    void register_subscriber(Subscriber s);
    bool has_subscriber(const std::string& imsi) const { return subscribers_.contains(imsi); }
    const Subscriber& subscriber(const std::string& imsi) const;
    void set_subscription_active(const std::string& imsi, bool active);

    const PduSession& attach(const std::string& imsi, AttachOptions opts = {});
    SubscriberContext query_subscriber_context(const std::string& imsi) const;
    const PduSession& admit_session(SessionId id, const std::string& slice_id, std::uint64_t service_session_id = 0);
    const PduSession& reject_session(SessionId id, const std::string& reason);
    const PduSession& release_session(SessionId id, const std::string& reason);
    void switch_sim(const std::string& imsi, const DomainId& from, const DomainId& to);

    const PduSession& session(SessionId id) const;
    std::optional<PduSession> active_session(const std::string& imsi) const;
    /// Every non-released session, ordered by session id.
    std::vector<PduSession> live_sessions() const;
    const std::map<SessionId, PduSession>& all_sessions() const noexcept { return sessions_; }
    const std::map<std::string, Slice>& instantiated_slices() const noexcept { return slices_; }

    void on_access_request(AccessRequestHook hook) { access_hook_ = std::move(hook); }
    void on_session_change(SessionChangeHook hook) { change_hooks_.push_back(std::move(hook)); }
    void on_roam(RoamHook hook) { roam_hook_ = std::move(hook); }

private:
    PduSession& find_session(SessionId id);
    net::Ipv4 allocate_ip();
    void notify_change(const PduSession& s);

    sim::Kernel& kernel_;
    DomainConfig config_;
    std::map<std::string, Subscriber> subscribers_;
    std::map<SessionId, PduSession> sessions_;
    std::map<std::string, Slice> slices_;
    std::set<std::uint32_t> used_ips_;
    SessionId next_session_id_;
    AccessRequestHook access_hook_;
    std::vector<SessionChangeHook> change_hooks_;
    RoamHook roam_hook_;
};

} // namespace fgiot::core5g
