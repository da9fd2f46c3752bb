#include "fgiot/core5g/core.hpp"

#include <algorithm>

#include "fgiot/error.hpp"

namespace fgiot::core5g {

std::string_view to_string(SessionState s) noexcept
{
    switch (s) {
    case SessionState::Pending: return "pending";
    case SessionState::Active: return "active";
    case SessionState::Released: return "released";
    }
    return "?";
}

bool is_valid_imsi(std::string_view imsi) noexcept
{
    return imsi.size() == 15 && std::all_of(imsi.begin(), imsi.end(), [](char c) { return c >= '0' && c <= '9'; });
}

Core::Core(sim::Kernel& kernel, DomainConfig config)
    : kernel_(kernel), config_(std::move(config)), next_session_id_(config_.first_session_id)
{
}

void Core::register_subscriber(Subscriber s)
{
    if (!is_valid_imsi(s.imsi)) {
        throw Error(Errc::ValidationError, "imsi must be 15 decimal digits: '" + s.imsi + "'");
    }
    if (s.sim_profiles.empty()) {
        throw Error(Errc::ValidationError, "subscriber " + s.imsi + " has no sim profiles");
    }
    auto profiles = s.sim_profiles;
    std::sort(profiles.begin(), profiles.end());
    if (std::adjacent_find(profiles.begin(), profiles.end()) != profiles.end()) {
        throw Error(Errc::ValidationError, "subscriber " + s.imsi + " has duplicate sim profiles");
    }
    if (s.posture < 0 || s.posture > 3) {
        throw Error(Errc::ValidationError, "posture out of 0..3 for " + s.imsi);
    }
    if (subscribers_.contains(s.imsi)) {
        throw Error(Errc::DuplicateImsi, s.imsi + " in domain " + config_.name);
    }
    const auto imsi = s.imsi;
    subscribers_.emplace(imsi, std::move(s));
}

const Subscriber& Core::subscriber(const std::string& imsi) const
{
    auto it = subscribers_.find(imsi);
    if (it == subscribers_.end()) {
        throw Error(Errc::UnknownImsi, imsi);
    }
    return it->second;
}

void Core::set_subscription_active(const std::string& imsi, bool active)
{
    auto it = subscribers_.find(imsi);
    if (it == subscribers_.end()) {
        throw Error(Errc::UnknownImsi, imsi);
    }
    it->second.subscription_active = active;
}

const PduSession& Core::attach(const std::string& imsi, AttachOptions opts)
{
    const auto& sub = subscriber(imsi);
    if (std::find(sub.sim_profiles.begin(), sub.sim_profiles.end(), config_.name) == sub.sim_profiles.end()) {
        throw Error(Errc::NoSimProfile, imsi + " has no profile for " + config_.name);
    }
    for (const auto& [id, s] : sessions_) {
        if (s.imsi == imsi && s.state != SessionState::Released) {
            throw Error(Errc::AlreadyAttached, imsi + " already has session " + std::to_string(id));
        }
    }
    PduSession s;
    s.session_id = next_session_id_++;
    s.imsi = imsi;
    s.domain = config_.name;
    s.vpn_tunnel = opts.vpn_tunnel;
    s.via_federation = opts.via_federation;
    s.service_session_id = opts.service_session_id;
    auto& stored = sessions_.emplace(s.session_id, s).first->second;

    kernel_.log("core:" + config_.name, "attach_requested",
                {{"domain", config_.name},
                 {"imsi", imsi},
                 {"session_id", stored.session_id},
                 {"via_federation", opts.via_federation},
                 {"vpn_tunnel", opts.vpn_tunnel}});
    if (access_hook_) {
        kernel_.schedule(kernel_.now(), "gateway:" + config_.name, "access_request",
                         [this, id = stored.session_id] { access_hook_(sessions_.at(id)); });
    }
    return stored;
}

SubscriberContext Core::query_subscriber_context(const std::string& imsi) const
{
    const auto& s = subscriber(imsi);
    return SubscriberContext{s.imsi, s.subscription_active, s.device_type, s.posture, s.roles, s.home_domain};
}

PduSession& Core::find_session(SessionId id)
{
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw Error(Errc::UnknownSession, std::to_string(id) + " in " + config_.name);
    }
    return it->second;
}

const PduSession& Core::session(SessionId id) const
{
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw Error(Errc::UnknownSession, std::to_string(id) + " in " + config_.name);
    }
    return it->second;
}

net::Ipv4 Core::allocate_ip()
{
    const auto& pool = config_.pool;
    const std::uint32_t first = pool.base.value + 2;
    const std::uint32_t broadcast = pool.base.value | ~pool.mask();
    for (std::uint64_t a = first; a < broadcast; ++a) {
        if (!used_ips_.contains(static_cast<std::uint32_t>(a))) {
            return net::Ipv4{static_cast<std::uint32_t>(a)};
        }
    }
    throw Error(Errc::PoolExhausted, config_.pool.str());
}

const PduSession& Core::admit_session(SessionId id, const std::string& slice_id, std::uint64_t service_session_id)
{
    auto& s = find_session(id);
    if (s.state != SessionState::Pending) {
        throw Error(Errc::NotPending, "session " + std::to_string(id) + " is " + std::string(to_string(s.state)));
    }
    if (!slices_.contains(slice_id)) {
        auto it = std::find_if(config_.slice_catalog.begin(), config_.slice_catalog.end(),
                               [&](const Slice& sl) { return sl.slice_id == slice_id; });
        Slice slice = it != config_.slice_catalog.end() ? *it : Slice{slice_id, "bulk", slice_id};
        kernel_.log("core:" + config_.name, "slice_instantiated",
                    {{"domain", config_.name},
                     {"isolation_tag", slice.isolation_tag},
                     {"qos_class", slice.qos_class},
                     {"slice_id", slice.slice_id}});
        slices_.emplace(slice_id, std::move(slice));
    }
    const auto ip = allocate_ip();
    used_ips_.insert(ip.value);
    s.ip = ip;
    s.slice_id = slice_id;
    s.state = SessionState::Active;
    s.activated_at = kernel_.now();
    if (service_session_id != 0) {
        s.service_session_id = service_session_id;
    }
    kernel_.log("core:" + config_.name, "attach_admitted",
                {{"domain", config_.name},
                 {"imsi", s.imsi},
                 {"ip", ip.str()},
                 {"service_session_id", s.service_session_id},
                 {"session_id", s.session_id},
                 {"slice_id", slice_id}});
    notify_change(s);
    return s;
}

const PduSession& Core::reject_session(SessionId id, const std::string& reason)
{
    auto& s = find_session(id);
    if (s.state != SessionState::Pending) {
        throw Error(Errc::NotPending, "session " + std::to_string(id) + " is " + std::string(to_string(s.state)));
    }
    s.state = SessionState::Released;
    s.released_at = kernel_.now();
    kernel_.log("core:" + config_.name, "attach_denied",
                {{"domain", config_.name}, {"imsi", s.imsi}, {"reason", reason}, {"session_id", s.session_id}});
    notify_change(s);
    return s;
}

const PduSession& Core::release_session(SessionId id, const std::string& reason)
{
    auto& s = find_session(id);
    if (s.state != SessionState::Active) {
        throw Error(Errc::NoActiveSession, "session " + std::to_string(id) + " is " + std::string(to_string(s.state)));
    }
    s.state = SessionState::Released;
    s.released_at = kernel_.now();
    used_ips_.erase(s.ip->value);
    kernel_.log("core:" + config_.name, "session_released",
                {{"domain", config_.name},
                 {"imsi", s.imsi},
                 {"ip", s.ip->str()},
                 {"reason", reason},
                 {"service_session_id", s.service_session_id},
                 {"session_id", s.session_id}});
    notify_change(s);
    return s;
}

void Core::switch_sim(const std::string& imsi, const DomainId& from, const DomainId& to)
{
    const auto& sub = subscriber(imsi);
    std::optional<PduSession> current = from == config_.name ? active_session(imsi) : std::nullopt;
    if (!current) {
        throw Error(Errc::NoActiveSession, imsi + " in " + from);
    }
    if (std::find(sub.sim_profiles.begin(), sub.sim_profiles.end(), to) == sub.sim_profiles.end()) {
        throw Error(Errc::NoSimProfile, imsi + " has no profile for " + to);
    }
    kernel_.log("core:" + config_.name, "sim_switched",
                {{"from", from}, {"imsi", imsi}, {"session_id", current->session_id}, {"to", to}});
    if (roam_hook_) {
        kernel_.schedule(kernel_.now(), "gateway:" + config_.name, "roam",
                         [this, s = *current, to] { roam_hook_(s, to); });
    }
}

std::optional<PduSession> Core::active_session(const std::string& imsi) const
{
    for (const auto& [id, s] : sessions_) {
        if (s.imsi == imsi && s.state == SessionState::Active) {
            return s;
        }
    }
    return std::nullopt;
}

std::vector<PduSession> Core::live_sessions() const
{
    std::vector<PduSession> out;
    for (const auto& [id, s] : sessions_) {
        if (s.state != SessionState::Released) {
            out.push_back(s);
        }
    }
    return out;
}

void Core::notify_change(const PduSession& s)
{
    for (const auto& hook : change_hooks_) {
        hook(s);
    }
}

} // namespace fgiot::core5g
