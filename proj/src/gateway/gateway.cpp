#include "fgiot/gateway/gateway.hpp"

#include <algorithm>

#include "fgiot/error.hpp"

namespace fgiot::gateway {

namespace {

nlohmann::json permission_list(const PermissionSet& set)
{
    std::string out;
    for (const auto& p : set) {
        if (!out.empty()) {
            out += ',';
        }
        out += std::string(to_string(p.action)) + ':' + p.resource;
    }
    return out;
}

PermissionSet intersect(const PermissionSet& a, const PermissionSet& b)
{
    PermissionSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

} // namespace

PermissionSet session_permissions(const SessionRecord& rec, const PolicySet& policies)
{
    auto local = permitted_pairs(rec.ctx, rec.session.domain, rec.session.via_federation, rec.session.vpn_tunnel,
                                 policies.rules, policies.service_catalog);
    if (rec.federated_ceiling) {
        return intersect(*rec.federated_ceiling, local);
    }
    return local;
}

Gateway::Gateway(sim::Kernel& kernel, core5g::Core& core, GatewayConfig config)
    : kernel_(kernel), core_(core), config_(std::move(config))
{
    core_.on_access_request([this](const core5g::PduSession& s) {
        AccessRequest req;
        req.session_id = s.session_id;
        req.imsi = s.imsi;
        req.domain = s.domain;
        req.requested_action = Action::Attach;
        req.resource = "*";
        req.via_federation = s.via_federation;
        req.vpn_tunnel = s.vpn_tunnel;
        handle_attach(req);
    });
}

void Gateway::federate(Gateway& a, Gateway& b)
{
    a.peer_ = &b;
    b.peer_ = &a;
    a.watch_peer_core();
    b.watch_peer_core();
}

void Gateway::watch_peer_core()
{
    peer_->core().on_session_change([this](const core5g::PduSession& s) {
        auto it = pending_roams_.find(s.imsi);
        if (it == pending_roams_.end() || !s.via_federation) {
            return;
        }
        const auto from_id = it->second;
        if (s.state == core5g::SessionState::Active) {
            pending_roams_.erase(it);
            // Same virtual millisecond, strictly after activation in dispatch order.
            kernel_.schedule(kernel_.now(), "gateway:" + config_.domain, "roam_release",
                             [this, from_id, to_id = s.session_id, to = s.domain, imsi = s.imsi,
                              ssid = s.service_session_id] {
                                 if (core_.session(from_id).state == core5g::SessionState::Active) {
                                     core_.release_session(from_id, "roamed");
                                 }
                                 kernel_.log("gateway:" + config_.domain, "roam_completed",
                                             {{"from", config_.domain},
                                              {"from_session_id", from_id},
                                              {"imsi", imsi},
                                              {"service_session_id", ssid},
                                              {"to", to},
                                              {"to_session_id", to_id}});
                             });
        } else if (s.state == core5g::SessionState::Released) {
            pending_roams_.erase(it);
            kernel_.log("gateway:" + config_.domain, "roam_failed",
                        {{"imsi", s.imsi}, {"reason", "visited_attach_denied"}, {"to", s.domain}});
        }
    });
}

void Gateway::log_decision(const AccessRequest& req, const AuthzDecision& d)
{
    kernel_.log("gateway:" + config_.domain, "authz_decision",
                {{"action", std::string(to_string(req.requested_action))},
                 {"domain", req.domain},
                 {"effect", std::string(to_string(d.effect))},
                 {"imsi", req.imsi},
                 {"matched_rule", d.matched_rule},
                 {"reason", d.reason},
                 {"session_id", req.session_id},
                 {"slice_id", d.slice_id.value_or("")},
                 {"via_federation", req.via_federation}});
}

AuthzDecision Gateway::handle_attach(const AccessRequest& req)
{
    if (req.requested_action != Action::Attach) {
        throw Error(Errc::Unauthorized, "handle_attach requires an attach request");
    }
    AuthzDecision decision;
    core5g::SubscriberContext ctx;
    std::optional<PermissionSet> ceiling;

    if (req.via_federation) {
        auto it = federated_.find(req.imsi);
        if (it == federated_.end()) {
            decision.reason = "no_assertion";
        } else {
            ctx = it->second.ctx;
            ceiling = it->second.assertion.permitted;
            if (!it->second.effective.empty()) {
                decision.effect = Effect::Permit;
                decision.matched_rule = "federation";
            } else {
                decision.reason = "empty_intersection";
            }
            federated_.erase(it);
        }
    } else {
        try {
            ctx = core_.query_subscriber_context(req.imsi);
            decision = evaluate_access(req, ctx, policies_.rules);
        } catch (const Error& e) {
            if (e.code() != Errc::UnknownImsi) {
                throw;
            }
            decision = AuthzDecision{};
            decision.reason = "unknown_imsi";
        }
    }

    if (decision.effect == Effect::Permit) {
        decision.slice_id = resolve_slice(ctx, policies_.role_slice_map);
    }
    log_decision(req, decision);

    switch (decision.effect) {
    case Effect::Permit:
        admit(req, ctx, decision, std::move(ceiling));
        break;
    case Effect::Manual:
        onboarding_[req.session_id] = OnboardingItem{req, ctx, decision.matched_rule, kernel_.now()};
        kernel_.log("gateway:" + config_.domain, "onboarding_pending",
                    {{"imsi", req.imsi}, {"matched_rule", decision.matched_rule}, {"session_id", req.session_id}});
        break;
    case Effect::Deny:
        if (core_.session(req.session_id).state == core5g::SessionState::Pending) {
            core_.reject_session(req.session_id, decision.reason.empty() ? decision.matched_rule : decision.reason);
        }
        break;
    }
    return decision;
}

void Gateway::admit(const AccessRequest& req, const core5g::SubscriberContext& ctx, AuthzDecision& decision,
                    std::optional<PermissionSet> ceiling)
{
    auto ssid = core_.session(req.session_id).service_session_id;
    if (ssid == 0) {
        // Minted once per logical user session; roams carry it in the continuity token.
        ssid = (kernel_.rng_next("gateway:" + config_.domain) >> 16) | 1;
    }
    const core5g::PduSession* admitted = nullptr;
    try {
        grants_[req.session_id] = Grant{ctx, ceiling};
        admitted = &core_.admit_session(req.session_id, *decision.slice_id, ssid);
    } catch (const Error& e) {
        if (e.code() != Errc::PoolExhausted) {
            throw;
        }
        grants_.erase(req.session_id);
        core_.reject_session(req.session_id, "pool_exhausted");
        return;
    }

    const SessionRecord rec{*admitted, ctx, std::move(ceiling)};
    const auto permitted = session_permissions(rec, policies_);
    for (const auto& p : permitted) {
        decision.obligations.push_back("route:" + std::string(to_string(p.action)) + ':' + p.resource);
    }
    const auto program = derive_route_program(*admitted->ip, decision, permitted, policies_.service_catalog);
    kernel_.log("gateway:" + config_.domain, "route_program_derived",
                {{"acl_count", program.acls.size()},
                 {"imsi", req.imsi},
                 {"permitted", permission_list(permitted)},
                 {"route_count", program.routes.size()},
                 {"session_id", req.session_id}});
    tokens_[req.session_id] = issue_token(req.imsi, ctx.roles, permitted);
    if (program_hook_) {
        program_hook_(*admitted, program);
    }
}

AccessToken Gateway::issue_token(const std::string& imsi, const std::set<std::string>& roles,
                                 const PermissionSet& permitted)
{
    AccessToken t;
    const auto id = kernel_.rng_next("token:" + config_.domain);
    std::array<std::uint8_t, 8> id_bytes{};
    for (std::size_t i = 0; i < id_bytes.size(); ++i) {
        id_bytes[i] = static_cast<std::uint8_t>(id >> (56 - 8 * i));
    }
    t.token_id = to_hex(id_bytes);
    t.imsi = imsi;
    t.domain = config_.domain;
    t.roles = roles;
    t.permitted = permitted;
    t.issued_at = kernel_.now();
    t.expires_at = kernel_.now() + config_.token_ttl_ms;
    seal(t, config_.domain_key);
    kernel_.log("gateway:" + config_.domain, "token_issued",
                {{"expires_at", t.expires_at}, {"imsi", imsi}, {"token_id", t.token_id}});
    return t;
}

bool Gateway::verify_token(const AccessToken& t) const
{
    return t.domain == config_.domain && gateway::verify_token(t, config_.domain_key, kernel_.now());
}

std::optional<AccessToken> Gateway::token_for(core5g::SessionId id) const
{
    if (auto it = tokens_.find(id); it != tokens_.end()) {
        return it->second;
    }
    return std::nullopt;
}

FederationAssertion Gateway::federate_out(const std::string& imsi, const core5g::DomainId& to)
{
    const auto session = core_.active_session(imsi);
    if (!session) {
        throw Error(Errc::NoActiveSession, imsi + " in " + config_.domain);
    }
    if (peer_ == nullptr || peer_->domain() != to) {
        throw Error(Errc::NoFederationPeer, config_.domain + " -> " + to);
    }
    const auto rec = session_record(session->session_id);
    FederationAssertion a;
    a.imsi = imsi;
    a.home_domain = rec->ctx.home_domain;
    a.roles = rec->ctx.roles;
    a.posture = rec->ctx.posture;
    a.permitted = session_permissions(*rec, policies_);
    a.continuity = ContinuityToken{session->service_session_id, config_.domain};
    a.expires_at = kernel_.now() + config_.assertion_ttl_ms;
    seal(a, config_.federation_key);
    kernel_.log("gateway:" + config_.domain, "federation_assertion_sent",
                {{"from", config_.domain},
                 {"imsi", imsi},
                 {"permitted", permission_list(a.permitted)},
                 {"service_session_id", a.continuity.service_session_id},
                 {"to", to}});
    return a;
}

core5g::SubscriberContext Gateway::visited_context(const FederationAssertion& a) const
{
    core5g::SubscriberContext ctx;
    if (core_.has_subscriber(a.imsi)) {
        ctx = core_.query_subscriber_context(a.imsi);
    } else {
        ctx.imsi = a.imsi;
        ctx.subscription_active = true;
    }
    ctx.roles = a.roles;
    ctx.posture = a.posture;
    ctx.home_domain = a.home_domain;
    return ctx;
}

AuthzDecision Gateway::federate_in(const FederationAssertion& a)
{
    AuthzDecision d;
    PermissionSet effective;
    if (!mac_valid(a, config_.federation_key)) {
        d.reason = "bad_mac";
    } else if (kernel_.now() >= a.expires_at) {
        d.reason = "expired";
    } else {
        const auto ctx = visited_context(a);
        const auto visited =
            permitted_pairs(ctx, config_.domain, true, false, policies_.rules, policies_.service_catalog);
        effective = intersect(a.permitted, visited);
        if (effective.empty()) {
            d.reason = "empty_intersection";
        } else {
            d.effect = Effect::Permit;
            d.matched_rule = "federation";
            for (const auto& p : effective) {
                d.obligations.push_back("route:" + std::string(to_string(p.action)) + ':' + p.resource);
            }
            federated_[a.imsi] = FederatedAdmission{a, ctx, effective};
        }
    }
    kernel_.log("gateway:" + config_.domain, "federation_decision",
                {{"effect", std::string(to_string(d.effect))},
                 {"effective", permission_list(effective)},
                 {"from", a.continuity.issued_in},
                 {"imsi", a.imsi},
                 {"reason", d.reason},
                 {"service_session_id", a.continuity.service_session_id}});
    return d;
}

void Gateway::roam(const core5g::PduSession& from, const core5g::DomainId& to)
{
    auto fail = [&](const std::string& reason) {
        kernel_.log("gateway:" + config_.domain, "roam_failed", {{"imsi", from.imsi}, {"reason", reason}, {"to", to}});
    };
    FederationAssertion a;
    try {
        a = federate_out(from.imsi, to);
    } catch (const Error& e) {
        fail(std::string(errc_name(e.code())));
        return;
    }
    if (peer_->federate_in(a).effect != Effect::Permit) {
        fail("federation_denied");
        return;
    }
    try {
        pending_roams_[from.imsi] = from.session_id;
        peer_->core().attach(from.imsi, core5g::AttachOptions{from.vpn_tunnel, true, a.continuity.service_session_id});
    } catch (const Error& e) {
        pending_roams_.erase(from.imsi);
        fail(std::string(errc_name(e.code())));
    }
}

std::optional<SessionRecord> Gateway::session_record(core5g::SessionId id) const
{
    const auto& s = core_.session(id);
    if (s.state == core5g::SessionState::Released) {
        return std::nullopt;
    }
    SessionRecord rec;
    rec.session = s;
    if (auto it = grants_.find(id); it != grants_.end()) {
        rec.ctx = it->second.ctx;
        rec.federated_ceiling = it->second.federated_ceiling;
    } else if (core_.has_subscriber(s.imsi)) {
        rec.ctx = core_.query_subscriber_context(s.imsi);
    }
    return rec;
}

std::vector<SessionRecord> Gateway::live_sessions() const
{
    std::vector<SessionRecord> out;
    for (const auto& s : core_.live_sessions()) {
        out.push_back(*session_record(s.session_id));
    }
    return out;
}

void Gateway::approve_onboarding(core5g::SessionId id, const std::string& actor)
{
    auto it = onboarding_.find(id);
    if (it == onboarding_.end()) {
        throw Error(Errc::NotFound, "no pending onboarding for session " + std::to_string(id));
    }
    auto item = std::move(it->second);
    onboarding_.erase(it);
    AuthzDecision d;
    d.effect = Effect::Permit;
    d.matched_rule = "manual:" + actor;
    d.reason = "approved by " + actor;
    d.slice_id = resolve_slice(item.ctx, policies_.role_slice_map);
    log_decision(item.request, d);
    admit(item.request, item.ctx, d, std::nullopt);
}

void Gateway::deny_onboarding(core5g::SessionId id, const std::string& actor)
{
    auto it = onboarding_.find(id);
    if (it == onboarding_.end()) {
        throw Error(Errc::NotFound, "no pending onboarding for session " + std::to_string(id));
    }
    auto item = std::move(it->second);
    onboarding_.erase(it);
    AuthzDecision d;
    d.matched_rule = "manual:" + actor;
    d.reason = "denied by " + actor;
    log_decision(item.request, d);
    core_.reject_session(id, d.reason);
}

} // namespace fgiot::gateway
