#include "fgiot/scenario/system.hpp"

#include <algorithm>

#include "fgiot/sdn/json_codec.hpp"

namespace fgiot::scenario {

using nlohmann::json;

namespace {

std::string matched_label(const pep::FlowDecision& d)
{
    return d.matched_priority ? std::to_string(*d.matched_priority) : std::string("default");
}

} // namespace

System::System(ScenarioSpec spec, std::optional<std::uint64_t> seed)
    : spec_(std::move(spec)), kernel_(seed.value_or(spec_.seed))
{
    const auto& topo = spec_.topology;
    controller_ = std::make_unique<sdn::Controller>(kernel_, spec_.policies, spec_.controller);

    for (const auto& ds : spec_.domains) {
        Domain d;
        d.core = std::make_unique<core5g::Core>(kernel_, ds.config);
        d.gateway = std::make_unique<gateway::Gateway>(
            kernel_, *d.core, gateway::GatewayConfig{ds.config.name, ds.key, spec_.federation_key});
        d.router = std::make_unique<pep::Router>();
        d.gateway->apply_policies(controller_->policies());
        auto* gw = d.gateway.get();
        d.core->on_roam([gw](const core5g::PduSession& from, const core5g::DomainId& to) { gw->roam(from, to); });
        domains_.emplace(ds.config.name, std::move(d));
    }
    if (spec_.domains.size() == 2) {
        gateway::Gateway::federate(*domains_.at(spec_.domains[0].config.name).gateway,
                                   *domains_.at(spec_.domains[1].config.name).gateway);
    }
    for (const auto& sub : spec_.subscribers) {
        for (const auto& d : sub.sim_profiles) {
            domains_.at(d).core->register_subscriber(sub);
        }
    }
    for (auto& [name, d] : domains_) {
        controller_->register_domain(*d.gateway, *d.router);
    }

    bus_ = std::make_unique<iot::Bus>(kernel_, topo.hop_latency_ms, topo.bus_hops);
    broker_ = std::make_unique<iot::Broker>(kernel_, topo.hop_latency_ms);
    for (const auto& rec : spec_.commissioning) {
        bus_->commission(rec);
    }
    if (spec_.hub) {
        auto cfg = *spec_.hub;
        cfg.uplink_hops = topo.uplink_hops;
        hub_ = std::make_unique<iot::Hub>(kernel_, *bus_, *broker_, std::move(cfg));
    }
    if (spec_.hvac) {
        auto cfg = *spec_.hvac;
        cfg.app_hops = topo.app_hops;
        hvac_ = std::make_unique<iot::HvacController>(kernel_, *broker_, *bus_, std::move(cfg));
    }
    std::set<net::Ipv4> protected_ips;
    for (const auto& [name, ep] : spec_.policies.service_catalog) {
        protected_ips.insert(ep.ip);
    }
    alarms_ = std::make_unique<iot::AlarmMonitor>(kernel_, std::move(protected_ips));

    controller_->start();
    for (const auto& a : spec_.timeline) {
        kernel_.schedule(a.at, "scenario", a.action, [this, a] { perform(a); });
    }
}

const System::Domain& System::domain_parts(const core5g::DomainId& d) const
{
    auto it = domains_.find(d);
    if (it == domains_.end()) {
        throw Error(Errc::NotFound, "domain " + d);
    }
    return it->second;
}

core5g::Core& System::core(const core5g::DomainId& d) { return *domain_parts(d).core; }
gateway::Gateway& System::gateway(const core5g::DomainId& d) { return *domain_parts(d).gateway; }
pep::Router& System::router(const core5g::DomainId& d) { return *domain_parts(d).router; }

std::vector<core5g::DomainId> System::domains() const
{
    std::vector<core5g::DomainId> out;
    for (const auto& [name, d] : domains_) {
        out.push_back(name);
    }
    return out;
}

std::optional<core5g::PduSession> System::active_session(const std::string& imsi) const
{
    for (const auto& [name, d] : domains_) {
        if (d.core->has_subscriber(imsi)) {
            if (auto s = d.core->active_session(imsi)) {
                return s;
            }
        }
    }
    return std::nullopt;
}

std::optional<pep::FlowDecision> System::evaluate(const std::string& imsi, net::Ipv4 dst, std::uint16_t port,
                                                  const std::string& proto) const
{
    auto s = active_session(imsi);
    if (!s || !s->ip) {
        return std::nullopt;
    }
    return domain_parts(s->domain).router->evaluate_flow(pep::FlowQuery{*s->ip, dst, port, proto});
}

std::optional<pep::FlowDecision> System::flow_query(const std::string& imsi, net::Ipv4 dst, std::uint16_t port,
                                                    const std::string& proto)
{
    auto s = active_session(imsi);
    if (!s || !s->ip) {
        kernel_.log("scenario", "flow_query_skipped", {{"dst", dst.str()}, {"imsi", imsi}, {"reason", "no_active_session"}});
        return std::nullopt;
    }
    const pep::FlowQuery q{*s->ip, dst, port, proto};
    const auto d = domain_parts(s->domain).router->evaluate_flow(q);
    kernel_.log("pep:" + s->domain, "flow_decision",
                {{"action", pep::to_string(d.action)},
                 {"dst", dst.str()},
                 {"dst_port", port},
                 {"egress", d.egress},
                 {"imsi", imsi},
                 {"matched", matched_label(d)},
                 {"proto", proto},
                 {"src", q.src.str()}});
    alarms_->observe(s->domain, q, d);
    return d;
}

void System::perform(const TimelineAction& a)
{
    try {
        perform_unchecked(a);
    } catch (const Error& e) {
        kernel_.log("scenario", "action_failed",
                    {{"action", a.action}, {"code", std::string(errc_name(e.code()))}, {"detail", e.what()}});
    } catch (const std::exception& e) {
        kernel_.log("scenario", "action_failed", {{"action", a.action}, {"code", "Internal"}, {"detail", e.what()}});
    }
}

void System::perform_unchecked(const TimelineAction& a)
{
    const auto& p = a.params;
    const auto& act = a.action;
    if (act == "attach") {
        core(p.at("domain").get<std::string>())
            .attach(p.at("imsi").get<std::string>(), core5g::AttachOptions{p.value("vpn_tunnel", false)});
    } else if (act == "detach") {
        const auto imsi = p.at("imsi").get<std::string>();
        auto& c = core(p.at("domain").get<std::string>());
        auto s = c.active_session(imsi);
        if (!s) {
            throw Error(Errc::NoActiveSession, imsi);
        }
        c.release_session(s->session_id, "detach");
    } else if (act == "roam") {
        const auto imsi = p.at("imsi").get<std::string>();
        auto s = active_session(imsi);
        if (!s) {
            throw Error(Errc::NoActiveSession, imsi);
        }
        core(s->domain).switch_sim(imsi, s->domain, p.at("to").get<std::string>());
    } else if (act == "flow_query") {
        const auto imsi = p.at("imsi").get<std::string>();
        if (p.value("internet", false)) {
            flow_query(imsi, spec_.internet_probe, spec_.internet_probe_port, "tcp");
        } else if (p.contains("service")) {
            const auto& ep = spec_.policies.service_catalog.at(p.at("service").get<std::string>());
            flow_query(imsi, ep.ip, ep.port, ep.proto);
        } else {
            flow_query(imsi, net::Ipv4::parse(p.at("dst").get<std::string>()), p.value("port", std::uint16_t{0}),
                       p.value("proto", std::string("tcp")));
        }
    } else if (act == "publish") {
        remote_publish(p);
    } else if (act == "co2_sample" || act == "device_write") {
        const auto ia = iot::IndividualAddress::parse(p.at("device").get<std::string>());
        const auto object = p.value("object", std::string(act == "co2_sample" ? "co2" : ""));
        bus_->device_send(ia, object, datapoint_for(ia, object, p.at("value")));
    } else if (act == "policy_mutation") {
        policy_mutation(p);
    } else if (act == "fault_injection") {
        const auto kind = p.at("kind").get<std::string>();
        const auto domain = p.at("domain").get<std::string>();
        if (kind == "drop_push") {
            controller_->inject_push_drops(domain, p.value("count", 1));
        } else {
            controller_->set_reachable(domain, kind == "domain_up");
        }
    } else if (act == "set_subscription") {
        const auto imsi = p.at("imsi").get<std::string>();
        const bool active = p.at("active").get<bool>();
        for (auto& [name, d] : domains_) {
            if (d.core->has_subscriber(imsi)) {
                d.core->set_subscription_active(imsi, active);
            }
        }
        kernel_.log("scenario", "subscription_changed", {{"active", active}, {"imsi", imsi}});
    } else if (act == "commission") {
        commission_remote(p);
    } else if (act == "approve_onboarding" || act == "deny_onboarding") {
        onboarding(p, act == "approve_onboarding");
    } else {
        throw Error(Errc::ValidationError, "unknown action " + act);
    }
}

iot::Datapoint System::datapoint_for(const iot::IndividualAddress& ia, const std::string& object,
                                     const json& value) const
{
    const auto& rec = bus_->device(ia);
    auto obj = std::find_if(rec.objects.begin(), rec.objects.end(), [&](const auto& o) { return o.name == object; });
    if (obj == rec.objects.end()) {
        throw Error(Errc::BadLink, rec.device_id + " has no object " + object);
    }
    switch (iot::dpt_family(obj->dpt)) {
    case iot::DptFamily::Boolean:
        return {obj->dpt, value.is_boolean() ? value.get<bool>() : value.get<int>() != 0};
    case iot::DptFamily::UnsignedByte: {
        const int v = value.get<int>();
        if (v < 0 || v > 255) {
            throw Error(Errc::OutOfRange, std::to_string(v) + " outside 0..255");
        }
        return {obj->dpt, static_cast<std::uint8_t>(v)};
    }
    case iot::DptFamily::Float16:
        return {obj->dpt, value.get<double>()};
    }
    throw Error(Errc::InvalidEncoding, obj->dpt);
}

void System::remote_publish(const json& p)
{
    iot::PubSubMessage msg{p.at("topic").get<std::string>(), p.at("payload").get<std::string>(),
                           p.value("retained", false), kernel_.now(), 0};
    if (!p.contains("imsi")) {
        broker_->publish(std::move(msg), spec_.topology.app_hops);
        return;
    }
    const auto imsi = p.at("imsi").get<std::string>();
    const auto service = p.value("service", std::string("mqtt-broker"));
    const auto& ep = spec_.policies.service_catalog.at(service);
    const auto d = flow_query(imsi, ep.ip, ep.port, ep.proto);
    if (!d || d->action != pep::AclAction::Permit) {
        kernel_.log("scenario", "publish_blocked",
                    {{"imsi", imsi}, {"reason", d ? "flow_denied" : "no_active_session"}, {"topic", msg.topic}});
        return;
    }
    const auto s = active_session(imsi);
    msg.service_session_id = s->service_session_id;
    kernel_.log("scenario", "remote_publish",
                {{"domain", s->domain},
                 {"imsi", imsi},
                 {"payload", msg.payload},
                 {"service_session_id", s->service_session_id},
                 {"topic", msg.topic}});
    broker_->publish(std::move(msg), spec_.topology.ue_hops);
}

void System::commission_remote(const json& p)
{
    const auto imsi = p.at("imsi").get<std::string>();
    auto rec = sdn::commissioning_from_json(p.at("record"));
    const auto s = active_session(imsi);
    std::string reason;
    if (!s) {
        reason = "no_active_session";
    } else if (!s->vpn_tunnel) {
        reason = "no_vpn_tunnel";
    }
    if (!reason.empty()) {
        kernel_.log("iot-bus", "commissioning_rejected",
                    {{"address", rec.address.str()}, {"device_id", rec.device_id}, {"imsi", imsi}, {"reason", reason}});
        return;
    }
    kernel_.log("iot-bus", "commissioning_session",
                {{"device_id", rec.device_id}, {"imsi", imsi}, {"session_id", s->session_id}});
    bus_->commission(rec);
}

void System::policy_mutation(const json& p)
{
    const auto actor = p.value("actor", std::string("scenario"));
    const auto op = p.at("op").get<std::string>();
    try {
        if (op == "add" || op == "malformed") {
            controller_->add_rule(actor, sdn::policy_from_json(p.at("rule")));
        } else if (op == "remove") {
            controller_->remove_rule(actor, p.at("rule_id").get<std::string>());
        } else if (op == "replace") {
            std::vector<gateway::AuthorizationPolicy> rules;
            for (const auto& r : p.at("rules")) {
                rules.push_back(sdn::policy_from_json(r));
            }
            controller_->update_policies(actor, "replace rule set",
                                         [&](sdn::CanonicalPolicySet& s) { s.rules = std::move(rules); });
        } else {
            throw Error(Errc::ValidationError, "unknown policy op " + op);
        }
    } catch (const Error& e) {
        if (e.code() != Errc::MalformedPolicy) {
            throw;
        }
        kernel_.log("fed-sdn", "policy_rejected",
                    {{"actor", actor}, {"detail", e.what()}, {"version", controller_->version()}});
    }
}

void System::onboarding(const json& p, bool approve)
{
    const auto imsi = p.at("imsi").get<std::string>();
    auto& gw = gateway(p.at("domain").get<std::string>());
    const auto actor = p.value("actor", std::string("scenario"));
    for (const auto& [id, item] : gw.pending_onboarding()) {
        if (item.request.imsi == imsi) {
            const auto sid = id;
            approve ? gw.approve_onboarding(sid, actor) : gw.deny_onboarding(sid, actor);
            return;
        }
    }
    throw Error(Errc::NotFound, "no pending onboarding for " + imsi);
}

} // namespace fgiot::scenario
