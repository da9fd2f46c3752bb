#include "fgiot/sdn/json_codec.hpp"

#include "fgiot/error.hpp"

namespace fgiot::sdn {

using nlohmann::json;

namespace {

json attr_to_json(const gateway::AttrSet& s)
{
    if (!s) {
        return "*";
    }
    return json(std::vector<std::string>(s->begin(), s->end()));
}

gateway::AttrSet attr_from_json(const json& j, const std::string& what)
{
    if (j.is_string() && j.get<std::string>() == "*") {
        return std::nullopt;
    }
    if (!j.is_array()) {
        throw Error(Errc::MalformedPolicy, what + " must be \"*\" or a list of strings");
    }
    std::set<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) {
            throw Error(Errc::MalformedPolicy, what + " must contain strings");
        }
        out.insert(v.get<std::string>());
    }
    return out;
}

template <typename T>
T field(const json& j, const char* key, Errc code)
{
    if (!j.contains(key)) {
        throw Error(code, std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(code, std::string("bad type for field '") + key + "'");
    }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback, Errc code)
{
    return j.contains(key) ? field<T>(j, key, code) : fallback;
}

} // namespace

json to_json(const gateway::AuthorizationPolicy& p)
{
    return {{"rule_id", p.rule_id},
            {"priority", p.priority},
            {"subject",
             {{"roles", attr_to_json(p.subject.roles)},
              {"device_types", attr_to_json(p.subject.device_types)},
              {"min_posture", p.subject.min_posture},
              {"domains", attr_to_json(p.subject.domains)},
              {"require_active_subscription", p.subject.require_active_subscription},
              {"require_vpn", p.subject.require_vpn}}},
            {"action", std::string(to_string(p.action))},
            {"resource", p.resource},
            {"effect", std::string(to_string(p.effect))},
            {"scope", std::string(to_string(p.scope))}};
}

gateway::AuthorizationPolicy policy_from_json(const json& j)
{
    constexpr auto E = Errc::MalformedPolicy;
    if (!j.is_object()) {
        throw Error(E, "rule must be an object");
    }
    gateway::AuthorizationPolicy p;
    p.rule_id = field<std::string>(j, "rule_id", E);
    const auto prio = field<std::int64_t>(j, "priority", E);
    if (prio < 0 || prio >= (1 << 16)) {
        throw Error(E, "rule " + p.rule_id + ": priority must be in 0..65535");
    }
    p.priority = static_cast<std::uint32_t>(prio);
    const json subject = j.value("subject", json::object());
    p.subject.roles = attr_from_json(subject.value("roles", json("*")), "subject.roles");
    p.subject.device_types = attr_from_json(subject.value("device_types", json("*")), "subject.device_types");
    p.subject.domains = attr_from_json(subject.value("domains", json("*")), "subject.domains");
    p.subject.min_posture = field_or<int>(subject, "min_posture", 0, E);
    p.subject.require_active_subscription = field_or<bool>(subject, "require_active_subscription", false, E);
    p.subject.require_vpn = field_or<bool>(subject, "require_vpn", false, E);
    p.action = gateway::parse_action(field<std::string>(j, "action", E));
    p.resource = field_or<std::string>(j, "resource", "*", E);
    p.effect = gateway::parse_effect(field<std::string>(j, "effect", E));
    p.scope = gateway::parse_scope(field_or<std::string>(j, "scope", "any", E));
    gateway::validate_policy(p);
    return p;
}

json to_json(const gateway::ServiceCatalog& c)
{
    json out = json::object();
    for (const auto& [name, ep] : c) {
        out[name] = {{"ip", ep.ip.str()}, {"port", ep.port}, {"proto", ep.proto}, {"slice_id", ep.slice_id}};
    }
    return out;
}

gateway::ServiceCatalog catalog_from_json(const json& j)
{
    constexpr auto E = Errc::ParseError;
    if (!j.is_object()) {
        throw Error(E, "service_catalog must be an object");
    }
    gateway::ServiceCatalog out;
    for (const auto& [name, v] : j.items()) {
        gateway::ServiceEndpoint ep;
        ep.ip = net::Ipv4::parse(field<std::string>(v, "ip", E));
        ep.port = field<std::uint16_t>(v, "port", E);
        ep.proto = field_or<std::string>(v, "proto", "tcp", E);
        ep.slice_id = field_or<std::string>(v, "slice_id", "", E);
        out.emplace(name, std::move(ep));
    }
    return out;
}

json to_json(const CanonicalPolicySet& p)
{
    json rules = json::array();
    for (const auto& r : p.rules) {
        rules.push_back(to_json(r));
    }
    return {{"version", p.version},
            {"rules", rules},
            {"role_slice_map", p.role_slice_map},
            {"service_catalog", to_json(p.service_catalog)}};
}

CanonicalPolicySet policy_set_from_json(const json& j)
{
    if (!j.is_object()) {
        throw Error(Errc::MalformedPolicy, "policy set must be an object");
    }
    CanonicalPolicySet p;
    p.version = j.value("version", std::uint64_t{0});
    for (const auto& r : j.value("rules", json::array())) {
        p.rules.push_back(policy_from_json(r));
    }
    if (j.contains("role_slice_map")) {
        try {
            p.role_slice_map = j.at("role_slice_map").get<std::map<std::string, std::string>>();
        } catch (const json::exception&) {
            throw Error(Errc::MalformedPolicy, "role_slice_map must map strings to strings");
        }
    }
    if (j.contains("service_catalog")) {
        try {
            p.service_catalog = catalog_from_json(j.at("service_catalog"));
        } catch (const Error& e) {
            throw Error(Errc::MalformedPolicy, e.what());
        }
    }
    gateway::validate_policies(p.rules);
    return p;
}

json to_json(const gateway::PermissionSet& s)
{
    json out = json::array();
    for (const auto& p : s) {
        out.push_back({{"action", std::string(to_string(p.action))}, {"resource", p.resource}});
    }
    return out;
}

json to_json(const SessionView& v)
{
    json entries = json::array();
    for (const auto& rec : v.entries) {
        const auto& s = rec.session;
        entries.push_back({{"imsi", s.imsi},
                           {"domain", s.domain},
                           {"ip", s.ip ? s.ip->str() : std::string()},
                           {"slice_id", s.slice_id},
                           {"service_session_id", s.service_session_id},
                           {"session_id", s.session_id},
                           {"state", std::string(core5g::to_string(s.state))},
                           {"roles", std::vector<std::string>(rec.ctx.roles.begin(), rec.ctx.roles.end())},
                           {"via_federation", s.via_federation},
                           {"vpn_tunnel", s.vpn_tunnel}});
    }
    return {{"as_of", v.as_of}, {"entries", entries}, {"unreachable", v.unreachable}};
}

json to_json(const iot::CommissioningRecord& r)
{
    json objects = json::array();
    for (const auto& o : r.objects) {
        objects.push_back({{"name", o.name}, {"dpt", o.dpt}});
    }
    json links = json::array();
    for (const auto& l : r.links) {
        links.push_back({{"object", l.object},
                         {"ga", l.ga.str()},
                         {"direction", l.direction == iot::LinkDirection::In ? "in" : "out"}});
    }
    return {{"device_id", r.device_id},
            {"individual_address", r.address.str()},
            {"objects", objects},
            {"links", links},
            {"parameters", r.parameters}};
}

iot::CommissioningRecord commissioning_from_json(const json& j)
{
    constexpr auto E = Errc::ParseError;
    iot::CommissioningRecord r;
    r.device_id = field<std::string>(j, "device_id", E);
    r.address = iot::IndividualAddress::parse(field<std::string>(j, "individual_address", E));
    for (const auto& o : j.value("objects", json::array())) {
        r.objects.push_back({field<std::string>(o, "name", E), field<std::string>(o, "dpt", E)});
    }
    for (const auto& l : j.value("links", json::array())) {
        const auto dir = field<std::string>(l, "direction", E);
        if (dir != "in" && dir != "out") {
            throw Error(Errc::BadLink, r.device_id + ": direction must be in|out");
        }
        r.links.push_back({field<std::string>(l, "object", E), iot::GroupAddress::parse(field<std::string>(l, "ga", E)),
                           dir == "in" ? iot::LinkDirection::In : iot::LinkDirection::Out});
    }
    if (j.contains("parameters")) {
        r.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
    }
    return r;
}

} // namespace fgiot::sdn
