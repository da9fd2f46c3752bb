#include "fgiot/scenario/spec.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "fgiot/sdn/json_codec.hpp"

namespace fgiot::scenario {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v)
{
    std::string out;
    for (const auto& s : v) {
        out += (out.empty() ? "" : "; ") + s;
    }
    return out;
}

class Collector {
public:
    template <typename F>
    void attempt(const std::string& where, F&& fn)
    {
        try {
            fn();
        } catch (const json::exception& e) {
            add(where + ": " + e.what());
        } catch (const std::exception& e) {
            add(where + ": " + e.what());
        }
    }

    void add(std::string msg) { errors.push_back(std::move(msg)); }

    std::vector<std::string> errors;
};

const std::set<std::string>& known_actions()
{
    static const std::set<std::string> actions{"attach",         "detach",          "roam",
                                               "flow_query",     "publish",         "co2_sample",
                                               "device_write",   "policy_mutation", "fault_injection",
                                               "set_subscription", "commission",    "approve_onboarding",
                                               "deny_onboarding"};
    return actions;
}

const std::set<std::string>& known_expectations()
{
    static const std::set<std::string> kinds{"exists", "absent", "count", "order", "latency", "converged"};
    return kinds;
}

iot::HubConfig hub_from_json(const json& j)
{
    iot::HubConfig h;
    h.address = iot::IndividualAddress::parse(j.value("address", std::string("1.0.1")));
    for (const auto& m : j.at("mappings")) {
        iot::BridgeMapping bm;
        bm.ga = iot::GroupAddress::parse(m.at("ga").get<std::string>());
        bm.topic = m.at("topic").get<std::string>();
        bm.dpt = m.at("dpt").get<std::string>();
        iot::dpt_family(bm.dpt);
        const auto dir = m.value("direction", std::string("telemetry"));
        if (dir != "telemetry" && dir != "command") {
            throw Error(Errc::ParseError, "mapping direction must be telemetry|command");
        }
        bm.direction = dir == "telemetry" ? iot::BridgeDirection::Telemetry : iot::BridgeDirection::Command;
        if (!(bm.direction == iot::BridgeDirection::Command ? iot::valid_filter(bm.topic) : iot::valid_topic(bm.topic))) {
            throw Error(Errc::BadFilter, "mapping topic '" + bm.topic + "'");
        }
        h.mappings.push_back(std::move(bm));
    }
    return h;
}

iot::HvacConfig hvac_from_json(const json& j)
{
    iot::HvacConfig h;
    h.co2_topic = j.value("co2_topic", h.co2_topic);
    h.command_topic = j.value("command_topic", h.command_topic);
    h.raise_above_ppm = j.value("raise_above_ppm", h.raise_above_ppm);
    h.lower_below_ppm = j.value("lower_below_ppm", h.lower_below_ppm);
    h.actuator = iot::IndividualAddress::parse(j.at("actuator").get<std::string>());
    h.actuator_object = j.value("actuator_object", h.actuator_object);
    if (h.lower_below_ppm > h.raise_above_ppm) {
        throw Error(Errc::ParseError, "lower_below_ppm must not exceed raise_above_ppm");
    }
    return h;
}

} // namespace

ValidationFailure::ValidationFailure(std::vector<std::string> errors)
    : Error(Errc::ValidationError, join(errors)), errors_(std::move(errors))
{
}

std::vector<std::string> timeline_actions()
{
    return {known_actions().begin(), known_actions().end()};
}

ScenarioSpec parse(const json& doc)
{
    ScenarioSpec spec;
    Collector c;

    if (!doc.is_object()) {
        throw ValidationFailure({"scenario must be a JSON object"});
    }
    c.attempt("schema_version", [&] {
        if (doc.at("schema_version").get<int>() != kSchemaVersion) {
            c.add("schema_version: expected " + std::to_string(kSchemaVersion));
        }
    });
    c.attempt("header", [&] {
        spec.name = doc.value("name", std::string("unnamed"));
        spec.seed = doc.value("seed", std::uint64_t{0});
        spec.duration_ms = doc.at("duration_ms").get<sim::Timestamp>();
    });
    c.attempt("topology", [&] {
        const auto t = doc.value("topology", json::object());
        spec.topology.hop_latency_ms = t.value("hop_latency_ms", spec.topology.hop_latency_ms);
        spec.topology.bus_hops = t.value("bus_hops", spec.topology.bus_hops);
        spec.topology.uplink_hops = t.value("uplink_hops", spec.topology.uplink_hops);
        spec.topology.app_hops = t.value("app_hops", spec.topology.app_hops);
        spec.topology.ue_hops = t.value("ue_hops", spec.topology.ue_hops);
    });
    c.attempt("controller", [&] {
        const auto t = doc.value("controller", json::object());
        spec.controller.reconcile_period_ms = t.value("reconcile_period_ms", spec.controller.reconcile_period_ms);
        spec.controller.retry_backoff_ms = t.value("retry_backoff_ms", spec.controller.retry_backoff_ms);
        spec.controller.max_retries = t.value("max_retries", spec.controller.max_retries);
    });
    c.attempt("federation_key", [&] { spec.federation_key = gateway::key_from_hex(doc.at("federation_key").get<std::string>()); });
    c.attempt("internet_probe", [&] {
        if (doc.contains("internet_probe")) {
            spec.internet_probe = net::Ipv4::parse(doc.at("internet_probe").at("ip").get<std::string>());
            spec.internet_probe_port = doc.at("internet_probe").value("port", spec.internet_probe_port);
        }
    });

    std::set<std::string> domain_names;
    std::set<std::string> slice_ids;
    c.attempt("domains", [&] {
        core5g::SessionId base = 1;
        for (const auto& d : doc.at("domains")) {
            c.attempt("domain " + d.value("name", std::string("?")), [&] {
                DomainSpec ds;
                ds.config.name = d.at("name").get<std::string>();
                ds.config.pool = net::Cidr::parse(d.at("pool").get<std::string>());
                ds.key = gateway::key_from_hex(d.at("key").get<std::string>());
                for (const auto& s : d.value("slices", json::array())) {
                    core5g::Slice sl{s.at("slice_id").get<std::string>(), s.value("qos_class", std::string("bulk")),
                                     s.value("isolation_tag", s.at("slice_id").get<std::string>())};
                    slice_ids.insert(sl.slice_id);
                    ds.config.slice_catalog.push_back(std::move(sl));
                }
                ds.config.first_session_id = base;
                base += 1'000'000;
                if (!domain_names.insert(ds.config.name).second) {
                    c.add("domains: duplicate domain " + ds.config.name);
                }
                spec.domains.push_back(std::move(ds));
            });
        }
    });

    if (spec.domains.empty() || spec.domains.size() > 2) {
        c.add("domains: one or two domains required (each gateway has one federation peer)");
    }

    std::set<std::string> imsis;
    std::set<std::string> roles;
    c.attempt("subscribers", [&] {
        for (const auto& s : doc.at("subscribers")) {
            c.attempt("subscriber " + s.value("imsi", std::string("?")), [&] {
                core5g::Subscriber sub;
                sub.imsi = s.at("imsi").get<std::string>();
                sub.home_domain = s.at("home_domain").get<std::string>();
                sub.sim_profiles = s.value("sim_profiles", std::vector<std::string>{sub.home_domain});
                sub.roles = s.value("roles", std::set<std::string>{});
                sub.device_type = s.value("device_type", std::string("ue"));
                sub.posture = s.value("posture", 0);
                sub.subscription_active = s.value("subscription_active", true);
                if (!core5g::is_valid_imsi(sub.imsi)) {
                    c.add("subscriber " + sub.imsi + ": imsi must be 15 digits");
                }
                if (!imsis.insert(sub.imsi).second) {
                    c.add("subscriber " + sub.imsi + ": duplicate imsi");
                }
                if (sub.posture < 0 || sub.posture > 3) {
                    c.add("subscriber " + sub.imsi + ": posture outside 0..3");
                }
                if (!domain_names.contains(sub.home_domain)) {
                    c.add("subscriber " + sub.imsi + ": unknown home_domain " + sub.home_domain);
                }
                std::set<std::string> seen;
                for (const auto& p : sub.sim_profiles) {
                    if (!domain_names.contains(p)) {
                        c.add("subscriber " + sub.imsi + ": unknown sim profile domain " + p);
                    }
                    if (!seen.insert(p).second) {
                        c.add("subscriber " + sub.imsi + ": duplicate sim profile " + p);
                    }
                }
                if (sub.sim_profiles.empty()) {
                    c.add("subscriber " + sub.imsi + ": sim_profiles empty");
                }
                roles.insert(sub.roles.begin(), sub.roles.end());
                spec.subscribers.push_back(std::move(sub));
            });
        }
    });

    c.attempt("service_catalog", [&] {
        spec.policies.service_catalog = sdn::catalog_from_json(doc.at("service_catalog"));
        std::set<std::uint32_t> ips;
        for (const auto& [name, ep] : spec.policies.service_catalog) {
            if (!ips.insert(ep.ip.value).second) {
                c.add("service_catalog: " + name + " reuses endpoint " + ep.ip.str());
            }
            if (name == gateway::kRedSide) {
                c.add("service_catalog: '" + name + "' is reserved");
            }
        }
    });
    c.attempt("role_slice_map", [&] {
        spec.policies.role_slice_map = doc.value("role_slice_map", std::map<std::string, std::string>{});
        for (const auto& [role, slice] : spec.policies.role_slice_map) {
            if (!slice_ids.contains(slice)) {
                c.add("role_slice_map: " + role + " maps to undeclared slice " + slice);
            }
        }
    });
    c.attempt("policies", [&] {
        std::set<std::string> ids;
        for (const auto& r : doc.at("policies")) {
            c.attempt("policy " + r.value("rule_id", std::string("?")), [&] {
                auto p = sdn::policy_from_json(r);
                if (!ids.insert(p.rule_id).second) {
                    c.add("policy " + p.rule_id + ": duplicate rule_id");
                }
                const bool pattern = p.resource.ends_with('*');
                if (p.action == gateway::Action::Access && !pattern &&
                    !spec.policies.service_catalog.contains(p.resource)) {
                    c.add("policy " + p.rule_id + ": unknown service '" + p.resource + "'");
                }
                if (p.action == gateway::Action::Internet && !pattern && p.resource != gateway::kRedSide) {
                    c.add("policy " + p.rule_id + ": internet resource must be '" + std::string(gateway::kRedSide) + "'");
                }
                if (p.subject.domains) {
                    for (const auto& d : *p.subject.domains) {
                        if (!domain_names.contains(d)) {
                            c.add("policy " + p.rule_id + ": unknown domain " + d);
                        }
                    }
                }
                spec.policies.rules.push_back(std::move(p));
            });
        }
    });

    std::set<iot::IndividualAddress> devices;
    c.attempt("commissioning", [&] {
        for (const auto& r : doc.value("commissioning", json::array())) {
            c.attempt("commissioning " + r.value("device_id", std::string("?")), [&] {
                auto rec = sdn::commissioning_from_json(r);
                if (!devices.insert(rec.address).second) {
                    c.add("commissioning " + rec.device_id + ": address " + rec.address.str() + " in use");
                }
                spec.commissioning.push_back(std::move(rec));
            });
        }
    });
    c.attempt("hub", [&] {
        if (doc.contains("hub")) {
            spec.hub = hub_from_json(doc.at("hub"));
        }
    });
    c.attempt("hvac", [&] {
        if (doc.contains("hvac")) {
            spec.hvac = hvac_from_json(doc.at("hvac"));
            if (!devices.contains(spec.hvac->actuator)) {
                c.add("hvac: actuator " + spec.hvac->actuator.str() + " is not commissioned");
            }
        }
    });

    c.attempt("timeline", [&] {
        sim::Timestamp prev = 0;
        std::size_t idx = 0;
        for (const auto& a : doc.at("timeline")) {
            const auto where = "timeline[" + std::to_string(idx++) + "]";
            c.attempt(where, [&] {
                TimelineAction ta;
                ta.at = a.at("at").get<sim::Timestamp>();
                ta.action = a.at("action").get<std::string>();
                ta.params = a;
                if (ta.at < prev) {
                    c.add(where + ": out of order (at " + std::to_string(ta.at) + " < " + std::to_string(prev) + ")");
                }
                prev = std::max(prev, ta.at);
                if (!known_actions().contains(ta.action)) {
                    c.add(where + ": unknown action '" + ta.action + "'");
                }
                if (a.contains("imsi") && !imsis.contains(a.at("imsi").get<std::string>())) {
                    c.add(where + ": unknown imsi " + a.at("imsi").get<std::string>());
                }
                for (const char* key : {"domain", "to"}) {
                    if (a.contains(key) && !domain_names.contains(a.at(key).get<std::string>())) {
                        c.add(where + ": unknown domain " + a.at(key).get<std::string>());
                    }
                }
                if (a.contains("service") && !spec.policies.service_catalog.contains(a.at("service").get<std::string>())) {
                    c.add(where + ": unknown service " + a.at("service").get<std::string>());
                }
                if (a.contains("device") &&
                    !devices.contains(iot::IndividualAddress::parse(a.at("device").get<std::string>()))) {
                    c.add(where + ": unknown device " + a.at("device").get<std::string>());
                }
                if (ta.action == "policy_mutation") {
                    const auto op = a.at("op").get<std::string>();
                    if (op == "add") {
                        sdn::policy_from_json(a.at("rule"));
                    } else if (op == "remove") {
                        a.at("rule_id").get<std::string>();
                    } else if (op != "malformed") {
                        c.add(where + ": unknown policy op '" + op + "'");
                    }
                }
                if (ta.action == "commission") {
                    sdn::commissioning_from_json(a.at("record"));
                }
                if (ta.action == "fault_injection") {
                    const auto kind = a.at("kind").get<std::string>();
                    if (kind != "drop_push" && kind != "domain_down" && kind != "domain_up") {
                        c.add(where + ": unknown fault kind '" + kind + "'");
                    }
                }
                if (ta.at > spec.duration_ms) {
                    c.add(where + ": scheduled after duration_ms");
                }
                spec.timeline.push_back(std::move(ta));
            });
        }
    });

    c.attempt("access_matrix", [&] {
        if (!doc.contains("access_matrix")) {
            return;
        }
        const auto& m = doc.at("access_matrix");
        AccessMatrix am;
        am.at = m.at("at").get<sim::Timestamp>();
        for (const auto& [role, row] : m.at("rows").items()) {
            if (!roles.contains(role)) {
                c.add("access_matrix: no subscriber holds role " + role);
            }
            for (const auto& [col, verdict] : row.items()) {
                if (col != "internet" && !spec.policies.service_catalog.contains(col)) {
                    c.add("access_matrix: unknown service " + col);
                }
                const auto v = verdict.get<std::string>();
                if (v != "permit" && v != "deny") {
                    c.add("access_matrix: " + role + "/" + col + " must be permit|deny");
                }
                am.rows[role][col] = v;
            }
        }
        spec.access_matrix = std::move(am);
    });

    c.attempt("expectations", [&] {
        spec.expectations = doc.value("expectations", json::array());
        std::size_t idx = 0;
        for (const auto& e : spec.expectations) {
            const auto kind = e.at("kind").get<std::string>();
            if (!known_expectations().contains(kind)) {
                c.add("expectations[" + std::to_string(idx) + "]: unknown kind '" + kind + "'");
            }
            ++idx;
        }
    });

    if (!c.errors.empty()) {
        throw ValidationFailure(std::move(c.errors));
    }
    return spec;
}

ScenarioSpec load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::ParseError, "cannot open " + path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ParseError, path + ": " + e.what());
    }
    return parse(doc);
}

} // namespace fgiot::scenario
