#include "fgiot/scenario/runner.hpp"

#include <algorithm>
#include <sstream>

namespace fgiot::scenario {

using nlohmann::json;

namespace {

struct Match {
    std::optional<std::size_t> first;
    std::optional<std::size_t> last;
    std::size_t count = 0;
};

Match scan(const json& matcher, const std::vector<sim::EventLogRecord>& log)
{
    Match m;
    for (std::size_t i = 0; i < log.size(); ++i) {
        if (record_matches(matcher, log[i])) {
            if (!m.first) {
                m.first = i;
            }
            m.last = i;
            ++m.count;
        }
    }
    return m;
}

std::string describe(const json& matcher)
{
    std::string out = matcher.value("component", std::string()) + (matcher.contains("component") ? "/" : "") +
                      matcher.value("event", std::string("*"));
    if (matcher.contains("fields")) {
        out += " " + matcher.at("fields").dump();
    }
    return out;
}

bool compare_bound(const json& e, double value, std::string& detail)
{
    std::ostringstream os;
    os << "value " << value;
    bool ok = true;
    if (e.contains("equals") && value != e.at("equals").get<double>()) {
        ok = false;
        os << " != " << e.at("equals").get<double>();
    }
    if (e.contains("min") && value < e.at("min").get<double>()) {
        ok = false;
        os << " < min " << e.at("min").get<double>();
    }
    if (e.contains("max") && value > e.at("max").get<double>()) {
        ok = false;
        os << " > max " << e.at("max").get<double>();
    }
    detail = os.str();
    return ok;
}

ExpectationResult check_one(const json& e, const System& sys)
{
    const auto& log = sys.kernel().event_log().records();
    ExpectationResult r;
    r.kind = e.at("kind").get<std::string>();
    r.label = e.value("label", std::string());

    if (r.kind == "exists" || r.kind == "absent") {
        const auto m = scan(e.at("match"), log);
        if (r.label.empty()) {
            r.label = describe(e.at("match"));
        }
        r.passed = (m.count > 0) == (r.kind == "exists");
        if (!r.passed && m.first) {
            r.line = *m.first + 1;
            r.detail = "unexpected record";
        } else if (!r.passed) {
            r.detail = "no matching record";
        }
    } else if (r.kind == "count") {
        const auto m = scan(e.at("match"), log);
        if (r.label.empty()) {
            r.label = describe(e.at("match"));
        }
        r.passed = compare_bound(e, static_cast<double>(m.count), r.detail);
        if (!r.passed && m.last) {
            r.line = *m.last + 1;
        }
    } else if (r.kind == "order") {
        const auto before = scan(e.at("before"), log);
        const auto after = scan(e.at("after"), log);
        if (r.label.empty()) {
            r.label = describe(e.at("before")) + " before " + describe(e.at("after"));
        }
        if (!before.first) {
            r.detail = "no record for 'before'";
        } else if (!after.first) {
            r.detail = "no record for 'after'";
        } else if (*after.first < *before.first) {
            r.detail = "'after' precedes 'before'";
            r.line = *after.first + 1;
        } else {
            r.passed = true;
        }
    } else if (r.kind == "latency") {
        if (r.label.empty()) {
            r.label = describe(e.at("match"));
        }
        const auto field = e.value("field", std::string("latency_ms"));
        std::size_t seen = 0;
        r.passed = true;
        for (std::size_t i = 0; i < log.size() && r.passed; ++i) {
            if (!record_matches(e.at("match"), log[i])) {
                continue;
            }
            ++seen;
            if (!log[i].fields.contains(field) || !log[i].fields.at(field).is_number()) {
                r.passed = false;
                r.detail = "record has no numeric '" + field + "'";
                r.line = i + 1;
            } else if (!compare_bound(e, log[i].fields.at(field).get<double>(), r.detail)) {
                r.passed = false;
                r.line = i + 1;
            }
        }
        if (r.passed && seen == 0) {
            r.passed = false;
            r.detail = "no matching record";
        } else if (r.passed) {
            r.detail = std::to_string(seen) + " records within bound";
        }
    } else if (r.kind == "converged") {
        if (r.label.empty()) {
            r.label = "all domains at canonical policy version";
        }
        const auto& ctl = sys.controller();
        r.passed = ctl.converged();
        if (!r.passed) {
            r.detail = "canonical " + std::to_string(ctl.version());
            for (const auto& [d, st] : ctl.registry()) {
                r.detail += ", " + d + "=" + std::to_string(st.applied_policy_version);
            }
        }
        if (r.passed && e.contains("within_ms")) {
            // every version bump must reach every domain within the bound
            const auto bound = e.at("within_ms").get<sim::Timestamp>();
            for (std::size_t i = 0; i < log.size() && r.passed; ++i) {
                if (log[i].component != "fed-sdn" || log[i].event != "policy_updated") {
                    continue;
                }
                const auto v = log[i].fields.at("version").get<std::uint64_t>();
                for (const auto& d : sys.domains()) {
                    bool reached = false;
                    for (std::size_t j = i; j < log.size(); ++j) {
                        const auto& rec = log[j];
                        if (rec.ts > log[i].ts + bound) {
                            break;
                        }
                        if (rec.event == "program_applied" && rec.fields.at("domain") == d &&
                            rec.fields.at("version").get<std::uint64_t>() >= v) {
                            reached = true;
                            break;
                        }
                    }
                    if (!reached) {
                        r.passed = false;
                        r.line = i + 1;
                        r.detail = "version " + std::to_string(v) + " not applied on " + d + " within " +
                                   std::to_string(bound) + " ms";
                        break;
                    }
                }
            }
        }
    } else {
        r.detail = "unknown expectation kind";
    }
    return r;
}

} // namespace

bool record_matches(const json& matcher, const sim::EventLogRecord& rec)
{
    if (matcher.contains("event") && matcher.at("event").get<std::string>() != rec.event) {
        return false;
    }
    if (matcher.contains("component") && matcher.at("component").get<std::string>() != rec.component) {
        return false;
    }
    if (matcher.contains("fields")) {
        for (const auto& [k, v] : matcher.at("fields").items()) {
            if (!rec.fields.contains(k) || rec.fields.at(k) != v) {
                return false;
            }
        }
    }
    return true;
}

std::vector<ExpectationResult> check_expectations(const json& expectations, const System& sys)
{
    std::vector<ExpectationResult> out;
    for (std::size_t i = 0; i < expectations.size(); ++i) {
        auto r = check_one(expectations[i], sys);
        r.index = i;
        out.push_back(std::move(r));
    }
    return out;
}

json collect_metrics(const System& sys)
{
    const auto& log = sys.kernel().event_log().records();
    json counts = json::object();
    json latencies = json::array();
    sim::Timestamp last_update = 0;
    sim::Timestamp last_applied = 0;
    for (const auto& rec : log) {
        counts[rec.event] = counts.value(rec.event, 0) + 1;
        if (rec.event == "hvac_command_delivered") {
            latencies.push_back(rec.fields.at("latency_ms"));
        } else if (rec.event == "policy_updated") {
            last_update = rec.ts;
        } else if (rec.event == "program_applied" &&
                   rec.fields.at("version").get<std::uint64_t>() == sys.controller().version()) {
            last_applied = std::max(last_applied, rec.ts);
        }
    }
    json versions = json::object();
    for (const auto& [d, st] : sys.controller().registry()) {
        versions[d] = st.applied_policy_version;
    }
    json m;
    m["event_counts"] = counts;
    m["hvac_loop_latency_ms"] = latencies;
    m["security_alarms"] = sys.alarms().alarms();
    m["canonical_version"] = sys.controller().version();
    m["applied_versions"] = versions;
    m["converged"] = sys.controller().converged();
    m["convergence_ms"] = sys.controller().converged() && last_applied >= last_update ? json(last_applied - last_update)
                                                                                       : json(nullptr);
    m["log_records"] = log.size();
    m["end_ts"] = sys.kernel().now();
    return m;
}

RunReport make_report(const System& sys)
{
    RunReport r;
    r.scenario = sys.spec().name;
    r.seed = sys.kernel().seed();
    r.results = check_expectations(sys.spec().expectations, sys);
    r.metrics = collect_metrics(sys);
    return r;
}

bool RunReport::passed() const
{
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

json RunReport::to_json() const
{
    json out;
    out["scenario"] = scenario;
    out["seed"] = seed;
    out["passed"] = passed();
    out["expectations"] = json::array();
    for (const auto& r : results) {
        json e{{"index", r.index}, {"kind", r.kind}, {"label", r.label}, {"passed", r.passed}, {"detail", r.detail}};
        e["line"] = r.line ? json(*r.line) : json(nullptr);
        out["expectations"].push_back(std::move(e));
    }
    out["metrics"] = metrics;
    return out;
}

std::string RunReport::summary() const
{
    std::ostringstream os;
    std::size_t ok = 0;
    for (const auto& r : results) {
        ok += r.passed ? 1 : 0;
        os << (r.passed ? "PASS " : "FAIL ") << "[" << r.index << "] " << r.kind << ": " << r.label;
        if (!r.passed) {
            os << " (" << r.detail;
            if (r.line) {
                os << ", log line " << *r.line;
            }
            os << ")";
        }
        os << "\n";
    }
    os << ok << "/" << results.size() << " expectations passed\n";
    return os.str();
}

RunResult run(const ScenarioSpec& spec, std::optional<std::uint64_t> seed)
{
    System sys(spec, seed);
    sys.run();
    return {make_report(sys), sys.kernel().event_log().to_jsonl()};
}

std::optional<std::string> role_representative(const System& sys, const std::string& role)
{
    std::vector<std::string> holders;
    for (const auto& s : sys.spec().subscribers) {
        if (s.roles.contains(role)) {
            holders.push_back(s.imsi);
        }
    }
    std::sort(holders.begin(), holders.end());
    for (const auto& imsi : holders) {
        if (sys.active_session(imsi)) {
            return imsi;
        }
    }
    return std::nullopt;
}

FlowMatrix probe_matrix(const System& sys, const std::vector<std::string>& roles)
{
    FlowMatrix m;
    const auto& spec = sys.spec();
    for (const auto& role : roles) {
        auto& row = m[role];
        const auto imsi = role_representative(sys, role);
        auto cell = [&](net::Ipv4 ip, std::uint16_t port, const std::string& proto) -> std::string {
            if (!imsi) {
                return "no_session";
            }
            const auto d = sys.evaluate(*imsi, ip, port, proto);
            return d && d->action == pep::AclAction::Permit ? "permit" : "deny";
        };
        for (const auto& [name, ep] : spec.policies.service_catalog) {
            row[name] = cell(ep.ip, ep.port, ep.proto);
        }
        row["internet"] = cell(spec.internet_probe, spec.internet_probe_port, "tcp");
    }
    return m;
}

FlowMatrix flow_matrix(const ScenarioSpec& spec)
{
    System sys(spec);
    std::vector<std::string> roles;
    if (spec.access_matrix) {
        sys.run_until(spec.access_matrix->at);
        for (const auto& [role, row] : spec.access_matrix->rows) {
            roles.push_back(role);
        }
    } else {
        sys.run();
        std::set<std::string> all;
        for (const auto& s : spec.subscribers) {
            all.insert(s.roles.begin(), s.roles.end());
        }
        roles.assign(all.begin(), all.end());
    }
    return probe_matrix(sys, roles);
}

std::string render_matrix(const FlowMatrix& m)
{
    std::vector<std::string> cols;
    std::size_t w0 = 4;
    for (const auto& [role, row] : m) {
        w0 = std::max(w0, role.size());
        for (const auto& [c, v] : row) {
            if (std::find(cols.begin(), cols.end(), c) == cols.end()) {
                cols.push_back(c);
            }
        }
    }
    std::ostringstream os;
    os << std::string(w0, ' ');
    for (const auto& c : cols) {
        os << "  " << c;
    }
    os << "\n";
    for (const auto& [role, row] : m) {
        std::string line = role + std::string(w0 - role.size(), ' ');
        for (const auto& c : cols) {
            const auto it = row.find(c);
            const std::string v = it == row.end() ? "-" : it->second;
            line += "  " + v + std::string(c.size() > v.size() ? c.size() - v.size() : 0, ' ');
        }
        line.erase(line.find_last_not_of(' ') + 1);
        os << line << "\n";
    }
    return os.str();
}

} // namespace fgiot::scenario
