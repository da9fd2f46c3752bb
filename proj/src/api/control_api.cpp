#include "fgiot/api/control_api.hpp"

#include <chrono>
#include <regex>
#include <thread>

#include <httplib.h>

#include "fgiot/sdn/json_codec.hpp"

namespace fgiot::api {

using nlohmann::json;

namespace {

constexpr const char* kPrefix = "/api/v1";
constexpr long kMaxWaitMs = 30'000;

Response error(int status, const std::string& code, const std::string& message)
{
    return {status, {{"code", code}, {"message", message}}};
}

Response error(const Error& e)
{
    return error(http_status(e.code()), std::string(errc_name(e.code())), e.what());
}

json parse_body(const std::string& body)
{
    try {
        return json::parse(body.empty() ? "{}" : body);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ParseError, std::string("request body: ") + e.what());
    }
}

std::uint64_t parse_u64(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw Error(Errc::ParseError, what + " must be a non-negative integer");
    }
}

json record_json(const sim::EventLogRecord& r, std::size_t seq)
{
    return {{"seq", seq}, {"ts", r.ts}, {"component", r.component}, {"event", r.event}, {"fields", r.fields}};
}

} // namespace

int http_status(Errc code) noexcept
{
    switch (code) {
    case Errc::MalformedPolicy:
    case Errc::ParseError:
    case Errc::ValidationError:
    case Errc::UnknownService:
    case Errc::InvalidEncoding:
    case Errc::RangeError:
    case Errc::OutOfRange:
    case Errc::BadFilter:
    case Errc::BadLink:
        return 400;
    case Errc::Unauthorized:
        return 403;
    case Errc::NotFound:
    case Errc::UnknownImsi:
    case Errc::UnknownSession:
        return 404;
    case Errc::Conflict:
    case Errc::NotPending:
    case Errc::NoActiveSession:
    case Errc::NoSimProfile:
    case Errc::AlreadyAttached:
    case Errc::DuplicateImsi:
    case Errc::DuplicatePrefix:
    case Errc::DuplicatePriority:
    case Errc::AddressInUse:
    case Errc::NoFederationPeer:
        return 409;
    case Errc::DomainUnreachable:
        return 503;
    default:
        return 500;
    }
}

struct ControlApi::Http {
    httplib::Server server;
    std::thread thread;
};

ControlApi::ControlApi(scenario::System& sys) : sys_(sys)
{
    sys_.kernel().event_log().add_observer([this](const sim::EventLogRecord&, std::size_t) { log_grew_.notify_all(); });
}

ControlApi::~ControlApi() { stop(); }

void ControlApi::advance_to(sim::Timestamp t)
{
    std::lock_guard lock(mutex_);
    if (t > sys_.kernel().now()) {
        sys_.run_until(t);
    }
}

sim::Timestamp ControlApi::now()
{
    std::lock_guard lock(mutex_);
    return sys_.kernel().now();
}

Response ControlApi::handle(const std::string& method, const std::string& path,
                            const std::map<std::string, std::string>& query, const std::string& body,
                            const std::string& actor)
{
    std::unique_lock lock(mutex_);
    try {
        auto r = dispatch(method, path, query, body, actor, lock);
        // drain work the request scheduled at the current instant
        sys_.run_until(sys_.kernel().now());
        return r;
    } catch (const Error& e) {
        return error(e);
    } catch (const json::exception& e) {
        return error(400, "ParseError", e.what());
    }
}

Response ControlApi::dispatch(const std::string& method, const std::string& path,
                              const std::map<std::string, std::string>& query, const std::string& body,
                              const std::string& actor, std::unique_lock<std::mutex>& lock)
{
    static const std::regex rule_path(R"(/api/v1/policies/rules/([^/]+))");
    static const std::regex onboarding_path(R"(/api/v1/onboarding/([^/]+)/(approve|deny))");
    auto& ctl = sys_.controller();
    std::smatch m;

    if (path == std::string(kPrefix) + "/sessions") {
        if (method != "GET") {
            return error(405, "MethodNotAllowed", method + " " + path);
        }
        return {200, sdn::to_json(ctl.poll_sessions())};
    }
    if (path == std::string(kPrefix) + "/policies") {
        if (method == "GET") {
            return {200, sdn::to_json(ctl.policies())};
        }
        if (method != "PUT") {
            return error(405, "MethodNotAllowed", method + " " + path);
        }
        const auto j = parse_body(body);
        if (j.contains("expected_version") && j.at("expected_version").get<std::uint64_t>() != ctl.version()) {
            throw Error(Errc::Conflict, "policy set is at version " + std::to_string(ctl.version()));
        }
        auto next = sdn::policy_set_from_json(j);
        const auto v = ctl.update_policies(actor, "replace policy set", [&](sdn::CanonicalPolicySet& p) {
            p.rules = std::move(next.rules);
            if (j.contains("role_slice_map")) {
                p.role_slice_map = std::move(next.role_slice_map);
            }
        });
        return {200, {{"version", v}}};
    }
    if (path == std::string(kPrefix) + "/policies/rules") {
        if (method != "POST") {
            return error(405, "MethodNotAllowed", method + " " + path);
        }
        const auto j = parse_body(body);
        auto rule = sdn::policy_from_json(j.contains("rule") ? j.at("rule") : j);
        if (j.contains("expected_version") && j.at("expected_version").get<std::uint64_t>() != ctl.version()) {
            throw Error(Errc::Conflict, "policy set is at version " + std::to_string(ctl.version()));
        }
        const auto& svc = rule.resource;
        if (rule.action == gateway::Action::Access && !svc.ends_with('*') && !ctl.policies().service_catalog.contains(svc)) {
            throw Error(Errc::UnknownService, "rule " + rule.rule_id + " names unknown service " + svc);
        }
        return {201, {{"version", ctl.add_rule(actor, std::move(rule))}}};
    }
    if (std::regex_match(path, m, rule_path)) {
        if (method != "DELETE") {
            return error(405, "MethodNotAllowed", method + " " + path);
        }
        return {200, {{"version", ctl.remove_rule(actor, m[1].str())}}};
    }
    if (path == std::string(kPrefix) + "/onboarding") {
        if (method != "GET") {
            return error(405, "MethodNotAllowed", method + " " + path);
        }
        json items = json::array();
        for (const auto& d : sys_.domains()) {
            for (const auto& [id, item] : sys_.gateway(d).pending_onboarding()) {
                items.push_back({{"session_id", id},
                                 {"imsi", item.request.imsi},
                                 {"domain", item.request.domain},
                                 {"matched_rule", item.matched_rule},
                                 {"requested_at", item.requested_at},
                                 {"roles", std::vector<std::string>(item.ctx.roles.begin(), item.ctx.roles.end())},
                                 {"device_type", item.ctx.device_type}});
            }
        }
        return {200, {{"items", items}}};
    }
    if (std::regex_match(path, m, onboarding_path)) {
        if (method != "POST") {
            return error(405, "MethodNotAllowed", method + " " + path);
        }
        return onboarding_decision(parse_u64(m[1].str(), "session_id"), m[2].str() == "approve", actor);
    }
    if (path == std::string(kPrefix) + "/actions/roam") {
        if (method != "POST") {
            return error(405, "MethodNotAllowed", method + " " + path);
        }
        return roam(parse_body(body));
    }
    if (path == std::string(kPrefix) + "/events") {
        if (method != "GET") {
            return error(405, "MethodNotAllowed", method + " " + path);
        }
        return events(query, lock);
    }
    return error(404, "NotFound", "no route " + method + " " + path);
}

Response ControlApi::onboarding_decision(core5g::SessionId id, bool approve, const std::string& actor)
{
    for (const auto& d : sys_.domains()) {
        auto& gw = sys_.gateway(d);
        if (gw.pending_onboarding().contains(id)) {
            approve ? gw.approve_onboarding(id, actor) : gw.deny_onboarding(id, actor);
            sys_.run_until(sys_.kernel().now());
            const auto& s = sys_.core(d).session(id);
            return {200, {{"session_id", id}, {"state", std::string(core5g::to_string(s.state))}}};
        }
    }
    for (const auto& d : sys_.domains()) {
        if (sys_.core(d).all_sessions().contains(id)) {
            throw Error(Errc::NotPending, "session " + std::to_string(id) + " was already decided");
        }
    }
    throw Error(Errc::NotFound, "no pending onboarding for session " + std::to_string(id));
}

Response ControlApi::roam(const json& body)
{
    const auto imsi = body.at("imsi").get<std::string>();
    const auto to = body.at("to_domain").get<std::string>();
    sys_.core(to); // NotFound for unknown domains
    const auto s = sys_.active_session(imsi);
    if (!s) {
        throw Error(Errc::NoActiveSession, imsi);
    }
    if (s->domain == to) {
        throw Error(Errc::Conflict, imsi + " is already in " + to);
    }
    sys_.core(s->domain).switch_sim(imsi, s->domain, to);
    return {202, {{"imsi", imsi}, {"from_domain", s->domain}, {"to_domain", to}, {"session_id", s->session_id}}};
}

Response ControlApi::events(const std::map<std::string, std::string>& query, std::unique_lock<std::mutex>& lock)
{
    std::size_t since = 0;
    long wait_ms = 0;
    if (auto it = query.find("since"); it != query.end()) {
        since = parse_u64(it->second, "since");
    }
    if (auto it = query.find("wait_ms"); it != query.end()) {
        wait_ms = static_cast<long>(std::min<std::uint64_t>(parse_u64(it->second, "wait_ms"), kMaxWaitMs));
    }
    const auto& log = sys_.kernel().event_log();
    if (wait_ms > 0) {
        log_grew_.wait_for(lock, std::chrono::milliseconds(wait_ms), [&] { return log.size() > since; });
    }
    json out = json::array();
    for (std::size_t i = since; i < log.size(); ++i) {
        out.push_back(record_json(log[i], i));
    }
    return {200, {{"events", out}, {"next", log.size()}, {"now", sys_.kernel().now()}}};
}

int ControlApi::start(const std::string& host, int port)
{
    http_ = std::make_unique<Http>();
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query(req.params.begin(), req.params.end());
        const auto actor = req.has_header("X-Actor") ? req.get_header_value("X-Actor") : std::string("console");
        const auto r = handle(req.method, req.path, query, req.body, actor);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    auto& svr = http_->server;
    svr.Get(".*", handler);
    svr.Put(".*", handler);
    svr.Post(".*", handler);
    svr.Delete(".*", handler);
    svr.Patch(".*", handler);
    const int bound = port == 0 ? svr.bind_to_any_port(host) : (svr.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
        http_.reset();
        throw Error(Errc::AddressInUse, host + ":" + std::to_string(port));
    }
    http_->thread = std::thread([this] { http_->server.listen_after_bind(); });
    return bound;
}

void ControlApi::stop()
{
    if (!http_) {
        return;
    }
    http_->server.stop();
    if (http_->thread.joinable()) {
        http_->thread.join();
    }
    http_.reset();
}

} // namespace fgiot::api
