#include <doctest.h>

#include <fstream>
#include <thread>

#include <httplib.h>

#include "fgiot/api/control_api.hpp"

using namespace fgiot;
using namespace fgiot::api;
using nlohmann::json;

namespace {

json shed_doc()
{
    std::ifstream in(std::string(FGIOT_SCENARIO_DIR) + "/shed.json");
    return json::parse(in);
}

/// The shed scenario with installer attaches routed through operator onboarding.
scenario::ScenarioSpec onboarding_spec()
{
    auto doc = shed_doc();
    for (auto& r : doc["policies"]) {
        if (r["rule_id"] == "attach-installer-vpn") {
            r["effect"] = "manual";
        }
    }
    return scenario::parse(doc);
}

struct Api {
    scenario::System sys;
    ControlApi api{sys};

    explicit Api(scenario::ScenarioSpec spec, sim::Timestamp t = 100) : sys(std::move(spec)) { api.advance_to(t); }

    Response call(const std::string& method, const std::string& path, const json& body = nullptr,
                  std::map<std::string, std::string> query = {}, const std::string& actor = "console")
    {
        return api.handle(method, path, query, body.is_null() ? "" : body.dump(), actor);
    }
};

json rule(const std::string& id, const std::string& resource)
{
    return {{"rule_id", id},
            {"priority", 300},
            {"subject", {{"roles", {"customer"}}}},
            {"action", "access"},
            {"resource", resource},
            {"effect", "permit"}};
}

} // namespace

TEST_CASE("error codes map onto HTTP statuses")
{
    CHECK(http_status(Errc::MalformedPolicy) == 400);
    CHECK(http_status(Errc::UnknownService) == 400);
    CHECK(http_status(Errc::Unauthorized) == 403);
    CHECK(http_status(Errc::UnknownImsi) == 404);
    CHECK(http_status(Errc::NotPending) == 409);
    CHECK(http_status(Errc::Conflict) == 409);
    CHECK(http_status(Errc::DomainUnreachable) == 503);
    CHECK(http_status(Errc::PastEvent) == 500);
}

TEST_CASE("sessions and policies are readable")
{
    Api a(scenario::load(std::string(FGIOT_SCENARIO_DIR) + "/shed.json"));
    const auto s = a.call("GET", "/api/v1/sessions");
    CHECK(s.status == 200);
    CHECK(s.body["as_of"] == 100);
    CHECK(s.body["entries"].size() == 6); // the installer without a tunnel is refused
    const auto p = a.call("GET", "/api/v1/policies");
    CHECK(p.status == 200);
    CHECK(p.body["version"] == 1);
    CHECK(p.body["service_catalog"].contains("mqtt-broker"));
}

TEST_CASE("rule edits bump the version and reject bad input")
{
    Api a(scenario::load(std::string(FGIOT_SCENARIO_DIR) + "/shed.json"));
    auto r = a.call("POST", "/api/v1/policies/rules", rule("extra", "home-assistant"), {}, "alice");
    CHECK(r.status == 201);
    CHECK(r.body["version"] == 2);
    CHECK(a.sys.controller().audit().back().actor == "alice");
    CHECK(a.sys.controller().converged()); // pushes drained before the response

    CHECK(a.call("POST", "/api/v1/policies/rules", rule("extra", "home-assistant")).status == 409);
    r = a.call("POST", "/api/v1/policies/rules", rule("ghost", "nowhere"));
    CHECK(r.status == 400);
    CHECK(r.body["code"] == "UnknownService");
    r = a.call("POST", "/api/v1/policies/rules", rule("bad", "a*b"));
    CHECK(r.status == 400);
    CHECK(r.body["code"] == "MalformedPolicy");
    r = a.call("POST", "/api/v1/policies/rules", {{"rule", rule("late", "home-assistant")}, {"expected_version", 1}});
    CHECK(r.status == 409);
    CHECK(r.body["code"] == "Conflict");
    r = a.api.handle("POST", "/api/v1/policies/rules", {}, "{not json", "console");
    CHECK(r.status == 400);
    CHECK(r.body["code"] == "ParseError");

    CHECK(a.call("DELETE", "/api/v1/policies/rules/extra").body["version"] == 3);
    CHECK(a.call("DELETE", "/api/v1/policies/rules/extra").status == 404);
    CHECK(a.sys.controller().version() == 3);
}

TEST_CASE("whole-set replacement honours optimistic concurrency")
{
    Api a(scenario::load(std::string(FGIOT_SCENARIO_DIR) + "/shed.json"));
    auto set = a.call("GET", "/api/v1/policies").body;
    set["expected_version"] = 7;
    CHECK(a.call("PUT", "/api/v1/policies", set).status == 409);
    set["expected_version"] = 1;
    set["rules"].erase(0);
    const auto r = a.call("PUT", "/api/v1/policies", set);
    CHECK(r.status == 200);
    CHECK(r.body["version"] == 2);
    CHECK(a.sys.controller().policies().rules.size() == set["rules"].size());
    set["rules"].push_back(rule("x", "a*b"));
    set["expected_version"] = 2;
    CHECK(a.call("PUT", "/api/v1/policies", set).status == 400);
}

TEST_CASE("onboarding queue approve and deny")
{
    Api a(onboarding_spec());
    auto q = a.call("GET", "/api/v1/onboarding");
    REQUIRE(q.body["items"].size() == 1);
    const auto item = q.body["items"][0];
    CHECK(item["imsi"] == "001010000000006");
    CHECK(item["matched_rule"] == "attach-installer-vpn");
    CHECK(item["requested_at"] == 20);
    const auto id = item["session_id"].get<std::uint64_t>();
    const auto path = "/api/v1/onboarding/" + std::to_string(id);

    auto r = a.call("POST", path + "/approve", nullptr, {}, "alice");
    CHECK(r.status == 200);
    CHECK(r.body["state"] == "active");
    CHECK(a.sys.active_session("001010000000006"));
    CHECK(a.call("POST", path + "/approve").status == 409);
    CHECK(a.call("POST", path + "/deny").body["code"] == "NotPending");
    CHECK(a.call("POST", "/api/v1/onboarding/424242/approve").status == 404);
    CHECK(a.call("POST", "/api/v1/onboarding/abc/approve").status == 400);
    CHECK(a.call("GET", "/api/v1/onboarding").body["items"].empty());
}

TEST_CASE("operator-triggered roam")
{
    Api a(scenario::load(std::string(FGIOT_SCENARIO_DIR) + "/shed.json"));
    const auto before = a.sys.active_session("001010000000001");
    REQUIRE(before);
    auto r = a.call("POST", "/api/v1/actions/roam", {{"imsi", "001010000000001"}, {"to_domain", "public"}});
    CHECK(r.status == 202);
    CHECK(r.body["from_domain"] == "private");
    const auto after = a.sys.active_session("001010000000001");
    REQUIRE(after);
    CHECK(after->domain == "public");
    CHECK(after->service_session_id == before->service_session_id);

    CHECK(a.call("POST", "/api/v1/actions/roam", {{"imsi", "001010000000001"}, {"to_domain", "public"}}).status == 409);
    CHECK(a.call("POST", "/api/v1/actions/roam", {{"imsi", "001010000000007"}, {"to_domain", "public"}}).body["code"] ==
          "NoActiveSession");
    CHECK(a.call("POST", "/api/v1/actions/roam", {{"imsi", "001010000000002"}, {"to_domain", "mars"}}).status == 404);
}

TEST_CASE("event feed pages by sequence number")
{
    Api a(scenario::load(std::string(FGIOT_SCENARIO_DIR) + "/shed.json"));
    const auto all = a.call("GET", "/api/v1/events");
    CHECK(all.status == 200);
    const auto next = all.body["next"].get<std::size_t>();
    CHECK(all.body["events"].size() == next);
    CHECK(all.body["events"][0]["seq"] == 0);
    CHECK(all.body["now"] == 100);
    const auto tail = a.call("GET", "/api/v1/events", nullptr, {{"since", std::to_string(next)}});
    CHECK(tail.body["events"].empty());
    a.api.advance_to(300);
    const auto more = a.call("GET", "/api/v1/events", nullptr, {{"since", std::to_string(next)}});
    CHECK_FALSE(more.body["events"].empty());
    CHECK(more.body["events"][0]["seq"] == next);
}

TEST_CASE("unknown routes and wrong methods")
{
    Api a(scenario::load(std::string(FGIOT_SCENARIO_DIR) + "/shed.json"));
    CHECK(a.call("GET", "/api/v1/nothing").status == 404);
    CHECK(a.call("DELETE", "/api/v1/sessions").status == 405);
    CHECK(a.call("GET", "/api/v1/policies/rules").status == 405);
    CHECK(a.call("PATCH", "/api/v1/policies").body["code"] == "MethodNotAllowed");
}

TEST_CASE("HTTP round trip with long polling")
{
    Api a(scenario::load(std::string(FGIOT_SCENARIO_DIR) + "/shed.json"));
    const int port = a.api.start("127.0.0.1", 0);
    REQUIRE(port > 0);
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(10, 0);

    auto res = cli.Get("/api/v1/sessions");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["entries"].size() == 6);

    res = cli.Post("/api/v1/policies/rules", httplib::Headers{{"X-Actor", "bob"}}, rule("extra", "home-assistant").dump(),
                   "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    CHECK(a.api.with_lock([](scenario::System& s) { return s.controller().audit().back().actor; }) == "bob");

    const auto next = json::parse(cli.Get("/api/v1/events")->body)["next"].get<std::size_t>();
    std::thread driver([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        a.api.advance_to(300);
    });
    const auto t0 = std::chrono::steady_clock::now();
    res = cli.Get("/api/v1/events?since=" + std::to_string(next) + "&wait_ms=5000");
    const auto waited = std::chrono::steady_clock::now() - t0;
    driver.join();
    REQUIRE(res);
    CHECK_FALSE(json::parse(res->body)["events"].empty());
    CHECK(waited < std::chrono::milliseconds(4000));

    res = cli.Get("/api/v1/nowhere");
    REQUIRE(res);
    CHECK(res->status == 404);
    a.api.stop();
}
