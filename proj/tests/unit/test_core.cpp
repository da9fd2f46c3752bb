#include <doctest.h>

#include "fgiot/core5g/core.hpp"
#include "fgiot/error.hpp"

using namespace fgiot;
using core5g::Core;

namespace {

core5g::Subscriber sub(const std::string& imsi, std::vector<std::string> profiles = {"private"})
{
    return {imsi, "private", std::move(profiles), {"local-user"}, "ue", 2, true};
}

Errc code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return Errc::ParseError;
}

struct Fixture {
    sim::Kernel kernel;
    Core core{kernel, core5g::DomainConfig{"private", net::Cidr::parse("10.42.0.0/16"), {{"user", "bulk", "u"}}, 1}};
    std::vector<core5g::SessionId> requests;

    Fixture()
    {
        core.on_access_request([this](const core5g::PduSession& s) { requests.push_back(s.session_id); });
    }
};

} // namespace

TEST_CASE("subscriber registration validates identity")
{
    Fixture f;
    f.core.register_subscriber(sub("001010000000001"));
    CHECK(code_of([&] { f.core.register_subscriber(sub("001010000000001")); }) == Errc::DuplicateImsi);
    CHECK(code_of([&] { f.core.register_subscriber(sub("0010100000001")); }) == Errc::ValidationError);
    CHECK(code_of([&] { f.core.register_subscriber(sub("00101000000000x")); }) == Errc::ValidationError);
    CHECK(code_of([&] { f.core.register_subscriber(sub("001010000000002", {})); }) == Errc::ValidationError);
}

TEST_CASE("attach creates a pending session handed to the access hook")
{
    Fixture f;
    f.core.register_subscriber(sub("001010000000001"));
    const auto& s = f.core.attach("001010000000001");
    CHECK(s.state == core5g::SessionState::Pending);
    CHECK_FALSE(s.ip);
    CHECK(f.requests.empty()); // the hook runs as a kernel event
    f.kernel.run_until(0);
    REQUIRE(f.requests.size() == 1);
    CHECK(f.requests[0] == s.session_id);
}

TEST_CASE("admission assigns the lowest free address starting at base+2")
{
    Fixture f;
    for (const char* imsi : {"001010000000001", "001010000000002", "001010000000003"}) {
        f.core.register_subscriber(sub(imsi));
    }
    const auto a = f.core.attach("001010000000001").session_id;
    const auto b = f.core.attach("001010000000002").session_id;
    CHECK(f.core.admit_session(a, "user").ip->str() == "10.42.0.2");
    CHECK(f.core.admit_session(b, "user").ip->str() == "10.42.0.3");
    f.core.release_session(a, "detach");
    const auto c = f.core.attach("001010000000003").session_id;
    CHECK(f.core.admit_session(c, "user").ip->str() == "10.42.0.2");
}

TEST_CASE("slices are instantiated on first admission")
{
    Fixture f;
    f.core.register_subscriber(sub("001010000000001"));
    f.core.register_subscriber(sub("001010000000002"));
    CHECK(f.core.instantiated_slices().empty());
    f.core.admit_session(f.core.attach("001010000000001").session_id, "user");
    f.core.admit_session(f.core.attach("001010000000002").session_id, "iot");
    REQUIRE(f.core.instantiated_slices().size() == 2);
    CHECK(f.core.instantiated_slices().at("user").qos_class == "bulk");
    CHECK(f.core.instantiated_slices().at("iot").qos_class == "bulk");
}

TEST_CASE("attach preconditions")
{
    Fixture f;
    f.core.register_subscriber(sub("001010000000001"));
    f.core.register_subscriber(core5g::Subscriber{"001010000000009", "public", {"public"}, {}, "ue", 0, true});
    CHECK(code_of([&] { f.core.attach("001010000000077"); }) == Errc::UnknownImsi);
    CHECK(code_of([&] { f.core.attach("001010000000009"); }) == Errc::NoSimProfile);
    f.core.attach("001010000000001");
    CHECK(code_of([&] { f.core.attach("001010000000001"); }) == Errc::AlreadyAttached);
}

TEST_CASE("reject and release state machine")
{
    Fixture f;
    f.core.register_subscriber(sub("001010000000001"));
    const auto id = f.core.attach("001010000000001").session_id;
    f.core.reject_session(id, "policy");
    CHECK(f.core.session(id).state == core5g::SessionState::Released);
    CHECK(code_of([&] { f.core.admit_session(id, "user"); }) == Errc::NotPending);
    CHECK(f.core.live_sessions().empty());
    // a denied attach may be retried straight away
    const auto again = f.core.attach("001010000000001").session_id;
    CHECK(again != id);
    CHECK(code_of([&] { f.core.release_session(again, "x"); }) == Errc::NoActiveSession);
    f.core.admit_session(again, "user");
    f.core.release_session(again, "detach");
    CHECK_FALSE(f.core.active_session("001010000000001"));
    CHECK(code_of([&] { f.core.session(999); }) == Errc::UnknownSession);
}

TEST_CASE("pool exhaustion")
{
    sim::Kernel k;
    // a /30 leaves exactly one assignable address (base+2)
    Core core(k, core5g::DomainConfig{"tiny", net::Cidr::parse("10.50.0.0/30"), {}, 1});
    core.register_subscriber(core5g::Subscriber{"001010000000001", "tiny", {"tiny"}, {}, "ue", 0, true});
    core.register_subscriber(core5g::Subscriber{"001010000000002", "tiny", {"tiny"}, {}, "ue", 0, true});
    CHECK(core.admit_session(core.attach("001010000000001").session_id, "s").ip->str() == "10.50.0.2");
    const auto id = core.attach("001010000000002").session_id;
    CHECK(code_of([&] { core.admit_session(id, "s"); }) == Errc::PoolExhausted);
    CHECK(core.session(id).state == core5g::SessionState::Pending);
}

TEST_CASE("session ids start at the configured offset")
{
    sim::Kernel k;
    Core core(k, core5g::DomainConfig{"public", net::Cidr::parse("10.99.0.0/16"), {}, 1'000'001});
    core.register_subscriber(core5g::Subscriber{"001010000000001", "public", {"public"}, {}, "ue", 0, true});
    CHECK(core.attach("001010000000001").session_id == 1'000'001);
}

TEST_CASE("switch_sim requires an active session and a profile for the target")
{
    Fixture f;
    f.core.register_subscriber(sub("001010000000001", {"private", "public"}));
    f.core.register_subscriber(sub("001010000000002"));
    std::vector<std::string> roams;
    f.core.on_roam([&](const core5g::PduSession& s, const core5g::DomainId& to) { roams.push_back(s.imsi + "->" + to); });
    CHECK(code_of([&] { f.core.switch_sim("001010000000001", "private", "public"); }) == Errc::NoActiveSession);
    f.core.admit_session(f.core.attach("001010000000001").session_id, "user");
    f.core.admit_session(f.core.attach("001010000000002").session_id, "user");
    CHECK(code_of([&] { f.core.switch_sim("001010000000002", "private", "public"); }) == Errc::NoSimProfile);
    f.core.switch_sim("001010000000001", "private", "public");
    f.kernel.run_until(0);
    CHECK(roams == std::vector<std::string>{"001010000000001->public"});
    CHECK(f.kernel.event_log().records().back().event == "sim_switched");
}

TEST_CASE("subscriber context projection")
{
    Fixture f;
    f.core.register_subscriber(sub("001010000000001"));
    auto ctx = f.core.query_subscriber_context("001010000000001");
    CHECK(ctx.roles == std::set<std::string>{"local-user"});
    CHECK(ctx.subscription_active);
    f.core.set_subscription_active("001010000000001", false);
    CHECK_FALSE(f.core.query_subscriber_context("001010000000001").subscription_active);
    CHECK(code_of([&] { f.core.query_subscriber_context("001010000000002"); }) == Errc::UnknownImsi);
}
