#include <doctest.h>

#include <random>

#include "fgiot/error.hpp"
#include "fgiot/iot/bus.hpp"
#include "fgiot/iot/hub.hpp"
#include "fgiot/iot/pubsub.hpp"

using namespace fgiot;
using namespace fgiot::iot;

namespace {

CommissioningRecord light(const std::string& ia, const std::string& ga)
{
    return {"light-" + ia, IndividualAddress::parse(ia), {{"switch", "1.001"}},
            {{"switch", GroupAddress::parse(ga), LinkDirection::In}}, {}};
}

CommissioningRecord sensor(const std::string& ia, const std::string& ga)
{
    return {"co2-" + ia, IndividualAddress::parse(ia), {{"co2", "9.008"}},
            {{"co2", GroupAddress::parse(ga), LinkDirection::Out}}, {}};
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

} // namespace

TEST_CASE("commissioning registers devices and rejects conflicts")
{
    sim::Kernel k;
    Bus bus(k);
    bus.commission(light("1.1.10", "1/2/3"));
    CHECK(bus.is_commissioned(IndividualAddress::parse("1.1.10")));
    CHECK(code_of([&] { bus.commission(light("1.1.10", "1/2/4")); }) == Errc::AddressInUse);
    auto bad = light("1.1.11", "1/2/3");
    bad.links.push_back({"dimmer", GroupAddress::parse("1/2/5"), LinkDirection::In});
    CHECK(code_of([&] { bus.commission(bad); }) == Errc::BadLink);
    CHECK_FALSE(bus.is_commissioned(IndividualAddress::parse("1.1.11")));
}

TEST_CASE("write reaches every in-linked device after one transit")
{
    sim::Kernel k;
    Bus bus(k, 5, 1);
    bus.commission(light("1.1.10", "1/2/3"));
    bus.commission(light("1.1.11", "1/2/3"));
    bus.commission(light("1.1.12", "1/2/4"));
    CHECK(bus.group_write(GroupAddress::parse("1/2/3"), {0x01}) == 2);
    k.run_until(4);
    CHECK_FALSE(bus.object_state(IndividualAddress::parse("1.1.10"), "switch"));
    k.run_until(5);
    CHECK(*bus.object_state(IndividualAddress::parse("1.1.10"), "switch") == std::vector<std::uint8_t>{0x01});
    CHECK(*bus.object_state(IndividualAddress::parse("1.1.11"), "switch") == std::vector<std::uint8_t>{0x01});
    CHECK_FALSE(bus.object_state(IndividualAddress::parse("1.1.12"), "switch"));
    CHECK(code_of([&] { bus.group_write(GroupAddress::parse("1/2/3"), {0x01, 0x02}); }) == Errc::InvalidEncoding);
}

TEST_CASE("read answers from the lowest out-linked device")
{
    sim::Kernel k;
    Bus bus(k);
    CHECK(code_of([&] { bus.group_read(GroupAddress::parse("5/0/1")); }) == Errc::NoResponder);
    auto a = light("1.1.20", "1/2/3");
    a.links.push_back({"switch", GroupAddress::parse("1/2/3"), LinkDirection::Out});
    auto b = light("1.1.5", "1/2/3");
    b.links.push_back({"switch", GroupAddress::parse("1/2/3"), LinkDirection::Out});
    bus.commission(a);
    bus.commission(b);
    bus.group_write(GroupAddress::parse("1/2/3"), {0x01});
    k.run_until(10);
    const auto t = bus.group_read(GroupAddress::parse("1/2/3"));
    CHECK(t.src.str() == "1.1.5");
    CHECK(t.payload == std::vector<std::uint8_t>{0x01});
}

TEST_CASE("hub bridges telemetry and commands without echo")
{
    sim::Kernel k;
    Bus bus(k, 5, 1);
    Broker broker(k, 5);
    bus.commission(light("1.1.10", "1/2/3"));
    bus.commission(sensor("1.1.20", "2/1/1"));
    Hub hub(k, bus, broker,
            HubConfig{IndividualAddress::parse("1.0.1"),
                      {{GroupAddress::parse("2/1/1"), "shed/room1/co2", "9.008", BridgeDirection::Telemetry},
                       {GroupAddress::parse("1/2/3"), "shed/room1/light/set", "1.001", BridgeDirection::Command}},
                      1});
    std::vector<std::string> seen;
    broker.subscribe("shed/#", [&](const PubSubMessage& m) { seen.push_back(m.topic + "=" + m.payload); });

    bus.device_send(IndividualAddress::parse("1.1.20"), "co2", {"9.008", 800.0});
    k.run_until(100);
    CHECK(seen == std::vector<std::string>{"shed/room1/co2=800.00"});

    broker.publish({"shed/room1/light/set", "1", false, 0, 0});
    k.run_until(200);
    CHECK(*bus.object_state(IndividualAddress::parse("1.1.10"), "switch") == std::vector<std::uint8_t>{0x01});
    // the command message itself, and no re-publication of the bridged write
    CHECK(seen.size() == 2);
    CHECK(hub.commands_written() == 1);
    CHECK(hub.published() == 1);
}

TEST_CASE("bridge conservation under random traffic")
{
    sim::Kernel k;
    Bus bus(k, 5, 1);
    Broker broker(k, 5);
    bus.commission(light("1.1.10", "1/2/3"));
    bus.commission(sensor("1.1.20", "2/1/1"));
    bus.commission(sensor("1.1.21", "2/1/9")); // unmapped
    Hub hub(k, bus, broker,
            HubConfig{IndividualAddress::parse("1.0.1"),
                      {{GroupAddress::parse("2/1/1"), "shed/room1/co2", "9.008", BridgeDirection::Telemetry},
                       {GroupAddress::parse("1/2/3"), "shed/room1/light/set", "1.001", BridgeDirection::Command}},
                      1});
    std::size_t telemetry = 0;
    broker.subscribe("shed/room1/co2", [&](const PubSubMessage&) { ++telemetry; });
    std::mt19937_64 rng(3);
    std::size_t mapped_sent = 0;
    std::size_t commands_sent = 0;
    std::size_t writes_to_light = 0;
    bus.on_delivery([&](const CommissioningRecord& d, const std::string&, const Telegram&) {
        writes_to_light += d.device_id == "light-1.1.10" ? 1 : 0;
    });
    for (int i = 0; i < 500; ++i) {
        switch (rng() % 3) {
        case 0:
            bus.device_send(IndividualAddress::parse("1.1.20"), "co2", {"9.008", 400.0 + static_cast<double>(rng() % 1000)});
            ++mapped_sent;
            break;
        case 1:
            bus.device_send(IndividualAddress::parse("1.1.21"), "co2", {"9.008", 500.0});
            break;
        default:
            broker.publish({"shed/room1/light/set", rng() % 2 ? "1" : "0", false, 0, 0});
            ++commands_sent;
        }
        k.run_until(k.now() + 1);
    }
    k.run_until(k.now() + 1000);
    CHECK(telemetry == mapped_sent);
    CHECK(hub.published() == mapped_sent);
    CHECK(hub.commands_written() == commands_sent);
    CHECK(writes_to_light == commands_sent);
}
