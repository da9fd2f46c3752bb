#pragma once

#include <set>
#include <string>

#include "fgiot/iot/bus.hpp"
#include "fgiot/iot/pubsub.hpp"
#include "fgiot/net/ipv4.hpp"
#include "fgiot/pep/router.hpp"

namespace fgiot::iot {

struct HvacConfig {
    std::string co2_topic = "shed/room1/co2";
    std::string command_topic = "shed/room1/hvac/set";
    double raise_above_ppm = 1000.0;
    double lower_below_ppm = 800.0;
    unsigned app_hops = 1; // controller <-> broker
    IndividualAddress actuator;
    std::string actuator_object = "ventilation";
};

/// One step of the ventilation hysteresis: at most one level per sample.
int hvac_step(int level, double co2_ppm, double raise_above, double lower_below) noexcept;

/// CO2-driven ventilation loop. Samples arrive on the CO2 topic; level
/// changes go out on the command topic and are timed at the actuator.
class HvacController {
public:
    HvacController(sim::Kernel& kernel, Broker& broker, Bus& bus, HvacConfig config);

    int level() const noexcept { return level_; }
    std::size_t commands_sent() const noexcept { return commands_; }

private:
    void on_sample(const PubSubMessage& msg);

    sim::Kernel& kernel_;
    Broker& broker_;
    HvacConfig config_;
    int level_ = 0;
    std::size_t commands_ = 0;
};

/// Raises one security alarm per denied flow toward an IoT service.
class AlarmMonitor {
public:
    AlarmMonitor(sim::Kernel& kernel, std::set<net::Ipv4> protected_services)
        : kernel_(kernel), protected_(std::move(protected_services))
    {
    }

    void observe(const std::string& domain, const pep::FlowQuery& q, const pep::FlowDecision& d);
    std::size_t alarms() const noexcept { return alarms_; }

private:
    sim::Kernel& kernel_;
    std::set<net::Ipv4> protected_;
    std::size_t alarms_ = 0;
};

} // namespace fgiot::iot
