#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "fgiot/core5g/core.hpp"
#include "fgiot/gateway/gateway.hpp"
#include "fgiot/iot/bus.hpp"
#include "fgiot/iot/hub.hpp"
#include "fgiot/iot/hvac.hpp"
#include "fgiot/iot/pubsub.hpp"
#include "fgiot/pep/router.hpp"
#include "fgiot/scenario/spec.hpp"
#include "fgiot/sdn/controller.hpp"
#include "fgiot/sim/kernel.hpp"

namespace fgiot::scenario {

/// Every module of one scenario wired onto a single kernel. The timeline is
/// scheduled at construction; nothing runs until run_until().
class System {
public:
    explicit System(ScenarioSpec spec, std::optional<std::uint64_t> seed = std::nullopt);
    System(const System&) = delete;
    System& operator=(const System&) = delete;

    const ScenarioSpec& spec() const noexcept { return spec_; }
    sim::Kernel& kernel() noexcept { return kernel_; }
    const sim::Kernel& kernel() const noexcept { return kernel_; }
    sdn::Controller& controller() noexcept { return *controller_; }
    const sdn::Controller& controller() const noexcept { return *controller_; }
    iot::Bus& bus() noexcept { return *bus_; }
    iot::Broker& broker() noexcept { return *broker_; }
    const iot::HvacController* hvac() const noexcept { return hvac_.get(); }
    const iot::AlarmMonitor& alarms() const noexcept { return *alarms_; }

    core5g::Core& core(const core5g::DomainId& d);
    gateway::Gateway& gateway(const core5g::DomainId& d);
    pep::Router& router(const core5g::DomainId& d);
    std::vector<core5g::DomainId> domains() const;

    void run_until(sim::Timestamp t) { kernel_.run_until(t); }
    void run() { kernel_.run_until(spec_.duration_ms); }

    /// The subscriber's active session in whichever domain holds it.
    std::optional<core5g::PduSession> active_session(const std::string& imsi) const;

    /// PEP decision for a flow from the subscriber's active session, with no
    /// side effects. nullopt when the subscriber has no active session.
    std::optional<pep::FlowDecision> evaluate(const std::string& imsi, net::Ipv4 dst, std::uint16_t port,
                                              const std::string& proto = "tcp") const;

    /// Same as evaluate() but logged and fed to the alarm monitor.
    std::optional<pep::FlowDecision> flow_query(const std::string& imsi, net::Ipv4 dst, std::uint16_t port,
                                                const std::string& proto = "tcp");

    /// Executes one timeline entry at the current virtual time. Failures are
    /// logged as scenario/action_failed, never thrown.
    void perform(const TimelineAction& a);

private:
    struct Domain {
        std::unique_ptr<core5g::Core> core;
        std::unique_ptr<gateway::Gateway> gateway;
        std::unique_ptr<pep::Router> router;
    };

    void perform_unchecked(const TimelineAction& a);
    void remote_publish(const nlohmann::json& p);
    void commission_remote(const nlohmann::json& p);
    void policy_mutation(const nlohmann::json& p);
    void onboarding(const nlohmann::json& p, bool approve);
    iot::Datapoint datapoint_for(const iot::IndividualAddress& ia, const std::string& object,
                                 const nlohmann::json& value) const;
    const Domain& domain_parts(const core5g::DomainId& d) const;

    ScenarioSpec spec_;
    sim::Kernel kernel_;
    std::map<core5g::DomainId, Domain> domains_;
    std::unique_ptr<sdn::Controller> controller_;
    std::unique_ptr<iot::Bus> bus_;
    std::unique_ptr<iot::Broker> broker_;
    std::unique_ptr<iot::Hub> hub_;
    std::unique_ptr<iot::HvacController> hvac_;
    std::unique_ptr<iot::AlarmMonitor> alarms_;
};

} // namespace fgiot::scenario
