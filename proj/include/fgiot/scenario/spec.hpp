#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgiot/core5g/core.hpp"
#include "fgiot/error.hpp"
#include "fgiot/gateway/credentials.hpp"
#include "fgiot/iot/hub.hpp"
#include "fgiot/iot/hvac.hpp"
#include "fgiot/sdn/controller.hpp"

namespace fgiot::scenario {

inline constexpr int kSchemaVersion = 1;

struct Topology {
    sim::Timestamp hop_latency_ms = 5;
    unsigned bus_hops = 1;    // device <-> hub over the mesh
    unsigned uplink_hops = 1; // hub <-> broker
    unsigned app_hops = 1;    // automation app <-> broker
    unsigned ue_hops = 1;     // 5G UE <-> broker
};

struct DomainSpec {
    core5g::DomainConfig config;
    gateway::Key key{};
};

struct TimelineAction {
    sim::Timestamp at = 0;
    std::string action;
    nlohmann::json params; // the whole entry, validated per action
};

struct AccessMatrix {
    sim::Timestamp at = 0;
    /// role -> column ("<service>" or "internet") -> "permit" | "deny"
    std::map<std::string, std::map<std::string, std::string>> rows;
};

struct ScenarioSpec {
    std::string name;
    std::uint64_t seed = 0;
    sim::Timestamp duration_ms = 0;
    Topology topology;
    gateway::Key federation_key{};
    std::vector<DomainSpec> domains;
    std::vector<core5g::Subscriber> subscribers;
    sdn::CanonicalPolicySet policies;
    sdn::ControllerConfig controller;
    std::vector<iot::CommissioningRecord> commissioning;
    std::optional<iot::HubConfig> hub;
    std::optional<iot::HvacConfig> hvac;
    net::Ipv4 internet_probe{0xCB00710A}; // 203.0.113.10
    std::uint16_t internet_probe_port = 443;
    std::vector<TimelineAction> timeline;
    std::optional<AccessMatrix> access_matrix;
    nlohmann::json expectations = nlohmann::json::array();
};

/// Carries every validation problem found, not just the first.
class ValidationFailure : public Error {
public:
    explicit ValidationFailure(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    std::vector<std::string> errors_;
};

ScenarioSpec parse(const nlohmann::json& doc);
ScenarioSpec load(const std::string& path);

std::vector<std::string> timeline_actions();

} // namespace fgiot::scenario
