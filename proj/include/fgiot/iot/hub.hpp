#pragma once

#include <string>
#include <vector>

#include "fgiot/iot/bus.hpp"
#include "fgiot/iot/pubsub.hpp"

namespace fgiot::iot {

enum class BridgeDirection { Telemetry, Command };

struct BridgeMapping {
    GroupAddress ga;
    std::string topic;
    std::string dpt;
    BridgeDirection direction = BridgeDirection::Telemetry;
};

struct HubConfig {
    IndividualAddress address{1, 0, 1};
    std::vector<BridgeMapping> mappings;
    unsigned uplink_hops = 1; // hub <-> broker
};

/// Bridges bus telegrams to pub/sub topics and command topics back to
/// telegrams. Telegrams the hub itself wrote are never re-published.
class Hub {
public:
    Hub(sim::Kernel& kernel, Bus& bus, Broker& broker, HubConfig config);

    const HubConfig& config() const noexcept { return config_; }
    std::size_t published() const noexcept { return published_; }
    std::size_t commands_written() const noexcept { return commands_written_; }

private:
    void on_telegram(const Telegram& t);
    void on_command(const BridgeMapping& m, const PubSubMessage& msg);

    sim::Kernel& kernel_;
    Bus& bus_;
    Broker& broker_;
    HubConfig config_;
    std::size_t published_ = 0;
    std::size_t commands_written_ = 0;
};

} // namespace fgiot::iot
