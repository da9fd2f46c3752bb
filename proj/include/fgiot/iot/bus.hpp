#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fgiot/iot/knx.hpp"
#include "fgiot/sim/kernel.hpp"

namespace fgiot::iot {

enum class TelegramService { Write, Read, Response };
std::string_view to_string(TelegramService s) noexcept;

struct Telegram {
    IndividualAddress src;
    GroupAddress ga;
    TelegramService service = TelegramService::Write;
    std::vector<std::uint8_t> payload;
    bool from_bridge = false;
    sim::Timestamp origin_ts = 0;
    std::uint64_t service_session_id = 0;
};

enum class LinkDirection { In, Out };

struct GroupObject {
    std::string name;
    std::string dpt;
};

struct GroupLink {
    std::string object;
    GroupAddress ga;
    LinkDirection direction = LinkDirection::In;
};

struct CommissioningRecord {
    std::string device_id;
    IndividualAddress address;
    std::vector<GroupObject> objects;
    std::vector<GroupLink> links;
    std::map<std::string, std::string> parameters;
};

/// Reliable, ordered telegram bus standing in for the building mesh. A
/// telegram reaches its recipients after hops * hop latency.
class Bus {
public:
    using TelegramObserver = std::function<void(const Telegram&)>;
    using DeliveryObserver = std::function<void(const CommissioningRecord& device, const std::string& object,
                                                const Telegram&)>;

    Bus(sim::Kernel& kernel, sim::Timestamp hop_latency_ms = 5, unsigned hops = 1)
        : kernel_(kernel), hop_latency_ms_(hop_latency_ms), hops_(hops)
    {
    }

    /// Throws AddressInUse / BadLink; nothing is registered on failure.
    void commission(const CommissioningRecord& rec);
    bool is_commissioned(const IndividualAddress& ia) const { return devices_.contains(ia); }
    const CommissioningRecord& device(const IndividualAddress& ia) const;
    const std::map<IndividualAddress, CommissioningRecord>& devices() const noexcept { return devices_; }

    /// Returns how many device objects will receive the write.
    std::size_t group_write(const GroupAddress& ga, std::vector<std::uint8_t> payload, Telegram meta = {});
    /// Response from the lowest-addressed device with an out-link on `ga`.
    Telegram group_read(const GroupAddress& ga) const;

    /// Device-originated write of a new object value (e.g. a sensor sample).
    std::size_t device_send(const IndividualAddress& ia, const std::string& object, const Datapoint& value);

    std::optional<std::vector<std::uint8_t>> object_state(const IndividualAddress& ia, const std::string& object) const;

    /// Observers see every write/response telegram as it arrives on the bus
    /// (the hub listens here).
    void on_telegram(TelegramObserver obs) { telegram_observers_.push_back(std::move(obs)); }
    void on_delivery(DeliveryObserver obs) { delivery_observers_.push_back(std::move(obs)); }

    sim::Timestamp transit_ms() const noexcept { return hop_latency_ms_ * hops_; }

private:
    struct Recipient {
        IndividualAddress device;
        std::string object;
    };
    std::vector<Recipient> recipients(const GroupAddress& ga, LinkDirection dir) const;
    const GroupObject* find_object(const CommissioningRecord& rec, const std::string& name) const;

    sim::Kernel& kernel_;
    sim::Timestamp hop_latency_ms_;
    unsigned hops_;
    std::map<IndividualAddress, CommissioningRecord> devices_;
    std::map<std::pair<IndividualAddress, std::string>, std::vector<std::uint8_t>> state_;
    std::vector<TelegramObserver> telegram_observers_;
    std::vector<DeliveryObserver> delivery_observers_;
};

} // namespace fgiot::iot
