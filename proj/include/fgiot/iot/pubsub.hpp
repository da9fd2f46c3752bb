#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fgiot/sim/kernel.hpp"

namespace fgiot::iot {

struct PubSubMessage {
    std::string topic;
    std::string payload;
    bool retained = false;
    sim::Timestamp origin_ts = 0; // when the underlying sample or command originated
    std::uint64_t service_session_id = 0;
};

/// MQTT-style matching: "+" is exactly one segment, a trailing "#" is zero
/// or more segments.
bool topic_matches(std::string_view filter, std::string_view topic) noexcept;
bool valid_filter(std::string_view filter) noexcept;
bool valid_topic(std::string_view topic) noexcept;

using SubscriptionId = std::uint64_t;

/// In-simulation broker. Each client reaches it over `hops` mesh hops;
/// every hop costs the configured latency in each direction.
class Broker {
public:
    using Handler = std::function<void(const PubSubMessage&)>;

    Broker(sim::Kernel& kernel, sim::Timestamp hop_latency_ms = 5) : kernel_(kernel), hop_latency_ms_(hop_latency_ms) {}

    /// Throws BadFilter.
    SubscriptionId subscribe(std::string filter, Handler handler, unsigned hops = 0);
    void unsubscribe(SubscriptionId id) { subs_.erase(id); }

    /// Delivery happens in subscription order once the message reaches the
    /// broker. Throws BadFilter for wildcard topics.
    void publish(PubSubMessage msg, unsigned publisher_hops = 0);

    sim::Timestamp hop_latency_ms() const noexcept { return hop_latency_ms_; }
    std::size_t published_count() const noexcept { return published_; }

private:
    struct Subscription {
        std::string filter;
        Handler handler;
        unsigned hops = 0;
    };

    void route(const PubSubMessage& msg);

    sim::Kernel& kernel_;
    sim::Timestamp hop_latency_ms_;
    std::map<SubscriptionId, Subscription> subs_;
    std::map<std::string, PubSubMessage> retained_;
    SubscriptionId next_id_ = 1;
    std::size_t published_ = 0;
};

} // namespace fgiot::iot
