#include "fgiot/iot/hub.hpp"

#include "fgiot/error.hpp"

namespace fgiot::iot {

Hub::Hub(sim::Kernel& kernel, Bus& bus, Broker& broker, HubConfig config)
    : kernel_(kernel), bus_(bus), broker_(broker), config_(std::move(config))
{
    bus_.on_telegram([this](const Telegram& t) { on_telegram(t); });
    for (const auto& m : config_.mappings) {
        if (m.direction == BridgeDirection::Command) {
            broker_.subscribe(
                m.topic, [this, m](const PubSubMessage& msg) { on_command(m, msg); }, config_.uplink_hops);
        }
    }
}

void Hub::on_telegram(const Telegram& t)
{
    if (t.from_bridge || t.service == TelegramService::Read) {
        return;
    }
    for (const auto& m : config_.mappings) {
        if (m.direction != BridgeDirection::Telemetry || m.ga != t.ga) {
            continue;
        }
        std::string text;
        try {
            text = render_value(decode_datapoint(m.dpt, t.payload));
        } catch (const Error& e) {
            kernel_.log("iot-hub", "bridge_decode_failed", {{"detail", e.what()}, {"ga", t.ga.str()}});
            return;
        }
        ++published_;
        kernel_.log("iot-hub", "bridge_published",
                    {{"ga", t.ga.str()}, {"origin_ts", t.origin_ts}, {"payload", text}, {"topic", m.topic}});
        broker_.publish(PubSubMessage{m.topic, text, false, t.origin_ts, t.service_session_id}, config_.uplink_hops);
        return;
    }
    kernel_.log("iot-hub", "bridge_unmapped", {{"ga", t.ga.str()}, {"src", t.src.str()}});
}

void Hub::on_command(const BridgeMapping& m, const PubSubMessage& msg)
{
    std::vector<std::uint8_t> payload;
    try {
        payload = encode_datapoint(parse_value(m.dpt, msg.payload));
    } catch (const Error& e) {
        kernel_.log("iot-hub", "bridge_command_rejected", {{"detail", e.what()}, {"topic", msg.topic}});
        return;
    }
    Telegram meta;
    meta.src = config_.address;
    meta.from_bridge = true;
    meta.origin_ts = msg.origin_ts;
    meta.service_session_id = msg.service_session_id;
    ++commands_written_;
    kernel_.log("iot-hub", "bridge_command",
                {{"ga", m.ga.str()}, {"origin_ts", msg.origin_ts}, {"payload", msg.payload}, {"topic", msg.topic}});
    bus_.group_write(m.ga, std::move(payload), meta);
}

} // namespace fgiot::iot
