#include "fgiot/iot/hvac.hpp"

#include "fgiot/error.hpp"

namespace fgiot::iot {

int hvac_step(int level, double co2_ppm, double raise_above, double lower_below) noexcept
{
    if (co2_ppm > raise_above && level < 2) {
        return level + 1;
    }
    if (co2_ppm < lower_below && level > 0) {
        return level - 1;
    }
    return level;
}

HvacController::HvacController(sim::Kernel& kernel, Broker& broker, Bus& bus, HvacConfig config)
    : kernel_(kernel), broker_(broker), config_(std::move(config))
{
    broker_.subscribe(
        config_.co2_topic, [this](const PubSubMessage& msg) { on_sample(msg); }, config_.app_hops);
    bus.on_delivery([this](const CommissioningRecord& dev, const std::string& object, const Telegram& t) {
        if (dev.address != config_.actuator || object != config_.actuator_object) {
            return;
        }
        kernel_.log("hvac", "hvac_command_delivered",
                    {{"ga", t.ga.str()},
                     {"latency_ms", kernel_.now() - t.origin_ts},
                     {"level", t.payload.empty() ? 0 : t.payload.front()},
                     {"origin_ts", t.origin_ts},
                     {"service_session_id", t.service_session_id}});
    });
}

void HvacController::on_sample(const PubSubMessage& msg)
{
    double ppm = 0;
    try {
        ppm = std::get<double>(parse_value("9.008", msg.payload).value);
    } catch (const Error& e) {
        kernel_.log("hvac", "sample_rejected", {{"detail", e.what()}, {"payload", msg.payload}});
        return;
    }
    const int next = hvac_step(level_, ppm, config_.raise_above_ppm, config_.lower_below_ppm);
    if (next == level_) {
        return;
    }
    kernel_.log("hvac", "hvac_level_changed",
                {{"co2", msg.payload}, {"from", level_}, {"sample_ts", msg.origin_ts}, {"to", next}});
    level_ = next;
    ++commands_;
    broker_.publish(PubSubMessage{config_.command_topic, std::to_string(next), false, msg.origin_ts, 0},
                    config_.app_hops);
}

void AlarmMonitor::observe(const std::string& domain, const pep::FlowQuery& q, const pep::FlowDecision& d)
{
    if (d.action != pep::AclAction::Deny || !protected_.contains(q.dst)) {
        return;
    }
    ++alarms_;
    kernel_.log("iot-security", "security_alarm",
                {{"domain", domain},
                 {"dst", q.dst.str()},
                 {"dst_port", q.dst_port},
                 {"matched", d.matched_priority ? std::to_string(*d.matched_priority) : std::string("default")},
                 {"src", q.src.str()}});
}

} // namespace fgiot::iot
