#include "fgiot/iot/bus.hpp"

#include <algorithm>
#include <set>

#include "fgiot/error.hpp"
#include "fgiot/gateway/credentials.hpp"

namespace fgiot::iot {

std::string_view to_string(TelegramService s) noexcept
{
    switch (s) {
    case TelegramService::Write: return "write";
    case TelegramService::Read: return "read";
    case TelegramService::Response: return "response";
    }
    return "?";
}

const GroupObject* Bus::find_object(const CommissioningRecord& rec, const std::string& name) const
{
    auto it = std::find_if(rec.objects.begin(), rec.objects.end(), [&](const auto& o) { return o.name == name; });
    return it == rec.objects.end() ? nullptr : &*it;
}

void Bus::commission(const CommissioningRecord& rec)
{
    if (devices_.contains(rec.address)) {
        throw Error(Errc::AddressInUse, rec.address.str() + " (" + devices_.at(rec.address).device_id + ")");
    }
    std::set<std::string> names;
    for (const auto& obj : rec.objects) {
        dpt_family(obj.dpt);
        if (!names.insert(obj.name).second) {
            throw Error(Errc::BadLink, rec.device_id + ": duplicate object " + obj.name);
        }
    }
    std::set<std::tuple<std::string, std::uint16_t, int>> seen;
    for (const auto& link : rec.links) {
        if (!names.contains(link.object)) {
            throw Error(Errc::BadLink, rec.device_id + ": link to undeclared object " + link.object);
        }
        if (!seen.emplace(link.object, ga_encode(link.ga), static_cast<int>(link.direction)).second) {
            throw Error(Errc::BadLink, rec.device_id + ": duplicate link " + link.object + " " + link.ga.str());
        }
    }
    devices_.emplace(rec.address, rec);
    kernel_.log("iot-bus", "device_commissioned",
                {{"address", rec.address.str()}, {"device_id", rec.device_id}, {"links", rec.links.size()}});
}

const CommissioningRecord& Bus::device(const IndividualAddress& ia) const
{
    auto it = devices_.find(ia);
    if (it == devices_.end()) {
        throw Error(Errc::NotFound, "device " + ia.str());
    }
    return it->second;
}

std::vector<Bus::Recipient> Bus::recipients(const GroupAddress& ga, LinkDirection dir) const
{
    std::vector<Recipient> out;
    for (const auto& [ia, rec] : devices_) {
        for (const auto& link : rec.links) {
            if (link.ga == ga && link.direction == dir) {
                out.push_back({ia, link.object});
            }
        }
    }
    return out;
}

std::size_t Bus::group_write(const GroupAddress& ga, std::vector<std::uint8_t> payload, Telegram meta)
{
    auto targets = recipients(ga, LinkDirection::In);
    for (const auto& r : targets) {
        const auto* obj = find_object(devices_.at(r.device), r.object);
        if (payload.size() != dpt_payload_size(obj->dpt)) {
            throw Error(Errc::InvalidEncoding, "payload length " + std::to_string(payload.size()) + " for " +
                                                   obj->dpt + " on " + ga.str());
        }
    }
    Telegram t = std::move(meta);
    t.ga = ga;
    t.service = TelegramService::Write;
    t.payload = std::move(payload);
    if (t.origin_ts == 0) {
        t.origin_ts = kernel_.now();
    }
    kernel_.log("iot-bus", "group_write",
                {{"from_bridge", t.from_bridge},
                 {"ga", ga.str()},
                 {"payload", gateway::to_hex(t.payload)},
                 {"recipients", targets.size()},
                 {"src", t.src.str()}});
    kernel_.schedule_in(transit_ms(), "iot-bus", "telegram", [this, t, targets] {
        for (const auto& r : targets) {
            auto it = devices_.find(r.device);
            if (it == devices_.end()) {
                continue;
            }
            state_[{r.device, r.object}] = t.payload;
            for (const auto& obs : delivery_observers_) {
                obs(it->second, r.object, t);
            }
        }
        for (const auto& obs : telegram_observers_) {
            obs(t);
        }
    });
    return targets.size();
}

Telegram Bus::group_read(const GroupAddress& ga) const
{
    // recipients() walks devices_ in address order, so the first is the lowest.
    const auto responders = recipients(ga, LinkDirection::Out);
    if (responders.empty()) {
        throw Error(Errc::NoResponder, ga.str());
    }
    const auto& r = responders.front();
    Telegram t;
    t.src = r.device;
    t.ga = ga;
    t.service = TelegramService::Response;
    if (auto it = state_.find({r.device, r.object}); it != state_.end()) {
        t.payload = it->second;
    } else {
        t.payload.assign(dpt_payload_size(find_object(devices_.at(r.device), r.object)->dpt), 0);
    }
    t.origin_ts = kernel_.now();
    return t;
}

std::size_t Bus::device_send(const IndividualAddress& ia, const std::string& object, const Datapoint& value)
{
    const auto& rec = device(ia);
    const auto* obj = find_object(rec, object);
    if (obj == nullptr) {
        throw Error(Errc::BadLink, rec.device_id + " has no object " + object);
    }
    auto payload = encode_datapoint(Datapoint{obj->dpt, value.value});
    state_[{ia, object}] = payload;
    auto link = std::find_if(rec.links.begin(), rec.links.end(), [&](const auto& l) {
        return l.object == object && l.direction == LinkDirection::Out;
    });
    if (link == rec.links.end()) {
        throw Error(Errc::BadLink, rec.device_id + "." + object + " has no out link");
    }
    Telegram meta;
    meta.src = ia;
    return group_write(link->ga, std::move(payload), meta);
}

std::optional<std::vector<std::uint8_t>> Bus::object_state(const IndividualAddress& ia, const std::string& object) const
{
    if (auto it = state_.find({ia, object}); it != state_.end()) {
        return it->second;
    }
    return std::nullopt;
}

} // namespace fgiot::iot
