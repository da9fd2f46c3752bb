#include "fgiot/iot/pubsub.hpp"

#include "fgiot/error.hpp"

namespace fgiot::iot {

namespace {

std::vector<std::string_view> segments(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find('/', start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

bool valid_filter(std::string_view filter) noexcept
{
    if (filter.empty()) {
        return false;
    }
    const auto segs = segments(filter);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto seg = segs[i];
        if (seg.find_first_of("+#") == std::string_view::npos) {
            continue;
        }
        if (seg == "+") {
            continue;
        }
        if (seg == "#" && i + 1 == segs.size()) {
            continue;
        }
        return false;
    }
    return true;
}

bool valid_topic(std::string_view topic) noexcept
{
    return !topic.empty() && topic.find_first_of("+#") == std::string_view::npos;
}

bool topic_matches(std::string_view filter, std::string_view topic) noexcept
{
    std::size_t f = 0;
    std::size_t t = 0;
    while (true) {
        const auto f_end = std::min(filter.find('/', f), filter.size());
        const auto f_seg = filter.substr(f, f_end - f);
        if (f_seg == "#") {
            return true;
        }
        if (t > topic.size()) {
            return false;
        }
        const auto t_end = std::min(topic.find('/', t), topic.size());
        const auto t_seg = topic.substr(t, t_end - t);
        if (f_seg != "+" && f_seg != t_seg) {
            return false;
        }
        const bool f_last = f_end == filter.size();
        const bool t_last = t_end == topic.size();
        if (f_last || t_last) {
            if (f_last && t_last) {
                return true;
            }
            // "a/#" also matches "a": the filter may continue with a lone "#".
            return t_last && filter.substr(f_end) == "/#";
        }
        f = f_end + 1;
        t = t_end + 1;
    }
}

SubscriptionId Broker::subscribe(std::string filter, Handler handler, unsigned hops)
{
    if (!valid_filter(filter)) {
        throw Error(Errc::BadFilter, "'" + filter + "'");
    }
    const auto id = next_id_++;
    for (const auto& [topic, msg] : retained_) {
        if (topic_matches(filter, topic)) {
            kernel_.schedule_in(hops * hop_latency_ms_, "broker", "deliver", [handler, msg] { handler(msg); });
        }
    }
    subs_.emplace(id, Subscription{std::move(filter), std::move(handler), hops});
    return id;
}

void Broker::publish(PubSubMessage msg, unsigned publisher_hops)
{
    if (!valid_topic(msg.topic)) {
        throw Error(Errc::BadFilter, "cannot publish to '" + msg.topic + "'");
    }
    kernel_.schedule_in(publisher_hops * hop_latency_ms_, "broker", "publish", [this, msg = std::move(msg)] { route(msg); });
}

void Broker::route(const PubSubMessage& msg)
{
    ++published_;
    if (msg.retained) {
        retained_[msg.topic] = msg;
    }
    kernel_.log("broker", "message_published",
                {{"origin_ts", msg.origin_ts}, {"payload", msg.payload}, {"topic", msg.topic}});
    for (const auto& [id, sub] : subs_) {
        if (!topic_matches(sub.filter, msg.topic)) {
            continue;
        }
        kernel_.schedule_in(sub.hops * hop_latency_ms_, "broker", "deliver", [this, id = id, msg] {
            if (auto it = subs_.find(id); it != subs_.end()) {
                it->second.handler(msg);
            }
        });
    }
}

} // namespace fgiot::iot
