#include "fgiot/sim/kernel.hpp"

#include "fgiot/error.hpp"

namespace fgiot::sim {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace

std::string EventLogRecord::to_json_line() const
{
    nlohmann::json j;
    j["component"] = component;
    j["event"] = event;
    j["fields"] = fields;
    j["ts"] = ts;
    return j.dump();
}

EventLogRecord EventLogRecord::from_json_line(std::string_view line)
{
    auto j = nlohmann::json::parse(line);
    EventLogRecord rec;
    rec.ts = j.at("ts").get<Timestamp>();
    rec.component = j.at("component").get<std::string>();
    rec.event = j.at("event").get<std::string>();
    rec.fields = j.at("fields");
    return rec;
}

void EventLog::append(EventLogRecord rec)
{
    records_.push_back(std::move(rec));
    const auto idx = records_.size() - 1;
    for (const auto& obs : observers_) {
        obs(records_[idx], idx);
    }
}

std::string EventLog::to_jsonl() const
{
    std::string out;
    for (const auto& r : records_) {
        out += r.to_json_line();
        out += '\n';
    }
    return out;
}

std::uint64_t Kernel::schedule(SimEvent ev)
{
    if (ev.ts < clock_) {
        throw Error(Errc::PastEvent, "event '" + ev.kind + "' at t=" + std::to_string(ev.ts) +
                                         " before clock " + std::to_string(clock_));
    }
    ev.seq = next_seq_++;
    const auto seq = ev.seq;
    queue_.push(std::move(ev));
    return seq;
}

std::uint64_t Kernel::schedule(Timestamp ts, std::string target, std::string kind, std::function<void()> action)
{
    return schedule(SimEvent{ts, 0, std::move(target), std::move(kind), std::move(action)});
}

std::size_t Kernel::run_until(Timestamp t_end)
{
    std::size_t dispatched = 0;
    while (!queue_.empty() && queue_.top().ts <= t_end) {
        SimEvent ev = queue_.top();
        queue_.pop();
        clock_ = ev.ts;
        if (ev.action) {
            ev.action();
        }
        ++dispatched;
    }
    if (t_end > clock_) {
        clock_ = t_end;
    }
    return dispatched;
}

Timestamp Kernel::next_event_time() const
{
    return queue_.empty() ? clock_ : queue_.top().ts;
}

std::uint64_t Kernel::rng_next(std::string_view stream)
{
    auto it = stream_counters_.find(stream);
    if (it == stream_counters_.end()) {
        it = stream_counters_.emplace(std::string(stream), 0).first;
    }
    const std::uint64_t key = splitmix64(seed_ ^ splitmix64(fnv1a(stream)));
    const std::uint64_t counter = ++it->second;
    return splitmix64(key + counter * kGolden);
}

void Kernel::log(std::string component, std::string event, nlohmann::json fields)
{
    log_.append(EventLogRecord{clock_, std::move(component), std::move(event), std::move(fields)});
}

} // namespace fgiot::sim
