#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fgiot::sim {

/// Virtual milliseconds since scenario start.
using Timestamp = std::uint64_t;

struct SimEvent {
    Timestamp ts = 0;
    std::uint64_t seq = 0;
    std::string target;
    std::string kind;
    std::function<void()> action;
};

/// One line of the event log. `fields` holds scalars only.
struct EventLogRecord {
    Timestamp ts = 0;
    std::string component;
    std::string event;
    nlohmann::json fields = nlohmann::json::object();

    /// Single-line JSON with lexicographically sorted keys.
    std::string to_json_line() const;
    static EventLogRecord from_json_line(std::string_view line);
};

class EventLog {
public:
    using Observer = std::function<void(const EventLogRecord&, std::size_t index)>;

    void append(EventLogRecord rec);
    const std::vector<EventLogRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    const EventLogRecord& operator[](std::size_t i) const { return records_[i]; }

    void add_observer(Observer obs) { observers_.push_back(std::move(obs)); }

    /// Newline-delimited JSON; the determinism golden artifact.
    std::string to_jsonl() const;

private:
    std::vector<EventLogRecord> records_;
    std::vector<Observer> observers_;
};

/// Single-threaded discrete-event loop with a virtual clock and named
/// counter-based random streams.
class Kernel {
public:
    explicit Kernel(std::uint64_t seed = 0) : seed_(seed) {}

    Kernel(const Kernel&) = delete;
    Kernel& operator=(const Kernel&) = delete;

    Timestamp now() const noexcept { return clock_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Enqueues `ev` and returns its assigned sequence number. Throws
    /// Error(PastEvent) when ev.ts is earlier than the clock.
    std::uint64_t schedule(SimEvent ev);
    std::uint64_t schedule(Timestamp ts, std::string target, std::string kind, std::function<void()> action);
    std::uint64_t schedule_in(Timestamp delay, std::string target, std::string kind, std::function<void()> action)
    {
        return schedule(clock_ + delay, std::move(target), std::move(kind), std::move(action));
    }

    /// Dispatches every event with ts <= t_end, then sets the clock to t_end.
    std::size_t run_until(Timestamp t_end);

    bool has_pending() const noexcept { return !queue_.empty(); }
    Timestamp next_event_time() const;
    std::size_t pending_count() const noexcept { return queue_.size(); }

    std::uint64_t rng_next(std::string_view stream);

    void log(std::string component, std::string event, nlohmann::json fields = nlohmann::json::object());
    EventLog& event_log() noexcept { return log_; }
    const EventLog& event_log() const noexcept { return log_; }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const noexcept
        {
            return a.ts != b.ts ? a.ts > b.ts : a.seq > b.seq;
        }
    };

    std::uint64_t seed_;
    Timestamp clock_ = 0;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
    std::map<std::string, std::uint64_t, std::less<>> stream_counters_;
    EventLog log_;
};

} // namespace fgiot::sim
