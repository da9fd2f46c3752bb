#pragma once

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "fgiot/error.hpp"
#include "fgiot/scenario/system.hpp"

namespace fgiot::api {

struct Response {
    int status = 200;
    nlohmann::json body = nlohmann::json::object();
};

/// HTTP status for an error code; see docs/http-api.md.
int http_status(Errc code) noexcept;

/// JSON control API over a running system. Every request is serialized on
/// one mutex and drains the events it caused at the current virtual time
/// before responding, so a client always reads its own writes.
class ControlApi {
public:
    explicit ControlApi(scenario::System& sys);
    ~ControlApi();
    ControlApi(const ControlApi&) = delete;
    ControlApi& operator=(const ControlApi&) = delete;

    Response handle(const std::string& method, const std::string& path,
                    const std::map<std::string, std::string>& query, const std::string& body,
                    const std::string& actor = "console");

    /// Advances virtual time under the API lock (serve-mode stepping).
    void advance_to(sim::Timestamp t);
    sim::Timestamp now();

    /// Binds and serves on a background thread. Returns the bound port.
    int start(const std::string& host, int port);
    void stop();

    template <typename F>
    auto with_lock(F&& fn)
    {
        std::lock_guard lock(mutex_);
        return fn(sys_);
    }

private:
    struct Http;

    Response dispatch(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query, const std::string& body,
                      const std::string& actor, std::unique_lock<std::mutex>& lock);
    Response events(const std::map<std::string, std::string>& query, std::unique_lock<std::mutex>& lock);
    Response onboarding_decision(core5g::SessionId id, bool approve, const std::string& actor);
    Response roam(const nlohmann::json& body);

    scenario::System& sys_;
    std::mutex mutex_;
    std::condition_variable log_grew_;
    std::unique_ptr<Http> http_;
};

} // namespace fgiot::api
