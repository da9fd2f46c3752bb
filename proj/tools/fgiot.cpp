#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "fgiot/api/control_api.hpp"
#include "fgiot/scenario/runner.hpp"
#include "fgiot/scenario/spec.hpp"
#include "fgiot/scenario/system.hpp"

namespace {

using namespace fgiot;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(Errc::NotFound, "cannot write " + path);
    }
    out << content;
}

int report_and_exit(const scenario::RunReport& report, const std::string& log, const std::string& log_path,
                    const std::string& report_path)
{
    if (!log_path.empty()) {
        write_file(log_path, log);
    }
    if (!report_path.empty()) {
        write_file(report_path, report.to_json().dump(2) + "\n");
    }
    std::cout << "scenario " << report.scenario << " seed " << report.seed << "\n" << report.summary();
    return report.passed() ? 0 : 1;
}

int serve(scenario::ScenarioSpec spec, std::optional<std::uint64_t> seed, const std::string& host, int port,
          double speed, bool exit_after_run, const std::string& log_path, const std::string& report_path)
{
    scenario::System sys(std::move(spec), seed);
    api::ControlApi api(sys);
    const int bound = api.start(host, port);
    std::cout << "serving control API on http://" << host << ":" << bound << "/api/v1" << std::endl;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    constexpr auto kStep = std::chrono::milliseconds(20);
    const auto t0 = std::chrono::steady_clock::now();
    bool reported = false;
    int rc = 0;
    while (!g_stop) {
        std::this_thread::sleep_for(kStep);
        const auto real_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
        const auto target = static_cast<sim::Timestamp>(static_cast<double>(real_ms.count()) * speed);
        const auto duration = sys.spec().duration_ms;
        api.advance_to(reported ? target : std::min(target, duration));
        if (!reported && api.now() >= duration) {
            rc = api.with_lock([&](scenario::System& s) {
                return report_and_exit(scenario::make_report(s), s.kernel().event_log().to_jsonl(), log_path,
                                       report_path);
            });
            reported = true;
            if (exit_after_run) {
                break;
            }
            std::cout << "scenario finished; still serving (Ctrl-C to stop)" << std::endl;
        }
    }
    api.stop();
    if (!reported) {
        rc = report_and_exit(scenario::make_report(sys), sys.kernel().event_log().to_jsonl(), log_path, report_path);
    }
    return rc;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Federated 5G/IoT testbed simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::string log_path;
    std::string report_path;
    bool serve_mode = false;
    int port = 8080;
    std::string host = "127.0.0.1";
    double speed = 1.0;
    bool exit_after_run = false;

    auto* run = app.add_subcommand("run", "run a scenario and check its expectations");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--log", log_path, "write the JSONL event log here");
    run->add_option("--report", report_path, "write the JSON run report here");
    run->add_flag("--serve", serve_mode, "advance in real time and serve the control API");
    run->add_option("--port", port, "control API port (0 picks a free one)");
    run->add_option("--host", host, "control API bind address");
    run->add_option("--speed", speed, "virtual ms per wall-clock ms in serve mode")->check(CLI::PositiveNumber);
    run->add_flag("--exit-after-run", exit_after_run, "stop serving once the scenario duration is reached");

    auto* matrix = app.add_subcommand("matrix", "tabulate PEP decisions per role and service");
    matrix->add_option("scenario", scenario_path, "scenario JSON file")->required();

    auto* validate = app.add_subcommand("validate", "validate a scenario file");
    validate->add_option("scenario", scenario_path, "scenario JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        auto spec = scenario::load(scenario_path);
        if (*validate) {
            std::set<std::string> roles;
            for (const auto& s : spec.subscribers) {
                roles.insert(s.roles.begin(), s.roles.end());
            }
            std::cout << "ok: " << spec.name << " (" << spec.subscribers.size() << " subscribers, " << roles.size()
                      << " roles, " << spec.policies.service_catalog.size() << " services, " << spec.timeline.size()
                      << " timeline actions, " << spec.expectations.size() << " expectations)\n";
            return 0;
        }
        if (*matrix) {
            const auto m = scenario::flow_matrix(spec);
            std::cout << scenario::render_matrix(m);
            if (!spec.access_matrix) {
                return 0;
            }
            int mismatches = 0;
            for (const auto& [role, row] : spec.access_matrix->rows) {
                for (const auto& [col, want] : row) {
                    const auto got = m.at(role).at(col);
                    if (got != want) {
                        std::cout << "mismatch " << role << " -> " << col << ": declared " << want << ", observed " << got
                                  << "\n";
                        ++mismatches;
                    }
                }
            }
            std::cout << (mismatches == 0 ? "matrix matches the declared access matrix\n" : "");
            return mismatches == 0 ? 0 : 1;
        }
        if (serve_mode) {
            return serve(std::move(spec), seed, host, port, speed, exit_after_run, log_path, report_path);
        }
        const auto result = scenario::run(spec, seed);
        return report_and_exit(result.report, result.log_jsonl, log_path, report_path);
    } catch (const scenario::ValidationFailure& e) {
        for (const auto& err : e.errors()) {
            std::cerr << "invalid: " << err << "\n";
        }
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
