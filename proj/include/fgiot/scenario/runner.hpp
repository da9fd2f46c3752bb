#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgiot/scenario/spec.hpp"
#include "fgiot/scenario/system.hpp"
#include "fgiot/sim/kernel.hpp"

namespace fgiot::scenario {

struct ExpectationResult {
    std::size_t index = 0;
    std::string kind;
    std::string label;
    bool passed = false;
    std::string detail;
    std::optional<std::size_t> line; // 1-based log line of the counterexample
};

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<ExpectationResult> results;
    nlohmann::json metrics = nlohmann::json::object();

    bool passed() const;
    nlohmann::json to_json() const;
    std::string summary() const;
};

struct RunResult {
    RunReport report;
    std::string log_jsonl;
};

/// True when `rec` satisfies the matcher {event, component, fields}.
bool record_matches(const nlohmann::json& matcher, const sim::EventLogRecord& rec);

/// Evaluates every expectation against a finished system.
std::vector<ExpectationResult> check_expectations(const nlohmann::json& expectations, const System& sys);
nlohmann::json collect_metrics(const System& sys);
RunReport make_report(const System& sys);

RunResult run(const ScenarioSpec& spec, std::optional<std::uint64_t> seed = std::nullopt);

/// role -> column (service name or "internet") -> "permit" | "deny" | "no_session"
using FlowMatrix = std::map<std::string, std::map<std::string, std::string>>;

/// Subscriber whose session stands for `role`: the lowest IMSI holding the
/// role with an active session.
std::optional<std::string> role_representative(const System& sys, const std::string& role);

/// Tabulates PEP decisions from each role's representative session toward
/// every catalog service and the internet probe, without logging.
FlowMatrix probe_matrix(const System& sys, const std::vector<std::string>& roles);

/// Runs the scenario up to the access-matrix instant (or its end) and probes.
FlowMatrix flow_matrix(const ScenarioSpec& spec);

std::string render_matrix(const FlowMatrix& m);

} // namespace fgiot::scenario
