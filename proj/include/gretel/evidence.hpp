#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gretel/corpus.hpp"

namespace gretel {

// A validated, executable call: every required param bound, every binding
// kind-compatible with its declared ParamSpec.
struct PlannedCall {
    std::string tool_id;
    std::string api_name;
    std::map<std::string, nlohmann::json> bindings;
    std::string formatted;  // canonical "tool.api(name=value,...)"

    bool operator==(const PlannedCall&) const = default;
};

// Canonical call string; params in declared order.
std::string format_call(const ToolSpec& tool, const ApiSpec& api,
                        const std::map<std::string, nlohmann::json>& bindings);

enum class TrialStatus {
    PlanningFailed,
    SuccessReal,
    SuccessSimulated,
    SimulationFailed,
    OtherNonerror,
};

const char* to_string(TrialStatus s);
TrialStatus trial_status_from_string(const std::string& s);

enum class TrialStage { Plan, Execute, Simulate };
const char* to_string(TrialStage s);

// One transcript entry. Stage timings come from the component that ran the
// stage (deterministic providers report 0; executions report the injected
// latency when the server advertises one), so offline transcripts are
// reproducible byte for byte.
struct StageRecord {
    TrialStage stage = TrialStage::Plan;
    std::int64_t at_ms = 0;       // offset from trial start
    std::int64_t elapsed_ms = 0;
    std::string note;

    bool operator==(const StageRecord&) const = default;
};

struct EvidenceMetadata {
    bool simulation_used = false;
    std::int64_t latency_ms = 0;          // real-execution latency; 0 if never executed
    std::optional<int> http_status;

    bool operator==(const EvidenceMetadata&) const = default;
};

struct EvidenceTuple {
    TrialStatus status = TrialStatus::PlanningFailed;
    nlohmann::json result;  // payload on success, error message string otherwise
    EvidenceMetadata metadata;
    std::vector<StageRecord> transcript;
    std::string formatted_call;  // empty when planning failed

    bool operator==(const EvidenceTuple&) const = default;
};

using EvidenceMap = std::map<PairKey, EvidenceTuple>;

// One-line digest of a tuple for evaluator prompts and reranked artifacts.
std::string summarize_evidence(const EvidenceTuple& ev);

nlohmann::json to_json(const StageRecord& r);
nlohmann::json to_json(const EvidenceTuple& ev);
EvidenceTuple evidence_from_json(const nlohmann::json& j);

}  // namespace gretel
