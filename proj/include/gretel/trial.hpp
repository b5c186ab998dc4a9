#pragma once

#include <optional>
#include <string>

#include "gretel/corpus.hpp"
#include "gretel/evidence.hpp"
#include "gretel/llm.hpp"
#include "gretel/retriever.hpp"
#include "gretel/sandbox.hpp"

namespace gretel {

struct TrialOptions {
    int timeout_ms = 10000;       // wall budget spanning plan+execute+simulate
    int max_concurrency = 4;
    bool simulation_enabled = true;
    bool cache_planned_calls = true;
};

struct PlanOutcome {
    std::optional<PlannedCall> call;
    std::string error;  // sub-cause prefixed: provider_error / invalid_json /
                        // missing_required / unknown_parameter / kind_mismatch

    bool failed() const { return !call.has_value(); }
};

struct SimulationOutcome {
    std::optional<nlohmann::json> payload;
    std::string error;

    bool failed() const { return !payload.has_value(); }
};

// Checks that bindings cover every required param, reference only declared
// params, and are kind-compatible. Numeric strings coerce to integer/number
// kinds; everything else must match its declared kind exactly.
PlanOutcome validate_bindings(const ToolSpec& tool, const ApiSpec& api,
                              const nlohmann::json& raw_bindings);

// JSON rendering of an API surface for the planner prompt; carries tool_id
// and tool_name so scripted providers can address individual candidates.
std::string api_spec_for_prompt(const ToolSpec& tool, const ApiSpec& api);

// Runs plan -> real-execute -> (simulate) trials over candidates. Stateless
// across trials; safe to share across queries.
class TrialRunner {
public:
    TrialRunner(const Corpus& corpus, CompletionProvider& provider, const Executor& executor,
                PromptSet prompts, TrialOptions opts);

    // Planning failures are values, never exceptions: a provider error,
    // unparseable completion, or invalid bindings all land in PlanOutcome.
    PlanOutcome plan(const std::string& query_text, const ToolSpec& tool,
                     const ApiSpec& api) const;

    SimulationOutcome simulate(const std::string& query_text, const ApiSpec& api,
                               const PlannedCall& call, const ExecutionResult& failure) const;

    EvidenceTuple run_trial(const std::string& query_text, const PairKey& key) const;

    // One tuple per candidate; trial failures never abort the batch, and the
    // result is independent of completion order. Throws ValidationError on an
    // empty candidate list or a candidate unknown to the corpus.
    EvidenceMap run_all_trials(const std::string& query_text,
                               const CandidateList& candidates) const;

    const TrialOptions& options() const { return opts_; }

private:
    struct ExecCache;
    EvidenceTuple run_trial_impl(const std::string& query_text, const PairKey& key,
                                 ExecCache* cache) const;

    const Corpus& corpus_;
    CompletionProvider& provider_;
    const Executor& executor_;
    PromptSet prompts_;
    TrialOptions opts_;
};

}  // namespace gretel
