#include "gretel/trial.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "gretel/errors.hpp"

using nlohmann::json;

namespace gretel {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ms_since(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

bool coerce_kind(json& value, ParamKind kind, std::string& why) {
    switch (kind) {
        case ParamKind::String:
            if (value.is_string()) return true;
            why = "expected string";
            return false;
        case ParamKind::Integer: {
            if (value.is_number_integer() || value.is_number_unsigned()) return true;
            if (value.is_number_float()) {
                double d = value.get<double>();
                if (d == std::floor(d)) {
                    value = static_cast<std::int64_t>(d);
                    return true;
                }
                why = "expected integer, got non-integral number";
                return false;
            }
            if (value.is_string()) {
                const std::string s = value.get<std::string>();
                char* end = nullptr;
                long long v = std::strtoll(s.c_str(), &end, 10);
                if (end && *end == '\0' && !s.empty()) {
                    value = static_cast<std::int64_t>(v);
                    return true;
                }
            }
            why = "expected integer";
            return false;
        }
        case ParamKind::Number: {
            if (value.is_number()) return true;
            if (value.is_string()) {
                const std::string s = value.get<std::string>();
                char* end = nullptr;
                double v = std::strtod(s.c_str(), &end);
                if (end && *end == '\0' && !s.empty()) {
                    value = v;
                    return true;
                }
            }
            why = "expected number";
            return false;
        }
        case ParamKind::Boolean:
            if (value.is_boolean()) return true;
            why = "expected boolean";
            return false;
        case ParamKind::Array:
            if (value.is_array()) return true;
            why = "expected array";
            return false;
        case ParamKind::Object:
            if (value.is_object()) return true;
            why = "expected object";
            return false;
    }
    why = "unknown kind";
    return false;
}

std::string json_type_name(const json& v) {
    return v.type_name();
}

}  // namespace

PlanOutcome validate_bindings(const ToolSpec& tool, const ApiSpec& api, const json& raw) {
    if (!raw.is_object())
        return {std::nullopt, "invalid_json: planner output is not a JSON object"};

    std::map<std::string, json> bindings;
    for (auto it = raw.begin(); it != raw.end(); ++it) {
        const ParamSpec* p = api.find_param(it.key());
        if (!p) return {std::nullopt, "unknown_parameter: " + it.key()};
        json value = *it;
        std::string why;
        if (!coerce_kind(value, p->kind, why))
            return {std::nullopt, "kind_mismatch: param " + it.key() + " " + why + ", got " +
                                      json_type_name(*it)};
        bindings.emplace(it.key(), std::move(value));
    }
    for (const auto& p : api.params) {
        if (p.required && !bindings.count(p.name))
            return {std::nullopt, "missing_required: " + p.name};
    }

    PlannedCall call;
    call.tool_id = tool.tool_id;
    call.api_name = api.api_name;
    call.bindings = std::move(bindings);
    call.formatted = format_call(tool, api, call.bindings);
    return {std::move(call), ""};
}

std::string api_spec_for_prompt(const ToolSpec& tool, const ApiSpec& api) {
    json spec = to_json(api);
    spec["tool_id"] = tool.tool_id;
    spec["tool_name"] = tool.name;
    return spec.dump(2);
}

TrialRunner::TrialRunner(const Corpus& corpus, CompletionProvider& provider,
                         const Executor& executor, PromptSet prompts, TrialOptions opts)
    : corpus_(corpus),
      provider_(provider),
      executor_(executor),
      prompts_(std::move(prompts)),
      opts_(opts) {}

PlanOutcome TrialRunner::plan(const std::string& query_text, const ToolSpec& tool,
                              const ApiSpec& api) const {
    std::string prompt = prompts_.planner.render(
        {{"query", query_text}, {"api_spec", api_spec_for_prompt(tool, api)}});
    CompletionResult res = provider_.complete({prompt});
    if (!res.ok()) return {std::nullopt, "provider_error: " + res.text};

    JsonPayload payload = parse_json_payload(res.text);
    if (payload.invalid()) return {std::nullopt, "invalid_json: " + payload.error};

    return validate_bindings(tool, api, *payload.value);
}

SimulationOutcome TrialRunner::simulate(const std::string& query_text, const ApiSpec& api,
                                        const PlannedCall& call,
                                        const ExecutionResult& failure) const {
    (void)api;
    std::string prompt = prompts_.simulator.render({{"api_call", call.formatted},
                                                    {"failure", failure.message},
                                                    {"query", query_text}});
    CompletionResult res = provider_.complete({prompt});
    if (!res.ok()) return {std::nullopt, "provider_error: " + res.text};

    JsonPayload payload = parse_json_payload(res.text);
    if (payload.invalid()) return {std::nullopt, "invalid_json: " + payload.error};
    return {std::move(*payload.value), ""};
}

struct TrialRunner::ExecCache {
    std::mutex mu;
    std::unordered_map<std::string, ExecutionResult> by_call;

    std::optional<ExecutionResult> find(const std::string& formatted) {
        std::lock_guard<std::mutex> lock(mu);
        auto it = by_call.find(formatted);
        if (it == by_call.end()) return std::nullopt;
        return it->second;
    }

    void insert(const std::string& formatted, const ExecutionResult& result) {
        std::lock_guard<std::mutex> lock(mu);
        by_call.emplace(formatted, result);
    }
};

EvidenceTuple TrialRunner::run_trial(const std::string& query_text, const PairKey& key) const {
    return run_trial_impl(query_text, key, nullptr);
}

EvidenceTuple TrialRunner::run_trial_impl(const std::string& query_text, const PairKey& key,
                                          ExecCache* cache) const {
    const ToolSpec* tool = corpus_.find_tool(key.tool_id);
    const ApiSpec* api = tool ? tool->find_api(key.api_name) : nullptr;
    if (!api) throw ValidationError("candidate " + key.str() + " not found in corpus");

    const auto start = Clock::now();
    EvidenceTuple ev;

    // Stage 1: plan. Deterministic providers cost zero logical time.
    auto plan_wall = Clock::now();
    PlanOutcome planned = plan(query_text, *tool, *api);
    std::int64_t plan_elapsed = provider_.deterministic() ? 0 : ms_since(plan_wall);
    std::int64_t logical_now = plan_elapsed;

    if (planned.failed()) {
        ev.status = TrialStatus::PlanningFailed;
        ev.result = planned.error;
        ev.metadata = {false, 0, std::nullopt};
        ev.transcript.push_back({TrialStage::Plan, 0, plan_elapsed, planned.error});
        return ev;
    }
    ev.formatted_call = planned.call->formatted;
    ev.transcript.push_back({TrialStage::Plan, 0, plan_elapsed, "ok: " + planned.call->formatted});

    auto budget_left = [&]() { return opts_.timeout_ms - ms_since(start); };

    if (budget_left() <= 0) {
        ev.status = TrialStatus::SimulationFailed;
        ev.result = "trial_timeout: budget exhausted before execution";
        ev.metadata = {false, 0, std::nullopt};
        return ev;
    }

    // Stage 2: real execution (cached per formatted call within a batch).
    ExecutionResult exec;
    if (cache && opts_.cache_planned_calls) {
        if (auto hit = cache->find(planned.call->formatted)) {
            exec = *hit;
        } else {
            exec = executor_.execute(*planned.call, *api, static_cast<int>(budget_left()));
            cache->insert(planned.call->formatted, exec);
        }
    } else {
        exec = executor_.execute(*planned.call, *api, static_cast<int>(budget_left()));
    }

    std::string exec_note = std::string(to_string(exec.status)) +
                            (exec.http_status ? " http " + std::to_string(*exec.http_status) : "") +
                            (exec.message.empty() ? "" : " " + exec.message);
    ev.transcript.push_back({TrialStage::Execute, logical_now, exec.latency_ms, exec_note});
    logical_now += exec.latency_ms;

    if (exec.status == ExecStatus::Success) {
        ev.status = TrialStatus::SuccessReal;
        ev.result = *exec.payload;
        ev.metadata = {false, exec.latency_ms, exec.http_status};
        return ev;
    }
    if (exec.status == ExecStatus::Empty) {
        ev.status = TrialStatus::OtherNonerror;
        ev.result = exec.payload ? *exec.payload : json("");
        ev.metadata = {false, exec.latency_ms, exec.http_status};
        return ev;
    }

    // Error branch: LLM simulation fallback.
    if (!opts_.simulation_enabled) {
        ev.status = TrialStatus::SimulationFailed;
        ev.result = "simulation_disabled: " + exec.message;
        ev.metadata = {false, exec.latency_ms, exec.http_status};
        return ev;
    }
    if (budget_left() <= 0) {
        ev.status = TrialStatus::SimulationFailed;
        ev.result = "trial_timeout: budget exhausted before simulation";
        ev.metadata = {false, exec.latency_ms, exec.http_status};
        return ev;
    }

    auto sim_wall = Clock::now();
    SimulationOutcome sim = simulate(query_text, *api, *planned.call, exec);
    std::int64_t sim_elapsed = provider_.deterministic() ? 0 : ms_since(sim_wall);
    ev.transcript.push_back({TrialStage::Simulate, logical_now, sim_elapsed,
                             sim.failed() ? sim.error : "ok"});

    if (sim.failed()) {
        ev.status = TrialStatus::SimulationFailed;
        ev.result = sim.error;
    } else {
        ev.status = TrialStatus::SuccessSimulated;
        ev.result = std::move(*sim.payload);
    }
    // The simulate stage ran, so simulation usage is tracked either way.
    ev.metadata = {true, exec.latency_ms, exec.http_status};
    return ev;
}

EvidenceMap TrialRunner::run_all_trials(const std::string& query_text,
                                        const CandidateList& candidates) const {
    if (candidates.ranked.empty()) throw ValidationError("no candidates");
    for (const auto& c : candidates.ranked) {
        if (!corpus_.has_pair(c.key()))
            throw ValidationError("candidate " + c.key().str() + " not found in corpus");
    }

    const std::size_t n = candidates.ranked.size();
    std::vector<EvidenceTuple> results(n);
    ExecCache cache;

    const std::size_t width =
        std::min<std::size_t>(std::max(1, opts_.max_concurrency), n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                results[i] = run_trial_impl(query_text, candidates.ranked[i].key(), &cache);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    if (width == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(width);
        for (std::size_t i = 0; i < width; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    EvidenceMap out;
    for (std::size_t i = 0; i < n; ++i)
        out.emplace(candidates.ranked[i].key(), std::move(results[i]));
    return out;
}

}  // namespace gretel
