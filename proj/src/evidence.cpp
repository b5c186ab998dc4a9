#include "gretel/evidence.hpp"

#include "gretel/errors.hpp"

using nlohmann::json;

namespace gretel {

const char* to_string(TrialStatus s) {
    switch (s) {
        case TrialStatus::PlanningFailed: return "PLANNING_FAILED";
        case TrialStatus::SuccessReal: return "SUCCESS_REAL";
        case TrialStatus::SuccessSimulated: return "SUCCESS_SIMULATED";
        case TrialStatus::SimulationFailed: return "SIMULATION_FAILED";
        case TrialStatus::OtherNonerror: return "OTHER_NONERROR";
    }
    return "?";
}

TrialStatus trial_status_from_string(const std::string& s) {
    if (s == "PLANNING_FAILED") return TrialStatus::PlanningFailed;
    if (s == "SUCCESS_REAL") return TrialStatus::SuccessReal;
    if (s == "SUCCESS_SIMULATED") return TrialStatus::SuccessSimulated;
    if (s == "SIMULATION_FAILED") return TrialStatus::SimulationFailed;
    if (s == "OTHER_NONERROR") return TrialStatus::OtherNonerror;
    throw ValidationError("unknown trial status: " + s);
}

const char* to_string(TrialStage s) {
    switch (s) {
        case TrialStage::Plan: return "plan";
        case TrialStage::Execute: return "execute";
        case TrialStage::Simulate: return "simulate";
    }
    return "?";
}

namespace {

TrialStage stage_from_string(const std::string& s) {
    if (s == "plan") return TrialStage::Plan;
    if (s == "execute") return TrialStage::Execute;
    if (s == "simulate") return TrialStage::Simulate;
    throw ValidationError("unknown trial stage: " + s);
}

}  // namespace

std::string format_call(const ToolSpec& tool, const ApiSpec& api,
                        const std::map<std::string, nlohmann::json>& bindings) {
    std::string out = tool.name + "." + api.api_name + "(";
    bool first = true;
    for (const auto& p : api.params) {  // declared order
        auto it = bindings.find(p.name);
        if (it == bindings.end()) continue;
        if (!first) out += ",";
        out += p.name + "=" + it->second.dump();
        first = false;
    }
    out += ")";
    return out;
}

std::string summarize_evidence(const EvidenceTuple& ev) {
    std::string s = to_string(ev.status);
    switch (ev.status) {
        case TrialStatus::SuccessReal: {
            s += " (http " +
                 (ev.metadata.http_status ? std::to_string(*ev.metadata.http_status) : "?") + ", " +
                 std::to_string(ev.metadata.latency_ms) + " ms)";
            break;
        }
        case TrialStatus::SuccessSimulated:
            s += " (real call failed";
            if (ev.metadata.http_status) s += ", http " + std::to_string(*ev.metadata.http_status);
            s += "; simulated payload accepted)";
            break;
        case TrialStatus::OtherNonerror:
            s += " (executed, empty payload)";
            break;
        case TrialStatus::PlanningFailed:
        case TrialStatus::SimulationFailed:
            if (ev.result.is_string()) s += ": " + ev.result.get<std::string>();
            break;
    }
    return s;
}

json to_json(const StageRecord& r) {
    return json{{"stage", to_string(r.stage)},
                {"at_ms", r.at_ms},
                {"elapsed_ms", r.elapsed_ms},
                {"note", r.note}};
}

json to_json(const EvidenceTuple& ev) {
    json meta{{"simulation_used", ev.metadata.simulation_used},
              {"latency_ms", ev.metadata.latency_ms}};
    if (ev.metadata.http_status) meta["http_status"] = *ev.metadata.http_status;
    json transcript = json::array();
    for (const auto& r : ev.transcript) transcript.push_back(to_json(r));
    json out{{"status", to_string(ev.status)},
             {"result", ev.result},
             {"metadata", std::move(meta)},
             {"transcript", std::move(transcript)}};
    if (!ev.formatted_call.empty()) out["planned_call"] = ev.formatted_call;
    return out;
}

EvidenceTuple evidence_from_json(const json& j) {
    EvidenceTuple ev;
    ev.status = trial_status_from_string(j.at("status").get<std::string>());
    ev.result = j.at("result");
    const json& meta = j.at("metadata");
    ev.metadata.simulation_used = meta.at("simulation_used").get<bool>();
    ev.metadata.latency_ms = meta.at("latency_ms").get<std::int64_t>();
    if (meta.contains("http_status")) ev.metadata.http_status = meta["http_status"].get<int>();
    for (const auto& rj : j.at("transcript")) {
        StageRecord r;
        r.stage = stage_from_string(rj.at("stage").get<std::string>());
        r.at_ms = rj.at("at_ms").get<std::int64_t>();
        r.elapsed_ms = rj.at("elapsed_ms").get<std::int64_t>();
        r.note = rj.value("note", "");
        ev.transcript.push_back(std::move(r));
    }
    ev.formatted_call = j.value("planned_call", "");
    return ev;
}

}  // namespace gretel
