#include "gretel/rerank.hpp"

#include <algorithm>
#include <set>

#include "gretel/errors.hpp"
#include "gretel/log.hpp"

using nlohmann::json;

namespace gretel {

const char* to_string(RankSource s) {
    switch (s) {
        case RankSource::Llm: return "llm";
        case RankSource::Deterministic: return "deterministic";
        case RankSource::LlmFallback: return "llm_fallback";
    }
    return "?";
}

RankSource rank_source_from_string(const std::string& s) {
    if (s == "llm") return RankSource::Llm;
    if (s == "deterministic") return RankSource::Deterministic;
    if (s == "llm_fallback") return RankSource::LlmFallback;
    throw ValidationError("unknown rank source: " + s);
}

int evidence_priority(TrialStatus status) {
    switch (status) {
        case TrialStatus::SuccessReal: return 0;
        case TrialStatus::SuccessSimulated: return 1;
        case TrialStatus::OtherNonerror: return 2;
        case TrialStatus::SimulationFailed: return 3;
        case TrialStatus::PlanningFailed: return 4;
    }
    return 5;
}

namespace {

const EvidenceTuple& evidence_for(const EvidenceMap& evidence, const PairKey& key) {
    auto it = evidence.find(key);
    if (it == evidence.end())
        throw ValidationError("no evidence for candidate " + key.str());
    return it->second;
}

std::vector<const Candidate*> deterministic_order(const CandidateList& candidates,
                                                  const EvidenceMap& evidence,
                                                  const RerankOptions& opts) {
    std::vector<const Candidate*> order;
    order.reserve(candidates.ranked.size());
    for (const auto& c : candidates.ranked) {
        evidence_for(evidence, c.key());  // completeness check up front
        order.push_back(&c);
    }
    std::sort(order.begin(), order.end(), [&](const Candidate* a, const Candidate* b) {
        const EvidenceTuple& ea = evidence.at(a->key());
        const EvidenceTuple& eb = evidence.at(b->key());
        int pa = evidence_priority(ea.status), pb = evidence_priority(eb.status);
        if (pa != pb) return pa < pb;
        if (opts.latency_tiebreak && ea.status == TrialStatus::SuccessReal &&
            ea.metadata.latency_ms != eb.metadata.latency_ms)
            return ea.metadata.latency_ms < eb.metadata.latency_ms;
        if (a->fused_score != b->fused_score) return a->fused_score > b->fused_score;
        return a->key() < b->key();
    });
    return order;
}

RankedEntry make_entry(const Candidate& c, const EvidenceMap& evidence, RankSource source) {
    return {c.tool_id, c.api_name, summarize_evidence(evidence.at(c.key())), source};
}

}  // namespace

RankedOutcome rerank_deterministic(const CandidateList& candidates, const EvidenceMap& evidence,
                                   RerankOptions opts) {
    RankedOutcome out;
    out.query_id = candidates.query_id;
    for (const Candidate* c : deterministic_order(candidates, evidence, opts))
        out.ranked.push_back(make_entry(*c, evidence, RankSource::Deterministic));
    return out;
}

std::string render_evidence_block(const CandidateList& candidates, const EvidenceMap& evidence) {
    std::string block;
    std::size_t i = 1;
    for (const auto& c : candidates.ranked) {
        const EvidenceTuple& ev = evidence_for(evidence, c.key());
        block += std::to_string(i++) + ". [" + c.tool_id + ", " + c.api_name + "] " +
                 summarize_evidence(ev);
        if (!ev.formatted_call.empty()) block += " call: " + ev.formatted_call;
        block += "\n";
    }
    return block;
}

RankedOutcome rerank_llm(const std::string& query_text, const CandidateList& candidates,
                         const EvidenceMap& evidence, CompletionProvider& provider,
                         const PromptSet& prompts, RerankOptions opts) {
    // Deterministic order doubles as the fallback and the tail for omissions.
    std::vector<const Candidate*> fallback = deterministic_order(candidates, evidence, opts);

    auto fallback_outcome = [&]() {
        RankedOutcome out;
        out.query_id = candidates.query_id;
        for (const Candidate* c : fallback)
            out.ranked.push_back(make_entry(*c, evidence, RankSource::Deterministic));
        return out;
    };

    std::string prompt = prompts.evaluator.render(
        {{"query", query_text}, {"evidence", render_evidence_block(candidates, evidence)}});
    CompletionResult res = provider.complete({prompt});
    if (!res.ok()) {
        log::warn("evaluator provider error (" + res.text + "); using deterministic ranking");
        return fallback_outcome();
    }

    JsonPayload payload = parse_json_payload(res.text);
    if (payload.invalid() || !payload.value->is_array()) {
        log::warn("evaluator output unparseable; using deterministic ranking");
        return fallback_outcome();
    }

    std::set<PairKey> candidate_keys;
    for (const auto& c : candidates.ranked) candidate_keys.insert(c.key());

    RankedOutcome out;
    out.query_id = candidates.query_id;
    std::set<PairKey> placed;
    for (const auto& item : *payload.value) {
        PairKey key;
        if (item.is_array() && item.size() == 2 && item[0].is_string() && item[1].is_string()) {
            key = {item[0].get<std::string>(), item[1].get<std::string>()};
        } else if (item.is_object() && item.contains("tool") && item.contains("api")) {
            key = {item["tool"].get<std::string>(), item["api"].get<std::string>()};
        } else {
            log::warn("evaluator emitted a malformed entry; dropped: " + item.dump());
            continue;
        }
        if (!candidate_keys.count(key)) {
            log::warn("evaluator ranked unknown pair " + key.str() + "; dropped");
            continue;
        }
        if (!placed.insert(key).second) continue;  // duplicate mention
        out.ranked.push_back(
            {key.tool_id, key.api_name, summarize_evidence(evidence.at(key)), RankSource::Llm});
    }

    // Omitted candidates are kept (as a demoted tail) rather than lost.
    for (const Candidate* c : fallback) {
        if (!placed.count(c->key()))
            out.ranked.push_back(make_entry(*c, evidence, RankSource::LlmFallback));
    }
    return out;
}

}  // namespace gretel
