#pragma once

#include <string>
#include <vector>

#include "gretel/evidence.hpp"
#include "gretel/llm.hpp"
#include "gretel/retriever.hpp"

namespace gretel {

enum class RankSource { Llm, Deterministic, LlmFallback };
const char* to_string(RankSource s);
RankSource rank_source_from_string(const std::string& s);

struct RankedEntry {
    std::string tool_id;
    std::string api_name;
    std::string evidence_summary;
    RankSource rank_source = RankSource::Deterministic;

    PairKey key() const { return {tool_id, api_name}; }
    bool operator==(const RankedEntry&) const = default;
};

struct RankedOutcome {
    std::string query_id;
    std::vector<RankedEntry> ranked;

    bool operator==(const RankedOutcome&) const = default;
};

struct RerankOptions {
    bool latency_tiebreak = false;  // secondary key within SUCCESS_REAL
};

// Evidence-priority rank of a trial status; lower sorts first.
int evidence_priority(TrialStatus status);

// Total order: evidence priority, then (when enabled) latency ascending
// within SUCCESS_REAL, then fused_score descending, then lexicographic key.
// Input order never affects the output. Throws ValidationError when a
// candidate has no evidence.
RankedOutcome rerank_deterministic(const CandidateList& candidates, const EvidenceMap& evidence,
                                   RerankOptions opts = {});

// Evaluator-LLM ranking. Pairs outside the candidate set are dropped with a
// warning; candidates the LLM omits are appended in deterministic order with
// rank_source=llm_fallback; unparseable output falls back to the
// deterministic ranking entirely. Never throws on LLM misbehavior.
RankedOutcome rerank_llm(const std::string& query_text, const CandidateList& candidates,
                         const EvidenceMap& evidence, CompletionProvider& provider,
                         const PromptSet& prompts, RerankOptions opts = {});

// Candidate enumeration block bound into the evaluator prompt.
std::string render_evidence_block(const CandidateList& candidates, const EvidenceMap& evidence);

}  // namespace gretel
