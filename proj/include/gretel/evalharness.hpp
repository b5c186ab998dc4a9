#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gretel/evidence.hpp"
#include "gretel/sandbox.hpp"

namespace gretel {

// |top-k intersect relevant| / |relevant|. Throws on k=0 or empty relevant.
double recall_at_k(const std::vector<PairKey>& ranked, const std::set<PairKey>& relevant,
                   int k);

// Binary gains, 1/log2(rank+1) discount; DCG@k / IDCG@k, 0 when the top-k
// holds no relevant item.
double ndcg_at_k(const std::vector<PairKey>& ranked, const std::set<PairKey>& relevant, int k);

// A query passes iff some top-k candidate has execution-success evidence
// (SUCCESS_REAL or SUCCESS_SIMULATED) and, when requires_relevance, is also
// labeled relevant. Throws when a top-k candidate has no evidence: the
// harness never silently treats missing evidence as failure.
bool query_passes_at_k(const std::vector<PairKey>& ranked, const std::set<PairKey>& relevant,
                       const EvidenceMap& evidence, int k, bool requires_relevance = true);

struct MetricValues {
    double recall = 0.0;
    double ndcg = 0.0;
    std::optional<double> pass_rate;  // absent when pass rate was not computed
};

struct MetricsReport {
    // method -> K -> values
    std::map<std::string, std::map<int, MetricValues>> methods;
    std::map<FailureClass, double> failure_histogram;  // fractions over trials
    std::size_t trial_count = 0;
    std::size_t query_count = 0;                 // queries entering the averages
    std::vector<std::string> excluded_query_ids;  // empty-label queries
    bool pass_rate_requires_relevance = true;
    std::string config_digest;
    std::string generated_at;  // the one field excluded from determinism checks

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

using RankingsByQuery = std::map<std::string, std::vector<PairKey>>;

struct EvalOptions {
    std::vector<int> k_values{5, 10};
    bool pass_rate_requires_relevance = true;
    bool compute_pass_rate = true;
};

// Macro-averaged metrics per method and K. Evidence is keyed by query_id and
// must cover every top-k candidate when pass rate is computed; pass an empty
// map only with compute_pass_rate=false.
MetricsReport evaluate(const std::map<std::string, RankingsByQuery>& methods,
                       const std::vector<QueryRecord>& queries,
                       const std::map<std::string, EvidenceMap>& evidence_by_query,
                       const EvalOptions& opts);

// Fractions per failure class over all completed trials. Throws on zero trials.
std::map<FailureClass, double> failure_breakdown(const std::vector<EvidenceTuple>& trials);

}  // namespace gretel
