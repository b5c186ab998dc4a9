#include "gretel/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gretel/errors.hpp"

using nlohmann::json;

namespace gretel {

namespace {

void check_k(int k) {
    if (k <= 0) throw ValidationError("k must be positive");
}

void check_relevant(const std::set<PairKey>& relevant) {
    if (relevant.empty()) throw ValidationError("relevant set must be nonempty");
}

}  // namespace

double recall_at_k(const std::vector<PairKey>& ranked, const std::set<PairKey>& relevant,
                   int k) {
    check_k(k);
    check_relevant(relevant);
    std::size_t cut = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cut; ++i)
        if (relevant.count(ranked[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double ndcg_at_k(const std::vector<PairKey>& ranked, const std::set<PairKey>& relevant, int k) {
    check_k(k);
    check_relevant(relevant);
    std::size_t cut = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
    double dcg = 0.0;
    for (std::size_t i = 0; i < cut; ++i) {
        if (relevant.count(ranked[i]))
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
    if (dcg == 0.0) return 0.0;
    std::size_t ideal = std::min<std::size_t>(relevant.size(), static_cast<std::size_t>(k));
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return dcg / idcg;
}

bool query_passes_at_k(const std::vector<PairKey>& ranked, const std::set<PairKey>& relevant,
                       const EvidenceMap& evidence, int k, bool requires_relevance) {
    check_k(k);
    std::size_t cut = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < cut; ++i) {
        auto it = evidence.find(ranked[i]);
        if (it == evidence.end())
            throw ValidationError("missing evidence for top-k candidate " + ranked[i].str());
        bool executed = it->second.status == TrialStatus::SuccessReal ||
                        it->second.status == TrialStatus::SuccessSimulated;
        if (executed && (!requires_relevance || relevant.count(ranked[i]))) return true;
    }
    return false;
}

MetricsReport evaluate(const std::map<std::string, RankingsByQuery>& methods,
                       const std::vector<QueryRecord>& queries,
                       const std::map<std::string, EvidenceMap>& evidence_by_query,
                       const EvalOptions& opts) {
    if (queries.empty()) throw ValidationError("empty query set");
    if (opts.k_values.empty()) throw ValidationError("k_values must be nonempty");
    if (!std::is_sorted(opts.k_values.begin(), opts.k_values.end()) ||
        std::adjacent_find(opts.k_values.begin(), opts.k_values.end()) != opts.k_values.end())
        throw ValidationError("k_values must ascend");

    MetricsReport report;
    report.pass_rate_requires_relevance = opts.pass_rate_requires_relevance;

    std::vector<const QueryRecord*> scored;
    for (const auto& q : queries) {
        if (q.relevant.empty())
            report.excluded_query_ids.push_back(q.query_id);
        else
            scored.push_back(&q);
    }
    report.query_count = scored.size();
    if (scored.empty()) throw ValidationError("all queries have empty relevance labels");

    for (const auto& [method, rankings] : methods) {
        // Every labeled query needs a ranking before any math happens.
        std::string missing;
        for (const QueryRecord* q : scored) {
            if (!rankings.count(q->query_id))
                missing += (missing.empty() ? "" : ", ") + q->query_id;
        }
        if (!missing.empty())
            throw ValidationError("method " + method + " is missing rankings for: " + missing);

        if (opts.compute_pass_rate) {
            for (const QueryRecord* q : scored) {
                if (!evidence_by_query.count(q->query_id))
                    throw ValidationError("evidence required for pass_rate (query " +
                                          q->query_id + ")");
            }
        }

        for (int k : opts.k_values) {
            MetricValues mv;
            double passes = 0.0;
            for (const QueryRecord* q : scored) {
                const auto& ranked = rankings.at(q->query_id);
                mv.recall += recall_at_k(ranked, q->relevant, k);
                mv.ndcg += ndcg_at_k(ranked, q->relevant, k);
                if (opts.compute_pass_rate) {
                    passes += query_passes_at_k(ranked, q->relevant,
                                                evidence_by_query.at(q->query_id), k,
                                                opts.pass_rate_requires_relevance)
                                  ? 1.0
                                  : 0.0;
                }
            }
            double n = static_cast<double>(scored.size());
            mv.recall /= n;
            mv.ndcg /= n;
            if (opts.compute_pass_rate) mv.pass_rate = passes / n;
            report.methods[method][k] = mv;
        }
    }

    if (!evidence_by_query.empty()) {
        std::vector<EvidenceTuple> trials;
        for (const auto& [_, emap] : evidence_by_query)
            for (const auto& [_k, ev] : emap) trials.push_back(ev);
        report.failure_histogram = failure_breakdown(trials);
        report.trial_count = trials.size();
    }
    return report;
}

std::map<FailureClass, double> failure_breakdown(const std::vector<EvidenceTuple>& trials) {
    if (trials.empty()) throw ValidationError("no trials to break down");
    std::map<FailureClass, std::size_t> counts;
    for (const auto& ev : trials) ++counts[classify(ev)];
    std::map<FailureClass, double> out;
    for (const auto& [cls, count] : counts)
        out[cls] = static_cast<double>(count) / static_cast<double>(trials.size());
    return out;
}

json MetricsReport::to_json() const {
    // Method names sit at the top level next to the fixed report fields.
    json out = json::object();
    for (const auto& [method, by_k] : methods) {
        json mj = json::object();
        for (const auto& [k, mv] : by_k) {
            json cell{{"recall", mv.recall}, {"ndcg", mv.ndcg}};
            if (mv.pass_rate) cell["pass_rate"] = *mv.pass_rate;
            mj[std::to_string(k)] = std::move(cell);
        }
        out[method] = std::move(mj);
    }
    json hist = json::object();
    for (const auto& [cls, frac] : failure_histogram) hist[to_string(cls)] = frac;
    out["failure_histogram"] = std::move(hist);
    out["trial_count"] = trial_count;
    out["query_count"] = query_count;
    out["excluded_queries"] = excluded_query_ids;
    out["pass_rate_requires_relevance"] = pass_rate_requires_relevance;
    out["config_digest"] = config_digest;
    out["generated_at"] = generated_at;
    return out;
}

std::string MetricsReport::to_csv() const {
    std::string out = "method,k,recall,ndcg,pass_rate\n";
    char buf[128];
    for (const auto& [method, by_k] : methods) {
        for (const auto& [k, mv] : by_k) {
            std::snprintf(buf, sizeof(buf), "%s,%d,%.10g,%.10g,%.10g\n", method.c_str(), k,
                          mv.recall, mv.ndcg, mv.pass_rate);
            out += buf;
        }
    }
    return out;
}

}  // namespace gretel
