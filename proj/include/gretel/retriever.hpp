#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gretel/corpus.hpp"

namespace gretel {

struct Candidate {
    std::string tool_id;
    std::string api_name;
    double sparse_score = 0.0;                // raw BM25, >= 0
    std::optional<double> dense_score;        // raw dense similarity in [0,1]
    double sparse_norm = 0.0;                 // per-query min-max normalized
    std::optional<double> dense_norm;
    double fused_score = 0.0;

    PairKey key() const { return {tool_id, api_name}; }
    bool operator==(const Candidate&) const = default;
};

struct CandidateList {
    std::string query_id;
    std::vector<Candidate> ranked;  // fused_score desc, ties by (tool_id, api_name)
    std::size_t k = 0;

    bool operator==(const CandidateList&) const = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

// One document per (tool, api) pair over the concatenation of tool name,
// tool description, and api description. Immutable after build.
class Bm25Index {
public:
    static Bm25Index build(const Corpus& corpus, Bm25Params params = {});

    // Top-k by BM25 over nonzero-scoring documents; deterministic under the
    // (score desc, key asc) tie-break. Scores are min-max normalized over the
    // returned list (single-candidate lists normalize to 1).
    CandidateList retrieve(const std::string& query_text, std::size_t k,
                           const std::string& query_id = "") const;

    std::size_t doc_count() const { return docs_.size(); }
    std::size_t df(const std::string& term) const;
    double avgdl() const { return avgdl_; }
    const Bm25Params& params() const { return params_; }

private:
    struct Doc {
        PairKey key;
        std::size_t length = 0;
        std::unordered_map<std::string, std::size_t> tf;
    };

    std::vector<Doc> docs_;
    std::unordered_map<std::string, std::size_t> df_;
    double avgdl_ = 0.0;
    Bm25Params params_;
};

// Convex fusion of normalized sparse and dense scores. Candidates missing
// from the dense map keep their sparse_norm as fused_score. alpha=0
// reproduces the sparse ordering exactly.
CandidateList fuse(const CandidateList& sparse,
                   const std::map<PairKey, double>& dense_scores, double alpha);

// Cosine-similarity dense scorer backed by an external embedding endpoint
// (POST {"texts":[...]} -> {"vectors":[[...],...]}), mapped into [0,1].
class EmbeddingClient {
public:
    EmbeddingClient(std::string endpoint, int timeout_ms = 10000);

    // Scores every candidate document against the query. Throws StageError
    // on endpoint failure.
    std::map<PairKey, double> score(const std::string& query_text,
                                    const std::vector<std::pair<PairKey, std::string>>& docs) const;

    static std::vector<std::vector<double>> fetch_vectors(const std::string& endpoint,
                                                          const std::vector<std::string>& texts,
                                                          int timeout_ms);
    static double cosine(const std::vector<double>& a, const std::vector<double>& b);

private:
    std::string endpoint_;
    int timeout_ms_;
};

// Document text a (tool, api) pair is indexed and embedded over.
std::string pair_document_text(const ToolSpec& tool, const ApiSpec& api);

}  // namespace gretel
