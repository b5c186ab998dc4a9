#include "gretel/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "gretel/errors.hpp"
#include "gretel/util.hpp"

using nlohmann::json;

namespace gretel {

std::string pair_document_text(const ToolSpec& tool, const ApiSpec& api) {
    return tool.name + " " + tool.description + " " + api.description;
}

Bm25Index Bm25Index::build(const Corpus& corpus, Bm25Params params) {
    if (corpus.empty()) throw ValidationError("cannot build index over empty corpus");
    Bm25Index index;
    index.params_ = params;
    std::size_t total_len = 0;
    for (const auto& tool : corpus.tools()) {
        for (const auto& api : tool.apis) {
            Doc doc;
            doc.key = {tool.tool_id, api.api_name};
            for (auto& term : tokenize(pair_document_text(tool, api))) {
                ++doc.tf[term];
                ++doc.length;
            }
            total_len += doc.length;
            for (const auto& [term, _] : doc.tf) ++index.df_[term];
            index.docs_.push_back(std::move(doc));
        }
    }
    index.avgdl_ = static_cast<double>(total_len) / static_cast<double>(index.docs_.size());
    return index;
}

std::size_t Bm25Index::df(const std::string& term) const {
    auto it = df_.find(term);
    return it == df_.end() ? 0 : it->second;
}

namespace {

void minmax_normalize(std::vector<double>& values) {
    if (values.empty()) return;
    auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    double mn = *mn_it, mx = *mx_it;
    for (double& v : values) v = (mx == mn) ? 1.0 : (v - mn) / (mx - mn);
}

void sort_by_fused(std::vector<Candidate>& cands) {
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
        return a.key() < b.key();
    });
}

}  // namespace

CandidateList Bm25Index::retrieve(const std::string& query_text, std::size_t k,
                                  const std::string& query_id) const {
    if (k == 0) throw ValidationError("retrieve: k must be positive");
    auto terms = tokenize(query_text);
    if (terms.empty()) throw ValidationError("empty query");

    // Query term frequencies; each unique term scored once, weighted by qtf.
    std::unordered_map<std::string, std::size_t> qtf;
    for (const auto& t : terms) ++qtf[t];

    const double n = static_cast<double>(docs_.size());
    std::vector<Candidate> scored;
    for (const auto& doc : docs_) {
        double score = 0.0;
        for (const auto& [term, mult] : qtf) {
            auto it = doc.tf.find(term);
            if (it == doc.tf.end()) continue;
            double dfreq = static_cast<double>(df(term));
            // Lucene-style positive IDF keeps scores non-negative for any df.
            double idf = std::log(1.0 + (n - dfreq + 0.5) / (dfreq + 0.5));
            double tf = static_cast<double>(it->second);
            double norm_len = 1.0 - params_.b + params_.b * static_cast<double>(doc.length) / avgdl_;
            double tfpart = tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm_len);
            score += static_cast<double>(mult) * idf * tfpart;
        }
        if (score > 0.0) {
            Candidate c;
            c.tool_id = doc.key.tool_id;
            c.api_name = doc.key.api_name;
            c.sparse_score = score;
            c.fused_score = score;  // provisional; replaced after normalization
            scored.push_back(std::move(c));
        }
    }

    sort_by_fused(scored);
    if (scored.size() > k) scored.resize(k);

    std::vector<double> values;
    values.reserve(scored.size());
    for (const auto& c : scored) values.push_back(c.sparse_score);
    minmax_normalize(values);
    for (std::size_t i = 0; i < scored.size(); ++i) {
        scored[i].sparse_norm = values[i];
        scored[i].fused_score = values[i];
    }

    CandidateList list;
    list.query_id = query_id;
    list.ranked = std::move(scored);
    list.k = k;
    return list;
}

CandidateList fuse(const CandidateList& sparse, const std::map<PairKey, double>& dense_scores,
                   double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("fuse: alpha must be in [0,1]");
    for (const auto& [key, score] : dense_scores) {
        if (score < 0.0 || score > 1.0)
            throw ValidationError("dense score for " + key.str() + " outside [0,1]: " +
                                  std::to_string(score));
    }

    CandidateList out = sparse;

    // Min-max normalize dense scores over the candidates that have one.
    std::vector<double> dvals;
    for (const auto& c : out.ranked) {
        auto it = dense_scores.find(c.key());
        if (it != dense_scores.end()) dvals.push_back(it->second);
    }
    minmax_normalize(dvals);

    std::size_t di = 0;
    for (auto& c : out.ranked) {
        auto it = dense_scores.find(c.key());
        if (it != dense_scores.end()) {
            c.dense_score = it->second;
            c.dense_norm = dvals[di++];
            c.fused_score = alpha * *c.dense_norm + (1.0 - alpha) * c.sparse_norm;
        } else {
            c.dense_score.reset();
            c.dense_norm.reset();
            c.fused_score = c.sparse_norm;
        }
    }
    sort_by_fused(out.ranked);
    return out;
}

EmbeddingClient::EmbeddingClient(std::string endpoint, int timeout_ms)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

std::vector<std::vector<double>> EmbeddingClient::fetch_vectors(
    const std::string& endpoint, const std::vector<std::string>& texts, int timeout_ms) {
    // endpoint is "http://host:port/path"
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("embedding endpoint must be an absolute URL: " + endpoint);
    auto path_start = endpoint.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? endpoint : endpoint.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);

    httplib::Client cli(base);
    cli.set_connection_timeout(0, timeout_ms * 1000);
    cli.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);

    json body{{"texts", texts}};
    auto res = cli.Post(path, body.dump(), "application/json");
    if (!res || res->status < 200 || res->status >= 300)
        throw StageError("retrieve", "embedding endpoint failure: " +
                                         (res ? "HTTP " + std::to_string(res->status)
                                              : httplib::to_string(res.error())));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("vectors") || !parsed["vectors"].is_array())
        throw StageError("retrieve", "embedding endpoint returned malformed body");
    std::vector<std::vector<double>> vectors;
    for (const auto& v : parsed["vectors"]) vectors.push_back(v.get<std::vector<double>>());
    if (vectors.size() != texts.size())
        throw StageError("retrieve", "embedding endpoint returned wrong vector count");
    return vectors;
}

double EmbeddingClient::cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::map<PairKey, double> EmbeddingClient::score(
    const std::string& query_text,
    const std::vector<std::pair<PairKey, std::string>>& docs) const {
    std::vector<std::string> texts;
    texts.reserve(docs.size() + 1);
    texts.push_back(query_text);
    for (const auto& [_, text] : docs) texts.push_back(text);

    auto vectors = fetch_vectors(endpoint_, texts, timeout_ms_);
    std::map<PairKey, double> out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        // cosine in [-1,1] mapped into the [0,1] contract range
        out[docs[i].first] = (cosine(vectors[0], vectors[i + 1]) + 1.0) / 2.0;
    }
    return out;
}

}  // namespace gretel
