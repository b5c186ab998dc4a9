#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gretel {

// Pipeline configuration, parsed from a dotted-key = value file:
//
//   paths.tools = "fixtures/flight/tools.jsonl"
//   retriever.alpha = 0.0
//   eval.k_values = [1, 3, 5]
//   sandbox.allowlist = ["mock.local"]
//
// Values: quoted strings, numbers, true/false, and flat lists. Relative
// paths resolve against the config file's directory. Unknown keys are
// rejected.
struct RunConfig {
    struct Paths {
        std::string tools;
        std::string queries;
        std::string scenario;    // optional; enables the embedded mock server
        std::string output_dir;
    } paths;

    struct Retriever {
        double k1 = 1.2;
        double b = 0.75;
        double alpha = 0.0;  // 0 = sparse-only, fully offline
        int k = 10;
        std::string embedding_endpoint;  // required when alpha > 0
    } retriever;

    struct Trial {
        int timeout_ms = 10000;
        int max_concurrency = 4;
        bool simulation_enabled = true;
        bool cache_planned_calls = true;
    } trial;

    struct Llm {
        std::string mode;  // "scripted" | "http"
        std::string endpoint;
        std::string model;
        std::string script_path;
        std::string prompts_dir;  // empty -> builtin templates
        std::string auth_env = "GRETEL_LLM_TOKEN";
        int timeout_ms = 30000;
        int max_in_flight = 4;
    } llm;

    struct Rerank {
        std::string mode = "deterministic";  // "llm" | "deterministic"
        bool latency_tiebreak = false;
    } rerank;

    struct Eval {
        std::vector<int> k_values{5, 10};
        bool pass_rate_requires_relevance = true;
        bool compute_pass_rate = true;
    } eval;

    struct Sandbox {
        std::vector<std::string> allowlist;  // merged with GRETEL_ALLOWLIST
        std::size_t response_cap_bytes = 65536;
        std::string host_override;  // "host:port"; set internally for the embedded mock
    } sandbox;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_string(const std::string& content, const std::string& base_dir,
                                 const std::string& origin = "<config>");

    void validate() const;  // throws ConfigError

    // Allowlist merged with the GRETEL_ALLOWLIST environment variable.
    std::vector<std::string> effective_allowlist() const;

    // Chained per-stage digests: an artifact records the digest of the config
    // subset that produced it, so downstream stages reject mixed inputs while
    // ablation runs (e.g. flipping trial.simulation_enabled) keep upstream
    // artifacts valid.
    std::string digest_retrieval() const;  // inputs + retriever
    std::string digest_trial() const;      // + llm, trial, sandbox, scenario
    std::string digest_rerank() const;     // + rerank
    std::string digest_eval() const;       // + eval
};

}  // namespace gretel
