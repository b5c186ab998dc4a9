#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gretel {

enum class PromptRole { Planner, Simulator, Evaluator };
const char* to_string(PromptRole r);

struct PromptTemplate {
    PromptRole role = PromptRole::Planner;
    std::string text;  // named {placeholder} slots

    // Substitutes every {identifier} slot from bindings in one left-to-right
    // pass; substituted values are emitted verbatim (never re-expanded).
    // Throws ValidationError naming any unbound placeholder.
    std::string render(const std::map<std::string, std::string>& bindings) const;

    std::vector<std::string> placeholders() const;
    bool operator==(const PromptTemplate&) const = default;
};

// The three role templates. Shipped as files under prompts/ (one .txt per
// role); builtin() mirrors those files so a bare binary still runs.
struct PromptSet {
    PromptTemplate planner;
    PromptTemplate simulator;
    PromptTemplate evaluator;

    static PromptSet builtin();
    static PromptSet load(const std::string& dir);  // <dir>/{planner,simulator,evaluator}.txt

    bool operator==(const PromptSet&) const = default;
};

// Throws ValidationError if the template misses its role's mandatory slots.
void validate_template(const PromptTemplate& tmpl);

struct CompletionRequest {
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 2048;
};

enum class FinishReason { Complete, Truncated, ProviderError };
const char* to_string(FinishReason r);

struct CompletionResult {
    std::string text;  // completion text, or diagnostic when provider_error
    FinishReason finish_reason = FinishReason::Complete;
    std::optional<int> http_status;

    bool ok() const { return finish_reason != FinishReason::ProviderError; }
};

class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;
    virtual CompletionResult complete(const CompletionRequest& req) = 0;
    // Deterministic providers answer as a pure function of the prompt; the
    // trial runner records zero latency for their stages.
    virtual bool deterministic() const { return false; }
};

// Script entry: matches by prompt digest (fnv1a64 hex) or by substring(s).
// Digest entries are checked first, then substring entries in file order;
// a substring entry may require several fragments, all of which must occur.
struct ScriptEntry {
    std::optional<std::string> digest;
    std::vector<std::string> substrings;
    std::string response;
};

class ScriptedProvider : public CompletionProvider {
public:
    explicit ScriptedProvider(std::vector<ScriptEntry> entries);
    static ScriptedProvider from_file(const std::string& path);
    static ScriptedProvider from_json(const nlohmann::json& doc, const std::string& origin);

    CompletionResult complete(const CompletionRequest& req) override;
    bool deterministic() const override { return true; }

private:
    std::vector<ScriptEntry> substring_entries_;
    std::map<std::string, std::string> by_digest_;
};

struct HttpProviderOptions {
    std::string endpoint;  // absolute URL of a chat-completion route
    std::string model;
    std::string auth_env = "GRETEL_LLM_TOKEN";  // env var holding the bearer token
    int timeout_ms = 30000;
    int max_in_flight = 4;
};

// Generic chat-completion client: {"model","messages":[...],"temperature",
// "max_tokens"} in, {"choices":[{"message":{"content"},"finish_reason"}]} out.
class HttpProvider : public CompletionProvider {
public:
    explicit HttpProvider(HttpProviderOptions opts);
    ~HttpProvider() override;

    CompletionResult complete(const CompletionRequest& req) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Result of extracting a JSON payload from LLM output. INVALID_JSON is a
// value, never an exception, so planning/simulation branches can fire on it.
struct JsonPayload {
    std::optional<nlohmann::json> value;
    std::string error;  // set when invalid

    bool invalid() const { return !value.has_value(); }
};

// Strips surrounding prose and code fences, then parses. Tries, in order:
// the whole text, the first fenced block, the outermost {...} or [...] span.
JsonPayload parse_json_payload(const std::string& text);

}  // namespace gretel
