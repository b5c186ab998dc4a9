#include "gretel/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <semaphore>

#include <httplib.h>

#include "gretel/errors.hpp"
#include "gretel/util.hpp"

using nlohmann::json;

namespace gretel {

const char* to_string(PromptRole r) {
    switch (r) {
        case PromptRole::Planner: return "planner";
        case PromptRole::Simulator: return "simulator";
        case PromptRole::Evaluator: return "evaluator";
    }
    return "?";
}

const char* to_string(FinishReason r) {
    switch (r) {
        case FinishReason::Complete: return "complete";
        case FinishReason::Truncated: return "truncated";
        case FinishReason::ProviderError: return "provider_error";
    }
    return "?";
}

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Locates the {identifier} slot starting at pos, if any.
std::optional<std::pair<std::string, std::size_t>> slot_at(const std::string& text,
                                                           std::size_t pos) {
    if (text[pos] != '{') return std::nullopt;
    std::size_t j = pos + 1;
    if (j >= text.size() ||
        !(std::isalpha(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        return std::nullopt;
    while (j < text.size() && is_ident_char(text[j])) ++j;
    if (j >= text.size() || text[j] != '}') return std::nullopt;
    return std::make_pair(text.substr(pos + 1, j - pos - 1), j + 1);
}

}  // namespace

std::vector<std::string> PromptTemplate::placeholders() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (auto slot = slot_at(text, i)) {
            if (std::find(out.begin(), out.end(), slot->first) == out.end())
                out.push_back(slot->first);
            i = slot->second - 1;
        }
    }
    return out;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        auto slot = slot_at(text, i);
        if (!slot) {
            out.push_back(text[i++]);
            continue;
        }
        auto it = bindings.find(slot->first);
        if (it == bindings.end())
            throw ValidationError("unbound placeholder " + slot->first);
        out += it->second;
        i = slot->second;
    }
    return out;
}

void validate_template(const PromptTemplate& tmpl) {
    auto slots = tmpl.placeholders();
    auto has = [&](const char* name) {
        return std::find(slots.begin(), slots.end(), name) != slots.end();
    };
    switch (tmpl.role) {
        case PromptRole::Planner:
            if (!has("query") || !has("api_spec"))
                throw ValidationError("planner template must contain {query} and {api_spec}");
            break;
        case PromptRole::Simulator:
            if (!has("api_call") || !has("query"))
                throw ValidationError("simulator template must contain {api_call} and {query}");
            break;
        case PromptRole::Evaluator: {
            if (!has("query") || !has("evidence"))
                throw ValidationError("evaluator template must contain {query} and {evidence}");
            std::string lower = to_lower(tmpl.text);
            if (lower.find("json list") == std::string::npos ||
                lower.find("[tool, api]") == std::string::npos)
                throw ValidationError(
                    "evaluator template must instruct a JSON list of [Tool, API] pairs");
            break;
        }
    }
}

namespace {

// Mirrors prompts/planner.txt; a unit test pins the two copies equal.
constexpr const char* kPlannerTemplate =
    R"(You are the Planner for tool trials.
Given the user query "{query}" and the API specification:
{api_spec}
Extract parameter values for calling this API.
Rules:
- Use only parameter names declared in the specification.
- Include a value for every required parameter.
- Ground every value in the query; do not invent data the query cannot support.
Respond with a single JSON object mapping parameter names to values, and nothing else.
)";

constexpr const char* kSimulatorTemplate =
    R"(You are the Simulator for tool trials.
The API call "{api_call}" failed during real execution.
Failure detail: {failure}
User query context: "{query}"
Generate a realistic JSON response that this API would plausibly have returned on success for this query.
Respond with a single JSON value and nothing else.
)";

constexpr const char* kEvaluatorTemplate =
    R"(You are the Evaluator. Rank the candidate tools for the user query using the execution evidence gathered for each one.
User query: "{query}"
Candidates with trial evidence:
{evidence}
Prioritize tools with successful real execution or successful simulation; penalize tools that failed during planning or execution.
Output a JSON list of [Tool, API] pairs, best candidate first, and nothing else.
Example output: [["ToolA","api_x"],["ToolB","api_y"]]
)";

}  // namespace

PromptSet PromptSet::builtin() {
    PromptSet set;
    set.planner = {PromptRole::Planner, kPlannerTemplate};
    set.simulator = {PromptRole::Simulator, kSimulatorTemplate};
    set.evaluator = {PromptRole::Evaluator, kEvaluatorTemplate};
    validate_template(set.planner);
    validate_template(set.simulator);
    validate_template(set.evaluator);
    return set;
}

PromptSet PromptSet::load(const std::string& dir) {
    auto read_one = [&](PromptRole role, const char* file) {
        std::filesystem::path p = std::filesystem::path(dir) / file;
        PromptTemplate tmpl{role, read_file(p.string())};
        validate_template(tmpl);
        return tmpl;
    };
    PromptSet set;
    set.planner = read_one(PromptRole::Planner, "planner.txt");
    set.simulator = read_one(PromptRole::Simulator, "simulator.txt");
    set.evaluator = read_one(PromptRole::Evaluator, "evaluator.txt");
    return set;
}

ScriptedProvider::ScriptedProvider(std::vector<ScriptEntry> entries) {
    for (auto& e : entries) {
        if (e.digest) by_digest_[*e.digest] = e.response;
        if (!e.substrings.empty()) substring_entries_.push_back(std::move(e));
    }
}

ScriptedProvider ScriptedProvider::from_json(const json& doc, const std::string& origin) {
    if (!doc.is_array()) throw ValidationError(origin + ": script must be a JSON array");
    std::vector<ScriptEntry> entries;
    for (const auto& ej : doc) {
        if (!ej.is_object() || !ej.contains("response"))
            throw ValidationError(origin + ": script entry needs a \"response\" field");
        ScriptEntry e;
        if (ej.contains("digest")) e.digest = ej["digest"].get<std::string>();
        if (ej.contains("substring")) {
            const auto& s = ej["substring"];
            if (s.is_string()) {
                e.substrings.push_back(s.get<std::string>());
            } else if (s.is_array()) {
                for (const auto& frag : s) e.substrings.push_back(frag.get<std::string>());
            } else {
                throw ValidationError(origin + ": \"substring\" must be a string or array");
            }
        }
        if (!e.digest && e.substrings.empty())
            throw ValidationError(origin + ": script entry needs \"digest\" or \"substring\"");
        const auto& r = ej["response"];
        e.response = r.is_string() ? r.get<std::string>() : r.dump();
        entries.push_back(std::move(e));
    }
    return ScriptedProvider(std::move(entries));
}

ScriptedProvider ScriptedProvider::from_file(const std::string& path) {
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) throw ValidationError(path + ": malformed script JSON");
    return from_json(doc, path);
}

CompletionResult ScriptedProvider::complete(const CompletionRequest& req) {
    auto it = by_digest_.find(fnv1a64_hex(req.prompt));
    if (it != by_digest_.end()) return {it->second, FinishReason::Complete, std::nullopt};
    for (const auto& e : substring_entries_) {
        bool all = std::all_of(e.substrings.begin(), e.substrings.end(), [&](const auto& frag) {
            return req.prompt.find(frag) != std::string::npos;
        });
        if (all) return {e.response, FinishReason::Complete, std::nullopt};
    }
    return {"unscripted prompt", FinishReason::ProviderError, std::nullopt};
}

struct HttpProvider::Impl {
    HttpProviderOptions opts;
    std::string base;
    std::string path;
    std::counting_semaphore<> in_flight;

    explicit Impl(HttpProviderOptions o)
        : opts(std::move(o)), in_flight(std::max(1, opts.max_in_flight)) {
        auto scheme_end = opts.endpoint.find("://");
        if (scheme_end == std::string::npos)
            throw ConfigError("llm endpoint must be an absolute URL: " + opts.endpoint);
        auto path_start = opts.endpoint.find('/', scheme_end + 3);
        base = path_start == std::string::npos ? opts.endpoint : opts.endpoint.substr(0, path_start);
        path = path_start == std::string::npos ? "/" : opts.endpoint.substr(path_start);
    }
};

HttpProvider::HttpProvider(HttpProviderOptions opts)
    : impl_(std::make_unique<Impl>(std::move(opts))) {}

HttpProvider::~HttpProvider() = default;

CompletionResult HttpProvider::complete(const CompletionRequest& req) {
    impl_->in_flight.acquire();
    struct Release {
        std::counting_semaphore<>& sem;
        ~Release() { sem.release(); }
    } release{impl_->in_flight};

    httplib::Client cli(impl_->base);
    int t = impl_->opts.timeout_ms;
    cli.set_connection_timeout(t / 1000, (t % 1000) * 1000);
    cli.set_read_timeout(t / 1000, (t % 1000) * 1000);

    httplib::Headers headers;
    if (const char* token = std::getenv(impl_->opts.auth_env.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);

    json body{{"model", impl_->opts.model},
              {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})},
              {"temperature", req.temperature},
              {"max_tokens", req.max_tokens}};
    auto res = cli.Post(impl_->path, headers, body.dump(), "application/json");
    if (!res)
        return {"llm endpoint unreachable: " + httplib::to_string(res.error()),
                FinishReason::ProviderError, std::nullopt};
    if (res->status < 200 || res->status >= 300)
        return {"llm endpoint returned HTTP " + std::to_string(res->status),
                FinishReason::ProviderError, res->status};

    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty())
        return {"llm endpoint returned malformed body", FinishReason::ProviderError, res->status};
    const json& choice = parsed["choices"][0];
    std::string text;
    if (choice.contains("message") && choice["message"].contains("content"))
        text = choice["message"]["content"].get<std::string>();
    FinishReason reason = FinishReason::Complete;
    if (choice.value("finish_reason", "") == "length") reason = FinishReason::Truncated;
    return {std::move(text), reason, res->status};
}

JsonPayload parse_json_payload(const std::string& text) {
    auto try_parse = [](const std::string& s) -> std::optional<json> {
        json v = json::parse(s, nullptr, false);
        if (v.is_discarded()) return std::nullopt;
        return v;
    };

    std::string trimmed = trim(text);
    if (auto v = try_parse(trimmed)) return {std::move(v), ""};

    // Fenced block, with or without a language tag.
    auto fence = trimmed.find("```");
    if (fence != std::string::npos) {
        auto body_start = trimmed.find('\n', fence);
        auto fence_end = body_start == std::string::npos
                             ? std::string::npos
                             : trimmed.find("```", body_start);
        if (body_start != std::string::npos && fence_end != std::string::npos) {
            if (auto v = try_parse(trim(trimmed.substr(body_start, fence_end - body_start))))
                return {std::move(v), ""};
        }
    }

    // Outermost brace/bracket span.
    auto first = trimmed.find_first_of("{[");
    if (first != std::string::npos) {
        char open = trimmed[first];
        char close = open == '{' ? '}' : ']';
        auto last = trimmed.rfind(close);
        if (last != std::string::npos && last > first) {
            if (auto v = try_parse(trimmed.substr(first, last - first + 1)))
                return {std::move(v), ""};
        }
    }

    return {std::nullopt, "no parseable JSON payload in completion"};
}

}  // namespace gretel
