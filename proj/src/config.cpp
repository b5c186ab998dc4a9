#include "gretel/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include "gretel/errors.hpp"
#include "gretel/util.hpp"

namespace fs = std::filesystem;

namespace gretel {

namespace {

struct Value {
    enum class Kind { String, Number, Bool, List } kind = Kind::String;
    std::string s;
    double num = 0.0;
    bool b = false;
    std::vector<Value> items;
};

Value parse_scalar(const std::string& raw, const std::string& origin, std::size_t line) {
    std::string v = trim(raw);
    if (v.empty()) throw ConfigError(origin + ":" + std::to_string(line) + ": empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ConfigError(origin + ":" + std::to_string(line) + ": unterminated string");
        Value out;
        out.kind = Value::Kind::String;
        out.s = v.substr(1, v.size() - 2);
        return out;
    }
    if (v == "true" || v == "false") {
        Value out;
        out.kind = Value::Kind::Bool;
        out.b = (v == "true");
        return out;
    }
    char* end = nullptr;
    double num = std::strtod(v.c_str(), &end);
    if (end && *end == '\0') {
        Value out;
        out.kind = Value::Kind::Number;
        out.num = num;
        return out;
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ": cannot parse value: " + v);
}

Value parse_value(const std::string& raw, const std::string& origin, std::size_t line) {
    std::string v = trim(raw);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']')
            throw ConfigError(origin + ":" + std::to_string(line) + ": unterminated list");
        Value out;
        out.kind = Value::Kind::List;
        std::string inner = v.substr(1, v.size() - 2);
        std::string item;
        bool in_string = false;
        for (char c : inner) {
            if (c == '"') in_string = !in_string;
            if (c == ',' && !in_string) {
                if (!trim(item).empty()) out.items.push_back(parse_scalar(item, origin, line));
                item.clear();
            } else {
                item.push_back(c);
            }
        }
        if (!trim(item).empty()) out.items.push_back(parse_scalar(item, origin, line));
        return out;
    }
    return parse_scalar(v, origin, line);
}

class KeyMap {
public:
    KeyMap(std::map<std::string, Value> values, std::string origin)
        : values_(std::move(values)), origin_(std::move(origin)) {}

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        auto v = take(key);
        if (!v) return fallback;
        if (v->kind != Value::Kind::String)
            throw ConfigError(origin_ + ": " + key + " must be a string");
        return v->s;
    }

    double get_number(const std::string& key, double fallback) {
        auto v = take(key);
        if (!v) return fallback;
        if (v->kind != Value::Kind::Number)
            throw ConfigError(origin_ + ": " + key + " must be a number");
        return v->num;
    }

    int get_int(const std::string& key, int fallback) {
        double d = get_number(key, static_cast<double>(fallback));
        if (d != static_cast<double>(static_cast<long long>(d)))
            throw ConfigError(origin_ + ": " + key + " must be an integer");
        return static_cast<int>(d);
    }

    bool get_bool(const std::string& key, bool fallback) {
        auto v = take(key);
        if (!v) return fallback;
        if (v->kind != Value::Kind::Bool)
            throw ConfigError(origin_ + ": " + key + " must be true or false");
        return v->b;
    }

    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) {
        auto v = take(key);
        if (!v) return fallback;
        if (v->kind != Value::Kind::List)
            throw ConfigError(origin_ + ": " + key + " must be a list");
        std::vector<int> out;
        for (const auto& item : v->items) {
            if (item.kind != Value::Kind::Number)
                throw ConfigError(origin_ + ": " + key + " must hold numbers");
            out.push_back(static_cast<int>(item.num));
        }
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key,
                                             std::vector<std::string> fallback) {
        auto v = take(key);
        if (!v) return fallback;
        if (v->kind != Value::Kind::List)
            throw ConfigError(origin_ + ": " + key + " must be a list");
        std::vector<std::string> out;
        for (const auto& item : v->items) {
            if (item.kind != Value::Kind::String)
                throw ConfigError(origin_ + ": " + key + " must hold strings");
            out.push_back(item.s);
        }
        return out;
    }

    void reject_leftovers() const {
        if (values_.empty()) return;
        std::string keys;
        for (const auto& [k, _] : values_) keys += (keys.empty() ? "" : ", ") + k;
        throw ConfigError(origin_ + ": unknown config key(s): " + keys);
    }

private:
    std::optional<Value> take(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        Value v = std::move(it->second);
        values_.erase(it);
        return v;
    }

    std::map<std::string, Value> values_;
    std::string origin_;
};

std::string resolve_path(const std::string& p, const std::string& base_dir) {
    if (p.empty()) return p;
    fs::path path(p);
    if (path.is_absolute()) return path.lexically_normal().string();
    return (fs::path(base_dir) / path).lexically_normal().string();
}

std::string fmt_double(double d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

}  // namespace

RunConfig RunConfig::from_string(const std::string& content, const std::string& base_dir,
                                 const std::string& origin) {
    std::map<std::string, Value> values;
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // Trailing comments are only stripped outside quoted strings.
        std::string stripped;
        bool in_string = false;
        for (char c : line) {
            if (c == '"') in_string = !in_string;
            if (c == '#' && !in_string) break;
            stripped.push_back(c);
        }
        stripped = trim(stripped);
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (values.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
        values[key] = parse_value(stripped.substr(eq + 1), origin, lineno);
    }

    KeyMap map(std::move(values), origin);
    RunConfig cfg;
    cfg.paths.tools = resolve_path(map.get_string("paths.tools", ""), base_dir);
    cfg.paths.queries = resolve_path(map.get_string("paths.queries", ""), base_dir);
    cfg.paths.scenario = resolve_path(map.get_string("paths.scenario", ""), base_dir);
    cfg.paths.output_dir = resolve_path(map.get_string("paths.output_dir", ""), base_dir);

    cfg.retriever.k1 = map.get_number("retriever.k1", cfg.retriever.k1);
    cfg.retriever.b = map.get_number("retriever.b", cfg.retriever.b);
    cfg.retriever.alpha = map.get_number("retriever.alpha", cfg.retriever.alpha);
    cfg.retriever.k = map.get_int("retriever.k", cfg.retriever.k);
    cfg.retriever.embedding_endpoint =
        map.get_string("retriever.embedding_endpoint", "");

    cfg.trial.timeout_ms = map.get_int("trial.timeout_ms", cfg.trial.timeout_ms);
    cfg.trial.max_concurrency = map.get_int("trial.max_concurrency", cfg.trial.max_concurrency);
    cfg.trial.simulation_enabled =
        map.get_bool("trial.simulation_enabled", cfg.trial.simulation_enabled);
    cfg.trial.cache_planned_calls =
        map.get_bool("trial.cache_planned_calls", cfg.trial.cache_planned_calls);

    cfg.llm.mode = map.get_string("llm.mode", "");
    cfg.llm.endpoint = map.get_string("llm.endpoint", "");
    cfg.llm.model = map.get_string("llm.model", "");
    cfg.llm.script_path = resolve_path(map.get_string("llm.script_path", ""), base_dir);
    cfg.llm.prompts_dir = resolve_path(map.get_string("llm.prompts_dir", ""), base_dir);
    cfg.llm.auth_env = map.get_string("llm.auth_env", cfg.llm.auth_env);
    cfg.llm.timeout_ms = map.get_int("llm.timeout_ms", cfg.llm.timeout_ms);
    cfg.llm.max_in_flight = map.get_int("llm.max_in_flight", cfg.llm.max_in_flight);

    cfg.rerank.mode = map.get_string("rerank.mode", cfg.rerank.mode);
    cfg.rerank.latency_tiebreak =
        map.get_bool("rerank.latency_tiebreak", cfg.rerank.latency_tiebreak);

    cfg.eval.k_values = map.get_int_list("eval.k_values", cfg.eval.k_values);
    cfg.eval.pass_rate_requires_relevance =
        map.get_bool("eval.pass_rate_requires_relevance", cfg.eval.pass_rate_requires_relevance);
    cfg.eval.compute_pass_rate =
        map.get_bool("eval.compute_pass_rate", cfg.eval.compute_pass_rate);

    cfg.sandbox.allowlist = map.get_string_list("sandbox.allowlist", {});
    cfg.sandbox.response_cap_bytes = static_cast<std::size_t>(
        map.get_int("sandbox.response_cap_bytes", static_cast<int>(cfg.sandbox.response_cap_bytes)));
    cfg.sandbox.host_override = map.get_string("sandbox.host_override", "");

    map.reject_leftovers();
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::string base = fs::path(path).parent_path().string();
    if (base.empty()) base = ".";
    return from_string(read_file(path), base, path);
}

void RunConfig::validate() const {
    if (paths.tools.empty()) throw ConfigError("paths.tools is required");
    if (paths.queries.empty()) throw ConfigError("paths.queries is required");
    if (paths.output_dir.empty()) throw ConfigError("paths.output_dir is required");

    if (retriever.k1 <= 0) throw ConfigError("retriever.k1 must be positive");
    if (retriever.b < 0 || retriever.b > 1) throw ConfigError("retriever.b must be in [0,1]");
    if (retriever.alpha < 0 || retriever.alpha > 1)
        throw ConfigError("retriever.alpha must be in [0,1]");
    if (retriever.k < 1) throw ConfigError("retriever.k must be at least 1");
    if (retriever.alpha > 0 && retriever.embedding_endpoint.empty())
        throw ConfigError("retriever.embedding_endpoint required when alpha > 0");

    if (trial.timeout_ms <= 0) throw ConfigError("trial.timeout_ms must be positive");
    if (trial.max_concurrency < 1) throw ConfigError("trial.max_concurrency must be at least 1");

    if (llm.mode != "scripted" && llm.mode != "http")
        throw ConfigError("llm.mode must be \"scripted\" or \"http\"");
    if (llm.mode == "scripted" && llm.script_path.empty())
        throw ConfigError("llm.script_path required in scripted mode");
    if (llm.mode == "http" && (llm.endpoint.empty() || llm.model.empty()))
        throw ConfigError("llm.endpoint and llm.model required in http mode");

    if (rerank.mode != "llm" && rerank.mode != "deterministic")
        throw ConfigError("rerank.mode must be \"llm\" or \"deterministic\"");

    if (eval.k_values.empty()) throw ConfigError("eval.k_values must be nonempty");
    if (!std::is_sorted(eval.k_values.begin(), eval.k_values.end()) ||
        std::adjacent_find(eval.k_values.begin(), eval.k_values.end()) != eval.k_values.end())
        throw ConfigError("eval.k_values must ascend");
    for (int k : eval.k_values)
        if (k < 1) throw ConfigError("eval.k_values entries must be positive");
}

std::vector<std::string> RunConfig::effective_allowlist() const {
    std::vector<std::string> out = sandbox.allowlist;
    if (const char* env = std::getenv("GRETEL_ALLOWLIST"); env && *env) {
        std::string s = env;
        std::size_t pos = 0;
        while (pos <= s.size()) {
            auto comma = s.find(',', pos);
            std::string entry =
                trim(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (!entry.empty()) out.push_back(entry);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    return out;
}

std::string RunConfig::digest_retrieval() const {
    std::string canon = "tools=" + paths.tools + ";queries=" + paths.queries +
                        ";k1=" + fmt_double(retriever.k1) + ";b=" + fmt_double(retriever.b) +
                        ";alpha=" + fmt_double(retriever.alpha) +
                        ";k=" + std::to_string(retriever.k) +
                        ";embedding=" + retriever.embedding_endpoint;
    return fnv1a64_hex(canon);
}

std::string RunConfig::digest_trial() const {
    std::string canon = digest_retrieval() + ";scenario=" + paths.scenario +
                        ";llm.mode=" + llm.mode + ";llm.endpoint=" + llm.endpoint +
                        ";llm.model=" + llm.model + ";llm.script=" + llm.script_path +
                        ";llm.prompts=" + llm.prompts_dir +
                        ";timeout=" + std::to_string(trial.timeout_ms) +
                        ";conc=" + std::to_string(trial.max_concurrency) +
                        ";sim=" + (trial.simulation_enabled ? "1" : "0") +
                        ";cache=" + (trial.cache_planned_calls ? "1" : "0") +
                        ";cap=" + std::to_string(sandbox.response_cap_bytes);
    return fnv1a64_hex(canon);
}

std::string RunConfig::digest_rerank() const {
    std::string canon = digest_trial() + ";mode=" + rerank.mode +
                        ";latency=" + (rerank.latency_tiebreak ? "1" : "0");
    return fnv1a64_hex(canon);
}

std::string RunConfig::digest_eval() const {
    std::string ks;
    for (int k : eval.k_values) ks += std::to_string(k) + ",";
    std::string canon = digest_rerank() + ";ks=" + ks +
                        ";req_rel=" + (eval.pass_rate_requires_relevance ? "1" : "0") +
                        ";pass=" + (eval.compute_pass_rate ? "1" : "0");
    return fnv1a64_hex(canon);
}

}  // namespace gretel
