#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace gretel {

enum class ParamKind { String, Integer, Number, Boolean, Array, Object };
enum class ParamLocation { Query, Path, Body, Header };
enum class HttpMethod { Get, Post };

const char* to_string(ParamKind k);
const char* to_string(ParamLocation l);
const char* to_string(HttpMethod m);
ParamKind param_kind_from_string(const std::string& s);
ParamLocation param_location_from_string(const std::string& s);
HttpMethod http_method_from_string(const std::string& s);

struct ParamSpec {
    std::string name;
    ParamKind kind = ParamKind::String;
    bool required = false;
    ParamLocation location = ParamLocation::Query;
    std::string description;

    bool operator==(const ParamSpec&) const = default;
};

struct ApiSpec {
    std::string api_name;
    std::string description;
    std::vector<ParamSpec> params;
    HttpMethod method = HttpMethod::Get;
    std::string endpoint_template;  // absolute URL with {path-param} slots
    bool requires_auth = false;

    const ParamSpec* find_param(const std::string& name) const;

    bool operator==(const ApiSpec&) const = default;
};

struct ToolSpec {
    std::string tool_id;
    std::string name;
    std::string description;
    std::vector<ApiSpec> apis;

    const ApiSpec* find_api(const std::string& api_name) const;

    bool operator==(const ToolSpec&) const = default;
};

// Identifies one (tool, api) pair; the key unit of retrieval and trials.
struct PairKey {
    std::string tool_id;
    std::string api_name;

    auto operator<=>(const PairKey&) const = default;
    std::string str() const { return tool_id + "/" + api_name; }
};

struct QueryRecord {
    std::string query_id;
    std::string text;
    std::set<PairKey> relevant;

    bool operator==(const QueryRecord&) const = default;
};

// Immutable after load; safe for concurrent reads.
class Corpus {
public:
    void add(ToolSpec tool);  // throws ValidationError on duplicate tool_id

    std::size_t size() const { return tools_.size(); }
    bool empty() const { return tools_.empty(); }
    const std::vector<ToolSpec>& tools() const { return tools_; }

    const ToolSpec* find_tool(const std::string& tool_id) const;
    const ApiSpec* find_api(const std::string& tool_id, const std::string& api_name) const;
    bool has_pair(const PairKey& key) const;

    bool operator==(const Corpus& other) const { return tools_ == other.tools_; }

private:
    std::vector<ToolSpec> tools_;  // file order
    std::unordered_map<std::string, std::size_t> by_id_;
};

enum class SchemaMode { Strict, Permissive };

// One JSON object per line. Strict mode rejects unknown fields; permissive
// downgrades them to warnings.
Corpus load_corpus(const std::string& path, SchemaMode mode = SchemaMode::Strict);
Corpus corpus_from_jsonl(const std::string& content, const std::string& origin,
                         SchemaMode mode = SchemaMode::Strict);

std::vector<QueryRecord> load_queries(const std::string& path, const Corpus& corpus,
                                      SchemaMode mode = SchemaMode::Strict);
std::vector<QueryRecord> queries_from_jsonl(const std::string& content, const std::string& origin,
                                            const Corpus& corpus,
                                            SchemaMode mode = SchemaMode::Strict);

nlohmann::json to_json(const ParamSpec& p);
nlohmann::json to_json(const ApiSpec& a);
nlohmann::json to_json(const ToolSpec& t);
nlohmann::json to_json(const QueryRecord& q);
std::string corpus_to_jsonl(const Corpus& corpus);
std::string queries_to_jsonl(const std::vector<QueryRecord>& queries);

}  // namespace gretel
