#include "gretel/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gretel/errors.hpp"
#include "gretel/log.hpp"
#include "gretel/util.hpp"

using nlohmann::json;

namespace gretel {

const char* to_string(ParamKind k) {
    switch (k) {
        case ParamKind::String: return "string";
        case ParamKind::Integer: return "integer";
        case ParamKind::Number: return "number";
        case ParamKind::Boolean: return "boolean";
        case ParamKind::Array: return "array";
        case ParamKind::Object: return "object";
    }
    return "?";
}

const char* to_string(ParamLocation l) {
    switch (l) {
        case ParamLocation::Query: return "query";
        case ParamLocation::Path: return "path";
        case ParamLocation::Body: return "body";
        case ParamLocation::Header: return "header";
    }
    return "?";
}

const char* to_string(HttpMethod m) {
    return m == HttpMethod::Get ? "GET" : "POST";
}

ParamKind param_kind_from_string(const std::string& s) {
    if (s == "string") return ParamKind::String;
    if (s == "integer") return ParamKind::Integer;
    if (s == "number") return ParamKind::Number;
    if (s == "boolean") return ParamKind::Boolean;
    if (s == "array") return ParamKind::Array;
    if (s == "object") return ParamKind::Object;
    throw ValidationError("unknown param kind: " + s);
}

ParamLocation param_location_from_string(const std::string& s) {
    if (s == "query") return ParamLocation::Query;
    if (s == "path") return ParamLocation::Path;
    if (s == "body") return ParamLocation::Body;
    if (s == "header") return ParamLocation::Header;
    throw ValidationError("unknown param location: " + s);
}

HttpMethod http_method_from_string(const std::string& s) {
    if (s == "GET") return HttpMethod::Get;
    if (s == "POST") return HttpMethod::Post;
    throw ValidationError("unknown method: " + s + " (expected GET or POST)");
}

const ParamSpec* ApiSpec::find_param(const std::string& name) const {
    for (const auto& p : params)
        if (p.name == name) return &p;
    return nullptr;
}

const ApiSpec* ToolSpec::find_api(const std::string& name) const {
    for (const auto& a : apis)
        if (a.api_name == name) return &a;
    return nullptr;
}

void Corpus::add(ToolSpec tool) {
    if (by_id_.count(tool.tool_id))
        throw ValidationError("duplicate tool_id: " + tool.tool_id);
    by_id_.emplace(tool.tool_id, tools_.size());
    tools_.push_back(std::move(tool));
}

const ToolSpec* Corpus::find_tool(const std::string& tool_id) const {
    auto it = by_id_.find(tool_id);
    return it == by_id_.end() ? nullptr : &tools_[it->second];
}

const ApiSpec* Corpus::find_api(const std::string& tool_id, const std::string& api_name) const {
    const ToolSpec* t = find_tool(tool_id);
    return t ? t->find_api(api_name) : nullptr;
}

bool Corpus::has_pair(const PairKey& key) const {
    return find_api(key.tool_id, key.api_name) != nullptr;
}

namespace {

// {identifier} slots in an endpoint template.
std::vector<std::string> template_slots(const std::string& tmpl) {
    std::vector<std::string> slots;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') continue;
        std::size_t j = i + 1;
        if (j >= tmpl.size() ||
            !(std::isalpha(static_cast<unsigned char>(tmpl[j])) || tmpl[j] == '_'))
            continue;
        while (j < tmpl.size() &&
               (std::isalnum(static_cast<unsigned char>(tmpl[j])) || tmpl[j] == '_'))
            ++j;
        if (j < tmpl.size() && tmpl[j] == '}') {
            slots.push_back(tmpl.substr(i + 1, j - i - 1));
            i = j;
        }
    }
    return slots;
}

struct LineCtx {
    const std::string& origin;
    std::size_t line;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(origin, line, msg);
    }
};

void check_unknown_fields(const json& obj, std::initializer_list<const char*> known,
                          const char* what, SchemaMode mode, const LineCtx& ctx) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool found = std::any_of(known.begin(), known.end(),
                                 [&](const char* k) { return it.key() == k; });
        if (found) continue;
        std::string msg = std::string("unknown field \"") + it.key() + "\" in " + what;
        if (mode == SchemaMode::Strict) ctx.fail(msg);
        log::warn(ctx.origin + ":" + std::to_string(ctx.line) + ": " + msg);
    }
}

const json& expect_field(const json& obj, const char* field, const char* what,
                         const LineCtx& ctx) {
    auto it = obj.find(field);
    if (it == obj.end())
        ctx.fail(std::string("missing field \"") + field + "\" in " + what);
    return *it;
}

std::string expect_string(const json& obj, const char* field, const char* what,
                          const LineCtx& ctx, bool nonempty = true) {
    const json& v = expect_field(obj, field, what, ctx);
    if (!v.is_string())
        ctx.fail(std::string("field \"") + field + "\" in " + what + " must be a string");
    std::string s = v.get<std::string>();
    if (nonempty && s.empty())
        ctx.fail(std::string("field \"") + field + "\" in " + what + " must be nonempty");
    return s;
}

bool expect_bool(const json& obj, const char* field, const char* what, const LineCtx& ctx) {
    const json& v = expect_field(obj, field, what, ctx);
    if (!v.is_boolean())
        ctx.fail(std::string("field \"") + field + "\" in " + what + " must be a boolean");
    return v.get<bool>();
}

ParamSpec parse_param(const json& obj, SchemaMode mode, const LineCtx& ctx) {
    if (!obj.is_object()) ctx.fail("param entry must be an object");
    check_unknown_fields(obj, {"name", "kind", "required", "location", "description"},
                         "param", mode, ctx);
    ParamSpec p;
    p.name = expect_string(obj, "name", "param", ctx);
    try {
        p.kind = param_kind_from_string(expect_string(obj, "kind", "param", ctx));
        p.location = param_location_from_string(expect_string(obj, "location", "param", ctx));
    } catch (const ValidationError& e) {
        ctx.fail(e.what());
    }
    p.required = expect_bool(obj, "required", "param", ctx);
    p.description = expect_string(obj, "description", "param", ctx, /*nonempty=*/false);
    if (p.location == ParamLocation::Path && !p.required)
        ctx.fail("path param \"" + p.name + "\" must be required");
    return p;
}

ApiSpec parse_api(const json& obj, SchemaMode mode, const LineCtx& ctx) {
    if (!obj.is_object()) ctx.fail("api entry must be an object");
    check_unknown_fields(
        obj, {"api_name", "description", "method", "endpoint_template", "requires_auth", "params"},
        "api", mode, ctx);
    ApiSpec a;
    a.api_name = expect_string(obj, "api_name", "api", ctx);
    a.description = expect_string(obj, "description", "api", ctx, /*nonempty=*/false);
    try {
        a.method = http_method_from_string(expect_string(obj, "method", "api", ctx));
    } catch (const ValidationError& e) {
        ctx.fail(e.what());
    }
    a.endpoint_template = expect_string(obj, "endpoint_template", "api", ctx);
    a.requires_auth = expect_bool(obj, "requires_auth", "api", ctx);

    const json& params = expect_field(obj, "params", "api", ctx);
    if (!params.is_array()) ctx.fail("field \"params\" in api must be an array");
    std::unordered_set<std::string> names;
    for (const auto& pj : params) {
        ParamSpec p = parse_param(pj, mode, ctx);
        if (!names.insert(p.name).second)
            ctx.fail("duplicate param name \"" + p.name + "\" in api " + a.api_name);
        a.params.push_back(std::move(p));
    }

    for (const auto& slot : template_slots(a.endpoint_template)) {
        const ParamSpec* p = a.find_param(slot);
        if (!p || p->location != ParamLocation::Path)
            ctx.fail("endpoint slot {" + slot + "} in api " + a.api_name +
                     " has no matching path param");
    }
    return a;
}

ToolSpec parse_tool(const json& obj, SchemaMode mode, const LineCtx& ctx) {
    if (!obj.is_object()) ctx.fail("tool entry must be an object");
    check_unknown_fields(obj, {"tool_id", "name", "description", "apis"}, "tool", mode, ctx);
    ToolSpec t;
    t.tool_id = expect_string(obj, "tool_id", "tool", ctx);
    t.name = expect_string(obj, "name", "tool", ctx);
    t.description = expect_string(obj, "description", "tool", ctx);

    const json& apis = expect_field(obj, "apis", "tool", ctx);
    if (!apis.is_array() || apis.empty())
        ctx.fail("field \"apis\" in tool " + t.tool_id + " must be a nonempty array");
    std::unordered_set<std::string> names;
    for (const auto& aj : apis) {
        ApiSpec a = parse_api(aj, mode, ctx);
        if (!names.insert(a.api_name).second)
            ctx.fail("duplicate api_name \"" + a.api_name + "\" in tool " + t.tool_id);
        t.apis.push_back(std::move(a));
    }
    return t;
}

// Applies fn to each nonblank JSONL line.
template <typename Fn>
void for_each_jsonl_line(const std::string& content, const std::string& origin, Fn fn) {
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (obj.is_discarded())
            throw ParseError(origin, lineno, "malformed JSON");
        fn(obj, lineno);
    }
}

}  // namespace

Corpus corpus_from_jsonl(const std::string& content, const std::string& origin, SchemaMode mode) {
    Corpus corpus;
    for_each_jsonl_line(content, origin, [&](const json& obj, std::size_t lineno) {
        LineCtx ctx{origin, lineno};
        ToolSpec t = parse_tool(obj, mode, ctx);
        if (corpus.find_tool(t.tool_id))
            ctx.fail("duplicate tool_id: " + t.tool_id);
        corpus.add(std::move(t));
    });
    return corpus;
}

Corpus load_corpus(const std::string& path, SchemaMode mode) {
    return corpus_from_jsonl(read_file(path), path, mode);
}

std::vector<QueryRecord> queries_from_jsonl(const std::string& content, const std::string& origin,
                                            const Corpus& corpus, SchemaMode mode) {
    std::vector<QueryRecord> out;
    std::unordered_set<std::string> seen_ids;
    for_each_jsonl_line(content, origin, [&](const json& obj, std::size_t lineno) {
        LineCtx ctx{origin, lineno};
        check_unknown_fields(obj, {"query_id", "text", "relevant"}, "query", mode, ctx);
        QueryRecord q;
        q.query_id = expect_string(obj, "query_id", "query", ctx);
        q.text = expect_string(obj, "text", "query", ctx);
        if (!seen_ids.insert(q.query_id).second)
            ctx.fail("duplicate query_id: " + q.query_id);

        const json& rel = expect_field(obj, "relevant", "query", ctx);
        if (!rel.is_array()) ctx.fail("field \"relevant\" in query must be an array");
        for (const auto& rj : rel) {
            if (!rj.is_object()) ctx.fail("relevant entry must be an object");
            PairKey key;
            key.tool_id = expect_string(rj, "tool_id", "relevant entry", ctx);
            key.api_name = expect_string(rj, "api_name", "relevant entry", ctx);
            if (!corpus.has_pair(key))
                ctx.fail("query " + q.query_id + " labels unknown pair (" + key.tool_id + ", " +
                         key.api_name + ")");
            q.relevant.insert(std::move(key));
        }
        out.push_back(std::move(q));
    });
    if (out.empty()) log::warn(origin + ": query file is empty");
    return out;
}

std::vector<QueryRecord> load_queries(const std::string& path, const Corpus& corpus,
                                      SchemaMode mode) {
    return queries_from_jsonl(read_file(path), path, corpus, mode);
}

json to_json(const ParamSpec& p) {
    return json{{"name", p.name},
                {"kind", to_string(p.kind)},
                {"required", p.required},
                {"location", to_string(p.location)},
                {"description", p.description}};
}

json to_json(const ApiSpec& a) {
    json params = json::array();
    for (const auto& p : a.params) params.push_back(to_json(p));
    return json{{"api_name", a.api_name},
                {"description", a.description},
                {"method", to_string(a.method)},
                {"endpoint_template", a.endpoint_template},
                {"requires_auth", a.requires_auth},
                {"params", std::move(params)}};
}

json to_json(const ToolSpec& t) {
    json apis = json::array();
    for (const auto& a : t.apis) apis.push_back(to_json(a));
    return json{{"tool_id", t.tool_id},
                {"name", t.name},
                {"description", t.description},
                {"apis", std::move(apis)}};
}

json to_json(const QueryRecord& q) {
    json rel = json::array();
    for (const auto& k : q.relevant)
        rel.push_back(json{{"tool_id", k.tool_id}, {"api_name", k.api_name}});
    return json{{"query_id", q.query_id}, {"text", q.text}, {"relevant", std::move(rel)}};
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& t : corpus.tools()) {
        out += to_json(t).dump();
        out += '\n';
    }
    return out;
}

std::string queries_to_jsonl(const std::vector<QueryRecord>& queries) {
    std::string out;
    for (const auto& q : queries) {
        out += to_json(q).dump();
        out += '\n';
    }
    return out;
}

}  // namespace gretel
