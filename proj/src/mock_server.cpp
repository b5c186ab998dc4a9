#include "gretel/mock_server.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "gretel/errors.hpp"
#include "gretel/util.hpp"

using nlohmann::json;

namespace gretel {

MockScenario MockScenario::from_json(const json& doc, const std::string& origin) {
    if (!doc.is_object()) throw ValidationError(origin + ": scenario must be a JSON object");
    MockScenario scenario;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        auto slash = it.key().find('/');
        if (slash == std::string::npos || slash == 0 || slash + 1 >= it.key().size())
            throw ValidationError(origin + ": scenario key must be \"tool_id/api_name\", got \"" +
                                  it.key() + "\"");
        PairKey key{it.key().substr(0, slash), it.key().substr(slash + 1)};
        const json& bj = *it;
        if (!bj.is_object())
            throw ValidationError(origin + ": behavior for " + it.key() + " must be an object");
        MockBehavior b;
        b.respond_status = bj.value("respond_status", 200);
        b.body = bj.contains("body") ? bj["body"] : json::object();
        b.latency_ms = bj.value("latency_ms", std::int64_t{0});
        b.require_auth = bj.value("require_auth", false);
        b.validate_params = bj.value("validate_params", false);
        b.sleep_ms = bj.value("sleep_ms", std::int64_t{0});
        scenario.behaviors.emplace(std::move(key), std::move(b));
    }
    return scenario;
}

MockScenario MockScenario::from_file(const std::string& path) {
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) throw ValidationError(path + ": malformed scenario JSON");
    return from_json(doc, path);
}

void MockScenario::validate(const Corpus& corpus) const {
    for (const auto& [key, _] : behaviors) {
        if (!corpus.has_pair(key))
            throw ValidationError("scenario references unknown pair " + key.str());
    }
}

namespace {

// "{slot}" path segments become ":slot" httplib path params.
std::string route_pattern_from_template(const std::string& endpoint_template) {
    auto scheme_end = endpoint_template.find("://");
    auto path_start = scheme_end == std::string::npos
                          ? std::string::npos
                          : endpoint_template.find('/', scheme_end + 3);
    std::string path =
        path_start == std::string::npos ? "/" : endpoint_template.substr(path_start);
    auto q = path.find('?');
    if (q != std::string::npos) path.resize(q);

    std::string pattern;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i] == '{') {
            auto end = path.find('}', i);
            if (end == std::string::npos)
                throw ValidationError("unterminated slot in endpoint path: " + path);
            pattern += ":" + path.substr(i + 1, end - i - 1);
            i = end;
        } else {
            pattern.push_back(path[i]);
        }
    }
    return pattern;
}

// Substitute {param} in string leaves of the body template.
json instantiate_body(const json& tmpl, const std::map<std::string, std::string>& params) {
    if (tmpl.is_string()) {
        std::string s = tmpl.get<std::string>();
        for (const auto& [name, value] : params) {
            std::string slot = "{" + name + "}";
            std::size_t pos;
            while ((pos = s.find(slot)) != std::string::npos) s.replace(pos, slot.size(), value);
        }
        return s;
    }
    if (tmpl.is_object()) {
        json out = json::object();
        for (auto it = tmpl.begin(); it != tmpl.end(); ++it)
            out[it.key()] = instantiate_body(*it, params);
        return out;
    }
    if (tmpl.is_array()) {
        json out = json::array();
        for (const auto& v : tmpl) out.push_back(instantiate_body(v, params));
        return out;
    }
    return tmpl;
}

}  // namespace

struct MockServer::Impl {
    MockScenario scenario;
    const Corpus& corpus;
    httplib::Server server;
    std::thread thread;
    std::atomic<int> port{0};
    mutable std::mutex log_mu;
    std::vector<MockRequestRecord> log;

    Impl(MockScenario s, const Corpus& c) : scenario(std::move(s)), corpus(c) {}

    void append_log(MockRequestRecord rec) {
        std::lock_guard<std::mutex> lock(log_mu);
        log.push_back(std::move(rec));
    }

    void handle(const PairKey& key, const MockBehavior& behavior, const ApiSpec& api,
                const httplib::Request& req, httplib::Response& res) {
        if (behavior.sleep_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(behavior.sleep_ms));

        auto respond_json = [&](int status, const json& body) {
            res.status = status;
            res.set_header("X-Injected-Latency-Ms", std::to_string(behavior.latency_ms));
            res.set_content(body.dump(), "application/json");
            append_log({req.method, req.path, key.tool_id, key.api_name, status});
        };

        if (behavior.require_auth) {
            std::string auth = req.get_header_value("Authorization");
            if (!starts_with(auth, "Bearer ") || auth.size() <= 7) {
                respond_json(401, json{{"error", "authentication required"}});
                return;
            }
        }

        // Collect param values for validation and body templating.
        std::map<std::string, std::string> values;
        json body_json;
        if (!req.body.empty()) body_json = json::parse(req.body, nullptr, false);
        for (const auto& p : api.params) {
            switch (p.location) {
                case ParamLocation::Path: {
                    auto it = req.path_params.find(p.name);
                    if (it != req.path_params.end()) values[p.name] = it->second;
                    break;
                }
                case ParamLocation::Query:
                    if (req.has_param(p.name)) values[p.name] = req.get_param_value(p.name);
                    break;
                case ParamLocation::Header:
                    if (req.has_header(p.name)) values[p.name] = req.get_header_value(p.name);
                    break;
                case ParamLocation::Body:
                    // GET requests fold body params into the query string.
                    if (req.has_param(p.name)) {
                        values[p.name] = req.get_param_value(p.name);
                    } else if (body_json.is_object() && body_json.contains(p.name)) {
                        const json& v = body_json[p.name];
                        values[p.name] = v.is_string() ? v.get<std::string>() : v.dump();
                    }
                    break;
            }
        }

        if (behavior.validate_params) {
            for (const auto& p : api.params) {
                if (p.required && !values.count(p.name)) {
                    respond_json(400, json{{"error", "missing required parameter: " + p.name}});
                    return;
                }
            }
        }

        respond_json(behavior.respond_status, instantiate_body(behavior.body, values));
    }

    void register_routes() {
        for (const auto& [key, behavior] : scenario.behaviors) {
            const ApiSpec* api = corpus.find_api(key.tool_id, key.api_name);
            if (!api) throw ValidationError("scenario references unknown pair " + key.str());
            std::string pattern = route_pattern_from_template(api->endpoint_template);
            auto handler = [this, key = key, behavior = behavior, api](
                               const httplib::Request& req, httplib::Response& res) {
                handle(key, behavior, *api, req, res);
            };
            if (api->method == HttpMethod::Get)
                server.Get(pattern, handler);
            else
                server.Post(pattern, handler);
        }
        server.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (res.status == 404) {
                res.set_content(json{{"error", "unknown route"}}.dump(), "application/json");
                append_log({req.method, req.path, "", "", 404});
            }
        });
    }
};

MockServer::MockServer(MockScenario scenario, const Corpus& corpus)
    : impl_(std::make_unique<Impl>(std::move(scenario), corpus)) {
    impl_->scenario.validate(corpus);
    impl_->register_routes();
}

MockServer::~MockServer() { stop(); }

void MockServer::start(int port) {
    int bound;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port("127.0.0.1");
        if (bound < 0) throw StageError("serve-mock", "cannot bind any port");
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port))
            throw StageError("serve-mock", "cannot bind port " + std::to_string(port) +
                                               " (already in use?)");
        bound = port;
    }
    impl_->port = bound;
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void MockServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
    if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

int MockServer::port() const { return impl_->port; }

std::string MockServer::host_port() const {
    return "127.0.0.1:" + std::to_string(impl_->port.load());
}

std::vector<MockRequestRecord> MockServer::request_log() const {
    std::lock_guard<std::mutex> lock(impl_->log_mu);
    return impl_->log;
}

}  // namespace gretel
