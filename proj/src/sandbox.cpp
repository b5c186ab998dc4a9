#include "gretel/sandbox.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>

#include <httplib.h>

#include "gretel/errors.hpp"
#include "gretel/util.hpp"

using nlohmann::json;

namespace gretel {

const char* to_string(ExecStatus s) {
    switch (s) {
        case ExecStatus::Success: return "success";
        case ExecStatus::Error: return "error";
        case ExecStatus::Empty: return "empty";
    }
    return "?";
}

const char* to_string(ErrorClass c) {
    switch (c) {
        case ErrorClass::Auth: return "auth";
        case ErrorClass::ClientError: return "client_error";
        case ErrorClass::ServerError: return "server_error";
        case ErrorClass::Timeout: return "timeout";
        case ErrorClass::Connection: return "connection";
        case ErrorClass::Schema: return "schema";
    }
    return "?";
}

const char* to_string(FailureClass c) {
    switch (c) {
        case FailureClass::ParameterMismatch: return "PARAMETER_MISMATCH";
        case FailureClass::SemanticMismatch: return "SEMANTIC_MISMATCH";
        case FailureClass::ExecutionFailure: return "EXECUTION_FAILURE";
        case FailureClass::FunctionalSuccess: return "FUNCTIONAL_SUCCESS";
    }
    return "?";
}

ExecutionResult map_http_outcome(int http_status, const std::string& body,
                                 std::size_t response_cap_bytes) {
    ExecutionResult r;
    r.http_status = http_status;

    std::string capped = body;
    if (capped.size() > response_cap_bytes) {
        capped.resize(response_cap_bytes);
        r.truncated = true;
    }

    if (http_status >= 200 && http_status < 300) {
        json payload;
        std::string trimmed = trim(capped);
        if (trimmed.empty()) {
            payload = "";
        } else {
            payload = json::parse(trimmed, nullptr, false);
            if (payload.is_discarded()) payload = capped;  // non-JSON body kept verbatim
            if (payload.is_null()) payload = "";           // null payload treated as empty
        }
        bool empty = (payload.is_object() && payload.empty()) ||
                     (payload.is_array() && payload.empty()) ||
                     (payload.is_string() && payload.get<std::string>().empty());
        r.status = empty ? ExecStatus::Empty : ExecStatus::Success;
        r.payload = std::move(payload);
        return r;
    }

    r.status = ExecStatus::Error;
    if (http_status == 401 || http_status == 403) {
        r.error_class = ErrorClass::Auth;
        r.message = "authentication failure (http " + std::to_string(http_status) + ")";
    } else if (http_status >= 300 && http_status < 400) {
        r.error_class = ErrorClass::Schema;
        r.message = "redirect not followed (http " + std::to_string(http_status) + ")";
    } else if (http_status >= 400 && http_status < 500) {
        r.error_class = ErrorClass::ClientError;
        r.message = "client error (http " + std::to_string(http_status) + ")";
    } else if (http_status >= 500 && http_status < 600) {
        r.error_class = ErrorClass::ServerError;
        r.message = "server error (http " + std::to_string(http_status) + ")";
    } else {
        r.error_class = ErrorClass::Schema;
        r.message = "unexpected http status " + std::to_string(http_status);
    }
    if (!capped.empty()) r.message += ": " + capped.substr(0, 256);
    return r;
}

Executor::Executor(ExecutorOptions opts) : opts_(std::move(opts)) {}

bool Executor::host_allowed(const std::string& host_port,
                            const std::vector<std::string>& allowlist) {
    std::string hp = to_lower(host_port);
    std::string host = hp.substr(0, hp.find(':'));
    for (const auto& entry : allowlist) {
        std::string e = to_lower(trim(entry));
        if (e.empty()) continue;
        if (e.find(':') != std::string::npos) {
            if (e == hp) return true;  // host:port entry matches exactly
        } else if (e == host) {
            return true;  // bare host entry matches any port
        }
    }
    return false;
}

std::string Executor::bearer_env_name(const std::string& prefix, const std::string& tool_id) {
    std::string name = prefix;
    for (unsigned char c : tool_id)
        name.push_back(std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_');
    return name;
}

namespace {

std::string value_to_string(const json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

struct UrlParts {
    std::string scheme;
    std::string host_port;
    std::string path;  // path + query from the template
};

std::optional<UrlParts> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return std::nullopt;
    UrlParts parts;
    parts.scheme = url.substr(0, scheme_end);
    auto path_start = url.find('/', scheme_end + 3);
    parts.host_port = url.substr(scheme_end + 3, path_start == std::string::npos
                                                     ? std::string::npos
                                                     : path_start - scheme_end - 3);
    parts.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    return parts;
}

}  // namespace

ExecutionResult Executor::execute(const PlannedCall& call, const ApiSpec& api,
                                  std::optional<int> timeout_ms) const {
    ExecutionResult err;
    err.status = ExecStatus::Error;

    // Substitute path slots and collect the other locations.
    std::string url = api.endpoint_template;
    httplib::Headers headers;
    std::string query_string;
    json body_obj = json::object();
    for (const auto& p : api.params) {
        auto it = call.bindings.find(p.name);
        if (it == call.bindings.end()) continue;
        std::string sval = value_to_string(it->second);
        switch (p.location) {
            case ParamLocation::Path: {
                std::string slot = "{" + p.name + "}";
                auto pos = url.find(slot);
                if (pos != std::string::npos) url.replace(pos, slot.size(), url_encode(sval));
                break;
            }
            case ParamLocation::Query:
                query_string += (query_string.empty() ? "" : "&") + url_encode(p.name) + "=" +
                                url_encode(sval);
                break;
            case ParamLocation::Header:
                headers.emplace(p.name, sval);
                break;
            case ParamLocation::Body:
                if (api.method == HttpMethod::Get) {
                    // GET carries no body; body-location params fold into the
                    // query string.
                    query_string += (query_string.empty() ? "" : "&") + url_encode(p.name) + "=" +
                                    url_encode(sval);
                } else {
                    body_obj[p.name] = it->second;
                }
                break;
        }
    }

    auto parts = split_url(url);
    if (!parts || parts->host_port.empty() || parts->host_port.find('{') != std::string::npos) {
        err.error_class = ErrorClass::Schema;
        err.message = "malformed endpoint URL: " + url;
        return err;
    }

    if (!query_string.empty())
        parts->path += (parts->path.find('?') == std::string::npos ? "?" : "&") + query_string;

    bool allowed = host_allowed(parts->host_port, opts_.allowlist);
    std::string effective =
        opts_.host_override ? *opts_.host_override : parts->host_port;
    {
        std::lock_guard<std::mutex> lock(log_mu_);
        log_.push_back({parts->scheme + "://" + parts->host_port + parts->path, parts->host_port,
                        effective, allowed});
    }
    if (!allowed) {
        err.error_class = ErrorClass::Connection;
        err.message = "host not allowlisted: " + parts->host_port;
        return err;
    }

    // Bearer token slot, one per tool, from the environment.
    std::string env_name = bearer_env_name(opts_.bearer_env_prefix, call.tool_id);
    if (const char* token = std::getenv(env_name.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);

    int budget = timeout_ms.value_or(opts_.default_timeout_ms);
    if (budget <= 0) {
        err.error_class = ErrorClass::Timeout;
        err.message = "no time budget left before dispatch";
        return err;
    }

    // Override targets are plain http (the embedded mock server).
    std::string base = opts_.host_override ? "http://" + effective
                                           : parts->scheme + "://" + parts->host_port;
    httplib::Client cli(base);
    cli.set_follow_location(false);
    cli.set_connection_timeout(budget / 1000, (budget % 1000) * 1000);
    cli.set_read_timeout(budget / 1000, (budget % 1000) * 1000);
    cli.set_write_timeout(budget / 1000, (budget % 1000) * 1000);

    auto start = std::chrono::steady_clock::now();
    httplib::Result res = api.method == HttpMethod::Get
                              ? cli.Get(parts->path, headers)
                              : cli.Post(parts->path, headers, body_obj.dump(),
                                         "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();

    if (!res) {
        err.latency_ms = elapsed;
        switch (res.error()) {
            case httplib::Error::ConnectionTimeout:
                err.error_class = ErrorClass::Timeout;
                break;
            case httplib::Error::Read:
            case httplib::Error::Write:
                // A read/write abort at the deadline is a timeout; anything
                // quicker is a dropped connection.
                err.error_class = elapsed >= budget ? ErrorClass::Timeout : ErrorClass::Connection;
                break;
            default:
                err.error_class = ErrorClass::Connection;
                break;
        }
        err.message = std::string("transport failure: ") + httplib::to_string(res.error());
        return err;
    }

    ExecutionResult out = map_http_outcome(res->status, res->body, opts_.response_cap_bytes);
    if (res->has_header("X-Injected-Latency-Ms")) {
        // Failure-injection servers advertise their configured latency so
        // offline artifacts stay reproducible.
        out.latency_ms = std::strtoll(res->get_header_value("X-Injected-Latency-Ms").c_str(),
                                      nullptr, 10);
    } else {
        out.latency_ms = elapsed;
    }
    return out;
}

std::vector<DispatchRecord> Executor::dispatch_log() const {
    std::lock_guard<std::mutex> lock(log_mu_);
    return log_;
}

FailureClass classify(const EvidenceTuple& evidence) {
    switch (evidence.status) {
        case TrialStatus::PlanningFailed: return FailureClass::ParameterMismatch;
        case TrialStatus::OtherNonerror: return FailureClass::SemanticMismatch;
        case TrialStatus::SuccessSimulated:
        case TrialStatus::SimulationFailed: return FailureClass::ExecutionFailure;
        case TrialStatus::SuccessReal: return FailureClass::FunctionalSuccess;
    }
    return FailureClass::ExecutionFailure;
}

}  // namespace gretel
