#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gretel/corpus.hpp"
#include "gretel/evidence.hpp"

namespace gretel {

enum class ExecStatus { Success, Error, Empty };
enum class ErrorClass { Auth, ClientError, ServerError, Timeout, Connection, Schema };

const char* to_string(ExecStatus s);
const char* to_string(ErrorClass c);

struct ExecutionResult {
    ExecStatus status = ExecStatus::Error;
    std::optional<nlohmann::json> payload;
    std::optional<ErrorClass> error_class;
    std::optional<int> http_status;
    std::int64_t latency_ms = 0;
    bool truncated = false;
    std::string message;  // diagnostic for error outcomes
};

// Maps (http_status, body) to an ExecutionResult per the status table:
// 2xx + nonempty payload -> success; 2xx + empty object/array/string (or
// empty body) -> empty; 401/403 -> auth; other 4xx -> client_error; 5xx ->
// server_error; 3xx -> schema (redirects are never followed).
ExecutionResult map_http_outcome(int http_status, const std::string& body,
                                 std::size_t response_cap_bytes);

struct ExecutorOptions {
    std::vector<std::string> allowlist;        // "host" or "host:port" entries
    std::size_t response_cap_bytes = 65536;
    int default_timeout_ms = 10000;
    // When set ("host:port"), every dispatched request is sent to this
    // address instead of the endpoint's host. Lets fixtures use symbolic
    // hosts while an embedded mock server listens on an ephemeral port.
    std::optional<std::string> host_override;
    std::string bearer_env_prefix = "GRETEL_BEARER_";
};

struct DispatchRecord {
    std::string url;             // fully substituted logical URL
    std::string logical_host;
    std::string effective_host;  // after override
    bool allowed = false;
};

// Sandboxed HTTP dispatch: strict host allowlisting, per-call timeout,
// response-size cap, structured outcome capture. Reentrant.
class Executor {
public:
    explicit Executor(ExecutorOptions opts);

    // Builds the request from the call bindings per ParamSpec.location and
    // dispatches it. Never throws for network-level outcomes; every failure
    // mode is encoded in the ExecutionResult.
    ExecutionResult execute(const PlannedCall& call, const ApiSpec& api,
                            std::optional<int> timeout_ms = std::nullopt) const;

    std::vector<DispatchRecord> dispatch_log() const;
    const ExecutorOptions& options() const { return opts_; }

    static bool host_allowed(const std::string& host_port,
                             const std::vector<std::string>& allowlist);
    static std::string bearer_env_name(const std::string& prefix, const std::string& tool_id);

private:
    ExecutorOptions opts_;
    mutable std::mutex log_mu_;
    mutable std::vector<DispatchRecord> log_;
};

enum class FailureClass {
    ParameterMismatch,
    SemanticMismatch,
    ExecutionFailure,
    FunctionalSuccess,
};

const char* to_string(FailureClass c);

// Total, deterministic map from completed trials onto the four-way failure
// taxonomy. Simulated successes still count as execution failures here: the
// real call failed, and this classification audits real-world viability.
FailureClass classify(const EvidenceTuple& evidence);

}  // namespace gretel
