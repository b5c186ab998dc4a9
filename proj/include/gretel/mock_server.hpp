#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gretel/corpus.hpp"

namespace gretel {

// One injected behavior for a (tool, api) pair.
struct MockBehavior {
    int respond_status = 200;
    nlohmann::json body;         // template: {param} in string values substituted
    std::int64_t latency_ms = 0; // advertised via X-Injected-Latency-Ms header
    bool require_auth = false;
    bool validate_params = false;
    std::int64_t sleep_ms = 0;   // real delay, for timeout tests

    bool operator==(const MockBehavior&) const = default;
};

struct MockScenario {
    std::map<PairKey, MockBehavior> behaviors;

    static MockScenario from_file(const std::string& path);
    static MockScenario from_json(const nlohmann::json& doc, const std::string& origin);

    // Every behavior must reference an existing corpus pair.
    void validate(const Corpus& corpus) const;
};

struct MockRequestRecord {
    std::string method;
    std::string path;
    std::string tool_id;   // empty when the route was unknown
    std::string api_name;
    int status = 0;
};

// Embedded tool server for offline, failure-injected corpora. Routes come
// from the corpus endpoint templates of the pairs named in the scenario.
class MockServer {
public:
    MockServer(MockScenario scenario, const Corpus& corpus);
    ~MockServer();

    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    // Throws StageError if the port is taken. port=0 picks an ephemeral port.
    void start(int port);
    void stop();
    int port() const;
    std::string host_port() const;  // "127.0.0.1:<port>"

    std::vector<MockRequestRecord> request_log() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace gretel
