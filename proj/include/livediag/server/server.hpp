#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "livediag/pipeline.hpp"

namespace livediag::server {

using ClientId = std::uint64_t;

/// Receives one serialized JSON message. Called from the coordinator thread.
using SendFn = std::function<void(const std::string&)>;

struct ServerOptions {
    /// Execution threads; 0 picks the host parallelism.
    std::size_t workers = 0;
    PipelineOptions pipeline;
    /// Runs on the worker right before each full execution (testing hook for
    /// slowing executions down).
    std::function<void(const std::string& uri, std::int64_t version)> beforeExecution;
};

struct SchedulerStats {
    std::uint64_t executionsStarted = 0;
    std::uint64_t executionsCompleted = 0;
    /// Largest number of executions ever running at once for one document.
    std::uint64_t maxInFlightPerDocument = 0;
    /// Executions that would have exceeded one in flight for a document.
    std::uint64_t schedulerViolations = 0;
};

/// Document store and scheduler behind the JSON protocol. All protocol state
/// lives on a single coordinator thread; full executions run on a worker pool
/// and report back to the coordinator, so requests are answered while
/// executions run. Thread-safe entry points.
class Server {
public:
    explicit Server(ServerOptions options = {});
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    ClientId connect(SendFn send);
    /// Drops the client's subscriptions and ends interactions it started.
    void disconnect(ClientId client);
    /// Queues one raw message from `client`.
    void receive(ClientId client, std::string message);

    /// Blocks until no message is queued and no execution is running.
    void waitIdle();
    SchedulerStats stats() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace livediag::server
