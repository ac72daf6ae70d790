#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>

#include "livediag/server/server.hpp"

namespace livediag::server {

/// Serves one client over newline-delimited JSON until `in` reaches EOF,
/// then waits for outstanding work. Each message is one line.
void serveStdio(Server& server, std::istream& in, std::ostream& out);

/// Websocket endpoint: each connection is one client, each text frame one
/// message.
class WebSocketServer {
public:
    /// Binds immediately; port 0 picks a free port.
    WebSocketServer(Server& server, const std::string& address, std::uint16_t port);
    ~WebSocketServer();

    WebSocketServer(const WebSocketServer&) = delete;
    WebSocketServer& operator=(const WebSocketServer&) = delete;

    std::uint16_t port() const;
    /// Accepts and serves connections on the calling thread until stop(),
    /// or SIGINT/SIGTERM when `stopOnSignals` is set.
    void run(bool stopOnSignals = false);
    /// Thread-safe; makes run() return.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace livediag::server
