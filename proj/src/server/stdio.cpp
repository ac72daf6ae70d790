#include <istream>
#include <mutex>
#include <ostream>
#include <string>

#include "livediag/server/transport.hpp"

namespace livediag::server {

void serveStdio(Server& server, std::istream& in, std::ostream& out) {
    auto outMutex = std::make_shared<std::mutex>();
    ClientId client = server.connect([&out, outMutex](const std::string& message) {
        std::lock_guard lock(*outMutex);
        out << message << '\n';
        out.flush();
    });
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        server.receive(client, std::move(line));
        line.clear();
    }
    server.waitIdle();
    server.disconnect(client);
    server.waitIdle();
}

}  // namespace livediag::server
