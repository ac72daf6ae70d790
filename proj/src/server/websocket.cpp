#include <deque>
#include <memory>
#include <mutex>
#include <set>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "livediag/server/transport.hpp"

namespace livediag::server {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kMaxMessageBytes = 64u << 20;

// Lets the coordinator thread post into the io_context only while it exists.
struct Gate {
    std::mutex mutex;
    bool open = true;
    std::set<ClientId> clients;
};

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, Server& server, std::shared_ptr<Gate> gate)
        : ws_(std::move(socket)), server_(server), gate_(std::move(gate)) {}

    void start() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.read_message_max(kMaxMessageBytes);
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
            if (!ec) {
                self->onOpen();
            }
        });
    }

private:
    void onOpen() {
        std::weak_ptr<Connection> weak = weak_from_this();
        auto executor = ws_.get_executor();
        auto gate = gate_;
        id_ = server_.connect([weak, executor, gate](const std::string& message) {
            std::lock_guard lock(gate->mutex);
            if (gate->open) {
                net::post(executor, [weak, message] {
                    if (auto self = weak.lock()) {
                        self->queue(message);
                    }
                });
            }
        });
        {
            std::lock_guard lock(gate_->mutex);
            gate_->clients.insert(id_);
        }
        open_ = true;
        read();
    }

    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->server_.receive(self->id_, std::move(text));
            self->read();
        });
    }

    void queue(const std::string& message) {
        if (!open_) {
            return;
        }
        outbox_.push_back(message);
        if (outbox_.size() == 1) {
            write();
        }
    }

    void write() {
        ws_.text(true);
        ws_.async_write(net::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            self->outbox_.pop_front();
            if (!self->outbox_.empty()) {
                self->write();
            }
        });
    }

    void close() {
        if (!open_) {
            return;
        }
        open_ = false;
        outbox_.clear();
        {
            std::lock_guard lock(gate_->mutex);
            gate_->clients.erase(id_);
        }
        server_.disconnect(id_);
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    Server& server_;
    std::shared_ptr<Gate> gate_;
    ClientId id_ = 0;
    bool open_ = false;
};

}  // namespace

struct WebSocketServer::Impl {
    Server& server;
    net::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::shared_ptr<Gate> gate = std::make_shared<Gate>();

    Impl(Server& s, const std::string& address, std::uint16_t port) : server(s) {
        tcp::endpoint endpoint(net::ip::make_address(address), port);
        acceptor.open(endpoint.protocol());
        acceptor.set_option(net::socket_base::reuse_address(true));
        acceptor.bind(endpoint);
        acceptor.listen(net::socket_base::max_listen_connections);
    }

    ~Impl() {
        std::set<ClientId> remaining;
        {
            std::lock_guard lock(gate->mutex);
            gate->open = false;
            remaining = gate->clients;
        }
        for (ClientId c : remaining) {
            server.disconnect(c);
        }
    }

    void accept() {
        acceptor.async_accept(ioc, [this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                return;
            }
            std::make_shared<Connection>(std::move(socket), server, gate)->start();
            accept();
        });
    }
};

WebSocketServer::WebSocketServer(Server& server, const std::string& address, std::uint16_t port)
    : impl_(std::make_unique<Impl>(server, address, port)) {}

WebSocketServer::~WebSocketServer() = default;

std::uint16_t WebSocketServer::port() const {
    return impl_->acceptor.local_endpoint().port();
}

void WebSocketServer::run(bool stopOnSignals) {
    net::signal_set signals(impl_->ioc);
    if (stopOnSignals) {
        signals.add(SIGINT);
        signals.add(SIGTERM);
        signals.async_wait([this](beast::error_code ec, int) {
            if (!ec) {
                impl_->ioc.stop();
            }
        });
    }
    impl_->accept();
    impl_->ioc.run();
}

void WebSocketServer::stop() {
    impl_->ioc.stop();
}

}  // namespace livediag::server
