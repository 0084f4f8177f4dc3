#include "smsroute/server.hpp"

#include <deque>
#include <iostream>

namespace smsroute {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {
constexpr std::size_t kMaxLine = 4096;
}

class LineServer::Session : public std::enable_shared_from_this<Session> {
 public:
  Session(LineServer& server, tcp::socket socket) : server_(server), socket_(std::move(socket)) {}

  void start() { read(); }

  void send(std::string line) {
    const bool idle = outbox_.empty();
    outbox_.push_back(std::move(line));
    if (idle) write();
  }

  void close() {
    boost::system::error_code ignored;
    socket_.shutdown(tcp::socket::shutdown_both, ignored);
    socket_.close(ignored);
  }

 private:
  void read() {
    asio::async_read_until(socket_, asio::dynamic_buffer(buffer_, kMaxLine), '\n',
                           [self = shared_from_this()](boost::system::error_code ec, std::size_t n) {
                             self->on_read(ec, n);
                           });
  }

  void on_read(boost::system::error_code ec, std::size_t n) {
    if (ec == asio::error::not_found) {
      std::clog << "gateway: oversized line dropped\n";
      buffer_.clear();
      read();
      return;
    }
    if (ec) {
      server_.drop(this);
      return;
    }
    std::string line = buffer_.substr(0, n);
    buffer_.erase(0, n);
    server_.on_line(shared_from_this(), line);
    read();
  }

  void write() {
    asio::async_write(socket_, asio::buffer(outbox_.front()),
                      [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                        if (ec) {
                          self->server_.drop(self.get());
                          return;
                        }
                        self->outbox_.pop_front();
                        if (!self->outbox_.empty()) self->write();
                      });
  }

  LineServer& server_;
  tcp::socket socket_;
  std::string buffer_;
  std::deque<std::string> outbox_;
};

LineServer::LineServer(FrameHandler handler, const std::string& host, std::uint16_t port)
    : handler_(std::move(handler)), acceptor_(io_) {
  try {
    const tcp::endpoint ep(asio::ip::make_address(host.empty() ? "0.0.0.0" : host), port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    throw BindFailure("cannot bind " + host + ":" + std::to_string(port) + ": " + e.what());
  }
  accept();
}

LineServer::~LineServer() = default;

void LineServer::run() { io_.run(); }

void LineServer::stop() {
  asio::post(io_, [this] {
    boost::system::error_code ignored;
    acceptor_.close(ignored);
    for (const auto& s : sessions_) s->close();
    sessions_.clear();
    io_.stop();
  });
}

void LineServer::stop_on_signals() {
  signals_ = std::make_unique<asio::signal_set>(io_, SIGINT, SIGTERM);
  signals_->async_wait([this](boost::system::error_code ec, int) {
    if (!ec) stop();
  });
}

void LineServer::accept() {
  acceptor_.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec != asio::error::operation_aborted) std::clog << "gateway: accept failed: " << ec.message() << '\n';
      if (acceptor_.is_open()) accept();
      return;
    }
    auto s = std::make_shared<Session>(*this, std::move(socket));
    sessions_.insert(s);
    s->start();
    accept();
  });
}

void LineServer::drop(Session* s) {
  for (auto it = sessions_.begin(); it != sessions_.end(); ++it) {
    if (it->get() == s) {
      (*it)->close();
      sessions_.erase(it);
      break;
    }
  }
}

void LineServer::on_line(const std::shared_ptr<Session>& from, const std::string& raw) {
  std::string line = raw;
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
  if (line.empty()) return;
  if (line == "PING") {
    from->send("PONG\n");
    return;
  }
  if (line.rfind("SUB|", 0) == 0) {
    const std::string msisdn = line.substr(4);
    if (is_valid_msisdn(msisdn)) {
      subscribers_.emplace(msisdn, from);
    } else {
      std::clog << "gateway: bad subscription dropped\n";
    }
    return;
  }

  InboundFrame frame;
  try {
    frame = decode_frame(line);
  } catch (const MalformedFrame& e) {
    std::clog << "gateway: malformed frame dropped: " << e.what() << '\n';
    return;
  }
  frame.seq = ++seq_;
  for (const auto& reply : handler_(frame)) {
    const std::string out = encode_reply(reply);
    if (reply.in_reply_to) {
      from->send(out);
      continue;
    }
    auto [lo, hi] = subscribers_.equal_range(reply.msisdn);
    for (auto it = lo; it != hi;) {
      if (auto s = it->second.lock(); s && sessions_.count(s)) {
        s->send(out);
        ++it;
      } else {
        it = subscribers_.erase(it);
      }
    }
  }
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("endpoint must be host:port");
  const std::string port = endpoint.substr(colon + 1);
  std::size_t used = 0;
  unsigned long p = 0;
  try {
    p = std::stoul(port, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad port in endpoint " + endpoint);
  }
  if (used != port.size() || p > 65535) throw std::invalid_argument("bad port in endpoint " + endpoint);
  return {endpoint.substr(0, colon), static_cast<std::uint16_t>(p)};
}

}  // namespace smsroute
