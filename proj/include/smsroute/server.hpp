#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>

#include <boost/asio.hpp>

#include "smsroute/wire.hpp"

namespace smsroute {

class BindFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Line server for the IN|/OUT| protocol. Everything runs on one io_context
/// thread, so frames reach the handler strictly one at a time, in arrival
/// order.
class LineServer {
 public:
  /// Binds immediately; port 0 picks a free port.
  LineServer(FrameHandler handler, const std::string& host, std::uint16_t port);
  ~LineServer();
  LineServer(const LineServer&) = delete;
  LineServer& operator=(const LineServer&) = delete;

  std::uint16_t port() const { return port_; }
  std::uint64_t frames_seen() const { return seq_; }

  /// Serves until stop() is called.
  void run();
  /// Safe to call from any thread.
  void stop();
  /// Stops on SIGINT/SIGTERM.
  void stop_on_signals();

  class Session;

 private:
  friend class Session;
  void accept();
  void on_line(const std::shared_ptr<Session>& from, const std::string& line);
  void drop(Session* s);

  FrameHandler handler_;
  boost::asio::io_context io_;
  boost::asio::ip::tcp::acceptor acceptor_;
  std::unique_ptr<boost::asio::signal_set> signals_;
  std::uint16_t port_ = 0;
  std::uint64_t seq_ = 0;
  std::set<std::shared_ptr<Session>> sessions_;
  std::multimap<std::string, std::weak_ptr<Session>> subscribers_;
};

/// "host:port" or ":port".
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

}  // namespace smsroute
