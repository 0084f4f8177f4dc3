#include <atomic>
#include <thread>

#include <boost/asio.hpp>

#include "doctest.h"
#include "smsroute/server.hpp"
#include "support.hpp"

using namespace smsroute;
namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

// Runs a server on a background thread for the lifetime of the fixture.
struct Running {
  LineServer server;
  std::thread thread;

  explicit Running(FrameHandler h) : server(std::move(h), "127.0.0.1", 0), thread([this] { server.run(); }) {}
  ~Running() {
    server.stop();
    thread.join();
  }
};

struct Client {
  asio::io_context io;
  tcp::socket socket{io};
  asio::streambuf buf;

  explicit Client(std::uint16_t port) { socket.connect({asio::ip::make_address("127.0.0.1"), port}); }
  void send(const std::string& line) { asio::write(socket, asio::buffer(line + "\n")); }
  std::string line() {
    asio::read_until(socket, buf, '\n');
    std::istream in(&buf);
    std::string s;
    std::getline(in, s);
    return s;
  }
};

// Replies "OK <seq>" to the sender and alerts +231770000001 on "ALERT".
std::vector<OutboundMessage> echo(const InboundFrame& f) {
  std::vector<OutboundMessage> out{{f.msisdn, "OK " + std::to_string(f.seq), f.seq}};
  if (f.body == "ALERT") out.push_back({"+231770000001", "ALERT FOR YOU", std::nullopt});
  return out;
}

std::string in_line(const std::string& msisdn, const std::string& body) {
  return "IN|" + msisdn + "|-|2014-10-20T08:00:00Z|" + body;
}

}  // namespace

TEST_CASE("endpoint parsing") {
  CHECK(parse_endpoint("127.0.0.1:7070") == std::pair<std::string, std::uint16_t>{"127.0.0.1", 7070});
  CHECK(parse_endpoint(":0") == std::pair<std::string, std::uint16_t>{"", 0});
  CHECK_THROWS_AS(parse_endpoint("localhost"), std::invalid_argument);
  CHECK_THROWS_AS(parse_endpoint("h:70000"), std::invalid_argument);
  CHECK_THROWS_AS(parse_endpoint("h:7x"), std::invalid_argument);
}

TEST_CASE("bind failure is reported") {
  Running a(echo);
  CHECK_THROWS_AS(LineServer(echo, "127.0.0.1", a.server.port()), BindFailure);
  CHECK_THROWS_AS(LineServer(echo, "not-an-address", 0), BindFailure);
}

TEST_CASE("ping, frames and malformed lines") {
  Running r(echo);
  Client c(r.server.port());
  c.send("PING");
  CHECK(c.line() == "PONG");
  c.send("IN|garbage");
  c.send("IN|+231880000001|-|not-a-time|fever");
  c.send(in_line("+231880000001", "fever"));
  CHECK(c.line() == "OUT|+231880000001|OK 1");
  c.send(in_line("+231880000001", "fever") + "\r");
  CHECK(c.line() == "OUT|+231880000001|OK 2");
  c.send(std::string(5000, 'x'));
  c.send("PING");
  CHECK(c.line() == "PONG");
}

TEST_CASE("alerts go to subscribers") {
  Running r(echo);
  Client patient(r.server.port()), facility(r.server.port());
  facility.send("SUB|+231770000001");
  facility.send("PING");
  REQUIRE(facility.line() == "PONG");  // subscription is in place
  patient.send(in_line("+231880000001", "ALERT"));
  CHECK(patient.line() == "OUT|+231880000001|OK 1");
  CHECK(facility.line() == "OUT|+231770000001|ALERT FOR YOU");
}

TEST_CASE("frames from many connections are handled one at a time") {
  std::atomic<int> inside{0};
  std::atomic<bool> overlapped{false};
  std::vector<std::uint64_t> seen;
  auto handler = [&](const InboundFrame& f) {
    if (inside.fetch_add(1) != 0) overlapped = true;
    seen.push_back(f.seq);
    std::this_thread::sleep_for(std::chrono::microseconds(50));
    inside.fetch_sub(1);
    return echo(f);
  };
  Running r(handler);
  constexpr int kPerClient = 200;
  auto blast = [&](const std::string& msisdn, std::vector<std::string>& got) {
    Client c(r.server.port());
    for (int i = 0; i < kPerClient; ++i) c.send(in_line(msisdn, "fever"));
    for (int i = 0; i < kPerClient; ++i) got.push_back(c.line());
  };
  std::vector<std::string> a, b;
  std::thread ta([&] { blast("+231880000001", a); });
  std::thread tb([&] { blast("+231880000002", b); });
  ta.join();
  tb.join();
  CHECK_FALSE(overlapped);
  CHECK(a.size() == kPerClient);
  CHECK(b.size() == kPerClient);
  for (const auto& l : a) CHECK(l.rfind("OUT|+231880000001|OK ", 0) == 0);
  REQUIRE(seen.size() == 2 * kPerClient);
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i + 1);
  CHECK(r.server.frames_seen() == 2 * kPerClient);
}
