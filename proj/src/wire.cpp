#include "smsroute/wire.hpp"
#include "smsroute/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>

namespace smsroute {

namespace {

std::string_view strip_eol(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  return line;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

bool is_valid_msisdn(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.size() < 7 || s.size() > 15) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool is_reply_char(char c) {
  if ((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) return true;
  switch (c) {
    case ' ': case '.': case ',': case ':': case '(': case ')': case '-': case '+': case '?':
      return true;
    default:
      return false;
  }
}

bool is_reply_text(std::string_view s) {
  return s.size() <= kMaxReplyLength && std::all_of(s.begin(), s.end(), is_reply_char);
}

InboundFrame decode_frame(std::string_view line) {
  line = strip_eol(line);
  const auto fields = split(line, '|');
  if (fields.size() != 5 || fields[0] != "IN") {
    throw MalformedFrame("expected 5 fields starting with IN, got " + std::to_string(fields.size()));
  }
  InboundFrame frame;
  if (!is_valid_msisdn(fields[1])) throw MalformedFrame("bad msisdn");
  frame.msisdn = std::string(fields[1]);
  if (fields[2].empty()) throw MalformedFrame("empty tower field");
  if (fields[2] != "-") frame.tower_id = std::string(fields[2]);
  const auto ts = parse_iso8601(fields[3]);
  if (!ts) throw MalformedFrame("unparseable timestamp");
  frame.received_at = *ts;
  if (blank(fields[4])) throw MalformedFrame("empty body");
  if (fields[4].size() > kMaxBodyLength) throw MalformedFrame("body too long");
  frame.body = std::string(fields[4]);
  return frame;
}

std::string encode_frame(const InboundFrame& frame) {
  std::string out = "IN|" + frame.msisdn + "|" + frame.tower_id.value_or("-") + "|" +
                    format_iso8601(frame.received_at) + "|" + frame.body + "\n";
  return out;
}

std::string encode_reply(const OutboundMessage& msg) {
  if (msg.body.empty()) throw InvalidReply("reply is empty");
  if (msg.body.size() > kMaxReplyLength) throw InvalidReply("reply exceeds 160 characters");
  if (!is_reply_text(msg.body)) throw InvalidReply("reply leaves the GSM-7 subset");
  if (!is_valid_msisdn(msg.msisdn)) throw InvalidReply("bad reply msisdn");
  return "OUT|" + msg.msisdn + "|" + msg.body + "\n";
}

std::optional<OutboundMessage> decode_reply(std::string_view line) {
  line = strip_eol(line);
  const auto fields = split(line, '|');
  if (fields.size() != 3 || fields[0] != "OUT" || !is_valid_msisdn(fields[1]) ||
      !is_reply_text(fields[2])) {
    return std::nullopt;
  }
  return OutboundMessage{std::string(fields[1]), std::string(fields[2]), std::nullopt};
}

std::filesystem::path replay_output_path(const std::filesystem::path& input) {
  auto out = input;
  out += ".out";
  return out;
}

ReplaySummary replay_file(const std::filesystem::path& input, const FrameHandler& core,
                          std::optional<std::filesystem::path> output) {
  std::ifstream in(input);
  if (!in) throw FileNotFound(input.string());
  const auto out_path = output.value_or(replay_output_path(input));
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + out_path.string());

  ReplaySummary summary;
  std::uint64_t seq = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    InboundFrame frame;
    try {
      frame = decode_frame(line);
    } catch (const MalformedFrame& e) {
      ++summary.dropped;
      std::clog << "replay: dropped line: " << e.what() << '\n';
      continue;
    }
    frame.seq = ++seq;
    ++summary.frames_in;
    for (const auto& reply : core(frame)) {
      out << encode_reply(reply);
      ++summary.replies_out;
    }
  }
  return summary;
}

}  // namespace smsroute
