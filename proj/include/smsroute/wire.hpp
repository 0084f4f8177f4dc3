#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smsroute/time.hpp"

namespace smsroute {

struct InboundFrame {
  std::string msisdn;
  std::optional<std::string> tower_id;
  Timestamp received_at;
  std::string body;
  std::uint64_t seq = 0;

  bool operator==(const InboundFrame&) const = default;
};

struct OutboundMessage {
  std::string msisdn;
  std::string body;
  /// Seq of the triggering frame; empty for facility alerts.
  std::optional<std::uint64_t> in_reply_to;

  bool operator==(const OutboundMessage&) const = default;
};

class MalformedFrame : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidReply : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr std::size_t kMaxReplyLength = 160;
inline constexpr std::size_t kMaxBodyLength = 480;

bool is_valid_msisdn(std::string_view s);

/// True for the GSM-7 basic-set subset replies are restricted to:
/// A-Z, 0-9, space and `. , : ( ) - + ?`.
bool is_reply_char(char c);
bool is_reply_text(std::string_view s);

/// Decodes `IN|<msisdn>|<tower or ->|<ISO8601-UTC>|<body>`. Trailing CR/LF
/// is ignored. Throws MalformedFrame.
InboundFrame decode_frame(std::string_view line);

/// Inverse of decode_frame (without the seq), newline-terminated.
std::string encode_frame(const InboundFrame& frame);

/// `OUT|<msisdn>|<body>\n`. Throws InvalidReply when the body breaks the
/// length or character-set rules.
std::string encode_reply(const OutboundMessage& msg);

/// Parses an `OUT|...` line back into a message (in_reply_to is not on the wire).
std::optional<OutboundMessage> decode_reply(std::string_view line);

/// Core entry point: receives one frame, returns every reply it produced.
using FrameHandler = std::function<std::vector<OutboundMessage>(const InboundFrame&)>;

struct ReplaySummary {
  std::size_t frames_in = 0;
  std::size_t replies_out = 0;
  std::size_t dropped = 0;

  bool operator==(const ReplaySummary&) const = default;
};

/// Output file written next to a replay input: `<input>.out`.
std::filesystem::path replay_output_path(const std::filesystem::path& input);

/// Feeds each `IN|` line of `input` to `core` in file order and writes every
/// reply to `output` (defaults to replay_output_path(input)).
ReplaySummary replay_file(const std::filesystem::path& input, const FrameHandler& core,
                          std::optional<std::filesystem::path> output = std::nullopt);

}  // namespace smsroute
