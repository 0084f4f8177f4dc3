#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace smsroute {

enum class Symptom : std::uint8_t {
  Fever,
  Headache,
  MusclePain,
  Weakness,
  Fatigue,
  Vomiting,
  Diarrhea,
  AbdominalPain,
  Hemorrhage,
};
inline constexpr std::size_t kSymptomCount = 9;

enum class EpiFlag : std::uint8_t { Contact, Funeral, Travel };
inline constexpr std::size_t kEpiFlagCount = 3;

/// Non-clinical lexicon hits: place markers and number contexts.
enum class Marker : std::uint8_t { Location, Days, Beds };

using LexiconTarget = std::variant<Symptom, EpiFlag, Marker>;

std::string_view to_string(Symptom s);
std::string_view to_string(EpiFlag f);
std::string_view to_string(Marker m);
std::string target_name(const LexiconTarget& t);
std::optional<LexiconTarget> parse_target(std::string_view name);

/// Small closed-enum set backed by a bitset.
template <typename E, std::size_t N>
class EnumSet {
 public:
  EnumSet() = default;
  EnumSet(std::initializer_list<E> items) {
    for (E e : items) insert(e);
  }

  void insert(E e) { bits_.set(static_cast<std::size_t>(e)); }
  void erase(E e) { bits_.reset(static_cast<std::size_t>(e)); }
  bool contains(E e) const { return bits_.test(static_cast<std::size_t>(e)); }
  std::size_t size() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }
  std::uint32_t mask() const { return static_cast<std::uint32_t>(bits_.to_ulong()); }
  static EnumSet from_mask(std::uint32_t m) {
    EnumSet s;
    s.bits_ = std::bitset<N>(m);
    return s;
  }

  std::vector<E> items() const {
    std::vector<E> out;
    for (std::size_t i = 0; i < N; ++i)
      if (bits_.test(i)) out.push_back(static_cast<E>(i));
    return out;
  }

  bool operator==(const EnumSet&) const = default;

 private:
  std::bitset<N> bits_;
};

using SymptomSet = EnumSet<Symptom, kSymptomCount>;
using EpiFlagSet = EnumSet<EpiFlag, kEpiFlagCount>;

/// Lowercases, folds Latin-1 accents to ASCII, turns punctuation into
/// separators and splits. Numeric literals (`12`, `9.5`, `-13.7`) survive as
/// single tokens.
std::vector<std::string> normalize(std::string_view body);

bool is_integer_token(std::string_view token);
bool is_number_token(std::string_view token);
bool is_alpha_token(std::string_view token);

/// Levenshtein distance with unit costs.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Distance if it is at most `bound`, otherwise nullopt. Exits early.
std::optional<std::size_t> levenshtein_within(std::string_view a, std::string_view b,
                                              std::size_t bound);

/// Typo tolerance for a token of the given length: 0 (<=3), 1 (4-5), 2 (>=6).
constexpr std::size_t edit_tolerance(std::size_t length) {
  return length <= 3 ? 0 : (length <= 5 ? 1 : 2);
}

class LexiconError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Lexicon {
 public:
  struct Entry {
    std::vector<std::string> tokens;
    LexiconTarget target;
  };

  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& path);
  /// The built-in English lexicon (identical to data/lexicon.txt).
  static const Lexicon& builtin();

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t max_phrase_tokens() const { return max_tokens_; }

  /// Exact hit, else the unique nearest target within edit_tolerance.
  /// Candidates at the same minimal distance that disagree on target are
  /// ambiguous and yield no match.
  std::optional<LexiconTarget> match_token(std::string_view token) const;

  /// Matches exactly `tokens.size()` tokens against phrases of that length.
  /// Each token is compared with its own tolerance.
  std::optional<LexiconTarget> match_phrase(std::span<const std::string> tokens) const;

  std::optional<LexiconTarget> exact(std::string_view phrase) const;

 private:
  void add(Entry entry, std::size_t line);

  std::vector<Entry> entries_;
  std::unordered_map<std::string, LexiconTarget> exact_;
  std::size_t max_tokens_ = 1;
};

/// One lexicon hit from a greedy longest-first scan over a token stream.
struct LexiconHit {
  std::size_t start = 0;
  std::size_t length = 0;
  LexiconTarget target;
};
std::vector<LexiconHit> scan(std::span<const std::string> tokens, const Lexicon& lexicon);

}  // namespace smsroute
