#include "smsroute/lexicon.hpp"
#include "smsroute/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace smsroute {

namespace detail {
extern const char* const kBuiltinLexicon;
}

namespace {

constexpr std::array<std::string_view, kSymptomCount> kSymptomNames = {
    "FEVER",    "HEADACHE", "MUSCLE_PAIN", "WEAKNESS",   "FATIGUE",
    "VOMITING", "DIARRHEA", "ABDOMINAL_PAIN", "HEMORRHAGE"};
constexpr std::array<std::string_view, kEpiFlagCount> kEpiNames = {"CONTACT", "FUNERAL", "TRAVEL"};
constexpr std::array<std::string_view, 3> kMarkerNames = {"LOCATION", "DAYS", "BEDS"};

// ASCII folding for U+00C0..U+00FF; "" means separator.
constexpr std::array<std::string_view, 64> kLatin1Fold = {
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "ss",
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "y"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

// Folds UTF-8 text to lowercase ASCII letters, digits, '.', '-' and spaces.
std::string fold_ascii(std::string_view body) {
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    const auto c = static_cast<unsigned char>(body[i]);
    if (c < 0x80) {
      if (std::isalnum(c)) {
        out += static_cast<char>(std::tolower(c));
      } else if (c == '.' || c == '-') {
        out += static_cast<char>(c);
      } else {
        out += ' ';
      }
      continue;
    }
    // Two-byte sequences: Latin-1 supplement and the oe ligature.
    if ((c & 0xE0) == 0xC0 && i + 1 < body.size() &&
        (static_cast<unsigned char>(body[i + 1]) & 0xC0) == 0x80) {
      const unsigned cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(body[i + 1]) & 0x3Fu);
      ++i;
      if (cp >= 0xC0 && cp <= 0xFF && !kLatin1Fold[cp - 0xC0].empty()) {
        out += kLatin1Fold[cp - 0xC0];
      } else if (cp == 0x152 || cp == 0x153) {
        out += "oe";
      } else {
        out += ' ';
      }
      continue;
    }
    // Other non-ASCII bytes (continuations, longer sequences) separate tokens.
    out += ' ';
  }
  return out;
}

}  // namespace

std::string_view to_string(Symptom s) { return kSymptomNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(EpiFlag f) { return kEpiNames[static_cast<std::size_t>(f)]; }
std::string_view to_string(Marker m) { return kMarkerNames[static_cast<std::size_t>(m)]; }

std::string target_name(const LexiconTarget& t) {
  return std::visit([](auto v) { return std::string(to_string(v)); }, t);
}

std::optional<LexiconTarget> parse_target(std::string_view name) {
  for (std::size_t i = 0; i < kSymptomNames.size(); ++i)
    if (kSymptomNames[i] == name) return static_cast<Symptom>(i);
  for (std::size_t i = 0; i < kEpiNames.size(); ++i)
    if (kEpiNames[i] == name) return static_cast<EpiFlag>(i);
  for (std::size_t i = 0; i < kMarkerNames.size(); ++i)
    if (kMarkerNames[i] == name) return static_cast<Marker>(i);
  return std::nullopt;
}

bool is_integer_token(std::string_view t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool is_number_token(std::string_view t) {
  if (!t.empty() && t.front() == '-') t.remove_prefix(1);
  const auto dot = t.find('.');
  if (dot == std::string_view::npos) return is_integer_token(t);
  return is_integer_token(t.substr(0, dot)) && is_integer_token(t.substr(dot + 1));
}

bool is_alpha_token(std::string_view t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isalpha(c); });
}

std::vector<std::string> normalize(std::string_view body) {
  const std::string folded = fold_ascii(body);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = folded.size();
  auto alnum = [&](std::size_t k) { return k < n && std::isalnum(static_cast<unsigned char>(folded[k])); };
  auto digit = [&](std::size_t k) { return k < n && std::isdigit(static_cast<unsigned char>(folded[k])); };
  while (i < n) {
    // Numeric literal: optional sign, digits, optional fraction, not glued to letters.
    const bool starts_word = i == 0 || !alnum(i - 1);
    if (starts_word && (digit(i) || (folded[i] == '-' && digit(i + 1)))) {
      std::size_t j = i + (folded[i] == '-' ? 1 : 0);
      while (digit(j)) ++j;
      if (j < n && folded[j] == '.' && digit(j + 1)) {
        ++j;
        while (digit(j)) ++j;
      }
      if (!alnum(j)) {
        tokens.emplace_back(folded.substr(i, j - i));
        i = j;
        continue;
      }
    }
    if (alnum(i)) {
      std::size_t j = i;
      while (alnum(j)) ++j;
      tokens.emplace_back(folded.substr(i, j - i));
      i = j;
      continue;
    }
    ++i;
  }
  return tokens;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::optional<std::size_t> levenshtein_within(std::string_view a, std::string_view b,
                                              std::size_t bound) {
  const std::size_t gap = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
  if (gap > bound) return std::nullopt;
  std::array<std::size_t, 64> small{};
  std::vector<std::size_t> big;
  std::size_t* row = small.data();
  if (b.size() + 1 > small.size()) {
    big.resize(b.size() + 1);
    row = big.data();
  }
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    std::size_t row_min = row[0];
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
      diag = up;
      row_min = std::min(row_min, row[j]);
    }
    if (row_min > bound) return std::nullopt;
  }
  if (row[b.size()] > bound) return std::nullopt;
  return row[b.size()];
}

void Lexicon::add(Entry entry, std::size_t line) {
  if (entry.tokens.empty() || entry.tokens.size() > 3)
    throw LexiconError("line " + std::to_string(line) + ": phrase must have 1-3 tokens");
  const std::string key = join(entry.tokens);
  if (!exact_.emplace(key, entry.target).second)
    throw LexiconError("line " + std::to_string(line) + ": duplicate phrase '" + key + "'");
  max_tokens_ = std::max(max_tokens_, entry.tokens.size());
  entries_.push_back(std::move(entry));
}

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto arrow = line.find("->");
    if (arrow == std::string::npos)
      throw LexiconError("line " + std::to_string(line_no) + ": expected 'phrase -> TARGET'");
    const auto target = parse_target(trim(line.substr(arrow + 2)));
    if (!target)
      throw LexiconError("line " + std::to_string(line_no) + ": unknown target");
    auto tokens = normalize(line.substr(0, arrow));
    for (const auto& t : tokens) {
      if (!is_alpha_token(t))
        throw LexiconError("line " + std::to_string(line_no) + ": phrase tokens must be alphabetic");
    }
    lex.add(Entry{std::move(tokens), *target}, line_no);
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = parse(detail::kBuiltinLexicon);
  return lex;
}

std::optional<LexiconTarget> Lexicon::exact(std::string_view phrase) const {
  if (const auto it = exact_.find(std::string(phrase)); it != exact_.end()) return it->second;
  return std::nullopt;
}

std::optional<LexiconTarget> Lexicon::match_token(std::string_view token) const {
  if (auto hit = exact(token)) return hit;
  const std::size_t tol = edit_tolerance(token.size());
  if (tol == 0) return std::nullopt;
  std::size_t best = tol + 1;
  std::optional<LexiconTarget> best_target;
  bool ambiguous = false;
  for (const auto& e : entries_) {
    if (e.tokens.size() != 1) continue;
    const auto d = levenshtein_within(token, e.tokens.front(), std::min(best, tol));
    if (!d) continue;
    if (*d < best) {
      best = *d;
      best_target = e.target;
      ambiguous = false;
    } else if (*d == best && best_target != e.target) {
      ambiguous = true;
    }
  }
  if (ambiguous) return std::nullopt;
  return best_target;
}

std::optional<LexiconTarget> Lexicon::match_phrase(std::span<const std::string> tokens) const {
  if (tokens.size() == 1) return match_token(tokens.front());
  if (auto hit = exact(join(tokens))) return hit;
  std::size_t best = static_cast<std::size_t>(-1);
  std::optional<LexiconTarget> best_target;
  bool ambiguous = false;
  for (const auto& e : entries_) {
    if (e.tokens.size() != tokens.size()) continue;
    std::size_t total = 0;
    bool ok = true;
    for (std::size_t i = 0; i < tokens.size() && ok; ++i) {
      const auto d = levenshtein_within(tokens[i], e.tokens[i], edit_tolerance(tokens[i].size()));
      if (!d) ok = false;
      else total += *d;
    }
    if (!ok) continue;
    // A constituent that is itself an exact hit for another target keeps its own meaning.
    for (const auto& t : tokens) {
      if (auto own = exact(t); own && *own != e.target) ok = false;
    }
    if (!ok) continue;
    if (total < best) {
      best = total;
      best_target = e.target;
      ambiguous = false;
    } else if (total == best && best_target != e.target) {
      ambiguous = true;
    }
  }
  if (ambiguous) return std::nullopt;
  return best_target;
}

std::vector<LexiconHit> scan(std::span<const std::string> tokens, const Lexicon& lexicon) {
  std::vector<LexiconHit> hits;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool matched = false;
    const std::size_t longest = std::min(lexicon.max_phrase_tokens(), tokens.size() - i);
    for (std::size_t len = longest; len >= 1 && !matched; --len) {
      const auto window = tokens.subspan(i, len);
      if (std::any_of(window.begin(), window.end(), [](const std::string& t) { return !is_alpha_token(t); }))
        continue;
      if (auto target = lexicon.match_phrase(window)) {
        hits.push_back(LexiconHit{i, len, *target});
        i += len;
        matched = true;
      }
    }
    if (!matched) ++i;
  }
  return hits;
}

}  // namespace smsroute
