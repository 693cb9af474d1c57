#include "aucap/text_corpus.hpp"

#include <fstream>
#include <sstream>

#include "aucap/error.hpp"

namespace aucap::text {
namespace {

// Decodes one UTF-8 sequence starting at s[i]; invalid bytes decode as
// themselves so that no input is lost.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = (b0 & 0xE0) == 0xC0 ? 2 : (b0 & 0xF0) == 0xE0 ? 3 : (b0 & 0xF8) == 0xF0 ? 4 : 0;
  char32_t cp = len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
  for (int k = 1; k < len; ++k) {
    const int c = cont(static_cast<std::size_t>(k));
    if (c < 0) {
      len = 0;
      break;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  if (len == 0) {
    ++i;
    return b0;
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Unicode P* categories for the Latin, General Punctuation, CJK and
// fullwidth blocks, plus all ASCII symbols so that '<' and '>' can never
// forge a boundary token.
bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
    case 0x37E: case 0x387: case 0x55A: case 0x55B: case 0x55C: case 0x55D:
    case 0x55E: case 0x55F: case 0x589: case 0x5BE:
      return true;
    default:
      break;
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x2E00 && c <= 0x2E4F) || (c >= 0x3001 && c <= 0x3003) ||
         (c >= 0x3008 && c <= 0x3011) || (c >= 0x3014 && c <= 0x301F) ||
         (c >= 0xFE10 && c <= 0xFE19) || (c >= 0xFE30 && c <= 0xFE4F) ||
         (c >= 0xFF01 && c <= 0xFF0F && c != 0xFF04 && c != 0xFF0B) ||
         (c >= 0xFF1A && c <= 0xFF20 && c != 0xFF1C && c != 0xFF1D && c != 0xFF1E) ||
         (c >= 0xFF3B && c <= 0xFF3F) || c == 0xFF5B || c == 0xFF5D || (c >= 0xFF5F && c <= 0xFF65);
}

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' ||
         c == 0xA0 || c == 0x3000 || (c >= 0x2000 && c <= 0x200A);
}

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if ((c >= 0xC0 && c <= 0xDE && c != 0xD7)) return c + 32;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  return c;
}

bool is_digit(char32_t c) { return (c >= '0' && c <= '9') || (c >= 0xFF10 && c <= 0xFF19); }

}  // namespace

bool is_special(std::string_view token) noexcept {
  return token == kPad || token == kSos || token == kEos || token == kUnk;
}

std::vector<std::string> TokenizedCaption::words() const {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (t != kSos && t != kEos && t != kPad) out.push_back(t);
  }
  return out;
}

std::string TokenizedCaption::join_words() const {
  std::string out;
  for (const auto& w : words()) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

TokenizedCaption wrap_words(std::vector<std::string> words) {
  TokenizedCaption c;
  c.tokens.reserve(words.size() + 2);
  c.tokens.emplace_back(kSos);
  for (auto& w : words) c.tokens.push_back(std::move(w));
  c.tokens.emplace_back(kEos);
  return c;
}

TokenizedCaption clean_caption(std::string_view raw) {
  std::vector<std::string> words;
  std::string current;
  std::size_t current_len = 0;
  bool current_has_digit = false;
  auto flush = [&] {
    if (current_len > 1 && !current_has_digit) words.push_back(current);
    current.clear();
    current_len = 0;
    current_has_digit = false;
  };
  std::size_t i = 0;
  while (i < raw.size()) {
    const char32_t cp = to_lower(next_code_point(raw, i));
    if (is_space(cp)) {
      flush();
    } else if (!is_punctuation(cp)) {
      append_utf8(current, cp);
      ++current_len;
      current_has_digit = current_has_digit || is_digit(cp);
    }
  }
  flush();
  if (words.empty()) {
    throw Error(Errc::empty_input, "caption empty after cleaning: '" + std::string(raw) + "'");
  }
  return wrap_words(std::move(words));
}

Vocabulary::Vocabulary() {
  for (auto t : {kPad, kSos, kEos, kUnk}) add(std::string(t));
}

void Vocabulary::add(std::string word) {
  if (index_.contains(word)) return;
  index_.emplace(word, static_cast<std::int32_t>(words_.size()));
  words_.push_back(std::move(word));
}

Vocabulary Vocabulary::build(std::span<const TokenizedCaption> captions) {
  Vocabulary v;
  for (const auto& c : captions) {
    for (const auto& t : c.tokens) v.add(t);
  }
  return v;
}

bool Vocabulary::contains(std::string_view word) const {
  return index_.contains(std::string(word));
}

std::int32_t Vocabulary::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::word(std::int32_t index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= words_.size()) {
    throw Error(Errc::invalid_argument, "vocabulary index " + std::to_string(index) +
                                            " out of range [0, " + std::to_string(words_.size()) +
                                            ")");
  }
  return words_[static_cast<std::size_t>(index)];
}

std::vector<std::int32_t> Vocabulary::encode(const TokenizedCaption& caption) const {
  return encode(caption.tokens);
}

std::vector<std::int32_t> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<std::int32_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(index_of(t));
  return out;
}

std::vector<std::string> Vocabulary::decode(std::span<const std::int32_t> indices) const {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(word(i));
  return out;
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += words_[i];
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::parse(std::string_view text) {
  Vocabulary v;
  v.words_.clear();
  v.index_.clear();
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(Errc::malformed, "vocabulary line " + std::to_string(line_no) + " lacks a tab");
    }
    const std::string idx(line.substr(0, tab));
    std::string word(line.substr(tab + 1));
    if (idx != std::to_string(line_no) || word.empty() || v.index_.contains(word)) {
      throw Error(Errc::malformed, "vocabulary line " + std::to_string(line_no) +
                                       " is out of order, empty or duplicated");
    }
    v.add(std::move(word));
    ++line_no;
  }
  const std::string_view reserved[] = {kPad, kSos, kEos, kUnk};
  for (std::size_t i = 0; i < 4; ++i) {
    if (v.words_.size() <= i || v.words_[i] != reserved[i]) {
      throw Error(Errc::malformed, "vocabulary lacks reserved token " + std::string(reserved[i]) +
                                       " at index " + std::to_string(i));
    }
  }
  return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out << serialize();
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "vocabulary not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::uint64_t Vocabulary::hash() const { return fnv1a64(serialize()); }

}  // namespace aucap::text
