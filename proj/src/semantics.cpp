#include "aucap/semantics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "aucap/error.hpp"

namespace aucap::semantics {
namespace {

constexpr std::string_view kBuiltinNouns[] = {
    "airplane", "alarm", "animal", "baby", "ball", "bee", "bell", "bird", "boat", "boy",
    "bus", "car", "cat", "chicken", "child", "children", "clock", "cow", "crowd", "dog",
    "door", "drum", "duck", "engine", "fire", "frog", "girl", "goat", "guitar", "gun",
    "helicopter", "horn", "horse", "insect", "lady", "machine", "man", "men", "motor",
    "motorcycle", "music", "ocean", "people", "person", "phone", "piano", "plane", "river",
    "rooster", "sheep", "siren", "someone", "something", "stream", "thunder", "traffic",
    "train", "truck", "vehicle", "water", "wave", "wind", "woman", "women"};

constexpr std::string_view kBuiltinVerbs[] = {
    "approach", "bang", "bark", "beep", "blow", "buzz", "chirp", "clap", "click", "close",
    "come", "crackle", "crash", "creak", "crow", "cry", "drip", "drive", "fall", "flow",
    "fly", "go", "growl", "hiss", "honk", "hum", "idle", "knock", "land", "laugh", "make",
    "meow", "moo", "move", "open", "pass", "play", "pour", "purr", "quack", "rev", "ring",
    "roar", "run", "rush", "rustle", "shout", "sing", "slam", "speak", "splash", "squeak",
    "start", "stop", "talk", "tweet", "walk", "whistle", "yell"};

constexpr std::string_view kClosedClass[] = {
    "about", "above", "across", "after", "again", "against", "all", "along", "also", "an",
    "and", "another", "any", "are", "around", "as", "at", "away", "back", "be", "been",
    "before", "behind", "being", "below", "between", "both", "but", "by", "can", "could",
    "down", "during", "each", "every", "far", "few", "for", "from", "has", "have", "he",
    "her", "here", "his", "in", "into", "is", "it", "its", "just", "least", "less", "many",
    "more", "most", "much", "near", "next", "no", "not", "now", "of", "off", "on", "once",
    "one", "only", "onto", "or", "other", "out", "over", "she", "so", "some", "still",
    "than", "that", "the", "their", "them", "then", "there", "these", "they", "this",
    "those", "through", "to", "too", "toward", "towards", "under", "until", "up", "upon",
    "very", "was", "were", "what", "when", "where", "which", "while", "who", "whose",
    "with", "within", "without", "would", "loud", "soft", "quiet", "high", "low", "small",
    "large", "big", "little", "fast", "slow", "distant", "close", "nearby", "several"};

constexpr std::string_view kOtherSuffixes[] = {"ly", "ous", "ful", "ive", "less", "able", "ible"};
constexpr std::string_view kVerbSuffixes[] = {"ing", "ed"};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Porter's consonant test.
bool is_consonant(std::string_view w, std::size_t i) {
  switch (w[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return false;
    case 'y': return i == 0 || !is_consonant(w, i - 1);
    default: return true;
  }
}

// Number of VC sequences in w.
int measure(std::string_view w) {
  int m = 0;
  std::size_t i = 0;
  const std::size_t n = w.size();
  while (i < n && is_consonant(w, i)) ++i;
  while (i < n) {
    while (i < n && !is_consonant(w, i)) ++i;
    if (i >= n) break;
    while (i < n && is_consonant(w, i)) ++i;
    ++m;
  }
  return m;
}

bool has_vowel(std::string_view w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!is_consonant(w, i)) return true;
  }
  return false;
}

bool ends_double_consonant(std::string_view w) {
  const std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

bool ends_cvc(std::string_view w) {
  const std::size_t n = w.size();
  if (n < 3) return false;
  if (!is_consonant(w, n - 3) || is_consonant(w, n - 2) || !is_consonant(w, n - 1)) return false;
  const char c = w[n - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

std::string porter_step1(std::string w) {
  // 1a
  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ies")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) {
    // keep
  } else if (ends_with(w, "s") && w.size() >= 4) {
    w.pop_back();
  }

  // 1b
  bool tidy = false;
  if (ends_with(w, "eed")) {
    if (measure(std::string_view(w).substr(0, w.size() - 3)) > 0) w.pop_back();
  } else if (ends_with(w, "ed") && has_vowel(std::string_view(w).substr(0, w.size() - 2))) {
    w.resize(w.size() - 2);
    tidy = true;
  } else if (ends_with(w, "ing") && has_vowel(std::string_view(w).substr(0, w.size() - 3))) {
    w.resize(w.size() - 3);
    tidy = true;
  }
  if (tidy) {
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
      w += 'e';
    } else if (ends_double_consonant(w) && !ends_with(w, "l") && !ends_with(w, "s") &&
               !ends_with(w, "z")) {
      w.pop_back();
    } else if (measure(w) == 1 && ends_cvc(w)) {
      w += 'e';
    }
  }

  // 1c
  if (ends_with(w, "y") && w.size() > 1 && has_vowel(std::string_view(w).substr(0, w.size() - 1))) {
    w.back() = 'i';
  }
  return w;
}

}  // namespace

std::string_view to_string(Tag tag) noexcept {
  switch (tag) {
    case Tag::noun: return "NOUN";
    case Tag::verb: return "VERB";
    case Tag::other: return "OTHER";
  }
  return "OTHER";
}

Tag parse_tag(std::string_view name) {
  if (name == "NOUN") return Tag::noun;
  if (name == "VERB") return Tag::verb;
  if (name == "OTHER") return Tag::other;
  throw Error(Errc::malformed, "unknown tag '" + std::string(name) + "' (expected NOUN|VERB|OTHER)");
}

std::string to_root(std::string_view word) {
  std::string current(word);
  for (;;) {
    std::string next = porter_step1(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

TagLexicon TagLexicon::empty() { return TagLexicon{}; }

TagLexicon TagLexicon::builtin() {
  TagLexicon lex;
  for (auto w : kBuiltinNouns) lex.set(std::string(w), Tag::noun);
  for (auto w : kBuiltinVerbs) lex.set(std::string(w), Tag::verb);
  return lex;
}

TagLexicon TagLexicon::parse(std::string_view text, TagLexicon base) {
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw Error(Errc::malformed, "lexicon line " + std::to_string(line_no) +
                                       ": expected word<TAB>TAG");
    }
    base.set(std::string(line.substr(0, tab)), parse_tag(line.substr(tab + 1)));
  }
  return base;
}

TagLexicon TagLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "lexicon not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), builtin());
}

void TagLexicon::set(std::string word, Tag tag) { entries_[std::move(word)] = tag; }

Tag TagLexicon::tag(std::string_view word) const {
  if (auto it = entries_.find(word); it != entries_.end()) return it->second;
  const std::string root = to_root(word);
  if (auto it = entries_.find(root); it != entries_.end()) return it->second;
  if (std::find(std::begin(kClosedClass), std::end(kClosedClass), word) != std::end(kClosedClass)) {
    return Tag::other;
  }
  for (auto s : kOtherSuffixes) {
    if (ends_with(word, s)) return Tag::other;
  }
  for (auto s : kVerbSuffixes) {
    if (ends_with(word, s) && word.size() > s.size() + 1) return Tag::verb;
  }
  return Tag::noun;
}

std::uint64_t TagLexicon::hash() const {
  std::string blob = "taglex-v1\n";
  for (const auto& [w, t] : entries_) {
    blob += w;
    blob += '\t';
    blob += to_string(t);
    blob += '\n';
  }
  return fnv1a64(blob);
}

std::vector<std::string> extract_subjects_verbs(const text::TokenizedCaption& caption,
                                                const TagLexicon& lex) {
  std::vector<std::string> out;
  bool seen_verb = false;
  for (const auto& w : caption.words()) {
    const Tag t = lex.tag(w);
    if (t == Tag::verb) {
      seen_verb = true;
      out.push_back(w);
    } else if (t == Tag::noun && !seen_verb) {
      out.push_back(w);
    }
  }
  return out;
}

std::optional<std::size_t> SubjectVerbCorpus::index_of(std::string_view word) const {
  auto it = std::find(words.begin(), words.end(), word);
  if (it == words.end()) return std::nullopt;
  return static_cast<std::size_t>(it - words.begin());
}

std::uint64_t SubjectVerbCorpus::hash() const {
  std::string blob = "svcorpus-v1 " + hex64(lexicon_hash) + "\n";
  for (const auto& w : words) {
    blob += w;
    blob += '\n';
  }
  return fnv1a64(blob);
}

void SubjectVerbCorpus::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out << "# lexicon=" << hex64(lexicon_hash) << '\n';
  for (const auto& w : words) out << w << '\n';
}

SubjectVerbCorpus SubjectVerbCorpus::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "subject-verb corpus not found: " + path.string());
  SubjectVerbCorpus c;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# lexicon=", 0) != 0 || line.size() != 26) {
    throw Error(Errc::malformed, path.string() + ": missing '# lexicon=<hex>' header");
  }
  c.lexicon_hash = std::stoull(line.substr(10), nullptr, 16);
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!seen.insert(line).second) {
      throw Error(Errc::malformed, path.string() + ": duplicate corpus word '" + line + "'");
    }
    c.words.push_back(line);
  }
  return c;
}

SubjectVerbCorpus build_corpus(std::span<const text::TokenizedCaption> captions,
                               const TagLexicon& lex) {
  SubjectVerbCorpus corpus;
  corpus.lexicon_hash = lex.hash();
  std::unordered_set<std::string> seen;
  for (const auto& c : captions) {
    for (const auto& w : extract_subjects_verbs(c, lex)) {
      std::string root = to_root(w);
      if (seen.insert(root).second) corpus.words.push_back(std::move(root));
    }
  }
  return corpus;
}

Eigen::VectorXd encode_sve(const text::TokenizedCaption& caption, const SubjectVerbCorpus& corpus,
                           const TagLexicon& lex) {
  if (corpus.lexicon_hash != lex.hash()) {
    throw Error(Errc::hash_mismatch,
                "subject-verb corpus was built with a different tag lexicon (corpus " +
                    hex64(corpus.lexicon_hash) + ", lexicon " + hex64(lex.hash()) + ")");
  }
  Eigen::VectorXd bits = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(corpus.size()));
  for (const auto& w : extract_subjects_verbs(caption, lex)) {
    if (auto k = corpus.index_of(to_root(w))) bits[static_cast<Eigen::Index>(*k)] = 1.0;
  }
  return bits;
}

Eigen::MatrixXd encode_sve_matrix(std::span<const text::TokenizedCaption> captions,
                                  const SubjectVerbCorpus& corpus, const TagLexicon& lex) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(captions.size()),
                    static_cast<Eigen::Index>(corpus.size()));
  for (std::size_t i = 0; i < captions.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = encode_sve(captions[i], corpus, lex).transpose();
  }
  return m;
}

}  // namespace aucap::semantics
