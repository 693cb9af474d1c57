#pragma once

// Subject-verb embeddings: a lexicon-driven tagger with a positional subject
// rule, a Porter-style root finder, and the corpus/SVE construction.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aucap/text_corpus.hpp"

namespace aucap::semantics {

enum class Tag { noun, verb, other };

std::string_view to_string(Tag tag) noexcept;
Tag parse_tag(std::string_view name);

/// Word -> tag table with a fixed fallback chain:
///   exact entry, entry for the root, closed-class word list, suffix rules, NOUN.
class TagLexicon {
 public:
  /// Built-in table of common sound-event nouns and verbs.
  static TagLexicon builtin();
  /// Empty table; every word goes through the fallback rules.
  static TagLexicon empty();
  /// "word<TAB>TAG" lines (TAG in NOUN|VERB|OTHER) layered over builtin().
  static TagLexicon load(const std::filesystem::path& path);
  static TagLexicon parse(std::string_view text, TagLexicon base);

  void set(std::string word, Tag tag);
  Tag tag(std::string_view word) const;
  std::uint64_t hash() const;

 private:
  std::map<std::string, Tag, std::less<>> entries_;
};

/// Porter step-1 suffix stripping iterated to a fixed point, so
/// to_root(to_root(w)) == to_root(w) for every w.
std::string to_root(std::string_view word);

/// NOUN tokens before the first VERB, plus every VERB token, in caption order.
std::vector<std::string> extract_subjects_verbs(const text::TokenizedCaption& caption,
                                                const TagLexicon& lex);

struct SubjectVerbCorpus {
  std::vector<std::string> words;
  std::uint64_t lexicon_hash = 0;

  std::size_t size() const { return words.size(); }
  std::optional<std::size_t> index_of(std::string_view word) const;
  std::uint64_t hash() const;

  /// One word per line, preceded by a "# lexicon=<hex>" line.
  void save(const std::filesystem::path& path) const;
  static SubjectVerbCorpus load(const std::filesystem::path& path);
};

/// Unique rooted subjects and verbs in first-appearance order.
SubjectVerbCorpus build_corpus(std::span<const text::TokenizedCaption> captions,
                               const TagLexicon& lex);

/// Binary vector: bit k set iff corpus[k] is a rooted subject/verb of caption.
/// Errc::hash_mismatch when corpus was built with a different lexicon.
Eigen::VectorXd encode_sve(const text::TokenizedCaption& caption, const SubjectVerbCorpus& corpus,
                           const TagLexicon& lex);

/// One SVE row per caption.
Eigen::MatrixXd encode_sve_matrix(std::span<const text::TokenizedCaption> captions,
                                  const SubjectVerbCorpus& corpus, const TagLexicon& lex);

}  // namespace aucap::semantics
