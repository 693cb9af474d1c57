#pragma once

// Corpus-level caption metrics. Inputs are token lists; <sos>, <eos> and
// <pad> are removed before scoring.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aucap::metrics {

using Sentence = std::vector<std::string>;
using References = std::vector<Sentence>;

/// Copy without special tokens.
Sentence strip_special(const Sentence& s);

/// n-gram -> count for one n.
using NGramCounts = std::map<std::vector<std::string>, int>;
NGramCounts ngram_counts(const Sentence& s, int n);

/// Corpus BLEU-n: clipped n-gram precisions pooled over the corpus, uniform
/// geometric mean over 1..n, brevity penalty against the closest reference
/// length. Zero if any precision is zero. Errc::empty_input for no candidates.
double bleu(std::span<const Sentence> candidates, std::span<const References> references, int n);

std::size_t lcs_length(const Sentence& a, const Sentence& b);
/// Mean over clips of the best-reference LCS F-measure with beta = 1.2.
double rouge_l(std::span<const Sentence> candidates, std::span<const References> references);

/// CIDEr with TF-IDF n-gram vectors (n = 1..4), document frequency over the
/// reference sets, per-n cosine averaged over references, x10, mean over n.
/// Errc::invalid_argument for fewer than two clips.
double cider(std::span<const Sentence> candidates, std::span<const References> references);

/// Exact-then-stem greedy alignment, F = 10PR / (R + 9P), fragmentation
/// penalty 0.5 (chunks / matches)^3; best reference per clip, corpus mean.
struct MeteorAlignment {
  int matches = 0;
  int chunks = 0;
};
MeteorAlignment meteor_align(const Sentence& candidate, const Sentence& reference);
double meteor_sentence(const Sentence& candidate, const Sentence& reference);
double meteor(std::span<const Sentence> candidates, std::span<const References> references);

struct ScoreReport {
  double bleu1 = 0, bleu2 = 0, bleu3 = 0, bleu4 = 0;
  std::optional<double> cider;  // absent for single-clip corpora
  double meteor = 0, rouge_l = 0;

  /// Aligned two-row table.
  std::string table() const;
  /// "B-1: 0.123456" lines in column order.
  std::string key_values() const;
};

ScoreReport score_all(std::span<const Sentence> candidates, std::span<const References> references);

}  // namespace aucap::metrics
