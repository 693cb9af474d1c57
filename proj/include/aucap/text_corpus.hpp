#pragma once

// Caption cleaning, vocabulary management and skip-gram word embeddings.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace aucap::text {

inline constexpr std::string_view kPad = "<pad>";
inline constexpr std::string_view kSos = "<sos>";
inline constexpr std::string_view kEos = "<eos>";
inline constexpr std::string_view kUnk = "<unk>";

bool is_special(std::string_view token) noexcept;

/// Token list wrapped in <sos> ... <eos>.
struct TokenizedCaption {
  std::vector<std::string> tokens;

  /// Tokens without the boundary markers.
  std::vector<std::string> words() const;
  std::string join_words() const;
  std::size_t size() const { return tokens.size(); }

  friend bool operator==(const TokenizedCaption&, const TokenizedCaption&) = default;
};

/// Lowercase, strip punctuation, drop one-character and digit-bearing words,
/// wrap with <sos>/<eos>. Throws Errc::empty_input when nothing survives.
TokenizedCaption clean_caption(std::string_view raw);

/// Wraps already-clean words; no filtering applied.
TokenizedCaption wrap_words(std::vector<std::string> words);

class Vocabulary {
 public:
  static constexpr std::int32_t kPadId = 0;
  static constexpr std::int32_t kSosId = 1;
  static constexpr std::int32_t kEosId = 2;
  static constexpr std::int32_t kUnkId = 3;

  /// Reserved tokens only.
  Vocabulary();

  /// Reserved tokens first, then every distinct token in first-appearance order.
  static Vocabulary build(std::span<const TokenizedCaption> captions);

  std::size_t size() const { return words_.size(); }
  bool contains(std::string_view word) const;
  /// Index of word, or kUnkId.
  std::int32_t index_of(std::string_view word) const;
  const std::string& word(std::int32_t index) const;

  std::vector<std::int32_t> encode(const TokenizedCaption& caption) const;
  std::vector<std::int32_t> encode(std::span<const std::string> tokens) const;
  /// Errc::invalid_argument for an out-of-range index.
  std::vector<std::string> decode(std::span<const std::int32_t> indices) const;

  /// One "index<TAB>word" line per entry.
  std::string serialize() const;
  static Vocabulary parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  std::uint64_t hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  void add(std::string word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct Word2VecConfig {
  Eigen::Index dim = 256;
  int window = 5;
  int negatives = 5;
  int epochs = 15;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
};

struct Word2VecResult {
  Eigen::MatrixXd input_vectors;  // V x dim, the embedding table
  std::vector<double> epoch_loss;  // mean negative-sampling loss per epoch
};

/// Skip-gram with negative sampling over vocabulary indices. Deterministic for
/// a fixed seed. Errc::invalid_argument unless dim == 256 and the corpus is
/// non-empty.
Word2VecResult train_word2vec(std::span<const TokenizedCaption> corpus, const Vocabulary& vocab,
                              const Word2VecConfig& config = {});

/// Negative-sampling loss for one (center, context, negatives) tuple,
///   -ln s(u_o . v_c) - sum_k ln s(-u_k . v_c),
/// with gradients w.r.t. the center vector and each output vector.
struct SgnsTerm {
  double loss = 0.0;
  Eigen::VectorXd grad_center;
  Eigen::VectorXd grad_context;
  std::vector<Eigen::VectorXd> grad_negatives;
};

SgnsTerm sgns_loss(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                   std::span<const Eigen::VectorXd> negatives);

}  // namespace aucap::text
