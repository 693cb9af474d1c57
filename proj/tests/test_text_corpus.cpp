#include <gtest/gtest.h>

#include <random>

#include "aucap/error.hpp"
#include "aucap/text_corpus.hpp"
#include "test_util.hpp"

using namespace aucap;
using namespace aucap::text;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> l) {
  return {l.begin(), l.end()};
}

double cosine(const Eigen::MatrixXd& m, std::int32_t a, std::int32_t b) {
  return m.row(a).dot(m.row(b)) / (m.row(a).norm() * m.row(b).norm());
}

}  // namespace

TEST(CleanCaption, Examples) {
  EXPECT_EQ(clean_caption("A dog barks, loudly 3 times!").tokens,
            toks({"<sos>", "dog", "barks", "loudly", "times", "<eos>"}));
  EXPECT_EQ(clean_caption("people talking").tokens, toks({"<sos>", "people", "talking", "<eos>"}));
  try {
    clean_caption("1 2 3 !");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_input);
  }
}

TEST(CleanCaption, UnicodePunctuationAndCase) {
  EXPECT_EQ(clean_caption("Birds \xE2\x80\x9C" "CHIRP\xE2\x80\x9D \xE2\x80\x94 softly").tokens,
            toks({"<sos>", "birds", "chirp", "softly", "<eos>"}));
  // angle brackets are stripped so a caption cannot forge a boundary token
  EXPECT_EQ(clean_caption("<eos> here").tokens, toks({"<sos>", "eos", "here", "<eos>"}));
}

TEST(CleanCaption, PropertiesOverRandomStrings) {
  std::mt19937_64 gen(42);
  const std::string alphabet = "abcdeXYZ019 ,.!?'-\t";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 40);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::string raw;
    const int n = len(gen);
    for (int i = 0; i < n; ++i) raw += alphabet[pick(gen)];
    TokenizedCaption c;
    try {
      c = clean_caption(raw);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), Errc::empty_input);
      continue;
    }
    ++checked;
    ASSERT_GE(c.size(), 3u);
    EXPECT_EQ(c.tokens.front(), "<sos>");
    EXPECT_EQ(c.tokens.back(), "<eos>");
    for (const auto& w : c.words()) {
      EXPECT_GT(w.size(), 1u) << raw;
      for (char ch : w) {
        EXPECT_FALSE(std::isdigit(static_cast<unsigned char>(ch))) << raw;
        EXPECT_FALSE(std::ispunct(static_cast<unsigned char>(ch))) << raw;
        EXPECT_FALSE(std::isupper(static_cast<unsigned char>(ch))) << raw;
        EXPECT_FALSE(std::isspace(static_cast<unsigned char>(ch))) << raw;
      }
    }
    EXPECT_EQ(clean_caption(c.join_words()), c);
  }
  EXPECT_GT(checked, 500);
}

TEST(Vocabulary, BuildCountsAndOrder) {
  const std::vector<TokenizedCaption> caps{wrap_words({"dog"})};
  const Vocabulary v = Vocabulary::build(caps);
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(v.word(0), "<pad>");
  EXPECT_EQ(v.word(1), "<sos>");
  EXPECT_EQ(v.word(2), "<eos>");
  EXPECT_EQ(v.word(3), "<unk>");
  EXPECT_EQ(v.word(4), "dog");
  EXPECT_EQ(Vocabulary::build(caps), v);

  const std::vector<TokenizedCaption> twice{wrap_words({"b", "a"}), wrap_words({"c", "a"}),
                                            wrap_words({"b", "a"})};
  const Vocabulary w = Vocabulary::build(twice);
  EXPECT_EQ(w.size(), 7u);
  EXPECT_EQ(w.index_of("b"), 4);
  EXPECT_EQ(w.index_of("a"), 5);
  EXPECT_EQ(w.index_of("c"), 6);
}

TEST(Vocabulary, EncodeDecodeAndUnknown) {
  const std::vector<TokenizedCaption> caps{clean_caption("a dog barks"),
                                           clean_caption("rain on the roof")};
  const Vocabulary v = Vocabulary::build(caps);
  for (const auto& c : caps) {
    const auto ids = v.encode(c);
    EXPECT_EQ(v.decode(ids), c.tokens);
  }
  const auto ids = v.encode(clean_caption("dog meows"));
  EXPECT_EQ(ids[2], Vocabulary::kUnkId);
  const std::vector<std::int32_t> bad{0, static_cast<std::int32_t>(v.size())};
  try {
    v.decode(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_argument);
  }
}

TEST(Vocabulary, SerializationRoundTrip) {
  const std::vector<TokenizedCaption> caps{clean_caption("wind blows through tall trees"),
                                           clean_caption("tall man walks")};
  const Vocabulary v = Vocabulary::build(caps);
  EXPECT_EQ(Vocabulary::parse(v.serialize()), v);
  EXPECT_EQ(v.serialize().substr(0, 8), "0\t<pad>\n");
  testutil::TempDir dir("vocab");
  v.save(dir / "vocab.txt");
  const Vocabulary back = Vocabulary::load(dir / "vocab.txt");
  EXPECT_EQ(back, v);
  EXPECT_EQ(back.hash(), v.hash());
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(v.size()); ++i) {
    EXPECT_EQ(back.index_of(v.word(i)), i);
  }
  EXPECT_THROW(Vocabulary::parse("0\t<pad>\n2\tdog\n"), Error);
}

TEST(Word2Vec, DegenerateCorpus) {
  const std::vector<TokenizedCaption> caps{wrap_words({"hum"})};
  const Vocabulary v = Vocabulary::build(caps);
  Word2VecConfig cfg;
  cfg.epochs = 3;
  const Word2VecResult r = train_word2vec(caps, v, cfg);
  EXPECT_EQ(r.input_vectors.rows(), static_cast<Eigen::Index>(v.size()));
  EXPECT_EQ(r.input_vectors.cols(), 256);
  EXPECT_TRUE(r.input_vectors.allFinite());
  for (double l : r.epoch_loss) EXPECT_TRUE(std::isfinite(l));
}

TEST(Word2Vec, RejectsOtherDims) {
  const std::vector<TokenizedCaption> caps{wrap_words({"hum"})};
  Word2VecConfig cfg;
  cfg.dim = 64;
  EXPECT_THROW(train_word2vec(caps, Vocabulary::build(caps), cfg), Error);
}

TEST(Word2Vec, DeterministicForFixedSeed) {
  const std::vector<TokenizedCaption> caps{clean_caption("dog barks at the mailman"),
                                           clean_caption("the cat sleeps quietly"),
                                           clean_caption("rain falls on the roof")};
  const Vocabulary v = Vocabulary::build(caps);
  Word2VecConfig cfg;
  cfg.epochs = 4;
  const auto a = train_word2vec(caps, v, cfg);
  const auto b = train_word2vec(caps, v, cfg);
  EXPECT_EQ(a.input_vectors, b.input_vectors);
  cfg.seed = 2;
  EXPECT_NE(train_word2vec(caps, v, cfg).input_vectors, a.input_vectors);
}

TEST(Word2Vec, SharedContextsGiveSimilarVectors) {
  // "cat" and "feline" occur in identical contexts; "engine" in unrelated ones.
  std::mt19937_64 gen(9);
  const std::vector<std::string> ctx_a{"soft", "purring", "warm", "sleepy", "fluffy", "whiskers"};
  const std::vector<std::string> ctx_b{"loud", "diesel", "revving", "oily", "metal", "exhaust"};
  std::uniform_int_distribution<std::size_t> pa(0, ctx_a.size() - 1), pb(0, ctx_b.size() - 1);
  std::vector<TokenizedCaption> caps;
  for (int i = 0; i < 150; ++i) {
    const std::string l = ctx_a[pa(gen)], r = ctx_a[pa(gen)];
    caps.push_back(wrap_words({l, "cat", r}));
    caps.push_back(wrap_words({l, "feline", r}));
    caps.push_back(wrap_words({ctx_b[pb(gen)], "engine", ctx_b[pb(gen)]}));
  }
  const Vocabulary v = Vocabulary::build(caps);
  Word2VecConfig cfg;
  cfg.window = 2;
  cfg.epochs = 10;
  const auto r = train_word2vec(caps, v, cfg);
  const auto cat = v.index_of("cat"), feline = v.index_of("feline"), engine = v.index_of("engine");
  EXPECT_GT(cosine(r.input_vectors, cat, feline), cosine(r.input_vectors, cat, engine));
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Word2Vec, SgnsGradientMatchesFiniteDifferences) {
  // 5-word toy vocabulary: word 0 centre, word 1 context, words 2..4 negatives
  std::mt19937_64 gen(13);
  std::normal_distribution<double> n01(0.0, 0.5);
  std::vector<Eigen::VectorXd> vecs(5, Eigen::VectorXd(6));
  for (auto& v : vecs)
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = n01(gen);
  auto loss_of = [](const std::vector<Eigen::VectorXd>& w) {
    const std::vector<Eigen::VectorXd> neg{w[2], w[3], w[4]};
    return sgns_loss(w[0], w[1], neg).loss;
  };
  const std::vector<Eigen::VectorXd> neg{vecs[2], vecs[3], vecs[4]};
  const SgnsTerm term = sgns_loss(vecs[0], vecs[1], neg);
  const std::vector<Eigen::VectorXd> analytic{term.grad_center, term.grad_context,
                                              term.grad_negatives[0], term.grad_negatives[1],
                                              term.grad_negatives[2]};
  const double delta = 1e-6;
  double worst = 0.0;
  for (std::size_t w = 0; w < 5; ++w) {
    for (Eigen::Index i = 0; i < 6; ++i) {
      auto plus = vecs, minus = vecs;
      plus[w](i) += delta;
      minus[w](i) -= delta;
      const double numeric = (loss_of(plus) - loss_of(minus)) / (2 * delta);
      const double a = analytic[w](i);
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  EXPECT_LT(worst, 1e-5);
}
