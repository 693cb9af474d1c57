#include <gtest/gtest.h>

#include "aucap/error.hpp"
#include "aucap/semantics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace aucap;
using namespace aucap::semantics;
using text::TokenizedCaption;
using text::wrap_words;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> l) { return {l.begin(), l.end()}; }

std::vector<TokenizedCaption> wrap_all(const std::vector<std::vector<std::string>>& caps) {
  std::vector<TokenizedCaption> out;
  for (const auto& c : caps) out.push_back(wrap_words(c));
  return out;
}

}  // namespace

TEST(ExtractSubjectsVerbs, Examples) {
  TagLexicon lex = TagLexicon::empty();
  lex.set("dog", Tag::noun);
  lex.set("barks", Tag::verb);
  lex.set("man", Tag::noun);
  lex.set("speaks", Tag::verb);
  lex.set("loudly", Tag::other);
  EXPECT_EQ(extract_subjects_verbs(wrap_words(toks({"dog", "barks", "loudly"})), lex),
            toks({"dog", "barks"}));
  EXPECT_TRUE(extract_subjects_verbs(wrap_words(toks({"loudly"})), lex).empty());
  EXPECT_EQ(extract_subjects_verbs(wrap_words(toks({"man", "speaks", "dog", "barks"})), lex),
            toks({"man", "speaks", "barks"}));
}

TEST(TagLexicon, FallbackChain) {
  const TagLexicon lex = TagLexicon::builtin();
  EXPECT_EQ(lex.tag("dog"), Tag::noun);
  EXPECT_EQ(lex.tag("barks"), Tag::verb);     // via root
  EXPECT_EQ(lex.tag("the"), Tag::other);      // closed class
  EXPECT_EQ(lex.tag("quickly"), Tag::other);  // -ly
  EXPECT_EQ(lex.tag("zipping"), Tag::verb);   // -ing
  EXPECT_EQ(lex.tag("zorble"), Tag::noun);    // default

  testutil::TempDir dir("lex");
  testutil::write_text(dir / "lex.tsv", "zorble\tVERB\ndog\tOTHER\n");
  const TagLexicon loaded = TagLexicon::load(dir / "lex.tsv");
  EXPECT_EQ(loaded.tag("zorble"), Tag::verb);
  EXPECT_EQ(loaded.tag("dog"), Tag::other);
  EXPECT_NE(loaded.hash(), lex.hash());
  testutil::write_text(dir / "bad.tsv", "zorble\tADJ\n");
  EXPECT_THROW(TagLexicon::load(dir / "bad.tsv"), Error);
}

TEST(ToRoot, ExamplesAndIdempotence) {
  EXPECT_EQ(to_root("barks"), "bark");
  EXPECT_EQ(to_root("bark"), "bark");
  EXPECT_EQ(to_root("talking"), "talk");
  const std::vector<std::string> words{
      "barks", "talking", "caresses", "ponies", "running", "hopped", "agreed", "flies",
      "buzzing", "hissing", "glass", "bus", "chirped", "roaring", "speaking", "speaks",
      "filing", "conflated", "sized", "tries", "sings", "rain", "people", "crackling"};
  for (const auto& w : words) {
    const std::string r = to_root(w);
    EXPECT_EQ(to_root(r), r) << w;
  }
}

TEST(BuildCorpus, Examples) {
  const TagLexicon lex = TagLexicon::builtin();
  const auto caps = wrap_all({toks({"dog", "barks"}), toks({"man", "speaks"})});
  const SubjectVerbCorpus c = build_corpus(caps, lex);
  EXPECT_EQ(c.words, toks({"dog", "bark", "man", "speak"}));

  auto doubled = caps;
  doubled.insert(doubled.end(), caps.begin(), caps.end());
  EXPECT_EQ(build_corpus(doubled, lex).words, c.words);

  const auto none = wrap_all({toks({"the", "loudly"})});
  EXPECT_EQ(build_corpus(none, lex).size(), 0u);
}

TEST(EncodeSve, Examples) {
  const TagLexicon lex = TagLexicon::builtin();
  const auto caps = wrap_all({toks({"dog", "barks"}), toks({"man", "speaks"})});
  const SubjectVerbCorpus c = build_corpus(caps, lex);
  Eigen::VectorXd expected(4);
  expected << 1, 1, 0, 0;
  EXPECT_EQ(encode_sve(caps[0], c, lex), expected);
  EXPECT_TRUE(encode_sve(wrap_words(toks({"rain", "falls"})), c, lex).isZero());

  TagLexicon other = lex;
  other.set("rain", Tag::verb);
  try {
    encode_sve(caps[0], c, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::hash_mismatch);
  }
}

TEST(BuildCorpus, MatchesBruteForceOracle) {
  const TagLexicon lex = TagLexicon::builtin();
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto raw = oracle::random_captions(gen, 50);
    const auto caps = wrap_all(raw);
    const SubjectVerbCorpus c = build_corpus(caps, lex);
    const auto expected = oracle::corpus(raw, lex);
    ASSERT_EQ(c.words, expected);
    for (const auto& w : c.words) EXPECT_EQ(to_root(w), w);
    for (std::size_t j = 0; j < raw.size(); ++j) {
      const Eigen::VectorXd bits = encode_sve(caps[j], c, lex);
      const auto want = oracle::sve(raw[j], expected, lex);
      for (std::size_t k = 0; k < want.size(); ++k) {
        ASSERT_EQ(bits(static_cast<Eigen::Index>(k)), want[k]);
      }
      if (!oracle::rooted_terms(raw[j], lex).empty()) {
        EXPECT_GT(bits.sum(), 0.0);
      }
    }
  }
}

TEST(Corpus, SaveLoadRoundTrip) {
  const TagLexicon lex = TagLexicon::builtin();
  const auto caps = wrap_all({toks({"dog", "barks"}), toks({"birds", "chirping"})});
  const SubjectVerbCorpus c = build_corpus(caps, lex);
  testutil::TempDir dir("corpus");
  c.save(dir / "corpus.txt");
  const SubjectVerbCorpus back = SubjectVerbCorpus::load(dir / "corpus.txt");
  EXPECT_EQ(back.words, c.words);
  EXPECT_EQ(back.lexicon_hash, c.lexicon_hash);
  EXPECT_EQ(back.hash(), c.hash());
  EXPECT_EQ(encode_sve_matrix(caps, back, lex).rows(), 2);
}
