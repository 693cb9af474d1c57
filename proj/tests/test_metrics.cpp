#include <gtest/gtest.h>

#include <random>

#include "aucap/error.hpp"
#include "aucap/metrics.hpp"
#include "oracles.hpp"

using namespace aucap;
using namespace aucap::metrics;

namespace {

Sentence s(std::string_view text) {
  Sentence out;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct Corpus {
  std::vector<Sentence> cands;
  std::vector<References> refs;
};

Corpus random_corpus(std::mt19937_64& gen, int clips) {
  const std::vector<std::string> words{"dog", "bark", "the", "rain", "falls", "on", "roof", "car"};
  std::uniform_int_distribution<std::size_t> w(0, words.size() - 1);
  std::uniform_int_distribution<int> len(1, 8), nref(1, 3);
  auto sentence = [&] {
    Sentence out;
    for (int i = len(gen); i > 0; --i) out.push_back(words[w(gen)]);
    return out;
  };
  Corpus c;
  for (int i = 0; i < clips; ++i) {
    c.cands.push_back(sentence());
    References r;
    for (int k = nref(gen); k > 0; --k) r.push_back(sentence());
    c.refs.push_back(r);
  }
  return c;
}

}  // namespace

TEST(Bleu, HandComputedCases) {
  const std::vector<Sentence> same{s("a dog barks")};
  const std::vector<References> same_refs{{s("a dog barks")}};
  EXPECT_DOUBLE_EQ(bleu(same, same_refs, 1), 1.0);

  const std::vector<Sentence> c{s("the the the")};
  const std::vector<References> r{{s("the cat")}};
  EXPECT_NEAR(bleu(c, r, 1), 1.0 / 3.0, 1e-9);

  // c = 3 < r = 6: BP = exp(1 - 2); precisions are 1
  const std::vector<Sentence> short_c{s("the cat sat")};
  const std::vector<References> long_r{{s("the cat sat on the mat")}};
  EXPECT_NEAR(bleu(short_c, long_r, 2), std::exp(-1.0), 1e-9);

  // closest reference length 6 (not 7): BP = exp(1 - 6/4)
  const std::vector<Sentence> c2{s("cat on the mat")};
  const std::vector<References> r2{{s("the cat is on the mat"), s("there is a cat sitting on the mat")}};
  EXPECT_NEAR(bleu(c2, r2, 1), std::exp(-0.5), 1e-9);
  // bigrams: "cat on" (no), "on the" (yes), "the mat" (yes): p2 = 2/3
  EXPECT_NEAR(bleu(c2, r2, 2), std::exp(-0.5) * std::sqrt(2.0 / 3.0), 1e-9);

  const std::vector<Sentence> d{s("rain falls")};
  const std::vector<References> dr{{s("dog barks")}};
  EXPECT_EQ(bleu(d, dr, 1), 0.0);
  EXPECT_THROW(bleu(std::span<const Sentence>{}, std::span<const References>{}, 1), Error);
}

TEST(Bleu, NonIncreasingInN) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 200; ++t) {
    const Corpus c = random_corpus(gen, 5);
    double prev = 1.0;
    for (int n = 1; n <= 4; ++n) {
      const double b = bleu(c.cands, c.refs, n);
      EXPECT_LE(b, prev + 1e-12);
      prev = b;
    }
  }
}

TEST(RougeL, Examples) {
  EXPECT_EQ(lcs_length(s("a b c d"), s("a c d")), 3u);
  const std::vector<Sentence> c{s("a b c d")};
  const std::vector<References> r{{s("a c d")}};
  const double p = 0.75, rc = 1.0, b2 = 1.2 * 1.2;
  EXPECT_NEAR(rouge_l(c, r), (1 + b2) * p * rc / (rc + b2 * p), 1e-12);
  const std::vector<References> same{{s("a b c d")}};
  EXPECT_DOUBLE_EQ(rouge_l(c, same), 1.0);
  const std::vector<References> none{{s("x y")}};
  EXPECT_EQ(rouge_l(c, none), 0.0);
}

TEST(RougeL, LcsMatchesBruteForce) {
  std::mt19937_64 gen(4);
  const std::vector<std::string> words{"a", "b", "c", "d"};
  std::uniform_int_distribution<std::size_t> w(0, 3);
  std::uniform_int_distribution<int> len(0, 8);
  for (int t = 0; t < 3000; ++t) {
    Sentence a, b;
    for (int i = len(gen); i > 0; --i) a.push_back(words[w(gen)]);
    for (int i = len(gen); i > 0; --i) b.push_back(words[w(gen)]);
    ASSERT_EQ(lcs_length(a, b), oracle::lcs_brute(a, b));
  }
}

TEST(Cider, DisjointAndIdentical) {
  // four or more tokens so every n = 1..4 has n-grams
  const std::vector<Sentence> c{s("dog barks very loudly"), s("rain falls on roof")};
  const std::vector<References> same{{s("dog barks very loudly")}, {s("rain falls on roof")}};
  EXPECT_NEAR(cider(c, same), 10.0, 1e-9);
  const std::vector<References> disjoint{{s("car engine idles")}, {s("birds sing")}};
  EXPECT_EQ(cider(c, disjoint), 0.0);
  const std::vector<Sentence> one{s("dog")};
  const std::vector<References> one_ref{{s("dog")}};
  EXPECT_THROW(cider(one, one_ref), Error);
}

TEST(Cider, UbiquitousNgramContributesNothing) {
  // "the" is in every reference set: idf 0, so a candidate of just "the" scores 0
  const std::vector<Sentence> c{s("the"), s("the")};
  const std::vector<References> r{{s("the dog")}, {s("the rain")}};
  EXPECT_EQ(cider(c, r), 0.0);
}

TEST(Meteor, SingleChunkPenalty) {
  const Sentence a = s("the dog barks loudly");
  const MeteorAlignment al = meteor_align(a, a);
  EXPECT_EQ(al.matches, 4);
  EXPECT_EQ(al.chunks, 1);
  EXPECT_NEAR(meteor_sentence(a, a), 1.0 - 0.5 * std::pow(1.0 / 4.0, 3), 1e-12);
  EXPECT_EQ(meteor_sentence(s("rain"), s("dog")), 0.0);
  const MeteorAlignment stem = meteor_align(s("dog barks"), s("dog barked"));
  EXPECT_EQ(stem.matches, 2);
  EXPECT_EQ(stem.chunks, 1);
}

TEST(Meteor, FragmentedAlignment) {
  // cand "a b c", ref "c a b": matches 3, chunks 2 ("a b", "c")
  const MeteorAlignment al = meteor_align(s("a b c"), s("c a b"));
  EXPECT_EQ(al.matches, 3);
  EXPECT_EQ(al.chunks, 2);
  EXPECT_NEAR(meteor_sentence(s("a b c"), s("c a b")), 1.0 - 0.5 * std::pow(2.0 / 3.0, 3), 1e-12);
}

TEST(AllMetrics, SpecialTokensAndPermutation) {
  std::mt19937_64 gen(5);
  const Corpus c = random_corpus(gen, 6);
  const ScoreReport base = score_all(c.cands, c.refs);

  Corpus wrapped = c;
  for (auto& x : wrapped.cands) {
    x.insert(x.begin(), "<sos>");
    x.push_back("<eos>");
    x.push_back("<pad>");
  }
  const ScoreReport w = score_all(wrapped.cands, wrapped.refs);
  EXPECT_EQ(w.key_values(), base.key_values());

  Corpus perm;
  for (int i = 5; i >= 0; --i) {
    perm.cands.push_back(c.cands[i]);
    perm.refs.push_back(c.refs[i]);
  }
  const ScoreReport p = score_all(perm.cands, perm.refs);
  EXPECT_NEAR(p.bleu4, base.bleu4, 1e-12);
  EXPECT_NEAR(*p.cider, *base.cider, 1e-12);
  EXPECT_NEAR(p.meteor, base.meteor, 1e-12);
  EXPECT_NEAR(p.rouge_l, base.rouge_l, 1e-12);
}

TEST(AllMetrics, PerfectCorpusAndReport) {
  const std::vector<Sentence> c{s("dog barks loudly at night"), s("rain falls on the roof")};
  const std::vector<References> r{{c[0]}, {c[1]}};
  const ScoreReport rep = score_all(c, r);
  EXPECT_DOUBLE_EQ(rep.bleu1, 1.0);
  EXPECT_DOUBLE_EQ(rep.bleu4, 1.0);
  EXPECT_DOUBLE_EQ(rep.rouge_l, 1.0);
  EXPECT_NEAR(*rep.cider, 10.0, 1e-9);
  EXPECT_NEAR(rep.meteor, 1.0 - 0.5 * std::pow(1.0 / 5.0, 3), 1e-12);
  EXPECT_NE(rep.key_values().find("B-1: 1.000000"), std::string::npos);
  EXPECT_NE(rep.table().find("ROUGE_L"), std::string::npos);

  const std::vector<Sentence> one{c[0]};
  const std::vector<References> one_ref{{c[0]}};
  const ScoreReport single = score_all(one, one_ref);
  EXPECT_FALSE(single.cider.has_value());
  EXPECT_NE(single.table().find("n/a"), std::string::npos);
}
