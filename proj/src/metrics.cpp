#include "aucap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "aucap/error.hpp"
#include "aucap/semantics.hpp"
#include "aucap/text_corpus.hpp"

namespace aucap::metrics {

namespace {

void check_inputs(std::span<const Sentence> candidates, std::span<const References> references) {
  if (candidates.empty()) throw Error(Errc::empty_input, "no candidate captions to score");
  if (candidates.size() != references.size()) {
    throw Error(Errc::dimension_mismatch, "one reference set per candidate required");
  }
  for (const auto& refs : references) {
    if (refs.empty()) throw Error(Errc::invalid_argument, "candidate without references");
  }
}

std::vector<References> strip_all(std::span<const References> references) {
  std::vector<References> out;
  out.reserve(references.size());
  for (const auto& refs : references) {
    References r;
    for (const auto& s : refs) r.push_back(strip_special(s));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

Sentence strip_special(const Sentence& s) {
  Sentence out;
  for (const auto& w : s) {
    if (!text::is_special(w)) out.push_back(w);
  }
  return out;
}

NGramCounts ngram_counts(const Sentence& s, int n) {
  NGramCounts counts;
  const auto len = static_cast<int>(s.size());
  for (int i = 0; i + n <= len; ++i) ++counts[Sentence(s.begin() + i, s.begin() + i + n)];
  return counts;
}

double bleu(std::span<const Sentence> candidates, std::span<const References> references, int n) {
  check_inputs(candidates, references);
  if (n < 1) throw Error(Errc::invalid_argument, "BLEU order must be positive");
  const auto refs = strip_all(references);

  std::vector<double> matched(static_cast<std::size_t>(n), 0.0);
  std::vector<double> total(static_cast<std::size_t>(n), 0.0);
  double cand_len = 0.0;
  double ref_len = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Sentence cand = strip_special(candidates[i]);
    const auto c = static_cast<double>(cand.size());
    cand_len += c;
    double closest = std::numeric_limits<double>::infinity();
    for (const auto& r : refs[i]) {
      const auto rl = static_cast<double>(r.size());
      if (std::abs(rl - c) < std::abs(closest - c) ||
          (std::abs(rl - c) == std::abs(closest - c) && rl < closest)) {
        closest = rl;
      }
    }
    ref_len += closest;

    for (int k = 1; k <= n; ++k) {
      const NGramCounts cc = ngram_counts(cand, k);
      NGramCounts max_ref;
      for (const auto& r : refs[i]) {
        for (const auto& [g, cnt] : ngram_counts(r, k)) max_ref[g] = std::max(max_ref[g], cnt);
      }
      for (const auto& [g, cnt] : cc) {
        const auto it = max_ref.find(g);
        matched[static_cast<std::size_t>(k - 1)] += std::min(cnt, it == max_ref.end() ? 0 : it->second);
        total[static_cast<std::size_t>(k - 1)] += cnt;
      }
    }
  }

  double log_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (matched[static_cast<std::size_t>(k)] == 0.0) return 0.0;
    log_sum += std::log(matched[static_cast<std::size_t>(k)] / total[static_cast<std::size_t>(k)]);
  }
  const double bp = cand_len < ref_len ? std::exp(1.0 - ref_len / cand_len) : 1.0;
  return bp * std::exp(log_sum / n);
}

std::size_t lcs_length(const Sentence& a, const Sentence& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::span<const Sentence> candidates, std::span<const References> references) {
  check_inputs(candidates, references);
  const auto refs = strip_all(references);
  constexpr double beta = 1.2;
  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Sentence cand = strip_special(candidates[i]);
    double best = 0.0;
    for (const auto& r : refs[i]) {
      const auto l = static_cast<double>(lcs_length(cand, r));
      if (l == 0.0) continue;
      const double p = l / static_cast<double>(cand.size());
      const double rec = l / static_cast<double>(r.size());
      best = std::max(best, (1 + beta * beta) * p * rec / (rec + beta * beta * p));
    }
    sum += best;
  }
  return sum / static_cast<double>(candidates.size());
}

double cider(std::span<const Sentence> candidates, std::span<const References> references) {
  check_inputs(candidates, references);
  if (candidates.size() < 2) {
    throw Error(Errc::invalid_argument, "CIDEr needs at least two clips for document frequencies");
  }
  const auto refs = strip_all(references);
  const auto docs = static_cast<double>(candidates.size());
  constexpr int kMaxN = 4;

  double score = 0.0;
  for (int n = 1; n <= kMaxN; ++n) {
    std::map<Sentence, double> df;
    for (const auto& set : refs) {
      std::set<Sentence> seen;
      for (const auto& r : set) {
        for (const auto& [g, c] : ngram_counts(r, n)) seen.insert(g);
      }
      for (const auto& g : seen) df[g] += 1.0;
    }
    auto tfidf = [&](const Sentence& s) {
      std::map<Sentence, double> v;
      for (const auto& [g, c] : ngram_counts(s, n)) {
        const auto it = df.find(g);
        const double d = it == df.end() ? 0.0 : it->second;
        v[g] = c * std::log(docs / std::max(1.0, d));
      }
      return v;
    };
    auto norm = [](const std::map<Sentence, double>& v) {
      double s = 0.0;
      for (const auto& [g, x] : v) s += x * x;
      return std::sqrt(s);
    };

    double per_n = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto vc = tfidf(strip_special(candidates[i]));
      const double nc = norm(vc);
      double acc = 0.0;
      for (const auto& r : refs[i]) {
        const auto vr = tfidf(r);
        const double nr = norm(vr);
        if (nc == 0.0 || nr == 0.0) continue;
        double dot = 0.0;
        for (const auto& [g, x] : vc) {
          const auto it = vr.find(g);
          if (it != vr.end()) dot += x * it->second;
        }
        acc += dot / (nc * nr);
      }
      per_n += 10.0 * acc / static_cast<double>(refs[i].size());
    }
    score += per_n / docs;
  }
  return score / kMaxN;
}

MeteorAlignment meteor_align(const Sentence& candidate, const Sentence& reference) {
  const std::size_t nc = candidate.size();
  std::vector<int> link(nc, -1);
  std::vector<bool> used(reference.size(), false);
  auto stage = [&](auto&& same) {
    for (std::size_t i = 0; i < nc; ++i) {
      if (link[i] >= 0) continue;
      for (std::size_t j = 0; j < reference.size(); ++j) {
        if (!used[j] && same(candidate[i], reference[j])) {
          link[i] = static_cast<int>(j);
          used[j] = true;
          break;
        }
      }
    }
  };
  stage([](const std::string& a, const std::string& b) { return a == b; });
  stage([](const std::string& a, const std::string& b) {
    return semantics::to_root(a) == semantics::to_root(b);
  });

  MeteorAlignment out;
  int prev = -2;
  for (std::size_t i = 0; i < nc; ++i) {
    if (link[i] < 0) {
      prev = -2;
      continue;
    }
    ++out.matches;
    if (link[i] != prev + 1) ++out.chunks;
    prev = link[i];
  }
  return out;
}

double meteor_sentence(const Sentence& candidate, const Sentence& reference) {
  const Sentence c = strip_special(candidate);
  const Sentence r = strip_special(reference);
  const MeteorAlignment a = meteor_align(c, r);
  if (a.matches == 0) return 0.0;
  const double p = static_cast<double>(a.matches) / static_cast<double>(c.size());
  const double rec = static_cast<double>(a.matches) / static_cast<double>(r.size());
  const double f = 10.0 * p * rec / (rec + 9.0 * p);
  const double frag = static_cast<double>(a.chunks) / static_cast<double>(a.matches);
  return f * (1.0 - 0.5 * frag * frag * frag);
}

double meteor(std::span<const Sentence> candidates, std::span<const References> references) {
  check_inputs(candidates, references);
  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double best = 0.0;
    for (const auto& r : references[i]) best = std::max(best, meteor_sentence(candidates[i], r));
    sum += best;
  }
  return sum / static_cast<double>(candidates.size());
}

std::string ScoreReport::table() const {
  const char* names[] = {"B-1", "B-2", "B-3", "B-4", "CIDEr", "METEOR", "ROUGE_L"};
  const double values[] = {bleu1, bleu2, bleu3, bleu4, cider.value_or(0.0), meteor, rouge_l};
  std::string head, row;
  char buf[32];
  for (int i = 0; i < 7; ++i) {
    std::snprintf(buf, sizeof buf, "%-9s", names[i]);
    head += buf;
    if (i == 4 && !cider) {
      std::snprintf(buf, sizeof buf, "%-9s", "n/a");
    } else {
      std::snprintf(buf, sizeof buf, "%-9.4f", values[i]);
    }
    row += buf;
  }
  while (!head.empty() && head.back() == ' ') head.pop_back();
  while (!row.empty() && row.back() == ' ') row.pop_back();
  return head + "\n" + row + "\n";
}

std::string ScoreReport::key_values() const {
  const char* names[] = {"B-1", "B-2", "B-3", "B-4", "CIDEr", "METEOR", "ROUGE_L"};
  const double values[] = {bleu1, bleu2, bleu3, bleu4, cider.value_or(0.0), meteor, rouge_l};
  std::string out;
  char buf[64];
  for (int i = 0; i < 7; ++i) {
    if (i == 4 && !cider) {
      std::snprintf(buf, sizeof buf, "%s: n/a\n", names[i]);
    } else {
      std::snprintf(buf, sizeof buf, "%s: %.6f\n", names[i], values[i]);
    }
    out += buf;
  }
  return out;
}

ScoreReport score_all(std::span<const Sentence> candidates, std::span<const References> references) {
  ScoreReport r;
  r.bleu1 = bleu(candidates, references, 1);
  r.bleu2 = bleu(candidates, references, 2);
  r.bleu3 = bleu(candidates, references, 3);
  r.bleu4 = bleu(candidates, references, 4);
  if (candidates.size() >= 2) r.cider = cider(candidates, references);
  r.meteor = meteor(candidates, references);
  r.rouge_l = rouge_l(candidates, references);
  return r;
}

}  // namespace aucap::metrics
