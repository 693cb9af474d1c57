#include <algorithm>
#include <cmath>
#include <random>

#include "aucap/error.hpp"
#include "aucap/text_corpus.hpp"

namespace aucap::text {
namespace {

// -ln(sigmoid(x)), stable for large |x|.
double neg_log_sigmoid(double x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Uniform in [0, 1) from the top 53 bits; identical on every standard library.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

SgnsTerm sgns_loss(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                   std::span<const Eigen::VectorXd> negatives) {
  SgnsTerm t;
  const double pos = context.dot(center);
  t.loss = neg_log_sigmoid(pos);
  const double gpos = sigmoid(pos) - 1.0;
  t.grad_center = gpos * context;
  t.grad_context = gpos * center;
  t.grad_negatives.reserve(negatives.size());
  for (const auto& u : negatives) {
    const double s = u.dot(center);
    t.loss += neg_log_sigmoid(-s);
    const double g = sigmoid(s);
    t.grad_center += g * u;
    t.grad_negatives.push_back(g * center);
  }
  return t;
}

Word2VecResult train_word2vec(std::span<const TokenizedCaption> corpus, const Vocabulary& vocab,
                              const Word2VecConfig& config) {
  if (corpus.empty()) throw Error(Errc::invalid_argument, "word2vec: empty corpus");
  if (config.dim != 256) {
    throw Error(Errc::invalid_argument, "word2vec: embedding dimension must be 256, got " +
                                            std::to_string(config.dim));
  }
  if (config.window < 1 || config.negatives < 0 || config.epochs < 1) {
    throw Error(Errc::invalid_argument, "word2vec: window, negatives and epochs must be positive");
  }

  const auto v_size = static_cast<Eigen::Index>(vocab.size());
  const Eigen::Index dim = config.dim;
  std::vector<std::vector<std::int32_t>> sentences;
  std::vector<double> counts(static_cast<std::size_t>(v_size), 0.0);
  std::size_t total_tokens = 0;
  for (const auto& c : corpus) {
    sentences.push_back(vocab.encode(c));
    for (auto id : sentences.back()) counts[static_cast<std::size_t>(id)] += 1.0;
    total_tokens += sentences.back().size();
  }

  // Unigram^0.75 noise distribution as a cumulative table.
  std::vector<double> cumulative(counts.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    acc += std::pow(counts[i], 0.75);
    cumulative[i] = acc;
  }

  std::mt19937_64 rng(config.seed);
  Eigen::MatrixXd input(v_size, dim);
  for (Eigen::Index r = 0; r < v_size; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      input(r, c) = (uniform01(rng) - 0.5) / static_cast<double>(dim);
    }
  }
  Eigen::MatrixXd output = Eigen::MatrixXd::Zero(v_size, dim);

  auto draw_negative = [&]() {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<std::int32_t>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
  };

  Word2VecResult result;
  const double total_work = static_cast<double>(config.epochs) * static_cast<double>(total_tokens);
  double done = 0.0;
  std::vector<Eigen::VectorXd> negs;
  std::vector<std::int32_t> neg_ids;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t pairs = 0;
    for (const auto& sent : sentences) {
      const auto n = static_cast<std::ptrdiff_t>(sent.size());
      for (std::ptrdiff_t i = 0; i < n; ++i, done += 1.0) {
        const double lr = config.learning_rate * std::max(1e-4, 1.0 - done / total_work);
        const auto reach = 1 + static_cast<std::ptrdiff_t>(rng() % static_cast<std::uint64_t>(config.window));
        const std::int32_t center = sent[static_cast<std::size_t>(i)];
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - reach);
             j <= std::min(n - 1, i + reach); ++j) {
          if (j == i) continue;
          const std::int32_t ctx = sent[static_cast<std::size_t>(j)];
          negs.clear();
          neg_ids.clear();
          for (int k = 0; k < config.negatives; ++k) {
            std::int32_t id = draw_negative();
            for (int tries = 0; id == ctx && tries < 8; ++tries) id = draw_negative();
            if (id == ctx) continue;
            neg_ids.push_back(id);
            negs.emplace_back(output.row(id).transpose());
          }
          const SgnsTerm t = sgns_loss(input.row(center).transpose(),
                                       output.row(ctx).transpose(), negs);
          loss_sum += t.loss;
          ++pairs;
          input.row(center) -= lr * t.grad_center.transpose();
          output.row(ctx) -= lr * t.grad_context.transpose();
          for (std::size_t k = 0; k < neg_ids.size(); ++k) {
            output.row(neg_ids[k]) -= lr * t.grad_negatives[k].transpose();
          }
        }
      }
    }
    result.epoch_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
  }
  result.input_vectors = std::move(input);
  return result;
}

}  // namespace aucap::text
