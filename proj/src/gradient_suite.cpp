#include "aucap/gradient_suite.hpp"

#include <chrono>

#include "aucap/captioner.hpp"
#include "aucap/nn/layers.hpp"
#include "aucap/sve_predictor.hpp"

namespace aucap {

using nn::Graph;
using nn::Matrix;
using nn::Mode;
using nn::Parameter;
using nn::Var;

namespace {

// Random linear read-out so that every output entry gets a distinct weight.
Var project(Graph& g, Var y, const Matrix& weights) {
  return nn::sum_all(nn::mul(y, g.constant(weights)));
}

template <typename Fn>
SuiteEntry timed(std::string name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  SuiteEntry e{std::move(name), fn(), 0.0};
  e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return e;
}

}  // namespace

std::vector<SuiteEntry> run_gradient_suite(std::uint64_t seed, const nn::GradCheckConfig& config) {
  Rng rng(seed);
  std::vector<SuiteEntry> out;
  auto pick = [&](int lo, int hi) {
    return static_cast<Eigen::Index>(lo + static_cast<int>(uniform01(rng) * (hi - lo + 1)));
  };

  out.push_back(timed("dense", [&] {
    const Eigen::Index in = pick(2, 16), o = pick(2, 16), b = pick(2, 5);
    nn::Dense layer("dense", in, o, rng);
    layer.bias.value = normal_matrix(1, o, 0.5, rng);
    Parameter x("x", normal_matrix(b, in, 1.0, rng));
    const Matrix w = normal_matrix(b, o, 1.0, rng);
    std::vector<Parameter*> ps{&layer.weight, &layer.bias, &x};
    return nn::check_gradients(
        [&](Graph& g) { return project(g, layer.forward(g, g.param(x)), w); }, ps, config);
  }));

  out.push_back(timed("activations", [&] {
    const Eigen::Index b = pick(2, 5), d = pick(3, 10);
    Parameter x("x", normal_matrix(b, d, 1.0, rng));
    const Matrix w = normal_matrix(b, d, 1.0, rng);
    std::vector<std::int32_t> targets;
    for (Eigen::Index i = 0; i < b; ++i) targets.push_back(static_cast<std::int32_t>(pick(0, static_cast<int>(d) - 1)));
    std::vector<Parameter*> ps{&x};
    return nn::check_gradients(
        [&](Graph& g) {
          const Var v = g.param(x);
          const Var mixed = nn::add(nn::add(nn::sigmoid(v), nn::tanh(v)),
                                    nn::add(nn::relu(v), nn::leaky_relu(v, 0.3)));
          const Var ce = nn::cross_entropy(nn::softmax_rows(v), targets);
          return nn::add(project(g, mixed, w), ce);
        },
        ps, config);
  }));

  out.push_back(timed("gru_cell", [&] {
    const Eigen::Index in = pick(2, 8), h = pick(2, 16), b = pick(2, 4);
    nn::GruCell cell("gru", in, h, rng);
    for (Parameter* p : {&cell.b_update, &cell.b_reset, &cell.b_candidate}) {
      p->value = normal_matrix(1, h, 0.3, rng);
    }
    Parameter x("x", normal_matrix(b, in, 1.0, rng));
    Parameter h0("h_prev", uniform_matrix(b, h, -0.9, 0.9, rng));
    const Matrix w = normal_matrix(b, h, 1.0, rng);
    std::vector<Parameter*> ps = cell.parameters();
    ps.push_back(&x);
    ps.push_back(&h0);
    return nn::check_gradients(
        [&](Graph& g) { return project(g, cell.step(g, g.param(x), g.param(h0)), w); }, ps,
        config);
  }));

  out.push_back(timed("bigru", [&] {
    const Eigen::Index in = pick(2, 6), h = pick(2, 8), b = pick(2, 3), steps = pick(2, 5);
    nn::GruCell fwd("bigru.fwd", in, h, rng), bwd("bigru.bwd", in, h, rng);
    std::vector<Parameter> xs;
    for (Eigen::Index t = 0; t < steps; ++t) {
      xs.emplace_back("x" + std::to_string(t), normal_matrix(b, in, 1.0, rng));
    }
    std::vector<Matrix> ws;
    for (Eigen::Index t = 0; t < steps; ++t) ws.push_back(normal_matrix(b, 2 * h, 1.0, rng));
    std::vector<Parameter*> ps = fwd.parameters();
    for (Parameter* p : bwd.parameters()) ps.push_back(p);
    for (auto& x : xs) ps.push_back(&x);
    return nn::check_gradients(
        [&](Graph& g) {
          std::vector<Var> seq;
          for (auto& x : xs) seq.push_back(g.param(x));
          const nn::BiGruOutput o = nn::bigru_forward(g, fwd, bwd, seq);
          Var loss = project(g, o.sequence[0], ws[0]);
          for (std::size_t t = 1; t < o.sequence.size(); ++t) {
            loss = nn::add(loss, project(g, o.sequence[t], ws[t]));
          }
          return loss;
        },
        ps, config);
  }));

  out.push_back(timed("embedding", [&] {
    const Eigen::Index vocab = pick(3, 12), dim = pick(2, 16);
    nn::Embedding emb("embedding", vocab, dim, rng);
    std::vector<std::int32_t> ids;
    for (int i = 0; i < 6; ++i) ids.push_back(static_cast<std::int32_t>(pick(0, static_cast<int>(vocab) - 1)));
    ids.push_back(ids.front());
    const Matrix w = normal_matrix(static_cast<Eigen::Index>(ids.size()), dim, 1.0, rng);
    std::vector<Parameter*> ps = emb.parameters();
    return nn::check_gradients([&](Graph& g) { return project(g, emb.forward(g, ids), w); }, ps,
                               config);
  }));

  out.push_back(timed("batch_norm", [&] {
    const Eigen::Index d = pick(2, 16), b = pick(3, 8);
    nn::BatchNorm bn("bn", d);
    bn.gamma.value = uniform_matrix(1, d, 0.5, 1.5, rng);
    bn.beta.value = normal_matrix(1, d, 0.5, rng);
    Parameter x("x", normal_matrix(b, d, 1.0, rng));
    const Matrix w = normal_matrix(b, d, 1.0, rng);
    std::vector<Parameter*> ps{&bn.gamma, &bn.beta, &x};
    return nn::check_gradients(
        [&](Graph& g) { return project(g, bn.forward(g, g.param(x), Mode::train), w); }, ps,
        config);
  }));

  out.push_back(timed("mlp", [&] {
    const Eigen::Index in = pick(3, 10), k = pick(2, 6);
    sve::Mlp mlp(in, k, {pick(4, 16), pick(4, 16)}, rng);
    for (auto& l : mlp.layers()) l.bias.value = normal_matrix(1, l.out_dim(), 0.3, rng);
    const Matrix x = normal_matrix(4, in, 1.0, rng);
    Matrix y = Matrix::Zero(4, k);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = uniform01(rng) < 0.5 ? 1.0 : 0.0;
    const std::uint64_t mask_seed = rng();
    std::vector<Parameter*> ps = mlp.parameters();
    return nn::check_gradients(
        [&](Graph& g) {
          Rng masks(mask_seed);
          const Var z = mlp.logits(g, g.constant(x), Mode::train, 0.5, masks);
          return nn::sigmoid_binary_cross_entropy(z, y);
        },
        ps, config);
  }));

  out.push_back(timed("captioner", [&] {
    captioner::CaptionerConfig c;
    c.variant = audio::FeatureVariant::logmel;
    c.sve_dim = 2;
    c.input_dim = 4 + c.sve_dim;
    c.vocab_size = 10;
    c.embed_dim = 8;
    c.audio_gru1 = 4;
    c.audio_gru2 = 8;
    c.text_gru = 16;
    c.decoder_gru = 16;
    captioner::Captioner model(c, rng);
    for (Parameter* p : model.parameters()) {
      if (p->name.find(".b_") != std::string::npos || p->name.ends_with(".beta")) {
        p->value = normal_matrix(1, p->value.cols(), 0.2, rng);
      }
    }
    std::vector<Matrix> inputs;
    for (int i = 0; i < 3; ++i) inputs.push_back(normal_matrix(3, c.input_dim, 1.0, rng));
    const std::vector<const Matrix*> ptrs{&inputs[0], &inputs[1], &inputs[2]};
    const std::vector<std::vector<std::int32_t>> prefixes{{1}, {1, 5, 7}, {1, 4}};
    const std::vector<std::int32_t> targets{5, 2, 9};
    const std::uint64_t mask_seed = rng();
    std::vector<Parameter*> ps = model.parameters();
    return nn::check_gradients(
        [&](Graph& g) {
          Rng masks(mask_seed);
          return nn::cross_entropy(model.forward(g, ptrs, prefixes, Mode::train, masks), targets);
        },
        ps, config);
  }));

  return out;
}

}  // namespace aucap
