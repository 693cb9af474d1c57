#include "aucap/captioner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "aucap/error.hpp"
#include "aucap/nn/adam.hpp"
#include "aucap/text_corpus.hpp"
#include "json.hpp"

namespace aucap::captioner {

using nn::Graph;
using nn::Mode;
using nn::Var;
using text::Vocabulary;

Matrix build_encoder_input(const Matrix& audio, const Eigen::VectorXd* sve,
                           audio::FeatureVariant variant) {
  const Eigen::Index dim = audio::feature_dim(variant);
  if (audio.cols() != dim) {
    throw Error(Errc::dimension_mismatch,
                std::string(audio::to_string(variant)) + " features must be " +
                    std::to_string(dim) + " wide, got " + std::to_string(audio.cols()));
  }
  if (audio.rows() == 0) throw Error(Errc::empty_input, "audio features have no rows");
  if (variant == audio::FeatureVariant::panns && audio.rows() != 1) {
    throw Error(Errc::dimension_mismatch, "PANNs input must be a single clip vector");
  }
  if (sve == nullptr) return audio;
  Matrix out(audio.rows(), audio.cols() + sve->size());
  out.leftCols(audio.cols()) = audio;
  out.rightCols(sve->size()) = sve->transpose().replicate(audio.rows(), 1);
  return out;
}

std::string CaptionerConfig::to_json() const {
  nlohmann::ordered_json j;
  j["variant"] = std::string(audio::to_string(variant));
  j["input_dim"] = input_dim;
  j["sve_dim"] = sve_dim;
  j["vocab_size"] = vocab_size;
  j["embed_dim"] = embed_dim;
  j["audio_gru1"] = audio_gru1;
  j["audio_gru2"] = audio_gru2;
  j["text_gru"] = text_gru;
  j["decoder_gru"] = decoder_gru;
  j["dropout"] = dropout;
  j["leaky_alpha"] = leaky_alpha;
  j["max_len"] = max_len;
  return j.dump();
}

CaptionerConfig CaptionerConfig::from_json(const std::string& text) {
  CaptionerConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.variant = audio::parse_variant(j.at("variant").get<std::string>());
    c.input_dim = j.at("input_dim").get<Eigen::Index>();
    c.sve_dim = j.at("sve_dim").get<Eigen::Index>();
    c.vocab_size = j.at("vocab_size").get<Eigen::Index>();
    c.embed_dim = j.at("embed_dim").get<Eigen::Index>();
    c.audio_gru1 = j.at("audio_gru1").get<Eigen::Index>();
    c.audio_gru2 = j.at("audio_gru2").get<Eigen::Index>();
    c.text_gru = j.at("text_gru").get<Eigen::Index>();
    c.decoder_gru = j.at("decoder_gru").get<Eigen::Index>();
    c.dropout = j.at("dropout").get<double>();
    c.leaky_alpha = j.at("leaky_alpha").get<double>();
    c.max_len = j.at("max_len").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed, std::string("captioner config: ") + e.what());
  }
  return c;
}

Captioner::Captioner(const CaptionerConfig& config, Rng& rng, const Matrix* word_vectors)
    : config_(config) {
  if (config.vocab_size <= static_cast<Eigen::Index>(Vocabulary::kUnkId)) {
    throw Error(Errc::invalid_argument, "captioner vocabulary must extend the reserved tokens");
  }
  const auto& c = config_;
  audio1_fwd = nn::GruCell("enc.audio1.fwd", c.input_dim, c.audio_gru1, rng);
  audio1_bwd = nn::GruCell("enc.audio1.bwd", c.input_dim, c.audio_gru1, rng);
  audio1_bn = nn::BatchNorm("enc.audio1.bn", 2 * c.audio_gru1);
  audio2_fwd = nn::GruCell("enc.audio2.fwd", 2 * c.audio_gru1, c.audio_gru2, rng);
  audio2_bwd = nn::GruCell("enc.audio2.bwd", 2 * c.audio_gru1, c.audio_gru2, rng);
  audio2_bn = nn::BatchNorm("enc.audio2.bn", 2 * c.audio_gru2);
  embedding = nn::Embedding("enc.embedding", c.vocab_size, c.embed_dim, rng);
  if (word_vectors != nullptr) {
    if (word_vectors->rows() != c.vocab_size || word_vectors->cols() != c.embed_dim) {
      throw Error(Errc::dimension_mismatch,
                  "word vectors are " + std::to_string(word_vectors->rows()) + "x" +
                      std::to_string(word_vectors->cols()) + ", embedding layer is " +
                      std::to_string(c.vocab_size) + "x" + std::to_string(c.embed_dim));
    }
    embedding.table.value = *word_vectors;
  }
  text_gru = nn::GruCell("enc.text", c.embed_dim, c.text_gru, rng);
  text_bn = nn::BatchNorm("enc.text.bn", c.text_gru);
  decoder_gru = nn::GruCell("dec.gru", c.fused_dim(), c.decoder_gru, rng);
  decoder_bn = nn::BatchNorm("dec.bn", c.decoder_gru);
  output = nn::Dense("dec.output", c.decoder_gru, c.vocab_size, rng);
}

std::vector<nn::Parameter*> Captioner::parameters() {
  std::vector<nn::Parameter*> out;
  auto take = [&](std::vector<nn::Parameter*> ps) { out.insert(out.end(), ps.begin(), ps.end()); };
  take(audio1_fwd.parameters());
  take(audio1_bwd.parameters());
  take(audio1_bn.parameters());
  take(audio2_fwd.parameters());
  take(audio2_bwd.parameters());
  take(audio2_bn.parameters());
  take(embedding.parameters());
  take(text_gru.parameters());
  take(text_bn.parameters());
  take(decoder_gru.parameters());
  take(decoder_bn.parameters());
  take(output.parameters());
  return out;
}

std::vector<nn::BatchNorm*> Captioner::batch_norms() {
  return {&audio1_bn, &audio2_bn, &text_bn, &decoder_bn};
}

Var Captioner::encode_audio(Graph& g, std::span<const Matrix* const> inputs, Mode mode, Rng& rng) {
  if (inputs.empty()) throw Error(Errc::empty_input, "no audio inputs");
  const Eigen::Index steps = inputs.front()->rows();
  for (const Matrix* m : inputs) {
    if (m->rows() != steps) {
      throw Error(Errc::dimension_mismatch, "audio inputs in one batch must share a length");
    }
    if (m->cols() != config_.input_dim) {
      throw Error(Errc::dimension_mismatch,
                  "encoder input must be " + std::to_string(config_.input_dim) + " wide, got " +
                      std::to_string(m->cols()));
    }
  }
  const auto batch = static_cast<Eigen::Index>(inputs.size());
  std::vector<Var> seq;
  seq.reserve(static_cast<std::size_t>(steps));
  for (Eigen::Index t = 0; t < steps; ++t) {
    Matrix frame(batch, config_.input_dim);
    for (Eigen::Index b = 0; b < batch; ++b) frame.row(b) = inputs[static_cast<std::size_t>(b)]->row(t);
    seq.push_back(nn::dropout(g.constant(std::move(frame)), config_.dropout, mode, rng));
  }
  const nn::BiGruOutput first = nn::bigru_forward(g, audio1_fwd, audio1_bwd, seq);
  const std::vector<Var> normed = audio1_bn.forward_sequence(g, first.sequence, mode);
  const nn::BiGruOutput second = nn::bigru_forward(g, audio2_fwd, audio2_bwd, normed);
  return audio2_bn.forward(g, second.final_state, mode);
}

Var Captioner::encode_text(Graph& g, std::span<const std::vector<std::int32_t>> prefixes,
                           Mode mode, Rng& rng) {
  if (prefixes.empty()) throw Error(Errc::empty_input, "no caption prefixes");
  std::size_t longest = 0;
  for (const auto& p : prefixes) {
    if (p.empty() || p.front() != Vocabulary::kSosId) {
      throw Error(Errc::invalid_argument, "caption prefix must start with <sos>");
    }
    longest = std::max(longest, p.size());
  }
  std::vector<Var> seq;
  std::vector<Eigen::VectorXd> masks;
  std::vector<std::int32_t> ids(prefixes.size());
  for (std::size_t t = 0; t < longest; ++t) {
    Eigen::VectorXd mask(static_cast<Eigen::Index>(prefixes.size()));
    for (std::size_t b = 0; b < prefixes.size(); ++b) {
      const std::size_t pad = longest - prefixes[b].size();
      const bool live = t >= pad;
      ids[b] = live ? prefixes[b][t - pad] : Vocabulary::kPadId;
      mask(static_cast<Eigen::Index>(b)) = live ? 1.0 : 0.0;
    }
    seq.push_back(nn::dropout(embedding.forward(g, ids), config_.dropout, mode, rng));
    masks.push_back(std::move(mask));
  }
  const std::vector<Var> states = nn::gru_forward(g, text_gru, seq, masks);
  return text_bn.forward(g, states.back(), mode);
}

Var Captioner::decode_step(Graph& g, Var audio_code, Var text_code, Mode mode) {
  const Var fused = nn::concat_cols({audio_code, text_code});
  const Var h0 = g.constant(Matrix::Zero(fused.rows(), config_.decoder_gru));
  const Var h = decoder_bn.forward(g, decoder_gru.step(g, fused, h0), mode);
  return nn::softmax_rows(output.forward(g, nn::leaky_relu(h, config_.leaky_alpha)));
}

Var Captioner::forward(Graph& g, std::span<const Matrix* const> inputs,
                       std::span<const std::vector<std::int32_t>> prefixes, Mode mode, Rng& rng) {
  if (inputs.size() != prefixes.size()) {
    throw Error(Errc::dimension_mismatch, "one caption prefix per audio input required");
  }
  const Var a = encode_audio(g, inputs, mode, rng);
  const Var t = encode_text(g, prefixes, mode, rng);
  return decode_step(g, a, t, mode);
}

std::vector<std::int32_t> Captioner::greedy_decode(const Matrix& input, int max_len) {
  if (max_len <= 0) max_len = config_.max_len;
  Rng unused(0);
  Matrix audio_code;
  {
    Graph g;
    const Matrix* in = &input;
    audio_code = encode_audio(g, std::span(&in, 1), Mode::infer, unused).value();
  }
  std::vector<std::int32_t> tokens{Vocabulary::kSosId};
  while (static_cast<int>(tokens.size()) < max_len) {
    Graph g;
    const Var t = encode_text(g, std::span(&tokens, 1), Mode::infer, unused);
    const Var p = decode_step(g, g.constant(audio_code), t, Mode::infer);
    Eigen::Index best = 0;
    p.value().row(0).maxCoeff(&best);  // first maximum wins
    tokens.push_back(static_cast<std::int32_t>(best));
    if (best == Vocabulary::kEosId) break;
  }
  return tokens;
}

nn::TensorStore Captioner::to_store(std::uint64_t vocab_hash, std::uint64_t corpus_hash) const {
  nn::TensorStore store;
  nlohmann::ordered_json meta;
  meta["model"] = "captioner";
  meta["config"] = nlohmann::json::parse(config_.to_json());
  meta["vocab_hash"] = hex64(vocab_hash);
  meta["corpus_hash"] = hex64(corpus_hash);
  store.metadata = meta.dump();
  auto& self = const_cast<Captioner&>(*this);
  for (const nn::Parameter* p : self.parameters()) store.tensors.push_back({p->name, p->value});
  for (const nn::BatchNorm* bn : self.batch_norms()) {
    const std::string base = bn->gamma.name.substr(0, bn->gamma.name.size() - 6);
    store.tensors.push_back({base + ".running_mean", bn->running_mean});
    store.tensors.push_back({base + ".running_var", bn->running_var});
  }
  return store;
}

Captioner Captioner::from_store(const nn::TensorStore& store,
                                std::optional<std::uint64_t> vocab_hash,
                                std::optional<std::uint64_t> corpus_hash) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(store.metadata);
    if (meta.at("model") != "captioner") throw Error(Errc::malformed, "not a captioner checkpoint");
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed, std::string("captioner checkpoint metadata: ") + e.what());
  }
  auto check = [&](const char* key, std::optional<std::uint64_t> expected, const char* what) {
    const std::string stored = meta.value(key, "");
    if (expected && stored != hex64(*expected)) {
      throw Error(Errc::hash_mismatch, std::string(what) + " hash mismatch: checkpoint has " +
                                           stored + ", current " + what + " is " +
                                           hex64(*expected));
    }
  };
  check("vocab_hash", vocab_hash, "vocabulary");
  check("corpus_hash", corpus_hash, "subject-verb corpus");

  Rng rng(0);
  Captioner m(CaptionerConfig::from_json(meta.at("config").dump()), rng);
  for (nn::Parameter* p : m.parameters()) {
    p->value = store.require(p->name, p->value.rows(), p->value.cols());
    p->zero_grad();
  }
  for (nn::BatchNorm* bn : m.batch_norms()) {
    const std::string base = bn->gamma.name.substr(0, bn->gamma.name.size() - 6);
    bn->running_mean = store.require(base + ".running_mean", 1, bn->dim());
    bn->running_var = store.require(base + ".running_var", 1, bn->dim());
  }
  return m;
}

std::vector<Example> expand_prefixes(std::span<const Instance> instances) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (std::size_t len = 1; len < instances[i].tokens.size(); ++len) out.push_back({i, len});
  }
  return out;
}

namespace {

struct Batch {
  std::vector<const Matrix*> inputs;
  std::vector<std::vector<std::int32_t>> prefixes;
  std::vector<std::int32_t> targets;
};

Batch assemble(std::span<const Instance> instances, std::span<const Example> examples) {
  Batch b;
  for (const Example& e : examples) {
    const Instance& inst = instances[e.instance];
    b.inputs.push_back(inst.input);
    b.prefixes.emplace_back(inst.tokens.begin(),
                            inst.tokens.begin() + static_cast<std::ptrdiff_t>(e.prefix_len));
    b.targets.push_back(inst.tokens[e.prefix_len]);
  }
  return b;
}

// Batches never mix input lengths and never hold a single example, since
// batch normalization needs two rows in train mode.
std::vector<std::vector<Example>> make_batches(std::span<const Instance> instances,
                                               std::vector<Example> examples, int batch,
                                               bool shuffled, Rng& rng) {
  if (shuffled) shuffle(examples, rng);
  std::map<Eigen::Index, std::vector<Example>> buckets;
  for (const Example& e : examples) buckets[instances[e.instance].input->rows()].push_back(e);
  std::vector<std::vector<Example>> out;
  for (auto& [len, bucket] : buckets) {
    if (shuffled && bucket.size() < 2) {
      throw Error(Errc::invalid_argument,
                  "input length " + std::to_string(len) + " has a single training example");
    }
    const std::size_t first = out.size();
    for (std::size_t i = 0; i < bucket.size(); i += static_cast<std::size_t>(batch)) {
      const auto end = std::min(bucket.size(), i + static_cast<std::size_t>(batch));
      out.emplace_back(bucket.begin() + static_cast<std::ptrdiff_t>(i),
                       bucket.begin() + static_cast<std::ptrdiff_t>(end));
    }
    if (shuffled && out.size() - first >= 2 && out.back().size() == 1) {
      out[out.size() - 2].push_back(out.back().front());
      out.pop_back();
    }
  }
  if (shuffled) shuffle(out, rng);
  return out;
}

void validate(const Captioner& model, std::span<const Instance> instances) {
  for (const Instance& inst : instances) {
    if (inst.input == nullptr) throw Error(Errc::invalid_argument, "instance without input");
    if (inst.tokens.size() < 2) {
      throw Error(Errc::invalid_argument, "caption needs at least <sos> and one more token");
    }
    for (std::int32_t id : inst.tokens) {
      if (id < 0 || id >= model.config().vocab_size) {
        throw Error(Errc::invalid_argument,
                    "token id " + std::to_string(id) + " outside the model vocabulary");
      }
    }
  }
}

}  // namespace

double evaluate_loss(Captioner& model, std::span<const Instance> instances, int batch) {
  validate(model, instances);
  Rng unused(0);
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& chunk :
       make_batches(instances, expand_prefixes(instances), std::max(batch, 1), false, unused)) {
    const Batch b = assemble(instances, chunk);
    Graph g;
    const Var p = model.forward(g, b.inputs, b.prefixes, Mode::infer, unused);
    total += nn::cross_entropy(p, b.targets).value()(0, 0) * static_cast<double>(chunk.size());
    count += chunk.size();
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : total / static_cast<double>(count);
}

TrainResult train(Captioner& model, std::span<const Instance> train_set,
                  std::span<const Instance> validation_set, const TrainConfig& config) {
  if (train_set.empty()) throw Error(Errc::empty_input, "captioner training set is empty");
  if (config.epochs < 1 || config.batch < 2) {
    throw Error(Errc::invalid_argument, "captioner needs epochs >= 1 and batch >= 2");
  }
  validate(model, train_set);
  validate(model, validation_set);

  Rng rng(config.seed);
  nn::Adam adam(model.parameters(), {.learning_rate = config.learning_rate});
  const std::vector<Example> examples = expand_prefixes(train_set);

  struct Snapshot {
    std::vector<Matrix> params;
    std::vector<Eigen::RowVectorXd> means, vars;
  };
  auto snapshot = [&] {
    Snapshot s;
    for (nn::Parameter* p : model.parameters()) s.params.push_back(p->value);
    for (nn::BatchNorm* bn : model.batch_norms()) {
      s.means.push_back(bn->running_mean);
      s.vars.push_back(bn->running_var);
    }
    return s;
  };

  TrainResult result;
  double best = std::numeric_limits<double>::infinity();
  Snapshot kept;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double total = 0.0;
    std::size_t seen = 0;
    for (const auto& chunk : make_batches(train_set, examples, config.batch, true, rng)) {
      const Batch b = assemble(train_set, chunk);
      Graph g;
      const Var p = model.forward(g, b.inputs, b.prefixes, Mode::train, rng);
      const Var loss = nn::cross_entropy(p, b.targets);
      total += loss.value()(0, 0) * static_cast<double>(chunk.size());
      seen += chunk.size();
      g.backward(loss);
      adam.step();
    }
    const double train_loss = total / static_cast<double>(seen);
    result.train_loss.push_back(train_loss);

    double val_loss = std::numeric_limits<double>::quiet_NaN();
    if (!validation_set.empty()) {
      val_loss = evaluate_loss(model, validation_set, config.batch);
      if (val_loss < best) {
        best = val_loss;
        result.best_epoch = epoch;
        kept = snapshot();
      }
    }
    result.validation_loss.push_back(val_loss);
    if (config.on_epoch) config.on_epoch(epoch, train_loss, val_loss);
  }

  if (validation_set.empty()) {
    result.best_epoch = config.epochs;
  } else {
    const auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = kept.params[i];
    const auto bns = model.batch_norms();
    for (std::size_t i = 0; i < bns.size(); ++i) {
      bns[i]->running_mean = kept.means[i];
      bns[i]->running_var = kept.vars[i];
    }
  }
  return result;
}

}  // namespace aucap::captioner
