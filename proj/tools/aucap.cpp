// aucap: command-line driver for feature extraction, corpus and embedding
// builds, training, captioning and scoring.

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "aucap/captioner.hpp"
#include "aucap/dataset.hpp"
#include "aucap/emb_io.hpp"
#include "aucap/error.hpp"
#include "aucap/gradient_suite.hpp"
#include "aucap/metrics.hpp"
#include "aucap/semantics.hpp"
#include "aucap/sve_predictor.hpp"
#include "aucap/text_corpus.hpp"

namespace fs = std::filesystem;
using namespace aucap;

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kMissing = 3,
  kBadInput = 4,
  kIo = 5,
  kCheckFailed = 6,
};

int exit_code(Errc code) {
  switch (code) {
    case Errc::not_found:
    case Errc::missing_artifact: return kMissing;
    case Errc::malformed:
    case Errc::unsupported:
    case Errc::dimension_mismatch:
    case Errc::hash_mismatch: return kBadInput;
    case Errc::invalid_argument:
    case Errc::empty_input: return kUsage;
    case Errc::io_failure: return kIo;
  }
  return kFailure;
}

struct Options {
  std::string config;
  std::uint64_t seed = 1;
  std::string variant = "logmel";
  std::string use_sve = "on";
  int epochs = 0;  // 0: command default
  int batch = 64;
  std::string out = "aucap_out";
  bool out_given = false;
  std::string csv;
  std::string format = "generic";
  std::string split = "development";
  std::string media = ".";
  std::string cache;
  std::string lexicon;
  double lr = 1e-3;
  double val_fraction = 0.1;
  double dropout = 0.5;
  std::string hidden = "1024,1024,512,512,256,256";
  int max_len = 22;
  std::string candidates;
  std::string references;

  audio::FeatureVariant feature_variant() const { return audio::parse_variant(variant); }
  bool sve_on() const { return use_sve == "on"; }
  fs::path out_dir() const { return out; }
  fs::path cache_root() const {
    if (!cache.empty()) return cache;
    if (const char* env = std::getenv("AUCAP_CACHE"); env != nullptr && *env != '\0') return env;
    return out_dir() / "cache";
  }
};

// Artifact names inside --out.
const char* const kVocab = "vocab.txt";
const char* const kWord2Vec = "word2vec.emb";
const char* const kCorpus = "corpus.txt";
const char* const kSveMatrix = "sve.emb";
const char* const kMlp = "mlp.ckpt";
const char* const kCaptioner = "captioner.ckpt";
const char* const kPredictions = "predictions.tsv";
const char* const kScores = "scores.txt";
const char* const kTrainLog = "train_log.tsv";

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
  return fnv1a64(purpose, fnv1a64(std::to_string(seed)));
}

fs::path require_artifact(const fs::path& path, std::string_view producer) {
  if (!fs::exists(path)) {
    throw Error(Errc::missing_artifact, "missing prerequisite artifact " + path.string() +
                                            " (run '" + std::string(producer) + "' first)");
  }
  return path;
}

class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".aucap.lock") {
    fs::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw Error(Errc::io_failure, "output directory " + dir.string() +
                                        " is locked by another run (remove " + path_.string() +
                                        " if stale)");
    }
  }
  ~DirLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

void write_text(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_failure, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(Errc::io_failure, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<Eigen::Index> parse_widths(const std::string& text) {
  std::vector<Eigen::Index> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    try {
      const long v = std::stol(item);
      if (v <= 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(Errc::invalid_argument, "bad layer width '" + item + "' in --hidden");
    }
  }
  return out;
}

dataset::DatasetManifest load_manifest(const Options& o) {
  if (o.csv.empty()) throw Error(Errc::invalid_argument, "--csv is required");
  return dataset::load_caption_csv(o.csv, dataset::parse_format(o.format),
                                   dataset::parse_split(o.split));
}

std::vector<text::TokenizedCaption> all_captions(const dataset::DatasetManifest& m) {
  std::vector<text::TokenizedCaption> out;
  for (const auto& r : m.records) out.insert(out.end(), r.captions.begin(), r.captions.end());
  return out;
}

semantics::TagLexicon lexicon(const Options& o) {
  return o.lexicon.empty() ? semantics::TagLexicon::builtin() : semantics::TagLexicon::load(o.lexicon);
}

Eigen::RowVectorXd pooled(const Eigen::MatrixXd& features) { return features.colwise().mean(); }

// ---- commands -------------------------------------------------------------

int cmd_extract_features(const Options& o) {
  const auto manifest = load_manifest(o);
  const fs::path root = o.cache_root();
  DirLock lock(root);
  const auto report =
      dataset::cache_features(manifest, o.feature_variant(), o.media, root);
  std::cout << "computed " << report.computed << " reused " << report.reused << " failed "
            << report.errors.size() << "\n";
  for (const auto& e : report.errors) std::cout << "error\t" << e.clip_id << "\t" << e.message << "\n";
  return report.errors.empty() ? kOk : kMissing;
}

int cmd_build_sve(const Options& o) {
  const auto manifest = load_manifest(o);
  DirLock lock(o.out_dir());
  const auto lex = lexicon(o);
  const auto captions = all_captions(manifest);
  const auto corpus = semantics::build_corpus(captions, lex);
  corpus.save(o.out_dir() / kCorpus);
  if (corpus.size() == 0) {
    std::cerr << "warning: no subjects or verbs found; SVE inputs are disabled for this corpus\n";
  } else {
    emb::save(o.out_dir() / kSveMatrix, semantics::encode_sve_matrix(captions, corpus, lex));
  }
  std::cout << "corpus size " << corpus.size() << " from " << captions.size() << " captions\n";
  return kOk;
}

int cmd_train_w2v(const Options& o) {
  const auto manifest = load_manifest(o);
  DirLock lock(o.out_dir());
  const auto captions = all_captions(manifest);
  const auto vocab = text::Vocabulary::build(captions);
  text::Word2VecConfig cfg;
  cfg.seed = derive_seed(o.seed, "word2vec");
  if (o.epochs > 0) cfg.epochs = o.epochs;
  const auto result = text::train_word2vec(captions, vocab, cfg);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    std::cerr << "word2vec epoch " << e + 1 << " loss " << result.epoch_loss[e] << "\n";
  }
  vocab.save(o.out_dir() / kVocab);
  emb::save(o.out_dir() / kWord2Vec, result.input_vectors);
  std::cout << "vocabulary " << vocab.size() << " words, embeddings " << result.input_vectors.rows()
            << "x" << result.input_vectors.cols() << "\n";
  return kOk;
}

struct SveTable {
  semantics::TagLexicon lex;
  semantics::SubjectVerbCorpus corpus;
};

SveTable load_sve(const Options& o) {
  SveTable t{lexicon(o), semantics::SubjectVerbCorpus::load(
                             require_artifact(o.out_dir() / kCorpus, "build-sve"))};
  if (t.corpus.size() == 0) {
    throw Error(Errc::empty_input,
                "subject-verb corpus is empty; rerun with --use-sve off");
  }
  return t;
}

int cmd_train_mlp(const Options& o) {
  auto manifest = load_manifest(o);
  dataset::split_validation(manifest, o.val_fraction);
  DirLock lock(o.out_dir());
  const SveTable sve = load_sve(o);
  const auto variant = o.feature_variant();

  auto tables = [&](dataset::Split split, Eigen::MatrixXd& x, Eigen::MatrixXd& y) {
    const auto pairs = dataset::expand_pairs(manifest, split);
    x.resize(static_cast<Eigen::Index>(pairs.size()), audio::feature_dim(variant));
    y.resize(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(sve.corpus.size()));
    std::map<std::string, Eigen::RowVectorXd> features;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& id = pairs[i].clip->clip_id;
      if (!features.count(id)) {
        features[id] = pooled(dataset::load_cached(o.cache_root(), variant, id));
      }
      x.row(static_cast<Eigen::Index>(i)) = features[id];
      y.row(static_cast<Eigen::Index>(i)) =
          semantics::encode_sve(pairs[i].text(), sve.corpus, sve.lex).transpose();
    }
  };
  Eigen::MatrixXd x, y, vx, vy;
  tables(dataset::Split::development, x, y);
  tables(dataset::Split::validation, vx, vy);

  sve::MlpConfig cfg;
  cfg.hidden = parse_widths(o.hidden);
  cfg.dropout = o.dropout;
  cfg.epochs = o.epochs > 0 ? o.epochs : 100;
  cfg.batch = o.batch;
  cfg.learning_rate = o.lr;
  cfg.seed = derive_seed(o.seed, "mlp");
  const auto result = sve::train_mlp(x, y, vx, vy, cfg);
  for (std::size_t e = 0; e < result.train_loss.size(); ++e) {
    std::cerr << "mlp epoch " << e + 1 << " train " << result.train_loss[e] << " validation "
              << result.validation_loss[e] << "\n";
  }
  result.model.save(o.out_dir() / kMlp);
  std::cout << "mlp trained on " << x.rows() << " pairs, best epoch " << result.best_epoch << "\n";
  return kOk;
}

struct CaptionInputs {
  std::vector<Eigen::MatrixXd> inputs;  // one per pair
  std::vector<captioner::Instance> instances;
};

CaptionInputs build_instances(const Options& o, const dataset::DatasetManifest& manifest,
                              dataset::Split split, const text::Vocabulary& vocab,
                              const SveTable* sve) {
  const auto pairs = dataset::expand_pairs(manifest, split);
  CaptionInputs out;
  out.inputs.reserve(pairs.size());
  std::map<std::string, Eigen::MatrixXd> cache;
  for (const auto& p : pairs) {
    const auto& id = p.clip->clip_id;
    if (!cache.count(id)) cache[id] = dataset::load_cached(o.cache_root(), o.feature_variant(), id);
    Eigen::VectorXd bits;
    if (sve != nullptr) bits = semantics::encode_sve(p.text(), sve->corpus, sve->lex);
    out.inputs.push_back(captioner::build_encoder_input(cache[id], sve ? &bits : nullptr,
                                                        o.feature_variant()));
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.instances.push_back({&out.inputs[i], vocab.encode(pairs[i].text())});
  }
  return out;
}

int cmd_train_captioner(const Options& o) {
  auto manifest = load_manifest(o);
  dataset::split_validation(manifest, o.val_fraction);
  DirLock lock(o.out_dir());
  const auto vocab = text::Vocabulary::load(require_artifact(o.out_dir() / kVocab, "train-w2v"));
  const Eigen::MatrixXd vectors =
      emb::load(require_artifact(o.out_dir() / kWord2Vec, "train-w2v"), 256);
  std::optional<SveTable> sve;
  if (o.sve_on()) sve = load_sve(o);
  const SveTable* sp = sve ? &*sve : nullptr;

  const auto train = build_instances(o, manifest, dataset::Split::development, vocab, sp);
  const auto val = build_instances(o, manifest, dataset::Split::validation, vocab, sp);
  if (train.instances.empty()) throw Error(Errc::empty_input, "no development captions");

  captioner::CaptionerConfig cfg;
  cfg.variant = o.feature_variant();
  cfg.sve_dim = sp ? static_cast<Eigen::Index>(sp->corpus.size()) : 0;
  cfg.input_dim = audio::feature_dim(cfg.variant) + cfg.sve_dim;
  cfg.vocab_size = static_cast<Eigen::Index>(vocab.size());
  cfg.dropout = o.dropout;
  cfg.max_len = o.max_len;
  Rng init(derive_seed(o.seed, "captioner.init"));
  captioner::Captioner model(cfg, init, &vectors);

  std::ostringstream log;
  log << "epoch\ttrain_loss\tvalidation_loss\n";
  captioner::TrainConfig tc;
  tc.epochs = o.epochs > 0 ? o.epochs : 50;
  tc.batch = o.batch;
  tc.learning_rate = o.lr;
  tc.seed = derive_seed(o.seed, "captioner.train");
  tc.on_epoch = [&](int epoch, double train_loss, double val_loss) {
    std::cerr << "captioner epoch " << epoch << " train " << train_loss << " validation "
              << val_loss << "\n";
    log << epoch << '\t' << train_loss << '\t' << val_loss << '\n';
  };
  const auto result = captioner::train(model, train.instances, val.instances, tc);
  model.to_store(vocab.hash(), sp ? sp->corpus.hash() : 0).save(o.out_dir() / kCaptioner);
  write_text(o.out_dir() / kTrainLog, log.str());
  std::cout << "captioner trained on " << train.instances.size() << " pairs, kept epoch "
            << result.best_epoch << "\n";
  return kOk;
}

int cmd_predict(const Options& o) {
  const auto manifest = load_manifest(o);
  const fs::path ckpt = o.out_dir() / kCaptioner;
  if (!fs::exists(ckpt)) {
    throw Error(Errc::missing_artifact,
                "checkpoint not found: " + ckpt.string() + " (run 'train-captioner' first)");
  }
  DirLock lock(o.out_dir());
  const auto vocab = text::Vocabulary::load(require_artifact(o.out_dir() / kVocab, "train-w2v"));
  std::optional<SveTable> sve;
  std::optional<sve::Mlp> mlp;
  if (o.sve_on()) {
    sve = load_sve(o);
    mlp = sve::Mlp::load(require_artifact(o.out_dir() / kMlp, "train-mlp"));
  }
  auto model = captioner::Captioner::from_store(
      nn::TensorStore::load(ckpt), vocab.hash(),
      sve ? std::optional<std::uint64_t>(sve->corpus.hash()) : std::optional<std::uint64_t>(0));
  if (model.config().variant != o.feature_variant()) {
    throw Error(Errc::invalid_argument, "checkpoint was trained on " +
                                            std::string(audio::to_string(model.config().variant)) +
                                            " features, --variant is " + o.variant);
  }

  std::ostringstream out;
  for (const auto& clip : manifest.records) {
    const Eigen::MatrixXd features =
        dataset::load_cached(o.cache_root(), o.feature_variant(), clip.clip_id);
    Eigen::VectorXd probs;
    if (mlp) probs = mlp->predict(pooled(features)).row(0).transpose();
    const Eigen::MatrixXd input =
        captioner::build_encoder_input(features, mlp ? &probs : nullptr, o.feature_variant());
    const auto ids = model.greedy_decode(input, o.max_len);
    std::string caption;
    for (const auto& w : vocab.decode(ids)) {
      if (text::is_special(w)) continue;
      if (!caption.empty()) caption += ' ';
      caption += w;
    }
    out << clip.clip_id << '\t' << caption << '\n';
  }
  write_text(o.out_dir() / kPredictions, out.str());
  std::cout << "wrote " << manifest.records.size() << " captions to "
            << (o.out_dir() / kPredictions).string() << "\n";
  return kOk;
}

std::vector<std::pair<std::string, metrics::Sentence>> read_tsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::not_found, "cannot open " + path.string());
  std::vector<std::pair<std::string, metrics::Sentence>> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(Errc::malformed, path.string() + " line " + std::to_string(n) +
                                       ": expected clip_id<TAB>caption");
    }
    metrics::Sentence words;
    try {
      words = text::clean_caption(line.substr(tab + 1)).words();
    } catch (const Error& e) {
      if (e.code() != Errc::empty_input) throw;
    }
    rows.emplace_back(line.substr(0, tab), std::move(words));
  }
  return rows;
}

int cmd_evaluate(const Options& o) {
  if (o.candidates.empty() || o.references.empty()) {
    throw Error(Errc::invalid_argument, "--candidates and --references are required");
  }
  const auto cands = read_tsv(o.candidates);
  std::map<std::string, metrics::References> refs;
  for (auto& [id, s] : read_tsv(o.references)) refs[id].push_back(std::move(s));

  std::vector<metrics::Sentence> cs;
  std::vector<metrics::References> rs;
  for (const auto& [id, s] : cands) {
    const auto it = refs.find(id);
    if (it == refs.end()) {
      throw Error(Errc::missing_artifact, "no reference captions for clip '" + id + "'");
    }
    cs.push_back(s);
    rs.push_back(it->second);
  }
  const auto report = metrics::score_all(cs, rs);
  const std::string text = report.table() + "\n" + report.key_values();
  std::cout << text;
  if (o.out_given) {
    DirLock lock(o.out_dir());
    write_text(o.out_dir() / kScores, text);
  }
  return kOk;
}

int cmd_gradcheck(const Options& o) {
  constexpr double kTolerance = 1e-4;
  bool ok = true;
  for (const auto& e : run_gradient_suite(o.seed)) {
    const bool pass = e.result.max_rel_error < kTolerance;
    ok = ok && pass;
    std::printf("%-12s max_rel_error %.3e  entries %5zu  %s\n", e.layer.c_str(),
                e.result.max_rel_error, e.result.checked, pass ? "ok" : "FAIL");
  }
  return ok ? kOk : kCheckFailed;
}

// ---- option plumbing ------------------------------------------------------

// Fills options not given on the command line from an INI-style
// "key = value" file. Unknown keys are rejected.
void apply_config(CLI::App& cmd, const std::string& path) {
  if (path.empty()) return;
  if (!fs::exists(path)) throw Error(Errc::not_found, "config file not found: " + path);
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (!item.parents.empty() && item.parents.front() != cmd.get_name()) continue;
    if (item.name == "config") continue;
    CLI::Option* opt = cmd.get_option_no_throw("--" + item.name);
    if (opt == nullptr) {
      throw Error(Errc::invalid_argument,
                  "config key '" + item.name + "' is not an option of " + cmd.get_name());
    }
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

void log_resolved(const CLI::App& cmd) {
  std::cerr << "# " << cmd.get_name() << "\n";
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_name() == "--help" || opt->get_lnames().empty()) continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : " ") + r;
    } else {
      value = opt->get_default_str();
    }
    std::cerr << "#   " << opt->get_lnames().front() << " = " << value << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audio captioning pipeline"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Options o;

  auto add = [&](CLI::App* c, std::initializer_list<std::string_view> names) {
    for (std::string_view n : names) {
      if (n == "config") c->add_option("--config", o.config, "key = value file; flags take precedence");
      else if (n == "seed") c->add_option("--seed", o.seed, "seed for all randomness");
      else if (n == "variant")
        c->add_option("--variant", o.variant, "audio features")
            ->check(CLI::IsMember({"logmel", "vggish", "panns"}));
      else if (n == "use-sve")
        c->add_option("--use-sve", o.use_sve, "subject-verb inputs")->check(CLI::IsMember({"on", "off"}));
      else if (n == "epochs") c->add_option("--epochs", o.epochs, "training epochs (0: command default)");
      else if (n == "batch") c->add_option("--batch", o.batch, "mini-batch size")->check(CLI::PositiveNumber);
      else if (n == "out") c->add_option("--out", o.out, "artifact directory");
      else if (n == "csv") c->add_option("--csv", o.csv, "caption table");
      else if (n == "format")
        c->add_option("--format", o.format, "caption table layout")
            ->check(CLI::IsMember({"clotho", "audiocaps", "generic"}));
      else if (n == "split")
        c->add_option("--split", o.split, "split the table belongs to")
            ->check(CLI::IsMember({"development", "validation", "evaluation"}));
      else if (n == "media") c->add_option("--media", o.media, "directory of WAV or .emb files");
      else if (n == "cache") c->add_option("--cache", o.cache, "feature cache root (default $AUCAP_CACHE, then <out>/cache)");
      else if (n == "lexicon") c->add_option("--lexicon", o.lexicon, "word<TAB>TAG overrides");
      else if (n == "lr") c->add_option("--lr", o.lr, "Adam learning rate")->check(CLI::PositiveNumber);
      else if (n == "val-fraction")
        c->add_option("--val-fraction", o.val_fraction, "development share held out for validation")
            ->check(CLI::Range(0.0, 0.99));
      else if (n == "dropout") c->add_option("--dropout", o.dropout, "input dropout rate")->check(CLI::Range(0.0, 0.95));
      else if (n == "hidden") c->add_option("--hidden", o.hidden, "MLP hidden widths, comma separated");
      else if (n == "max-len") c->add_option("--max-len", o.max_len, "decoding cap in tokens")->check(CLI::Range(2, 1000));
      else if (n == "candidates") c->add_option("--candidates", o.candidates, "clip_id<TAB>caption file");
      else if (n == "references") c->add_option("--references", o.references, "clip_id<TAB>caption file, one row per reference");
    }
  };

  struct Command {
    CLI::App* app;
    int (*run)(const Options&);
  };
  std::vector<Command> commands;
  auto command = [&](const char* name, const char* help, int (*run)(const Options&),
                     std::initializer_list<std::string_view> names) {
    CLI::App* c = app.add_subcommand(name, help);
    add(c, names);
    commands.push_back({c, run});
  };
  command("extract-features", "compute or validate cached features for every clip",
          cmd_extract_features, {"config", "csv", "format", "split", "media", "variant", "cache", "out"});
  command("build-sve", "build the subject-verb corpus and caption SVE matrix", cmd_build_sve,
          {"config", "csv", "format", "lexicon", "out"});
  command("train-w2v", "build the vocabulary and train word embeddings", cmd_train_w2v,
          {"config", "csv", "format", "epochs", "seed", "out"});
  command("train-mlp", "train the subject-verb predictor", cmd_train_mlp,
          {"config", "csv", "format", "variant", "cache", "lexicon", "epochs", "batch", "lr",
           "hidden", "dropout", "val-fraction", "seed", "out"});
  command("train-captioner", "train the encoder-decoder", cmd_train_captioner,
          {"config", "csv", "format", "variant", "use-sve", "cache", "lexicon", "epochs", "batch",
           "lr", "dropout", "val-fraction", "max-len", "seed", "out"});
  command("predict", "caption every clip of a table", cmd_predict,
          {"config", "csv", "format", "variant", "use-sve", "cache", "lexicon", "max-len", "out"});
  command("evaluate", "score candidate captions against references", cmd_evaluate,
          {"config", "candidates", "references", "out"});
  command("gradcheck", "finite-difference check of every layer type", cmd_gradcheck,
          {"config", "seed"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (const auto& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      apply_config(*c.app, o.config);
      if (const CLI::Option* out = c.app->get_option_no_throw("--out")) o.out_given = out->count() > 0;
      log_resolved(*c.app);
      return c.run(o);
    } catch (const CLI::ParseError& e) {
      std::cerr << "error [usage]: config: " << e.what() << "\n";
      return kUsage;
    } catch (const Error& e) {
      std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
      return exit_code(e.code());
    } catch (const std::exception& e) {
      std::cerr << "error [internal]: " << e.what() << "\n";
      return kFailure;
    }
  }
  return kUsage;
}
