#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "common.hpp"
#include "engage/corpus.hpp"
#include "engage/error.hpp"
#include "engage/eval.hpp"
#include "engage/models/checkpoint.hpp"
#include "engage/models/cnn.hpp"
#include "engage/models/gru.hpp"
#include "engage/models/logistic.hpp"
#include "engage/models/trainer.hpp"

namespace engage::cli {

namespace {

struct EmbeddingArgs {
  std::string corpus, out;
  bool desk = false;
  std::optional<int> dim, window, negatives, epochs, min_count, min_n, max_n;
  std::optional<std::size_t> buckets;
  std::optional<double> lr;
  std::uint64_t seed = 1;
  int jobs = 1;
};

void run_train_embeddings(const EmbeddingArgs& a, const CLI::App& cmd) {
  EmbeddingConfig cfg = a.desk ? EmbeddingConfig::desk_scale() : EmbeddingConfig{};
  if (a.dim) cfg.dim = *a.dim;
  if (a.window) cfg.window = *a.window;
  if (a.negatives) cfg.negatives = *a.negatives;
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.min_count) cfg.min_count = *a.min_count;
  if (a.min_n) cfg.min_n = *a.min_n;
  if (a.max_n) cfg.max_n = *a.max_n;
  if (a.buckets) cfg.buckets = *a.buckets;
  if (a.lr) cfg.lr = *a.lr;
  cfg.seed = a.seed;
  cfg.workers = a.jobs;
  if (cfg.dim < 1 || cfg.window < 1 || cfg.negatives < 1 || cfg.epochs < 1 || cfg.buckets < 1 || cfg.lr <= 0 ||
      cfg.min_n < 1 || cfg.max_n < cfg.min_n || cfg.workers < 1)
    throw UsageError("invalid embedding configuration");

  std::vector<std::vector<std::string>> sentences;
  CorpusReader reader(a.corpus, {});
  while (auto r = reader.next()) {
    auto tokens = tokenize(r->text).tokens;
    if (!tokens.empty()) sentences.push_back(std::move(tokens));
  }
  EmbeddingTrainLog log;
  const auto model = train_embeddings(sentences, cfg, &log);

  const fs::path out = resolve_output(a.out, "embeddings");
  fs::create_directories(out);
  save_vectors(model, out / "vectors.vec");
  std::ostringstream csv;
  csv << "epoch,loss\n";
  for (std::size_t e = 0; e < log.epoch_loss.size(); ++e) csv << e + 1 << ',' << log.epoch_loss[e] << '\n';
  write_text_file(out / "embedding_loss.csv", csv.str());
  nlohmann::json resolved(model.metadata);
  resolved["output"] = out.string();
  resolved["digest"] = model.digest();
  write_frozen_config(out / "train-embeddings.config.json", cmd, resolved);
  std::cout << "vocabulary " << model.vocab_size() << ", dim " << model.dim() << ", final loss "
            << (log.epoch_loss.empty() ? 0.0 : log.epoch_loss.back()) << " -> " << (out / "vectors.vec").string()
            << '\n';
}

struct TrainArgs {
  std::string model, dataset, embeddings, corpus, out, widths = "3,4,5";
  int band = 10;
  std::uint64_t seed = 1;
  int epochs = 20;
  std::size_t batch_size = 64;
  int patience = 2;
  double lr = 1e-3;
  std::size_t max_length = kDefaultMaxLength;
  int hidden = 32, dense = 16, maps = 100;
  std::optional<double> dropout;
  double spatial_dropout = 0.1;
};

void add_train_options(CLI::App* c, TrainArgs& a) {
  c->add_option("--model", a.model, "Classifier")
      ->required()
      ->check(CLI::IsMember({"baseline", "park", "cnn", "gru"}));
  c->add_option("--dataset", a.dataset, "Dataset directory from build-dataset")
      ->required()
      ->check(CLI::ExistingDirectory);
  c->add_option("--band", a.band, "Band to train on")->capture_default_str();
  c->add_option("--embeddings", a.embeddings, "Word vectors (.vec) for cnn and gru")->check(CLI::ExistingFile);
  c->add_option("--corpus", a.corpus, "Canonical corpus, needed by park for per-user features")
      ->check(CLI::ExistingFile);
  c->add_option("--epochs", a.epochs, "Maximum training epochs")->capture_default_str();
  c->add_option("--batch-size", a.batch_size, "Mini-batch size")->capture_default_str();
  c->add_option("--patience", a.patience, "Non-improving epochs tolerated before stopping")->capture_default_str();
  c->add_option("--lr", a.lr, "Adam learning rate")->capture_default_str();
  c->add_option("--max-length", a.max_length, "Tokens kept per comment")->capture_default_str();
  c->add_option("--hidden", a.hidden, "GRU hidden units per direction")->capture_default_str();
  c->add_option("--dense", a.dense, "GRU dense layer width")->capture_default_str();
  c->add_option("--maps", a.maps, "CNN feature maps per width")->capture_default_str();
  c->add_option("--widths", a.widths, "CNN filter widths")->capture_default_str();
  c->add_option("--dropout", a.dropout, "Dropout rate (cnn 0.5, gru 0.1 when unset)");
  c->add_option("--spatial-dropout", a.spatial_dropout, "GRU token dropout rate")->capture_default_str();
}

TrainConfig train_config(const TrainArgs& a, std::uint64_t seed) {
  if (a.epochs < 1 || a.batch_size < 1 || a.patience < 0 || a.lr <= 0 || a.max_length < 1)
    throw UsageError("invalid training configuration");
  TrainConfig cfg;
  cfg.adam.lr = a.lr;
  cfg.batch_size = a.batch_size;
  cfg.max_epochs = a.epochs;
  cfg.patience = a.patience;
  cfg.seed = seed;
  cfg.max_length = a.max_length;
  return cfg;
}

std::unique_ptr<Classifier> build_model(const TrainArgs& a, const InputContext& ctx) {
  if (a.model == "baseline") return std::make_unique<LogisticModel>(FeatureSet::kLength, 1);
  if (a.model == "park") return std::make_unique<LogisticModel>(FeatureSet::kPark, 5);
  const int dim = ctx.embeddings->dim();
  if (a.model == "cnn") {
    CnnConfig c;
    c.dim = dim;
    c.widths = parse_int_list(a.widths);
    c.maps = a.maps;
    c.dropout = a.dropout.value_or(0.5);
    return std::make_unique<CnnModel>(c);
  }
  GruConfig g;
  g.dim = dim;
  g.hidden = a.hidden;
  g.dense = a.dense;
  g.dropout = a.dropout.value_or(0.1);
  g.spatial_dropout = a.spatial_dropout;
  return std::make_unique<GruModel>(g);
}

// Inputs encoded once and reused across seeds.
struct Prepared {
  DatasetDir data;
  InputContext ctx;
  std::vector<ModelInput> train_x, val_x, test_x;
  std::vector<int> train_y, val_y;
  std::vector<LabeledExample> test;
  std::string embeddings_path;
};

Prepared prepare(const TrainArgs& a) {
  Prepared p;
  p.data = DatasetDir::open(a.dataset);
  std::optional<fs::path> emb, corpus;
  if (!a.embeddings.empty()) {
    emb = fs::absolute(a.embeddings);
    p.embeddings_path = emb->string();
  }
  if (!a.corpus.empty()) corpus = a.corpus;
  p.ctx = make_input_context(a.model, p.data, a.band, emb, corpus, a.max_length);
  const auto train = p.data.train(a.band);
  const auto val = p.data.validation(a.band);
  if (train.empty() || val.empty()) throw DataError("band " + std::to_string(a.band) + " has an empty split");
  p.train_x = p.ctx.encode(train);
  p.val_x = p.ctx.encode(val);
  p.train_y = labels_of(train);
  p.val_y = labels_of(val);
  p.test = p.data.test();
  for (auto& e : p.test) e.band = a.band;
  p.test_x = p.ctx.encode(p.test);
  return p;
}

struct Trained {
  std::unique_ptr<Classifier> model;
  TrainLog log;
  std::map<std::string, std::string> metadata;
};

Trained train_one(const TrainArgs& a, const Prepared& p, std::uint64_t seed) {
  Trained t;
  t.model = build_model(a, p.ctx);
  t.log = train_classifier(*t.model, p.train_x, p.train_y, p.val_x, p.val_y, train_config(a, seed));
  t.metadata = {{"model", a.model},
                {"source", p.data.manifest.source_format},
                {"signal", std::string(to_string(p.data.manifest.signal))},
                {"band", std::to_string(a.band)},
                {"seed", std::to_string(seed)},
                {"max_length", std::to_string(a.max_length)},
                {"dataset_digest", p.data.manifest.digest()},
                {"best_epoch", std::to_string(t.log.best_epoch)}};
  if (p.ctx.embeddings) {
    t.metadata["embeddings_path"] = p.embeddings_path;
    t.metadata["embeddings_digest"] = p.ctx.embeddings->digest();
  }
  return t;
}

RunResult score(const Classifier& model, const Prepared& p, const std::map<std::string, std::string>& meta) {
  RunResult r = evaluate(model, p.test_x, p.test, &p.data.manifest);
  r.model = meta.at("model");
  r.source = meta.at("source");
  r.band = std::stoi(meta.at("band"));
  r.seed = std::stoull(meta.at("seed"));
  return r;
}

std::string format_accuracy(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void run_train(const TrainArgs& a, const CLI::App& cmd) {
  const Prepared p = prepare(a);
  const Trained t = train_one(a, p, a.seed);
  const fs::path out = resolve_output(a.out, "model");
  fs::create_directories(out);
  save_checkpoint(*t.model, out / "model.json", t.metadata);
  std::ostringstream csv;
  write_train_log_csv(csv, t.log);
  write_text_file(out / "train_log.csv", csv.str());
  nlohmann::json resolved(t.metadata);
  resolved["output"] = out.string();
  resolved["model_config"] = t.model->config();
  write_frozen_config(out / "train.config.json", cmd, resolved);
  const auto& best = t.log.epochs.at(static_cast<std::size_t>(t.log.best_epoch - 1));
  std::cout << a.model << ": best epoch " << t.log.best_epoch << " of " << t.log.epochs.size()
            << ", validation accuracy " << format_accuracy(best.val_acc) << " -> " << (out / "model.json").string()
            << '\n';
}

struct EvaluateArgs {
  std::string checkpoint, dataset, embeddings, corpus, out;
};

void run_evaluate(const EvaluateArgs& a, const CLI::App& cmd) {
  auto loaded = load_checkpoint(a.checkpoint);
  const auto& meta = loaded.metadata;
  for (const char* key : {"model", "source", "band", "seed", "dataset_digest", "max_length"})
    if (!meta.contains(key)) throw DataError("checkpoint metadata lacks " + std::string(key));
  TrainArgs t;
  t.model = meta.at("model");
  t.dataset = a.dataset;
  t.band = std::stoi(meta.at("band"));
  t.max_length = std::stoul(meta.at("max_length"));
  t.corpus = a.corpus;
  t.embeddings = !a.embeddings.empty()           ? a.embeddings
                 : meta.contains("embeddings_path") ? meta.at("embeddings_path")
                                                    : std::string();
  const Prepared p = prepare(t);
  if (p.data.manifest.digest() != meta.at("dataset_digest"))
    throw DataError("checkpoint was trained on a different dataset than " + a.dataset);
  if (p.ctx.embeddings && meta.contains("embeddings_digest") &&
      p.ctx.embeddings->digest() != meta.at("embeddings_digest"))
    throw DataError("embeddings differ from the ones the checkpoint was trained with");
  const RunResult r = score(*loaded.model, p, meta);
  const fs::path out = resolve_output(a.out, "eval");
  fs::create_directories(out);
  write_run_result(out / "result.json", r);
  write_frozen_config(out / "evaluate.config.json", cmd, {{"output", out.string()}, {"model", t.model}});
  std::cout << r.model << " " << to_string(r.signal) << " band " << r.band << " seed " << r.seed << ": accuracy "
            << format_accuracy(r.accuracy) << " on " << r.confusion.total() << " test examples\n";
  for (const auto& [cls, recall] : r.class_recall) std::cout << "  recall " << cls << " " << format_accuracy(recall) << '\n';
}

struct ProtocolArgs {
  TrainArgs train;
  std::string seeds = "1..10";
};

void run_protocol(const ProtocolArgs& a, const CLI::App& cmd) {
  const auto seeds = parse_seed_list(a.seeds);
  const Prepared p = prepare(a.train);
  const fs::path out = resolve_output(a.train.out, "protocol");
  fs::create_directories(out);
  write_frozen_config(out / "run-protocol.config.json", cmd, {{"output", out.string()}});
  const auto result = repeated_protocol(
      seeds,
      [&](std::uint64_t seed) {
        const Trained t = train_one(a.train, p, seed);
        save_checkpoint(*t.model, out / ("seed" + std::to_string(seed) + ".model.json"), t.metadata);
        RunResult r = score(*t.model, p, t.metadata);
        std::cout << "seed " << seed << ": accuracy " << format_accuracy(r.accuracy) << std::endl;
        return r;
      },
      out / "runs.jsonl");
  nlohmann::json summary{{"model", a.train.model},
                         {"source", p.data.manifest.source_format},
                         {"signal", to_string(p.data.manifest.signal)},
                         {"band", a.train.band},
                         {"seeds", seeds},
                         {"mean_accuracy", result.mean_accuracy},
                         {"std_accuracy", nullptr}};
  if (result.std_accuracy) summary["std_accuracy"] = *result.std_accuracy;
  write_text_file(out / "summary.json", summary.dump(2) + "\n");
  std::cout << a.train.model << ": mean accuracy " << format_accuracy(result.mean_accuracy);
  if (result.std_accuracy) std::cout << " (std " << format_accuracy(*result.std_accuracy) << ")";
  std::cout << " over " << result.runs.size() << " runs\n";
}

}  // namespace

void add_model_commands(CLI::App& app, Registry& registry) {
  {
    auto a = std::make_shared<EmbeddingArgs>();
    auto* c = app.add_subcommand("train-embeddings", "Train subword skip-gram word vectors");
    c->add_option("--corpus", a->corpus, "Canonical corpus jsonl")->required()->check(CLI::ExistingFile);
    c->add_flag("--desk-scale", a->desk, "Start from the small profile (dim 16, 10^4 buckets, min count 1)");
    c->add_option("--dim", a->dim, "Vector dimension (300)");
    c->add_option("--window", a->window, "Maximum context window (5)");
    c->add_option("--negatives", a->negatives, "Negative samples per update (5)");
    c->add_option("--epochs", a->epochs, "Passes over the corpus (5)");
    c->add_option("--min-count", a->min_count, "Minimum word frequency (5)");
    c->add_option("--buckets", a->buckets, "Subword hash buckets (2000000)");
    c->add_option("--lr", a->lr, "Initial learning rate (0.05)");
    c->add_option("--min-n", a->min_n, "Shortest subword (3)");
    c->add_option("--max-n", a->max_n, "Longest subword (6)");
    c->add_option("--seed", a->seed, "Random seed")->capture_default_str();
    c->add_option("--jobs", a->jobs, "Worker threads; more than one is not reproducible")->capture_default_str();
    c->add_option("-o,--out", a->out, "Output directory");
    registry.push_back({c, [a, c] { run_train_embeddings(*a, *c); }});
  }
  {
    auto a = std::make_shared<TrainArgs>();
    auto* c = app.add_subcommand("train", "Train one classifier on a band");
    add_train_options(c, *a);
    c->add_option("--seed", a->seed, "Random seed")->capture_default_str();
    c->add_option("-o,--out", a->out, "Output directory");
    registry.push_back({c, [a, c] { run_train(*a, *c); }});
  }
  {
    auto a = std::make_shared<EvaluateArgs>();
    auto* c = app.add_subcommand("evaluate", "Score a checkpoint on the shared test set");
    c->add_option("--checkpoint", a->checkpoint, "model.json from train")->required()->check(CLI::ExistingFile);
    c->add_option("--dataset", a->dataset, "Dataset directory the model was trained on")
        ->required()
        ->check(CLI::ExistingDirectory);
    c->add_option("--embeddings", a->embeddings, "Word vectors; defaults to the path recorded at training")
        ->check(CLI::ExistingFile);
    c->add_option("--corpus", a->corpus, "Canonical corpus, needed by park")->check(CLI::ExistingFile);
    c->add_option("-o,--out", a->out, "Output directory");
    registry.push_back({c, [a, c] { run_evaluate(*a, *c); }});
  }
  {
    auto a = std::make_shared<ProtocolArgs>();
    auto* c = app.add_subcommand("run-protocol", "Train and evaluate once per seed");
    add_train_options(c, a->train);
    c->add_option("--seeds", a->seeds, "Seed range a..b or list a,b,c")->capture_default_str();
    c->add_option("-o,--out", a->train.out, "Output directory");
    registry.push_back({c, [a, c] { run_protocol(*a, *c); }});
  }
}

}  // namespace engage::cli
