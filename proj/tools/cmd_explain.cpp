#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "common.hpp"
#include "engage/error.hpp"
#include "engage/explain.hpp"
#include "engage/models/checkpoint.hpp"

namespace engage::cli {

namespace {

struct Loaded {
  LoadedCheckpoint checkpoint;
  std::vector<LabeledExample> test;
  std::vector<ModelInput> inputs;
};

Loaded load_for_explain(const std::string& checkpoint, const std::string& dataset, const std::string& embeddings) {
  Loaded l{load_checkpoint(checkpoint), {}, {}};
  const auto& meta = l.checkpoint.metadata;
  if (!meta.contains("model") || !is_text_model(meta.at("model")))
    throw UsageError("explanations need a cnn or gru checkpoint");
  const std::string emb = !embeddings.empty()                 ? embeddings
                          : meta.contains("embeddings_path") ? meta.at("embeddings_path")
                                                             : std::string();
  if (emb.empty()) throw UsageError("--embeddings is required");
  const auto data = DatasetDir::open(dataset);
  if (meta.contains("dataset_digest") && meta.at("dataset_digest") != data.manifest.digest())
    throw DataError("checkpoint was trained on a different dataset than " + dataset);
  const auto ctx = make_input_context(meta.at("model"), data, std::stoi(meta.at("band")), fs::path(emb),
                                      std::nullopt, std::stoul(meta.at("max_length")));
  if (meta.contains("embeddings_digest") && ctx.embeddings->digest() != meta.at("embeddings_digest"))
    throw DataError("embeddings differ from the ones the checkpoint was trained with");
  l.test = data.test();
  l.inputs = ctx.encode(l.test);
  return l;
}

struct ExplainArgs {
  std::string checkpoint, dataset, embeddings, method, out, cls = "top", aggregate = "mean";
  std::size_t limit = 0, min_occurrences = 1;
  double epsilon = 1e-3;
  int ig_steps = 128;
  std::uint64_t seed = 1;
};

void run_explain(const ExplainArgs& a, const CLI::App& cmd) {
  if (a.ig_steps < 1 || a.epsilon <= 0) throw UsageError("invalid explanation settings");
  const Method method = parse_method(a.method);
  const Loaded l = load_for_explain(a.checkpoint, a.dataset, a.embeddings);
  const int cls = a.cls == "top" ? 1 : 0;
  ExplainOptions opts{a.epsilon, a.ig_steps, a.seed};
  const std::size_t n = a.limit ? std::min(a.limit, l.test.size()) : l.test.size();
  std::vector<RelevanceVector> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    rows.push_back(explain(*l.checkpoint.model, l.inputs[i], l.test[i].comment_id, method, cls, opts));

  const fs::path out = resolve_output(a.out, "explain");
  fs::create_directories(out);
  const std::string stem(to_string(method));
  std::ostringstream jsonl, csv;
  write_relevance_jsonl(jsonl, rows);
  write_text_file(out / ("relevance_" + stem + ".jsonl"), jsonl.str());
  const auto vocab = rank_vocabulary(rows, a.aggregate == "max" ? VocabAggregate::kMax : VocabAggregate::kMean,
                                     a.min_occurrences);
  write_vocabulary_csv(csv, vocab);
  write_text_file(out / ("vocabulary_" + stem + ".csv"), csv.str());
  write_frozen_config(out / ("explain-" + stem + ".config.json"), cmd,
                      {{"output", out.string()}, {"explained", n}, {"bias_relevance", "absorbed"}});
  std::cout << "explained " << n << " test comments with " << stem << "; top words:";
  for (std::size_t i = 0; i < std::min<std::size_t>(10, vocab.size()); ++i) std::cout << ' ' << vocab[i].word;
  std::cout << '\n';
}

struct DeleteArgs {
  std::string checkpoint, dataset, embeddings, methods = "lrp,sa,ig,random", out;
  std::size_t max_k = 5;
  bool zero_embedding = false;
  double epsilon = 1e-3;
  int ig_steps = 128;
  std::uint64_t seed = 1;
};

void run_delete_eval(const DeleteArgs& a, const CLI::App& cmd) {
  std::vector<Method> methods;
  std::stringstream in(a.methods);
  for (std::string item; std::getline(in, item, ',');) methods.push_back(parse_method(item));
  if (methods.empty()) throw UsageError("no methods given");
  if (a.ig_steps < 1 || a.epsilon <= 0) throw UsageError("invalid explanation settings");
  const Loaded l = load_for_explain(a.checkpoint, a.dataset, a.embeddings);
  std::vector<EvalExample> examples;
  for (std::size_t i = 0; i < l.test.size(); ++i)
    examples.push_back({l.test[i].comment_id, l.inputs[i], static_cast<int>(l.test[i].label)});

  DeletionOptions opts;
  opts.max_k = a.max_k;
  opts.zero_embedding = a.zero_embedding;
  opts.explain = {a.epsilon, a.ig_steps, a.seed};
  std::vector<DeletionCurve> curves;
  std::vector<std::string> exhausted;
  for (Method m : methods) {
    auto r = deletion_eval(*l.checkpoint.model, examples, m, opts);
    curves.push_back(r.true_positives);
    curves.push_back(r.false_negatives);
    if (exhausted.empty()) exhausted = r.exhausted_ids;
  }
  const fs::path out = resolve_output(a.out, "deletion");
  fs::create_directories(out);
  std::ostringstream csv;
  write_deletion_csv(csv, curves);
  write_text_file(out / "deletion.csv", csv.str());
  std::string ids;
  for (const auto& id : exhausted) ids += id + "\n";
  write_text_file(out / "exhausted_ids.txt", ids);
  write_frozen_config(out / "delete-eval.config.json", cmd, {{"output", out.string()}});
  std::cout << csv.str();
  if (!exhausted.empty())
    std::cout << exhausted.size() << " comments had at most " << a.max_k << " tokens and were fully deleted\n";
}

}  // namespace

void add_explain_commands(CLI::App& app, Registry& registry) {
  {
    auto a = std::make_shared<ExplainArgs>();
    auto* c = app.add_subcommand("explain", "Per-token relevance for test comments");
    c->add_option("--checkpoint", a->checkpoint, "cnn or gru model.json")->required()->check(CLI::ExistingFile);
    c->add_option("--dataset", a->dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    c->add_option("--embeddings", a->embeddings, "Word vectors; defaults to the path recorded at training")
        ->check(CLI::ExistingFile);
    c->add_option("--method", a->method, "Attribution method")
        ->required()
        ->check(CLI::IsMember({"lrp", "sa", "ig", "random"}));
    c->add_option("--class", a->cls, "Class whose score is explained")
        ->check(CLI::IsMember({"top", "flop"}))
        ->capture_default_str();
    c->add_option("--limit", a->limit, "Explain only the first N test comments (0 = all)")->capture_default_str();
    c->add_option("--epsilon", a->epsilon, "LRP stabilizer")->capture_default_str();
    c->add_option("--ig-steps", a->ig_steps, "Integrated-gradients path points")->capture_default_str();
    c->add_option("--seed", a->seed, "Seed of the random method")->capture_default_str();
    c->add_option("--aggregate", a->aggregate, "Vocabulary score per word")
        ->check(CLI::IsMember({"mean", "max"}))
        ->capture_default_str();
    c->add_option("--min-occurrences", a->min_occurrences, "Words seen fewer times are not ranked")
        ->capture_default_str();
    c->add_option("-o,--out", a->out, "Output directory");
    registry.push_back({c, [a, c] { run_explain(*a, *c); }});
  }
  {
    auto a = std::make_shared<DeleteArgs>();
    auto* c = app.add_subcommand("delete-eval", "Accuracy after deleting the most or least relevant words");
    c->add_option("--checkpoint", a->checkpoint, "cnn or gru model.json")->required()->check(CLI::ExistingFile);
    c->add_option("--dataset", a->dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    c->add_option("--embeddings", a->embeddings, "Word vectors; defaults to the path recorded at training")
        ->check(CLI::ExistingFile);
    c->add_option("--methods", a->methods, "Comma-separated attribution methods")->capture_default_str();
    c->add_option("--max-k", a->max_k, "Largest number of deleted words")->capture_default_str();
    c->add_flag("--zero-embedding", a->zero_embedding, "Zero deleted rows instead of removing them");
    c->add_option("--epsilon", a->epsilon, "LRP stabilizer")->capture_default_str();
    c->add_option("--ig-steps", a->ig_steps, "Integrated-gradients path points")->capture_default_str();
    c->add_option("--seed", a->seed, "Seed of the random method")->capture_default_str();
    c->add_option("-o,--out", a->out, "Output directory");
    registry.push_back({c, [a, c] { run_delete_eval(*a, *c); }});
  }
}

}  // namespace engage::cli
