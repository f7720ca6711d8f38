#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "common.hpp"
#include "engage/corpus.hpp"
#include "engage/error.hpp"
#include "engage/taxonomy.hpp"
#include "engage/timestamp.hpp"

namespace engage::cli {

namespace {

struct IngestArgs {
  std::string input, out, format = "comments", on_error = "abort", after, section;
};

void run_ingest(const IngestArgs& a, const CLI::App& cmd) {
  IngestOptions opts;
  opts.format = parse_corpus_format(a.format);
  opts.on_error = a.on_error == "skip" ? OnError::kSkip : OnError::kAbort;
  auto result = ingest(a.input, opts);
  for (const auto& e : result.skipped)
    std::cerr << "warning: " << a.input << ":" << e.line << ": " << e.message << '\n';
  std::vector<CommentRecord> records = std::move(result.records);
  if (!a.after.empty()) records = filter_after(records, parse_rfc3339(a.after));
  if (!a.section.empty()) records = filter_section(records, a.section);

  const fs::path out = resolve_output(a.out, "corpus.jsonl");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_canonical(out, records);

  const auto stats = corpus_stats(records);
  nlohmann::json report{{"input", a.input},
                        {"format", a.format},
                        {"records", records.size()},
                        {"skipped", result.skipped.size()},
                        {"threads", stats.n_threads},
                        {"users", stats.n_users},
                        {"upvotes_total", stats.n_upvotes_total},
                        {"reply_fraction", stats.reply_fraction},
                        {"digest", corpus_digest(records)}};
  for (const auto& e : result.skipped) report["skipped_lines"].push_back({{"line", e.line}, {"error", e.message}});
  write_text_file(fs::path(out.string() + ".report.json"), report.dump(2) + "\n");
  write_frozen_config(fs::path(out.string() + ".config.json"), cmd, {{"output", out.string()}});
  std::cout << "ingested " << records.size() << " records (" << result.skipped.size() << " skipped) -> " << out.string()
            << '\n';
}

struct BuildArgs {
  std::string corpus, out, signal = "upvotes", bands = "10,25,50", source = "comments", taxonomy;
  std::uint64_t seed = 1;
  double test_fraction = 0.1;
  bool strict_parents = false;
};

void annotate(std::vector<LabeledExample>& xs, const std::vector<TaxonomyLabel>& labels) {
  if (!labels.empty()) attach_taxonomy(xs, labels);
}

void run_build_dataset(const BuildArgs& a, const CLI::App& cmd) {
  const Signal signal = parse_signal(a.signal);
  const auto bands = parse_int_list(a.bands);
  const auto records = ingest(a.corpus, {}).records;
  BuildOptions opts;
  opts.strict_parents = a.strict_parents;
  auto built = build_dataset(records, signal, bands, a.test_fraction, a.seed, opts);
  auto& splits = built.splits;
  splits.manifest.source_format = std::string(to_string(parse_corpus_format(a.source)));

  std::vector<TaxonomyLabel> labels;
  if (!a.taxonomy.empty()) {
    labels = read_taxonomy_labels(a.taxonomy);
    std::vector<LabeledExample> everything = splits.test;
    for (const auto& [band, split] : splits.bands) {
      everything.insert(everything.end(), split.train.begin(), split.train.end());
      everything.insert(everything.end(), split.validation.begin(), split.validation.end());
    }
    const auto report = attach_taxonomy(everything, labels);
    if (!report.unmatched.empty())
      std::cerr << "warning: " << report.unmatched.size() << " taxonomy rows match no example\n";
    annotate(splits.test, labels);
    for (auto& [band, split] : splits.bands) {
      annotate(split.train, labels);
      annotate(split.validation, labels);
    }
  }

  const fs::path out = resolve_output(a.out, "dataset");
  fs::create_directories(out);
  write_examples(out / "test.jsonl", splits.test);
  for (const auto& [band, split] : splits.bands) {
    const fs::path dir = out / ("band" + std::to_string(band));
    fs::create_directories(dir);
    write_examples(dir / "train.jsonl", split.train);
    write_examples(dir / "validation.jsonl", split.validation);
  }
  write_manifest(out / "manifest.json", splits.manifest);
  write_frozen_config(out / "build-dataset.config.json", cmd,
                      {{"output", out.string()}, {"manifest_digest", splits.manifest.digest()}});

  const auto& d = splits.manifest.discards;
  std::cout << "threads kept " << splits.manifest.threads_kept << ", discarded: " << d.too_few_comments
            << " short, " << d.too_few_replies << " low-reply, " << d.zero_engagement << " zero-engagement\n";
  std::cout << "test " << splits.test.size();
  for (const auto& [band, c] : splits.manifest.counts)
    std::cout << ", band " << band << " train " << c.train << " validation " << c.validation;
  std::cout << "\nmanifest digest " << splits.manifest.digest() << '\n';
}

struct Table1Args {
  std::string upvotes_dataset, replies_dataset, lexicons, out;
  int band = 10;
};

std::pair<AnalyticsSummary, AnalyticsSummary> summarize(const std::string& dir, int band, const Lexicons& lex) {
  std::vector<CommentAnalytics> top, flop;
  for (const auto& e : DatasetDir::open(dir).all(band))
    (e.label == Label::kTop ? top : flop).push_back(comment_analytics(tokenize(e.text), lex));
  return {aggregate_analytics(top), aggregate_analytics(flop)};
}

void run_table1(const Table1Args& a, const CLI::App& cmd) {
  if (a.upvotes_dataset.empty() && a.replies_dataset.empty())
    throw UsageError("table1 needs --upvotes-dataset and/or --replies-dataset");
  const auto lex = Lexicons::load(a.lexicons.empty() ? default_lexicon_dir() : fs::path(a.lexicons));
  AnalyticsTable table;
  if (!a.upvotes_dataset.empty()) std::tie(table.upvotes_most, table.upvotes_least) = summarize(a.upvotes_dataset, a.band, lex);
  if (!a.replies_dataset.empty()) std::tie(table.replies_most, table.replies_least) = summarize(a.replies_dataset, a.band, lex);
  const fs::path out = resolve_output(a.out, "stats");
  fs::create_directories(out);
  std::ostringstream csv;
  write_analytics_csv(csv, table);
  write_text_file(out / "table1.csv", csv.str());
  write_frozen_config(out / "stats-table1.config.json", cmd, {{"output", out.string()}});
  std::cout << csv.str();
}

struct ContrastArgs {
  std::string dataset, out;
  int band = 10;
  std::size_t k = 100;
};

void run_contrast(const ContrastArgs& a, const CLI::App& cmd) {
  std::vector<TokenSequence> top, flop;
  for (const auto& e : DatasetDir::open(a.dataset).all(a.band))
    (e.label == Label::kTop ? top : flop).push_back(tokenize(e.text));
  const auto rows = word_contrast(top, flop, a.k);
  const fs::path out = resolve_output(a.out, "stats");
  fs::create_directories(out);
  std::ostringstream csv;
  write_contrast_csv(csv, rows);
  write_text_file(out / "contrast.csv", csv.str());
  write_frozen_config(out / "stats-contrast.config.json", cmd, {{"output", out.string()}});
  std::cout << "wrote " << rows.size() << " words to " << (out / "contrast.csv").string() << '\n';
}

struct BiasArgs {
  std::string corpus, out;
};

void run_bias_curve(const BiasArgs& a, const CLI::App& cmd) {
  const auto records = ingest(a.corpus, {}).records;
  BuildOptions opts;
  opts.engagement_filters = false;
  const auto threads = build_threads(records, Signal::kUpvotes, opts);
  const auto curve = position_bias_curve(threads.threads);
  const fs::path out = resolve_output(a.out, "stats");
  fs::create_directories(out);
  std::ostringstream csv;
  write_bias_curve_csv(csv, curve);
  write_text_file(out / "bias_curve.csv", csv.str());
  write_frozen_config(out / "stats-bias-curve.config.json", cmd,
                      {{"output", out.string()}, {"threads", threads.threads.size()}});
  std::cout << csv.str();
}

}  // namespace

void add_data_commands(CLI::App& app, Registry& registry) {
  {
    auto a = std::make_shared<IngestArgs>();
    auto* c = app.add_subcommand("ingest", "Validate a raw corpus and write canonical jsonl");
    c->add_option("input", a->input, "Raw line-delimited JSON corpus")->required()->check(CLI::ExistingFile);
    c->add_option("--format", a->format, "Input schema")
        ->check(CLI::IsMember({"comments", "reviews"}))
        ->capture_default_str();
    c->add_option("-o,--out", a->out, "Canonical jsonl output file")->required();
    c->add_option("--on-error", a->on_error, "Malformed lines abort or are skipped with a warning")
        ->check(CLI::IsMember({"abort", "skip"}))
        ->capture_default_str();
    c->add_option("--after", a->after, "Keep comments posted strictly after this RFC 3339 time");
    c->add_option("--section", a->section, "Keep one news section");
    registry.push_back({c, [a, c] { run_ingest(*a, *c); }});
  }
  {
    auto a = std::make_shared<BuildArgs>();
    auto* c = app.add_subcommand("build-dataset", "Normalize engagement and write top/flop splits");
    c->add_option("--corpus", a->corpus, "Canonical corpus jsonl")->required()->check(CLI::ExistingFile);
    c->add_option("--signal", a->signal, "Engagement signal")
        ->check(CLI::IsMember({"upvotes", "replies"}))
        ->capture_default_str();
    c->add_option("--bands", a->bands, "Comma-separated percent bands; must include 10")->capture_default_str();
    c->add_option("--seed", a->seed, "Split seed")->capture_default_str();
    c->add_option("--test-fraction", a->test_fraction, "Share of band 10 held out as the shared test set")
        ->capture_default_str();
    c->add_option("--source", a->source, "Origin of the corpus")
        ->check(CLI::IsMember({"comments", "reviews"}))
        ->capture_default_str();
    c->add_option("--taxonomy", a->taxonomy, "comment_id,class_id CSV of taxonomy labels")->check(CLI::ExistingFile);
    c->add_flag("--strict-parents", a->strict_parents, "Abort on replies whose parent is missing");
    c->add_option("-o,--out", a->out, "Output directory");
    registry.push_back({c, [a, c] { run_build_dataset(*a, *c); }});
  }
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  stats->require_subcommand(1);
  {
    auto a = std::make_shared<Table1Args>();
    auto* c = stats->add_subcommand("table1", "Length, lexical rates, readability and sentiment per class");
    c->add_option("--upvotes-dataset", a->upvotes_dataset, "Dataset built with --signal upvotes")
        ->check(CLI::ExistingDirectory);
    c->add_option("--replies-dataset", a->replies_dataset, "Dataset built with --signal replies")
        ->check(CLI::ExistingDirectory);
    c->add_option("--band", a->band, "Band whose top/flop classes are compared")->capture_default_str();
    c->add_option("--lexicons", a->lexicons, "Directory with the four lexicon files")->check(CLI::ExistingDirectory);
    c->add_option("-o,--out", a->out, "Output directory");
    registry.push_back({c, [a, c] { run_table1(*a, *c); }});
  }
  {
    auto a = std::make_shared<ContrastArgs>();
    auto* c = stats->add_subcommand("contrast", "Word frequency contrast between top and flop");
    c->add_option("--dataset", a->dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    c->add_option("--band", a->band, "Band whose classes are compared")->capture_default_str();
    c->add_option("-k,--top-words", a->k, "Number of most frequent words considered")->capture_default_str();
    c->add_option("-o,--out", a->out, "Output directory");
    registry.push_back({c, [a, c] { run_contrast(*a, *c); }});
  }
  {
    auto a = std::make_shared<BiasArgs>();
    auto* c = stats->add_subcommand("bias-curve", "Mean upvotes and replies by chronological rank");
    c->add_option("--corpus", a->corpus, "Canonical corpus jsonl")->required()->check(CLI::ExistingFile);
    c->add_option("-o,--out", a->out, "Output directory");
    registry.push_back({c, [a, c] { run_bias_curve(*a, *c); }});
  }
}

}  // namespace engage::cli
