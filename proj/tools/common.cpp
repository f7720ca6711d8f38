#include "common.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "engage/corpus.hpp"
#include "engage/error.hpp"
#include "engage/models/features.hpp"

#ifndef ENGAGE_DEFAULT_LEXICONS
#define ENGAGE_DEFAULT_LEXICONS "data/lexicons"
#endif

namespace engage::cli {

fs::path output_root() {
  if (const char* root = std::getenv("ENGAGE_OUTPUT_ROOT"); root && *root) return root;
  return fs::current_path();
}

fs::path resolve_output(const std::string& path, const std::string& fallback_leaf) {
  fs::path p = path.empty() ? fs::path(fallback_leaf) : fs::path(path);
  return p.is_absolute() ? p : output_root() / p;
}

namespace {

nlohmann::json option_value(const CLI::Option* opt) {
  if (opt->get_type_size() == 0) return opt->count() > 0;
  if (opt->count() == 0) {
    const std::string def = opt->get_default_str();
    if (def.empty()) return nullptr;
    return def;
  }
  const auto& results = opt->results();
  if (opt->get_items_expected_max() > 1) return results;
  return results.back();
}

}  // namespace

void write_frozen_config(const fs::path& path, const CLI::App& cmd, const nlohmann::json& extra) {
  nlohmann::json j;
  std::string name = cmd.get_name();
  for (const CLI::App* parent = cmd.get_parent(); parent && parent->get_parent(); parent = parent->get_parent())
    name = parent->get_name() + " " + name;
  j["command"] = name;
  nlohmann::json options = nlohmann::json::object();
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "-h,--help") continue;
    std::string key = opt->get_single_name();
    if (key == "help") continue;
    options[key] = option_value(opt);
  }
  j["options"] = options;
  if (!extra.is_null())
    for (auto it = extra.begin(); it != extra.end(); ++it) j["resolved"][it.key()] = it.value();
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("not an integer list: " + text);
    }
  }
  if (out.empty()) throw UsageError("empty integer list");
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::logic_error&) {
      used = std::string::npos;
    }
    if (used != s.size() || s.empty() || s[0] == '-') throw UsageError("bad seed list: " + text);
    return static_cast<std::uint64_t>(v);
  };
  std::vector<std::uint64_t> out;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = number(text.substr(0, dots));
    const auto hi = number(text.substr(dots + 2));
    if (hi < lo || hi - lo > 10'000) throw UsageError("bad seed range: " + text);
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(number(item));
  if (out.empty()) throw UsageError("empty seed list");
  return out;
}

void write_text_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

DatasetDir DatasetDir::open(const fs::path& root) {
  DatasetDir d;
  d.root = root;
  d.manifest = read_manifest(root / "manifest.json");
  return d;
}

fs::path DatasetDir::band_dir(int band) const { return root / ("band" + std::to_string(band)); }

namespace {

std::vector<LabeledExample> tagged(std::vector<LabeledExample> xs, Signal signal, int band) {
  for (auto& e : xs) {
    e.signal = signal;
    e.band = band;
  }
  return xs;
}

}  // namespace

std::vector<LabeledExample> DatasetDir::train(int band) const {
  if (!manifest.train_ids.contains(band))
    throw UsageError("band " + std::to_string(band) + " is not in dataset " + root.string());
  return tagged(read_examples(band_dir(band) / "train.jsonl"), manifest.signal, band);
}

std::vector<LabeledExample> DatasetDir::validation(int band) const {
  if (!manifest.validation_ids.contains(band))
    throw UsageError("band " + std::to_string(band) + " is not in dataset " + root.string());
  return tagged(read_examples(band_dir(band) / "validation.jsonl"), manifest.signal, band);
}

std::vector<LabeledExample> DatasetDir::test() const {
  return tagged(read_examples(root / "test.jsonl"), manifest.signal, 10);
}

std::vector<LabeledExample> DatasetDir::all(int band) const {
  auto out = train(band);
  for (auto& e : validation(band)) out.push_back(std::move(e));
  for (auto& e : test()) {
    e.band = band;
    out.push_back(std::move(e));
  }
  return out;
}

bool is_text_model(const std::string& model) { return model == "cnn" || model == "gru"; }

std::vector<ModelInput> InputContext::encode(const std::vector<LabeledExample>& examples) const {
  std::vector<ModelInput> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    TokenSequence seq = tokenize(e.text);
    if (is_text_model(model)) {
      out.push_back(encode_tokens(std::move(seq.tokens), *embeddings, max_length));
    } else {
      ModelInput in;
      if (model == "park") {
        auto it = author_of.find(e.comment_id);
        const UserAggregates& user = it == author_of.end() ? users->global() : users->lookup(it->second);
        in.features = featurize_park(seq, user);
      } else {
        in.features = featurize_length(seq);
      }
      in.tokens = std::move(seq.tokens);
      out.push_back(std::move(in));
    }
  }
  return out;
}

InputContext make_input_context(const std::string& model, const DatasetDir& data, int band,
                                const std::optional<fs::path>& embeddings,
                                const std::optional<fs::path>& corpus, std::size_t max_length) {
  InputContext ctx;
  ctx.model = model;
  ctx.max_length = max_length;
  if (is_text_model(model)) {
    if (!embeddings) throw UsageError("--embeddings is required for model " + model);
    ctx.embeddings = load_vectors(*embeddings);
  } else if (model == "park") {
    require_user_metadata(data.manifest.source_format);
    if (!corpus) throw UsageError("--corpus is required for model park");
    if (!data.manifest.train_ids.contains(band))
      throw UsageError("band " + std::to_string(band) + " is not in dataset " + data.root.string());
    const auto& ids = data.manifest.train_ids.at(band);
    const std::set<std::string> train_ids(ids.begin(), ids.end());
    std::vector<CommentRecord> train_records;
    CorpusReader reader(*corpus, {});
    while (auto r = reader.next()) {
      ctx.author_of[r->comment_id] = r->author_id;
      if (train_ids.contains(r->comment_id)) train_records.push_back(std::move(*r));
    }
    ctx.users = UserAggregateTable::build(train_records);
  } else if (model != "baseline") {
    throw UsageError("unknown model: " + model);
  }
  return ctx;
}

std::vector<int> labels_of(const std::vector<LabeledExample>& examples) {
  std::vector<int> y;
  y.reserve(examples.size());
  for (const auto& e : examples) y.push_back(static_cast<int>(e.label));
  return y;
}

fs::path default_lexicon_dir() { return ENGAGE_DEFAULT_LEXICONS; }

}  // namespace engage::cli
