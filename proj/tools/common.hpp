#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "engage/dataset.hpp"
#include "engage/embeddings.hpp"
#include "engage/models/classifier.hpp"
#include "engage/textstats.hpp"

namespace engage::cli {

namespace fs = std::filesystem;

// Relative output paths resolve against $ENGAGE_OUTPUT_ROOT when it is set.
fs::path output_root();
fs::path resolve_output(const std::string& path, const std::string& fallback_leaf);

// Writes every option of `cmd` (given or defaulted) plus `extra` to `path`.
void write_frozen_config(const fs::path& path, const CLI::App& cmd, const nlohmann::json& extra = {});

// Comma-separated integers, e.g. "10,25,50".
std::vector<int> parse_int_list(const std::string& text);
// "1..10" or "1,4,9".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

void write_text_file(const fs::path& path, const std::string& contents);
std::string read_text_file(const fs::path& path);

// Directory written by build-dataset.
struct DatasetDir {
  fs::path root;
  DatasetManifest manifest;

  static DatasetDir open(const fs::path& root);
  std::vector<LabeledExample> train(int band) const;
  std::vector<LabeledExample> validation(int band) const;
  std::vector<LabeledExample> test() const;
  // Train, validation and test examples belonging to the band.
  std::vector<LabeledExample> all(int band) const;
  fs::path band_dir(int band) const;
};

// How labeled examples become model inputs for one model family.
struct InputContext {
  std::string model;  // baseline, park, cnn, gru
  std::optional<EmbeddingModel> embeddings;
  std::size_t max_length = kDefaultMaxLength;
  // Park features: author of every comment and aggregates from training
  // records only.
  std::map<std::string, std::string> author_of;
  std::optional<UserAggregateTable> users;

  std::vector<ModelInput> encode(const std::vector<LabeledExample>& examples) const;
};

bool is_text_model(const std::string& model);

// Loads what `model` needs: vectors for text models, corpus-derived user
// aggregates for park (built from the band's training ids).
InputContext make_input_context(const std::string& model, const DatasetDir& data, int band,
                                const std::optional<fs::path>& embeddings,
                                const std::optional<fs::path>& corpus, std::size_t max_length);

std::vector<int> labels_of(const std::vector<LabeledExample>& examples);

fs::path default_lexicon_dir();

}  // namespace engage::cli
