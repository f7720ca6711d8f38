#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "engage/models/classifier.hpp"

namespace engage {

// Builds an untrained model of the named architecture ("logistic", "cnn",
// "gru") from its config() map.
std::unique_ptr<Classifier> make_classifier(const std::string& arch,
                                            const std::map<std::string, std::string>& config);

struct LoadedCheckpoint {
  std::unique_ptr<Classifier> model;
  std::map<std::string, std::string> metadata;
};

// JSON container: architecture id, config, metadata (embedding digest,
// training settings), and every tensor with declared dimensions. Contains
// nothing run-dependent, so equal weights give equal bytes.
void save_checkpoint(const Classifier& model, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& metadata);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace engage
