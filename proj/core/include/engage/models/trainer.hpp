#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "engage/models/classifier.hpp"

namespace engage {

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 64;
  int max_epochs = 20;
  int patience = 2;  // non-improving epochs tolerated before stopping
  std::uint64_t seed = 1;
  std::size_t max_length = kDefaultMaxLength;  // applied when encoding
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  std::uint64_t seed = 0;
  bool stopped_early = false;
  double seconds = 0.0;
};

// Initializes the model from derive_seed(seed, "init"), runs prepare() on the
// training inputs, then trains with Adam on mean-batch cross-entropy. After
// every epoch the validation loss decides early stopping; the parameters of
// the best epoch are restored before returning. Throws NumericError on a
// non-finite loss.
TrainLog train_classifier(Classifier& model, std::span<const ModelInput> train_x,
                          std::span<const int> train_y, std::span<const ModelInput> val_x,
                          std::span<const int> val_y, const TrainConfig& config);

double mean_loss(const Classifier& model, std::span<const ModelInput> x, std::span<const int> y);
double accuracy(const Classifier& model, std::span<const ModelInput> x, std::span<const int> y);

// epoch,train_loss,val_loss,val_acc,seconds
void write_train_log_csv(std::ostream& out, const TrainLog& log);

}  // namespace engage
