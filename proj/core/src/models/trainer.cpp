#include "engage/models/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "engage/error.hpp"

namespace engage {

namespace {
using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}
}  // namespace

double mean_loss(const Classifier& model, std::span<const ModelInput> x, std::span<const int> y) {
  if (x.size() != y.size()) throw UsageError("inputs and labels differ in length");
  if (x.empty()) throw UsageError("cannot score an empty set");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += model.loss(x[i], y[i], nullptr);
  return total / static_cast<double>(x.size());
}

double accuracy(const Classifier& model, std::span<const ModelInput> x, std::span<const int> y) {
  if (x.size() != y.size()) throw UsageError("inputs and labels differ in length");
  if (x.empty()) throw UsageError("cannot score an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.size(); ++i) hits += model.predict(x[i]) == y[i];
  return static_cast<double>(hits) / static_cast<double>(x.size());
}

TrainLog train_classifier(Classifier& model, std::span<const ModelInput> train_x,
                          std::span<const int> train_y, std::span<const ModelInput> val_x,
                          std::span<const int> val_y, const TrainConfig& config) {
  if (train_x.size() != train_y.size() || val_x.size() != val_y.size())
    throw UsageError("inputs and labels differ in length");
  if (train_x.empty()) throw UsageError("training split is empty");
  if (val_x.empty()) throw UsageError("validation split is empty");
  if (config.batch_size == 0 || config.max_epochs <= 0 || config.patience < 1)
    throw UsageError("batch size, epochs and patience must be positive");

  const auto start = Clock::now();
  Rng init(derive_seed(config.seed, "init"));
  model.initialize(init);
  model.prepare(train_x);

  Rng order_rng(derive_seed(config.seed, "batch-order"));
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  Adam adam(config.adam);

  TrainLog log;
  log.seed = config.seed;
  std::vector<Eigen::MatrixXd> best;
  double best_loss = std::numeric_limits<double>::infinity();
  int waited = 0;
  std::vector<std::size_t> order(train_x.size());

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - begin);
      model.params().zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = begin; i < end; ++i)
        batch_loss += model.accumulate(train_x[order[i]], train_y[order[i]], weight, &dropout_rng);
      if (!std::isfinite(batch_loss))
        throw NumericError("non-finite training loss in epoch " + std::to_string(epoch) +
                           " at example offset " + std::to_string(begin));
      adam.step(model.params());
      epoch_loss += batch_loss;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train_x.size());
    rec.val_loss = mean_loss(model, val_x, val_y);
    rec.val_acc = accuracy(model, val_x, val_y);
    rec.seconds = elapsed(epoch_start);
    if (!std::isfinite(rec.val_loss))
      throw NumericError("non-finite validation loss in epoch " + std::to_string(epoch));
    log.epochs.push_back(rec);

    if (rec.val_loss < best_loss) {
      best_loss = rec.val_loss;
      best = model.params().values();
      log.best_epoch = epoch;
      waited = 0;
    } else if (++waited >= config.patience) {
      log.stopped_early = epoch < config.max_epochs;
      break;
    }
  }
  model.params().restore(best);
  log.best_val_loss = best_loss;
  log.seconds = elapsed(start);
  return log;
}

void write_train_log_csv(std::ostream& out, const TrainLog& log) {
  out << "epoch,train_loss,val_loss,val_acc,seconds\n";
  char buf[160];
  for (const auto& e : log.epochs) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.3f\n", e.epoch, e.train_loss, e.val_loss,
                  e.val_acc, e.seconds);
    out << buf;
  }
}

}  // namespace engage
