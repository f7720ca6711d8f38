#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "engage/embeddings.hpp"
#include "engage/models/params.hpp"
#include "engage/rng.hpp"

namespace engage {

// Reserved token that always maps to the zero vector and never counts as
// content.
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::size_t kDefaultMaxLength = 200;

// What a classifier consumes. Text models read rows [0, length) of x; rows
// past length are padding. Feature models read `features`.
struct ModelInput {
  std::vector<std::string> tokens;
  Eigen::MatrixXd x;
  std::size_t length = 0;
  Eigen::VectorXd features;
};

// Keeps the first max_length tokens, embeds them and drops trailing pads from
// the effective length. An empty sequence becomes one zero row with
// length 1 (and no tokens).
ModelInput encode_tokens(std::vector<std::string> tokens, const EmbeddingModel& embeddings,
                         std::size_t max_length = kDefaultMaxLength);

// Rebuilds x and length from tokens and rows already embedded: used after
// deleting positions. rows.size() must equal tokens.size().
ModelInput make_text_input(std::vector<std::string> tokens, Eigen::MatrixXd rows);

Eigen::Vector2d softmax(const Eigen::Vector2d& logits);

// Index 0 = flop, 1 = top.
class Classifier {
 public:
  Classifier() = default;
  Classifier(const Classifier&) = delete;
  Classifier& operator=(const Classifier&) = delete;
  virtual ~Classifier() = default;

  virtual std::string_view arch() const = 0;
  virtual std::map<std::string, std::string> config() const = 0;
  virtual bool uses_text() const { return true; }

  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  virtual void initialize(Rng& rng) = 0;
  // Hook run once on the training inputs before the first update.
  virtual void prepare(std::span<const ModelInput> /*train*/) {}

  // Inference: dropout off.
  Eigen::Vector2d logits(const ModelInput& in) const { return forward_logits(in, nullptr); }
  Eigen::Vector2d probabilities(const ModelInput& in) const { return softmax(logits(in)); }
  int predict(const ModelInput& in) const;

  // Cross-entropy for one example. Dropout is active iff rng is given.
  double loss(const ModelInput& in, int label, Rng* dropout) const;

  // Adds weight * dloss/dparam into params().grad. Returns the loss. The
  // dropout masks drawn match those of loss() for the same rng state.
  virtual double accumulate(const ModelInput& in, int label, double weight, Rng* dropout) = 0;

  // Gradient of logits()[cls] with respect to the rows of in.x. Rows past
  // the effective length get zero.
  virtual Eigen::MatrixXd input_gradient(const ModelInput& in, int cls) const;

  // Non-trainable tensors saved with the weights (e.g. feature scaling).
  virtual std::vector<std::pair<std::string, Eigen::MatrixXd>> buffers() const { return {}; }
  virtual void set_buffer(const std::string& name, const Eigen::MatrixXd& value);

 protected:
  virtual Eigen::Vector2d forward_logits(const ModelInput& in, Rng* dropout) const = 0;

  ParameterSet params_;
};

// Gradient of cross-entropy over softmax(logits) for the given label.
Eigen::Vector2d cross_entropy_grad(const Eigen::Vector2d& logits, int label);
double cross_entropy(const Eigen::Vector2d& logits, int label);

// Inverted dropout mask: each entry kept with probability 1 - rate and
// scaled by 1 / (1 - rate). All ones without an rng or with rate 0.
Eigen::VectorXd dropout_mask(Eigen::Index n, double rate, Rng* rng);

}  // namespace engage
