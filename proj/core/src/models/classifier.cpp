#include "engage/models/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "engage/error.hpp"

namespace engage {

ModelInput encode_tokens(std::vector<std::string> tokens, const EmbeddingModel& embeddings,
                         std::size_t max_length) {
  if (tokens.size() > max_length) tokens.resize(max_length);
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tokens.size()), embeddings.dim());
  for (std::size_t t = 0; t < tokens.size(); ++t)
    if (tokens[t] != kPadToken) rows.row(static_cast<Eigen::Index>(t)) = embeddings.lookup(tokens[t]).transpose();
  return make_text_input(std::move(tokens), std::move(rows));
}

ModelInput make_text_input(std::vector<std::string> tokens, Eigen::MatrixXd rows) {
  if (static_cast<std::size_t>(rows.rows()) != tokens.size())
    throw UsageError("token count does not match embedded rows");
  ModelInput in;
  std::size_t length = tokens.size();
  while (length > 0 && tokens[length - 1] == kPadToken) --length;
  if (rows.rows() == 0) {
    in.x = Eigen::MatrixXd::Zero(1, rows.cols());
    in.length = 1;
  } else {
    in.x = std::move(rows);
    in.length = std::max<std::size_t>(length, 1);
  }
  in.tokens = std::move(tokens);
  return in;
}

Eigen::Vector2d softmax(const Eigen::Vector2d& logits) {
  const double m = logits.maxCoeff();
  Eigen::Vector2d e = (logits.array() - m).exp();
  return e / e.sum();
}

double cross_entropy(const Eigen::Vector2d& logits, int label) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
  return lse - logits[label];
}

Eigen::Vector2d cross_entropy_grad(const Eigen::Vector2d& logits, int label) {
  Eigen::Vector2d g = softmax(logits);
  g[label] -= 1.0;
  return g;
}

Eigen::VectorXd dropout_mask(Eigen::Index n, double rate, Rng* rng) {
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(n);
  if (!rng || rate <= 0.0) return mask;
  const double keep = 1.0 - rate;
  for (Eigen::Index i = 0; i < n; ++i) mask[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
  return mask;
}

int Classifier::predict(const ModelInput& in) const {
  const auto z = logits(in);
  return z[1] > z[0] ? 1 : 0;
}

double Classifier::loss(const ModelInput& in, int label, Rng* dropout) const {
  return cross_entropy(forward_logits(in, dropout), label);
}

Eigen::MatrixXd Classifier::input_gradient(const ModelInput&, int) const {
  throw UsageError(std::string(arch()) + " does not take token inputs");
}

void Classifier::set_buffer(const std::string& name, const Eigen::MatrixXd&) {
  throw DataError(std::string(arch()) + " has no buffer named " + name);
}

}  // namespace engage
