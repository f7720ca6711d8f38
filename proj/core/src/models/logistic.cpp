#include "engage/models/logistic.hpp"

#include <cmath>

#include "engage/error.hpp"

namespace engage {

LogisticModel::LogisticModel(FeatureSet features, Eigen::Index n_features) : features_(features) {
  if (n_features <= 0) throw UsageError("logistic model needs at least one feature");
  w_ = params_.add("w", n_features, 1);
  b_ = params_.add("b", 1, 1);
  scaler_.mean = Eigen::VectorXd::Zero(n_features);
  scaler_.scale = Eigen::VectorXd::Ones(n_features);
}

std::map<std::string, std::string> LogisticModel::config() const {
  return {{"features", std::string(to_string(features_))},
          {"n_features", std::to_string(params_[w_].value.rows())}};
}

void LogisticModel::initialize(Rng&) {
  // Convex problem: start from zero.
  params_[w_].value.setZero();
  params_[b_].value.setZero();
}

void LogisticModel::prepare(std::span<const ModelInput> train) {
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(train.size());
  for (const auto& in : train) rows.push_back(in.features);
  scaler_ = Standardizer::fit(rows);
}

void LogisticModel::set_standardizer(Standardizer s) {
  if (s.mean.size() != params_[w_].value.rows() || s.scale.size() != s.mean.size())
    throw UsageError("standardizer dimension mismatch");
  scaler_ = std::move(s);
}

double LogisticModel::score(const ModelInput& in) const {
  return params_[w_].value.col(0).dot(scaler_.apply(in.features)) + params_[b_].value(0, 0);
}

double LogisticModel::probability_top(const ModelInput& in) const {
  return 1.0 / (1.0 + std::exp(-score(in)));
}

Eigen::Vector2d LogisticModel::forward_logits(const ModelInput& in, Rng*) const {
  return {0.0, score(in)};
}

double LogisticModel::accumulate(const ModelInput& in, int label, double weight, Rng*) {
  const Eigen::VectorXd xs = scaler_.apply(in.features);
  const Eigen::Vector2d z(0.0, params_[w_].value.col(0).dot(xs) + params_[b_].value(0, 0));
  const double dz = cross_entropy_grad(z, label)[1] * weight;
  params_[w_].grad.col(0) += dz * xs;
  params_[b_].grad(0, 0) += dz;
  return cross_entropy(z, label);
}

std::vector<std::pair<std::string, Eigen::MatrixXd>> LogisticModel::buffers() const {
  return {{"feature_mean", scaler_.mean}, {"feature_scale", scaler_.scale}};
}

void LogisticModel::set_buffer(const std::string& name, const Eigen::MatrixXd& value) {
  if (value.cols() != 1 || value.rows() != params_[w_].value.rows())
    throw DataError("buffer " + name + " has wrong shape");
  if (name == "feature_mean")
    scaler_.mean = value.col(0);
  else if (name == "feature_scale")
    scaler_.scale = value.col(0);
  else
    Classifier::set_buffer(name, value);
}

}  // namespace engage
