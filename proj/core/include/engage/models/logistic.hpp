#pragma once

#include "engage/models/classifier.hpp"
#include "engage/models/features.hpp"

namespace engage {

// sigma(w . standardize(x) + b), exposed as the logit pair (0, z) so it
// shares the two-class loss with the text models.
class LogisticModel : public Classifier {
 public:
  LogisticModel(FeatureSet features, Eigen::Index n_features);

  std::string_view arch() const override { return "logistic"; }
  std::map<std::string, std::string> config() const override;
  bool uses_text() const override { return false; }
  FeatureSet feature_set() const { return features_; }

  void initialize(Rng& rng) override;
  void prepare(std::span<const ModelInput> train) override;
  double accumulate(const ModelInput& in, int label, double weight, Rng* dropout) override;

  double probability_top(const ModelInput& in) const;
  const Standardizer& standardizer() const { return scaler_; }
  void set_standardizer(Standardizer s);

  std::vector<std::pair<std::string, Eigen::MatrixXd>> buffers() const override;
  void set_buffer(const std::string& name, const Eigen::MatrixXd& value) override;

 protected:
  Eigen::Vector2d forward_logits(const ModelInput& in, Rng* dropout) const override;

 private:
  double score(const ModelInput& in) const;

  FeatureSet features_;
  std::size_t w_, b_;
  Standardizer scaler_;
};

}  // namespace engage
