#pragma once

#include <vector>

#include "engage/models/classifier.hpp"

namespace engage {

struct CnnConfig {
  int dim = 300;
  std::vector<int> widths{3, 4, 5};
  int maps = 100;
  double dropout = 0.5;
};

// One convolution layer per width with ReLU, max-over-time pooling over the
// effective length, dropout, dense layer to two logits. Inputs shorter than
// a filter are zero-padded to its width.
class CnnModel : public Classifier {
 public:
  explicit CnnModel(CnnConfig config);

  std::string_view arch() const override { return "cnn"; }
  std::map<std::string, std::string> config() const override;
  const CnnConfig& settings() const { return config_; }

  void initialize(Rng& rng) override;
  double accumulate(const ModelInput& in, int label, double weight, Rng* dropout) override;
  Eigen::MatrixXd input_gradient(const ModelInput& in, int cls) const override;

 protected:
  Eigen::Vector2d forward_logits(const ModelInput& in, Rng* dropout) const override;

 private:
  struct Branch {
    Eigen::MatrixXd windows;  // positions x (width * dim)
    Eigen::MatrixXd pre;      // positions x maps
    std::vector<Eigen::Index> argmax;
  };
  struct Trace {
    std::vector<Branch> branches;
    Eigen::VectorXd pooled;
    Eigen::VectorXd mask;
    Eigen::VectorXd hidden;  // pooled * mask
    Eigen::Vector2d logits;
  };

  Trace run(const ModelInput& in, Rng* dropout) const;
  void backward(const Trace& t, const ModelInput& in, const Eigen::Vector2d& dlogits,
                ParameterSet* grads, Eigen::MatrixXd* dx) const;

  CnnConfig config_;
  std::vector<std::size_t> conv_w_, conv_b_;
  std::size_t out_w_, out_b_;
};

}  // namespace engage
