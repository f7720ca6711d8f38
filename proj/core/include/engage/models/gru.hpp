#pragma once

#include <array>
#include <vector>

#include "engage/models/classifier.hpp"

namespace engage {

struct GruConfig {
  int dim = 300;
  int hidden = 32;               // per direction
  double spatial_dropout = 0.1;  // whole token positions
  double dropout = 0.1;          // on the concatenated final states
  int dense = 16;
};

// Weights of one recurrent direction. Gates: z (update), r (reset), h
// (candidate); reset applied to the previous state before the recurrent
// product.
struct GruDirectionWeights {
  const Eigen::MatrixXd *Wz, *Wr, *Wh;  // dim x hidden
  const Eigen::MatrixXd *Uz, *Ur, *Uh;  // hidden x hidden
  const Eigen::MatrixXd *bz, *br, *bh;  // 1 x hidden
};

struct GruStep {
  Eigen::Index position = 0;  // row of the input consumed
  Eigen::RowVectorXd h_prev, z, r, candidate, candidate_pre, h;
};

// Every intermediate of one forward pass.
struct GruTrace {
  Eigen::MatrixXd x;  // effective input rows after spatial dropout
  Eigen::VectorXd position_mask;
  std::vector<GruStep> forward, backward;  // backward[i] consumes row len-1-i
  Eigen::RowVectorXd concat, concat_mask, concat_dropped;
  Eigen::RowVectorXd dense_pre, dense_out;
  Eigen::Vector2d logits;
};

// Bidirectional GRU over frozen embeddings. Readout: [forward final state,
// backward final state] -> dropout -> dense ReLU -> dense 2.
class GruModel : public Classifier {
 public:
  explicit GruModel(GruConfig config);

  std::string_view arch() const override { return "gru"; }
  std::map<std::string, std::string> config() const override;
  const GruConfig& settings() const { return config_; }

  void initialize(Rng& rng) override;
  double accumulate(const ModelInput& in, int label, double weight, Rng* dropout) override;
  Eigen::MatrixXd input_gradient(const ModelInput& in, int cls) const override;

  GruTrace trace(const ModelInput& in, Rng* dropout = nullptr) const;
  GruDirectionWeights direction(int which) const;  // 0 forward, 1 backward
  const Eigen::MatrixXd& dense_w() const { return params_[dense_w_].value; }
  const Eigen::MatrixXd& dense_b() const { return params_[dense_b_].value; }
  const Eigen::MatrixXd& out_w() const { return params_[out_w_].value; }
  const Eigen::MatrixXd& out_b() const { return params_[out_b_].value; }

 protected:
  Eigen::Vector2d forward_logits(const ModelInput& in, Rng* dropout) const override;

 private:
  struct Slots {
    std::size_t Wz, Wr, Wh, Uz, Ur, Uh, bz, br, bh;
  };

  std::vector<GruStep> run_direction(const Eigen::MatrixXd& x, int which) const;
  void backward(const GruTrace& t, const Eigen::Vector2d& dlogits, ParameterSet* grads,
                Eigen::MatrixXd* dx) const;
  void backward_direction(const std::vector<GruStep>& steps, const Eigen::MatrixXd& x, int which,
                          Eigen::RowVectorXd dh, ParameterSet* grads, Eigen::MatrixXd& dx) const;

  GruConfig config_;
  std::array<Slots, 2> dirs_;
  std::size_t dense_w_, dense_b_, out_w_, out_b_;
};

}  // namespace engage
