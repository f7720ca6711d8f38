#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "engage/rng.hpp"

namespace engage {

struct Param {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
};

// Named trainable tensors, in declaration order. Element addresses are
// stable, so models may hold references across add() calls.
class ParameterSet {
 public:
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols);

  std::size_t size() const { return params_.size(); }
  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  Param& at(std::string_view name);
  const Param& at(std::string_view name) const;
  std::size_t scalar_count() const;

  void zero_grad();
  std::vector<Eigen::MatrixXd> values() const;
  void restore(const std::vector<Eigen::MatrixXd>& values);

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::deque<Param> params_;
};

// Uniform in +-sqrt(6 / (fan_in + fan_out)), fan_in = rows.
void glorot_uniform(Eigen::MatrixXd& m, Rng& rng);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}
  // One bias-corrected update from the current gradients.
  void step(ParameterSet& params);
  long steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<Eigen::MatrixXd> m_, v_;
  long t_ = 0;
};

}  // namespace engage
