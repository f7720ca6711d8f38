#include "engage/models/params.hpp"

#include <cmath>

#include "engage/error.hpp"

namespace engage {

std::size_t ParameterSet::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  for (const auto& p : params_)
    if (p.name == name) throw UsageError("duplicate parameter " + name);
  params_.push_back({std::move(name), Eigen::MatrixXd::Zero(rows, cols), Eigen::MatrixXd::Zero(rows, cols)});
  return params_.size() - 1;
}

Param& ParameterSet::at(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return p;
  throw UsageError("no parameter named " + std::string(name));
}

const Param& ParameterSet::at(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->at(name);
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

std::vector<Eigen::MatrixXd> ParameterSet::values() const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

void ParameterSet::restore(const std::vector<Eigen::MatrixXd>& values) {
  if (values.size() != params_.size()) throw UsageError("parameter snapshot has wrong size");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].rows() != params_[i].value.rows() || values[i].cols() != params_[i].value.cols())
      throw UsageError("parameter snapshot shape mismatch for " + params_[i].name);
    params_[i].value = values[i];
  }
}

void glorot_uniform(Eigen::MatrixXd& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-limit, limit);
}

void Adam::step(ParameterSet& params) {
  if (m_.size() != params.size()) {
    m_.clear();
    v_.clear();
    for (const auto& p : params) {
      m_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * p.grad;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= config_.lr * (m_[i].array() / c1) /
                       ((v_[i].array() / c2).sqrt() + config_.epsilon);
  }
}

}  // namespace engage
