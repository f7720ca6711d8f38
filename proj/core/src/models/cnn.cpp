#include "engage/models/cnn.hpp"

#include <algorithm>

#include "engage/error.hpp"

namespace engage {

namespace {
std::string join_widths(const std::vector<int>& widths) {
  std::string s;
  for (std::size_t i = 0; i < widths.size(); ++i) s += (i ? "," : "") + std::to_string(widths[i]);
  return s;
}
}  // namespace

CnnModel::CnnModel(CnnConfig config) : config_(std::move(config)) {
  if (config_.dim <= 0 || config_.maps <= 0 || config_.widths.empty())
    throw UsageError("cnn needs positive dim, maps and at least one width");
  for (int w : config_.widths) {
    if (w <= 0) throw UsageError("cnn filter width must be positive");
    conv_w_.push_back(params_.add("conv" + std::to_string(w) + ".W", w * config_.dim, config_.maps));
    conv_b_.push_back(params_.add("conv" + std::to_string(w) + ".b", 1, config_.maps));
  }
  const auto features = static_cast<Eigen::Index>(config_.widths.size()) * config_.maps;
  out_w_ = params_.add("out.W", features, 2);
  out_b_ = params_.add("out.b", 1, 2);
}

std::map<std::string, std::string> CnnModel::config() const {
  return {{"dim", std::to_string(config_.dim)},
          {"widths", join_widths(config_.widths)},
          {"maps", std::to_string(config_.maps)},
          {"dropout", std::to_string(config_.dropout)}};
}

void CnnModel::initialize(Rng& rng) {
  for (std::size_t i = 0; i < conv_w_.size(); ++i) {
    glorot_uniform(params_[conv_w_[i]].value, rng);
    params_[conv_b_[i]].value.setZero();
  }
  glorot_uniform(params_[out_w_].value, rng);
  params_[out_b_].value.setZero();
}

CnnModel::Trace CnnModel::run(const ModelInput& in, Rng* dropout) const {
  if (in.x.cols() != config_.dim) throw UsageError("cnn input has wrong embedding dimension");
  const auto len = static_cast<Eigen::Index>(std::max<std::size_t>(in.length, 1));
  const Eigen::Index D = config_.dim;
  Trace t;
  t.pooled.resize(static_cast<Eigen::Index>(config_.widths.size()) * config_.maps);
  for (std::size_t bi = 0; bi < config_.widths.size(); ++bi) {
    const Eigen::Index w = config_.widths[bi];
    const Eigen::Index padded = std::max(len, w);
    const Eigen::Index positions = padded - w + 1;
    Branch b;
    b.windows = Eigen::MatrixXd::Zero(positions, w * D);
    for (Eigen::Index p = 0; p < positions; ++p)
      for (Eigen::Index k = 0; k < w; ++k)
        if (p + k < len && p + k < in.x.rows()) b.windows.block(p, k * D, 1, D) = in.x.row(p + k);
    b.pre = b.windows * params_[conv_w_[bi]].value;
    b.pre.rowwise() += params_[conv_b_[bi]].value.row(0);
    b.argmax.resize(static_cast<std::size_t>(config_.maps));
    for (Eigen::Index j = 0; j < config_.maps; ++j) {
      Eigen::Index best = 0;
      b.pre.col(j).maxCoeff(&best);
      b.argmax[static_cast<std::size_t>(j)] = best;
      t.pooled[static_cast<Eigen::Index>(bi) * config_.maps + j] = std::max(0.0, b.pre(best, j));
    }
    t.branches.push_back(std::move(b));
  }
  t.mask = dropout_mask(t.pooled.size(), config_.dropout, dropout);
  t.hidden = t.pooled.cwiseProduct(t.mask);
  t.logits = (t.hidden.transpose() * params_[out_w_].value + params_[out_b_].value).transpose();
  return t;
}

void CnnModel::backward(const Trace& t, const ModelInput& in, const Eigen::Vector2d& dlogits,
                        ParameterSet* grads, Eigen::MatrixXd* dx) const {
  const Eigen::Index D = config_.dim;
  if (grads) {
    (*grads)[out_w_].grad += t.hidden * dlogits.transpose();
    (*grads)[out_b_].grad += dlogits.transpose();
  }
  const Eigen::VectorXd dpooled = (params_[out_w_].value * dlogits).cwiseProduct(t.mask);
  if (dx) *dx = Eigen::MatrixXd::Zero(in.x.rows(), in.x.cols());
  const auto len = static_cast<Eigen::Index>(std::max<std::size_t>(in.length, 1));
  for (std::size_t bi = 0; bi < t.branches.size(); ++bi) {
    const auto& b = t.branches[bi];
    const Eigen::Index w = config_.widths[bi];
    const auto& W = params_[conv_w_[bi]].value;
    for (Eigen::Index j = 0; j < config_.maps; ++j) {
      const Eigen::Index p = b.argmax[static_cast<std::size_t>(j)];
      const double g = dpooled[static_cast<Eigen::Index>(bi) * config_.maps + j];
      if (g == 0.0 || b.pre(p, j) <= 0.0) continue;
      if (grads) {
        (*grads)[conv_w_[bi]].grad.col(j) += g * b.windows.row(p).transpose();
        (*grads)[conv_b_[bi]].grad(0, j) += g;
      }
      if (dx)
        for (Eigen::Index k = 0; k < w; ++k)
          if (p + k < len && p + k < in.x.rows())
            dx->row(p + k) += g * W.block(k * D, j, D, 1).transpose();
    }
  }
}

Eigen::Vector2d CnnModel::forward_logits(const ModelInput& in, Rng* dropout) const {
  return run(in, dropout).logits;
}

double CnnModel::accumulate(const ModelInput& in, int label, double weight, Rng* dropout) {
  const Trace t = run(in, dropout);
  backward(t, in, cross_entropy_grad(t.logits, label) * weight, &params_, nullptr);
  return cross_entropy(t.logits, label);
}

Eigen::MatrixXd CnnModel::input_gradient(const ModelInput& in, int cls) const {
  const Trace t = run(in, nullptr);
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  d[cls] = 1.0;
  Eigen::MatrixXd dx;
  backward(t, in, d, nullptr, &dx);
  return dx;
}

}  // namespace engage
