#include "engage/models/gru.hpp"

#include <algorithm>
#include <cmath>

#include "engage/error.hpp"

namespace engage {

namespace {
Eigen::RowVectorXd sigmoid(const Eigen::RowVectorXd& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}
}  // namespace

GruModel::GruModel(GruConfig config) : config_(config) {
  if (config_.dim <= 0 || config_.hidden <= 0 || config_.dense <= 0)
    throw UsageError("gru needs positive dim, hidden and dense sizes");
  const Eigen::Index D = config_.dim;
  const Eigen::Index H = config_.hidden;
  const char* prefix[2] = {"fw.", "bw."};
  for (int d = 0; d < 2; ++d) {
    const std::string p = prefix[d];
    auto& s = dirs_[static_cast<std::size_t>(d)];
    s.Wz = params_.add(p + "Wz", D, H);
    s.Wr = params_.add(p + "Wr", D, H);
    s.Wh = params_.add(p + "Wh", D, H);
    s.Uz = params_.add(p + "Uz", H, H);
    s.Ur = params_.add(p + "Ur", H, H);
    s.Uh = params_.add(p + "Uh", H, H);
    s.bz = params_.add(p + "bz", 1, H);
    s.br = params_.add(p + "br", 1, H);
    s.bh = params_.add(p + "bh", 1, H);
  }
  dense_w_ = params_.add("dense.W", 2 * H, config_.dense);
  dense_b_ = params_.add("dense.b", 1, config_.dense);
  out_w_ = params_.add("out.W", config_.dense, 2);
  out_b_ = params_.add("out.b", 1, 2);
}

std::map<std::string, std::string> GruModel::config() const {
  return {{"dim", std::to_string(config_.dim)},
          {"hidden", std::to_string(config_.hidden)},
          {"spatial_dropout", std::to_string(config_.spatial_dropout)},
          {"dropout", std::to_string(config_.dropout)},
          {"dense", std::to_string(config_.dense)},
          {"readout", "final-states"}};
}

void GruModel::initialize(Rng& rng) {
  for (auto& p : params_) {
    if (p.value.rows() == 1)
      p.value.setZero();
    else
      glorot_uniform(p.value, rng);
  }
}

GruDirectionWeights GruModel::direction(int which) const {
  const auto& s = dirs_[static_cast<std::size_t>(which)];
  return {&params_[s.Wz].value, &params_[s.Wr].value, &params_[s.Wh].value,
          &params_[s.Uz].value, &params_[s.Ur].value, &params_[s.Uh].value,
          &params_[s.bz].value, &params_[s.br].value, &params_[s.bh].value};
}

std::vector<GruStep> GruModel::run_direction(const Eigen::MatrixXd& x, int which) const {
  const auto w = direction(which);
  const Eigen::Index len = x.rows();
  std::vector<GruStep> steps;
  steps.reserve(static_cast<std::size_t>(len));
  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(config_.hidden);
  for (Eigen::Index i = 0; i < len; ++i) {
    GruStep s;
    s.position = which == 0 ? i : len - 1 - i;
    const Eigen::RowVectorXd xt = x.row(s.position);
    s.h_prev = h;
    s.z = sigmoid(xt * *w.Wz + h * *w.Uz + *w.bz);
    s.r = sigmoid(xt * *w.Wr + h * *w.Ur + *w.br);
    s.candidate_pre = xt * *w.Wh + s.r.cwiseProduct(h) * *w.Uh + *w.bh;
    s.candidate = s.candidate_pre.array().tanh();
    s.h = s.z.cwiseProduct(h) + (Eigen::RowVectorXd::Ones(config_.hidden) - s.z).cwiseProduct(s.candidate);
    h = s.h;
    steps.push_back(std::move(s));
  }
  return steps;
}

GruTrace GruModel::trace(const ModelInput& in, Rng* dropout) const {
  if (in.x.cols() != config_.dim) throw UsageError("gru input has wrong embedding dimension");
  const auto len = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::max<std::size_t>(in.length, 1)), in.x.rows());
  GruTrace t;
  t.position_mask = dropout_mask(len, config_.spatial_dropout, dropout);
  t.x = in.x.topRows(len);
  for (Eigen::Index i = 0; i < len; ++i) t.x.row(i) *= t.position_mask[i];
  t.forward = run_direction(t.x, 0);
  t.backward = run_direction(t.x, 1);
  const Eigen::Index H = config_.hidden;
  t.concat.resize(2 * H);
  t.concat << t.forward.back().h, t.backward.back().h;
  t.concat_mask = dropout_mask(2 * H, config_.dropout, dropout).transpose();
  t.concat_dropped = t.concat.cwiseProduct(t.concat_mask);
  t.dense_pre = t.concat_dropped * params_[dense_w_].value + params_[dense_b_].value;
  t.dense_out = t.dense_pre.cwiseMax(0.0);
  t.logits = (t.dense_out * params_[out_w_].value + params_[out_b_].value).transpose();
  return t;
}

Eigen::Vector2d GruModel::forward_logits(const ModelInput& in, Rng* dropout) const {
  return trace(in, dropout).logits;
}

void GruModel::backward_direction(const std::vector<GruStep>& steps, const Eigen::MatrixXd& x,
                                  int which, Eigen::RowVectorXd dh, ParameterSet* grads,
                                  Eigen::MatrixXd& dx) const {
  const auto w = direction(which);
  const auto& s = dirs_[static_cast<std::size_t>(which)];
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const GruStep& st = *it;
    const Eigen::RowVectorXd xt = x.row(st.position);
    const Eigen::RowVectorXd one = Eigen::RowVectorXd::Ones(st.z.size());

    const Eigen::RowVectorXd dz = dh.cwiseProduct(st.h_prev - st.candidate);
    const Eigen::RowVectorXd dcand = dh.cwiseProduct(one - st.z);
    Eigen::RowVectorXd dh_prev = dh.cwiseProduct(st.z);

    const Eigen::RowVectorXd da_h = dcand.cwiseProduct(one - st.candidate.cwiseAbs2());
    const Eigen::RowVectorXd gated = st.r.cwiseProduct(st.h_prev);
    const Eigen::RowVectorXd dgated = da_h * w.Uh->transpose();
    const Eigen::RowVectorXd dr = dgated.cwiseProduct(st.h_prev);
    dh_prev += dgated.cwiseProduct(st.r);

    const Eigen::RowVectorXd da_z = dz.cwiseProduct(st.z.cwiseProduct(one - st.z));
    const Eigen::RowVectorXd da_r = dr.cwiseProduct(st.r.cwiseProduct(one - st.r));
    dh_prev += da_z * w.Uz->transpose() + da_r * w.Ur->transpose();

    if (grads) {
      (*grads)[s.Wh].grad += xt.transpose() * da_h;
      (*grads)[s.Uh].grad += gated.transpose() * da_h;
      (*grads)[s.bh].grad += da_h;
      (*grads)[s.Wz].grad += xt.transpose() * da_z;
      (*grads)[s.Uz].grad += st.h_prev.transpose() * da_z;
      (*grads)[s.bz].grad += da_z;
      (*grads)[s.Wr].grad += xt.transpose() * da_r;
      (*grads)[s.Ur].grad += st.h_prev.transpose() * da_r;
      (*grads)[s.br].grad += da_r;
    }
    dx.row(st.position) += da_h * w.Wh->transpose() + da_z * w.Wz->transpose() + da_r * w.Wr->transpose();
    dh = dh_prev;
  }
}

void GruModel::backward(const GruTrace& t, const Eigen::Vector2d& dlogits, ParameterSet* grads,
                        Eigen::MatrixXd* dx_out) const {
  const Eigen::RowVectorXd dl = dlogits.transpose();
  if (grads) {
    (*grads)[out_w_].grad += t.dense_out.transpose() * dl;
    (*grads)[out_b_].grad += dl;
  }
  Eigen::RowVectorXd ddense = dl * params_[out_w_].value.transpose();
  for (Eigen::Index i = 0; i < ddense.size(); ++i)
    if (t.dense_pre[i] <= 0.0) ddense[i] = 0.0;
  if (grads) {
    (*grads)[dense_w_].grad += t.concat_dropped.transpose() * ddense;
    (*grads)[dense_b_].grad += ddense;
  }
  const Eigen::RowVectorXd dconcat =
      (ddense * params_[dense_w_].value.transpose()).cwiseProduct(t.concat_mask);
  const Eigen::Index H = config_.hidden;
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(t.x.rows(), t.x.cols());
  backward_direction(t.forward, t.x, 0, dconcat.head(H), grads, dx);
  backward_direction(t.backward, t.x, 1, dconcat.tail(H), grads, dx);
  if (dx_out) {
    for (Eigen::Index i = 0; i < dx.rows(); ++i) dx.row(i) *= t.position_mask[i];
    *dx_out = std::move(dx);
  }
}

double GruModel::accumulate(const ModelInput& in, int label, double weight, Rng* dropout) {
  const GruTrace t = trace(in, dropout);
  backward(t, cross_entropy_grad(t.logits, label) * weight, &params_, nullptr);
  return cross_entropy(t.logits, label);
}

Eigen::MatrixXd GruModel::input_gradient(const ModelInput& in, int cls) const {
  const GruTrace t = trace(in, nullptr);
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  d[cls] = 1.0;
  Eigen::MatrixXd dx;
  backward(t, d, nullptr, &dx);
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(in.x.rows(), in.x.cols());
  full.topRows(dx.rows()) = dx;
  return full;
}

}  // namespace engage
