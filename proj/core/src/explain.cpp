#include "engage/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "engage/error.hpp"
#include "engage/rng.hpp"

namespace engage {

Method parse_method(std::string_view name) {
  if (name == "lrp") return Method::kLrp;
  if (name == "sa") return Method::kSa;
  if (name == "ig") return Method::kIg;
  if (name == "random") return Method::kRandom;
  throw UsageError("unknown relevance method '" + std::string(name) + "'");
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kLrp: return "lrp";
    case Method::kSa: return "sa";
    case Method::kIg: return "ig";
    case Method::kRandom: return "random";
  }
  return "?";
}

std::string_view to_string(Population p) {
  return p == Population::kTruePositives ? "true_positives" : "false_negatives";
}

Eigen::RowVectorXd lrp_linear(const Eigen::RowVectorXd& x, const Eigen::MatrixXd& W,
                              const Eigen::RowVectorXd& z, const Eigen::RowVectorXd& r_out,
                              double epsilon) {
  Eigen::RowVectorXd ratio(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j)
    ratio[j] = r_out[j] / (z[j] + (z[j] >= 0.0 ? epsilon : -epsilon));
  // R_i = x_i * sum_j W_ij ratio_j
  return x.cwiseProduct((W * ratio.transpose()).transpose());
}

Eigen::RowVectorXd DenseNetwork::forward(const Eigen::RowVectorXd& x) const {
  Eigen::RowVectorXd a = x;
  for (const auto& l : layers) {
    a = a * l.W + l.b;
    if (l.relu) a = a.cwiseMax(0.0);
  }
  return a;
}

Eigen::RowVectorXd lrp_dense(const DenseNetwork& net, const Eigen::RowVectorXd& x, Eigen::Index out,
                             double epsilon) {
  std::vector<Eigen::RowVectorXd> inputs, pre;
  Eigen::RowVectorXd a = x;
  for (const auto& l : net.layers) {
    inputs.push_back(a);
    pre.push_back(a * l.W + l.b);
    a = l.relu ? pre.back().cwiseMax(0.0) : pre.back();
  }
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(a.size());
  r[out] = a[out];
  for (std::size_t i = net.layers.size(); i-- > 0;)
    r = lrp_linear(inputs[i], net.layers[i].W, pre[i], r, epsilon);
  return r;
}

namespace {

// Walks one direction from its last step to its first, accumulating input
// relevance into rx.
void lrp_direction(const std::vector<GruStep>& steps, const GruDirectionWeights& w,
                   const Eigen::MatrixXd& x, Eigen::RowVectorXd r_h, double epsilon,
                   Eigen::MatrixXd& rx) {
  const Eigen::Index D = x.cols();
  const Eigen::Index H = r_h.size();
  Eigen::MatrixXd stacked(D + H, H);
  stacked << *w.Wh, *w.Uh;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const GruStep& s = *it;
    const Eigen::RowVectorXd keep = s.z.cwiseProduct(s.h_prev);
    const Eigen::RowVectorXd fresh = (Eigen::RowVectorXd::Ones(H) - s.z).cwiseProduct(s.candidate);
    Eigen::RowVectorXd r_keep(H), r_fresh(H);
    for (Eigen::Index k = 0; k < H; ++k) {
      const double denom = s.h[k] + (s.h[k] >= 0.0 ? epsilon : -epsilon);
      r_keep[k] = keep[k] / denom * r_h[k];
      r_fresh[k] = fresh[k] / denom * r_h[k];
    }
    // tanh passes relevance unchanged to the candidate pre-activation.
    Eigen::RowVectorXd in(D + H);
    in << x.row(s.position), s.r.cwiseProduct(s.h_prev);
    const Eigen::RowVectorXd r_in = lrp_linear(in, stacked, s.candidate_pre, r_fresh, epsilon);
    rx.row(s.position) += r_in.head(D);
    r_h = r_keep + r_in.tail(H);
  }
}

std::vector<double> token_scores(const Eigen::MatrixXd& per_dim, std::size_t n_tokens) {
  std::vector<double> out(n_tokens, 0.0);
  for (std::size_t t = 0; t < n_tokens && static_cast<Eigen::Index>(t) < per_dim.rows(); ++t)
    out[t] = per_dim.row(static_cast<Eigen::Index>(t)).sum();
  return out;
}

}  // namespace

Eigen::MatrixXd lrp_gru_dims(const GruModel& model, const ModelInput& in, int cls, double epsilon) {
  const GruTrace t = model.trace(in, nullptr);
  Eigen::RowVectorXd r_out = Eigen::RowVectorXd::Zero(2);
  r_out[cls] = t.logits[cls];
  const Eigen::RowVectorXd r_dense =
      lrp_linear(t.dense_out, model.out_w(), t.logits.transpose(), r_out, epsilon);
  const Eigen::RowVectorXd r_concat =
      lrp_linear(t.concat, model.dense_w(), t.dense_pre, r_dense, epsilon);
  const Eigen::Index H = model.settings().hidden;
  Eigen::MatrixXd rx = Eigen::MatrixXd::Zero(t.x.rows(), t.x.cols());
  lrp_direction(t.forward, model.direction(0), t.x, r_concat.head(H), epsilon, rx);
  lrp_direction(t.backward, model.direction(1), t.x, r_concat.tail(H), epsilon, rx);
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(in.x.rows(), in.x.cols());
  full.topRows(rx.rows()) = rx;
  return full;
}

Eigen::MatrixXd integrated_gradients(const Classifier& model, const ModelInput& in, int cls, int steps,
                                     const std::optional<Eigen::MatrixXd>& baseline) {
  if (steps < 1) throw UsageError("integrated gradients needs at least one step");
  const Eigen::MatrixXd x0 = baseline ? *baseline : Eigen::MatrixXd::Zero(in.x.rows(), in.x.cols());
  if (x0.rows() != in.x.rows() || x0.cols() != in.x.cols())
    throw UsageError("baseline shape does not match the input");
  const Eigen::MatrixXd delta = in.x - x0;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(in.x.rows(), in.x.cols());
  ModelInput point = in;
  for (int s = 0; s < steps; ++s) {
    const double alpha = (s + 0.5) / steps;
    point.x = x0 + alpha * delta;
    sum += model.input_gradient(point, cls);
  }
  return delta.cwiseProduct(sum / static_cast<double>(steps));
}

std::vector<double> relevance_lrp(const GruModel& model, const ModelInput& in, int cls, double epsilon) {
  return token_scores(lrp_gru_dims(model, in, cls, epsilon), in.tokens.size());
}

std::vector<double> relevance_sa(const Classifier& model, const ModelInput& in, int cls) {
  const Eigen::MatrixXd g = model.input_gradient(in, cls);
  std::vector<double> out(in.tokens.size(), 0.0);
  for (std::size_t t = 0; t < out.size() && static_cast<Eigen::Index>(t) < g.rows(); ++t)
    out[t] = g.row(static_cast<Eigen::Index>(t)).squaredNorm();
  return out;
}

std::vector<double> relevance_ig(const Classifier& model, const ModelInput& in, int cls, int steps) {
  return token_scores(integrated_gradients(model, in, cls, steps), in.tokens.size());
}

std::vector<double> relevance_random(std::size_t n_tokens, std::uint64_t seed, std::string_view comment_id) {
  Rng rng(derive_seed(seed, comment_id));
  std::vector<double> out(n_tokens);
  for (auto& v : out) v = rng.uniform();
  return out;
}

RelevanceVector explain(const Classifier& model, const ModelInput& in, std::string_view comment_id,
                        Method method, int cls, const ExplainOptions& options) {
  if (cls != 0 && cls != 1) throw UsageError("explained class must be 0 or 1");
  RelevanceVector r;
  r.comment_id = std::string(comment_id);
  r.method = method;
  r.tokens = in.tokens;
  r.explained_class = cls;
  r.output = model.logits(in)[cls];
  switch (method) {
    case Method::kLrp: {
      const auto* gru = dynamic_cast<const GruModel*>(&model);
      if (!gru) throw UsageError("lrp is implemented for gru models only");
      r.scores = relevance_lrp(*gru, in, cls, options.epsilon);
      break;
    }
    case Method::kSa: r.scores = relevance_sa(model, in, cls); break;
    case Method::kIg: r.scores = relevance_ig(model, in, cls, options.ig_steps); break;
    case Method::kRandom: r.scores = relevance_random(in.tokens.size(), options.seed, comment_id); break;
  }
  return r;
}

std::string serialize_relevance(const RelevanceVector& r) {
  nlohmann::json j;
  j["id"] = r.comment_id;
  j["method"] = std::string(to_string(r.method));
  j["tokens"] = r.tokens;
  j["scores"] = r.scores;
  j["class"] = r.explained_class == 1 ? "top" : "flop";
  j["output"] = r.output;
  return j.dump();
}

void write_relevance_jsonl(std::ostream& out, std::span<const RelevanceVector> rows) {
  for (const auto& r : rows) out << serialize_relevance(r) << '\n';
}

std::vector<VocabRelevance> rank_vocabulary(std::span<const RelevanceVector> rows, VocabAggregate aggregate,
                                            std::size_t min_occurrences) {
  std::map<std::string, VocabRelevance> acc;
  for (const auto& r : rows) {
    for (std::size_t t = 0; t < r.tokens.size() && t < r.scores.size(); ++t) {
      auto& v = acc[r.tokens[t]];
      if (v.occurrences == 0) {
        v.word = r.tokens[t];
        v.score = aggregate == VocabAggregate::kMean ? 0.0 : -std::numeric_limits<double>::infinity();
      }
      ++v.occurrences;
      if (aggregate == VocabAggregate::kMean)
        v.score += r.scores[t];
      else
        v.score = std::max(v.score, r.scores[t]);
    }
  }
  std::vector<VocabRelevance> out;
  for (auto& [w, v] : acc) {
    if (v.occurrences < min_occurrences) continue;
    if (aggregate == VocabAggregate::kMean) v.score /= static_cast<double>(v.occurrences);
    out.push_back(v);
  }
  std::sort(out.begin(), out.end(), [](const VocabRelevance& a, const VocabRelevance& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.word < b.word;
  });
  return out;
}

void write_vocabulary_csv(std::ostream& out, std::span<const VocabRelevance> rows) {
  out << "rank,word,score,occurrences\n";
  char buf[64];
  std::size_t rank = 0;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g", r.score);
    std::string word = r.word;
    if (word.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : word) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      word = q + "\"";
    }
    out << ++rank << ',' << word << ',' << buf << ',' << r.occurrences << '\n';
  }
}

ModelInput delete_positions(const ModelInput& in, std::span<const std::size_t> positions, bool zero_embedding) {
  std::vector<bool> gone(in.tokens.size(), false);
  for (auto p : positions)
    if (p < gone.size()) gone[p] = true;
  if (zero_embedding) {
    ModelInput out = in;
    for (std::size_t p = 0; p < gone.size(); ++p)
      if (gone[p]) out.x.row(static_cast<Eigen::Index>(p)).setZero();
    return out;
  }
  std::vector<std::string> tokens;
  std::vector<Eigen::Index> keep;
  for (std::size_t p = 0; p < in.tokens.size(); ++p)
    if (!gone[p]) {
      tokens.push_back(in.tokens[p]);
      keep.push_back(static_cast<Eigen::Index>(p));
    }
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(keep.size()), in.x.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = in.x.row(keep[i]);
  return make_text_input(std::move(tokens), std::move(rows));
}

DeletionResult deletion_eval(const Classifier& model, std::span<const EvalExample> examples, Method method,
                             const DeletionOptions& options) {
  DeletionResult result;
  result.true_positives.method = method;
  result.true_positives.population = Population::kTruePositives;
  result.false_negatives.method = method;
  result.false_negatives.population = Population::kFalseNegatives;
  const std::size_t K = options.max_k;
  std::vector<std::size_t> hits_tp(K + 1, 0), hits_fn(K + 1, 0), ex_tp(K + 1, 0), ex_fn(K + 1, 0);
  std::size_t n_tp = 0, n_fn = 0;

  for (const auto& ex : examples) {
    if (ex.label != 1) continue;
    const bool predicted_top = model.predict(ex.input) == 1;
    const RelevanceVector r = explain(model, ex.input, ex.comment_id, method, 1, options.explain);
    const std::size_t n_tokens = r.scores.size();
    std::vector<std::size_t> order(n_tokens);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Stable sort keeps earlier positions first among equal scores.
    if (predicted_top)
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return r.scores[a] > r.scores[b]; });
    else
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return r.scores[a] < r.scores[b]; });
    auto& hits = predicted_top ? hits_tp : hits_fn;
    auto& exhausted = predicted_top ? ex_tp : ex_fn;
    (predicted_top ? n_tp : n_fn) += 1;
    for (std::size_t k = 0; k <= K; ++k) {
      const std::size_t take = std::min(k, n_tokens);
      if (k > 0 && n_tokens <= k) ++exhausted[k];
      const bool top = k == 0 ? predicted_top
                              : model.predict(delete_positions(
                                    ex.input, std::span<const std::size_t>(order.data(), take),
                                    options.zero_embedding)) == 1;
      hits[k] += top;
    }
    if (K > 0 && n_tokens <= K) result.exhausted_ids.push_back(ex.comment_id);
  }
  auto fill = [&](DeletionCurve& c, const std::vector<std::size_t>& hits, const std::vector<std::size_t>& ex,
                  std::size_t n) {
    for (std::size_t k = 0; k <= K; ++k)
      c.points.push_back({k, n ? static_cast<double>(hits[k]) / static_cast<double>(n)
                               : std::numeric_limits<double>::quiet_NaN(),
                          n, ex[k]});
  };
  fill(result.true_positives, hits_tp, ex_tp, n_tp);
  fill(result.false_negatives, hits_fn, ex_fn, n_fn);
  return result;
}

void write_deletion_csv(std::ostream& out, std::span<const DeletionCurve> curves) {
  out << "method,population,k,accuracy,n,exhausted\n";
  char buf[64];
  for (const auto& c : curves)
    for (const auto& p : c.points) {
      if (std::isnan(p.accuracy))
        std::snprintf(buf, sizeof buf, "nan");
      else
        std::snprintf(buf, sizeof buf, "%.6f", p.accuracy);
      out << to_string(c.method) << ',' << to_string(c.population) << ',' << p.k << ',' << buf << ','
          << p.n << ',' << p.exhausted << '\n';
    }
}

}  // namespace engage
