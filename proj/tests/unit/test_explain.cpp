#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "engage/error.hpp"
#include "engage/explain.hpp"
#include "engage/models/cnn.hpp"
#include "engage/models/gru.hpp"
#include "engage/models/logistic.hpp"
#include "engage/rng.hpp"

namespace engage {
namespace {

ModelInput random_input(Rng& rng, Eigen::Index len, int dim) {
  std::vector<std::string> tokens;
  Eigen::MatrixXd rows(len, dim);
  for (Eigen::Index t = 0; t < len; ++t) {
    tokens.push_back("w" + std::to_string(t));
    for (int d = 0; d < dim; ++d) rows(t, d) = rng.normal();
  }
  return make_text_input(std::move(tokens), std::move(rows));
}

std::unique_ptr<GruModel> small_gru(std::uint64_t seed, int dim = 5) {
  auto m = std::make_unique<GruModel>(GruConfig{.dim = dim, .hidden = 4, .dense = 3});
  Rng rng(seed);
  m->initialize(rng);
  return m;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(LrpLinear, ThreeInputHandFixture) {
  const Eigen::RowVector3d x(1.0, 2.0, -1.0);
  const Eigen::Vector3d w(0.5, -1.0, 2.0);
  // z = 0.5 - 2 - 2 = -3.5; denominator -3.5 - 0.001.
  const Eigen::RowVectorXd z = Eigen::RowVectorXd::Constant(1, -3.5);
  const Eigen::RowVectorXd r_out = Eigen::RowVectorXd::Constant(1, -3.5);
  const auto r = lrp_linear(x, w, z, r_out, 1e-3);
  const double ratio = -3.5 / -3.501;
  EXPECT_NEAR(r[0], 0.5 * ratio, 1e-12);
  EXPECT_NEAR(r[1], -2.0 * ratio, 1e-12);
  EXPECT_NEAR(r[2], -2.0 * ratio, 1e-12);
}

TEST(LrpLinear, ZeroPreactivationUsesPositiveSign) {
  const Eigen::RowVector2d x(1.0, -1.0);
  const Eigen::Vector2d w(1.0, 1.0);
  const auto r = lrp_linear(x, w, Eigen::RowVectorXd::Zero(1), Eigen::RowVectorXd::Ones(1), 0.5);
  EXPECT_NEAR(r[0], 2.0, 1e-12);
  EXPECT_NEAR(r[1], -2.0, 1e-12);
}

TEST(LrpDense, ConservesOutputWithinFivePercent) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    DenseNetwork net;
    const int sizes[] = {8, 6, 5, 2};
    for (int l = 0; l < 3; ++l) {
      DenseLayer layer;
      layer.W = Eigen::MatrixXd(sizes[l], sizes[l + 1]);
      for (auto& v : layer.W.reshaped()) v = rng.normal();
      layer.b = Eigen::RowVectorXd(sizes[l + 1]);
      for (auto& v : layer.b) v = 0.01 * rng.normal();
      layer.relu = l < 2;
      net.layers.push_back(layer);
    }
    Eigen::RowVectorXd x(8);
    for (auto& v : x) v = rng.uniform(0.1, 1.0);
    const auto out = net.forward(x);
    const Eigen::Index cls = out[1] > out[0] ? 1 : 0;
    if (std::abs(out[cls]) < 0.5) continue;
    const auto r = lrp_dense(net, x, cls, 1e-3);
    EXPECT_LE(std::abs(r.sum() - out[cls]), 0.05 * std::abs(out[cls])) << trial;
  }
}

TEST(LrpGru, ConservesLogitWithoutBiases) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto m = small_gru(seed);
    for (auto& p : m->params())
      if (p.value.rows() == 1) p.value.setZero();
    Rng rng(seed + 100);
    const auto in = random_input(rng, 7, 5);
    const double logit = m->logits(in)[1];
    const auto r = relevance_lrp(*m, in, 1, 1e-9);
    EXPECT_NEAR(sum(r), logit, 1e-6 + 1e-4 * std::abs(logit)) << seed;
  }
}

TEST(LrpGru, TokenScoresSumDimensions) {
  auto m = small_gru(2);
  Rng rng(5);
  const auto in = random_input(rng, 6, 5);
  const auto dims = lrp_gru_dims(*m, in, 1, 1e-3);
  const auto tok = relevance_lrp(*m, in, 1);
  ASSERT_EQ(tok.size(), 6u);
  for (Eigen::Index t = 0; t < 6; ++t) EXPECT_NEAR(tok[static_cast<std::size_t>(t)], dims.row(t).sum(), 1e-12);
}

TEST(Sa, NonNegativeAndMatchesFiniteDifferences) {
  auto m = small_gru(3);
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    auto in = random_input(rng, 4 + trial, 5);
    const auto sa = relevance_sa(*m, in, 1);
    for (std::size_t t = 0; t < sa.size(); ++t) {
      EXPECT_GE(sa[t], 0.0);
      double sq = 0.0;
      for (int d = 0; d < 5; ++d) {
        const double h = 1e-5;
        auto plus = in, minus = in;
        plus.x(static_cast<Eigen::Index>(t), d) += h;
        minus.x(static_cast<Eigen::Index>(t), d) -= h;
        const double g = (m->logits(plus)[1] - m->logits(minus)[1]) / (2 * h);
        sq += g * g;
      }
      EXPECT_LE(std::abs(sa[t] - sq), 1e-3 * std::max(sq, 1e-8)) << trial << "/" << t;
    }
  }
}

TEST(Sa, ConstantModelGivesZero) {
  auto m = small_gru(4);
  for (auto& p : m->params())
    if (p.name == "out.W") p.value.setZero();
  Rng rng(1);
  for (double s : relevance_sa(*m, random_input(rng, 5, 5), 1)) EXPECT_EQ(s, 0.0);
}

TEST(Ig, CompletenessAndConvergence) {
  Rng rng(13);
  auto gru = small_gru(6);
  CnnModel cnn({.dim = 5, .widths = {2, 3}, .maps = 4});
  cnn.initialize(rng);
  for (const Classifier* m : {static_cast<const Classifier*>(gru.get()), static_cast<const Classifier*>(&cnn)}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto in = random_input(rng, 3 + trial, 5);
      ModelInput base = in;
      base.x.setZero();
      const double delta = m->logits(in)[1] - m->logits(base)[1];
      const auto a128 = integrated_gradients(*m, in, 1, 128);
      EXPECT_LE(std::abs(a128.sum() - delta), 0.01 * std::abs(delta) + 1e-6) << m->arch();
      const auto a64 = integrated_gradients(*m, in, 1, 64);
      EXPECT_LT((a64 - a128).cwiseAbs().sum(), 0.05 * a128.cwiseAbs().sum()) << m->arch();
    }
  }
}

TEST(Ig, InputEqualToBaselineGivesZero) {
  auto m = small_gru(7);
  Rng rng(2);
  const auto in = random_input(rng, 5, 5);
  const auto a = integrated_gradients(*m, in, 1, 32, in.x);
  EXPECT_EQ(a.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Random, SeededAndUniform) {
  const auto a = relevance_random(50, 3, "c1");
  EXPECT_EQ(a, relevance_random(50, 3, "c1"));
  EXPECT_NE(a, relevance_random(50, 4, "c1"));
  EXPECT_NE(a, relevance_random(50, 3, "c2"));
  for (double v : a) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Explain, EveryMethodScoresEveryToken) {
  auto m = small_gru(9);
  Rng rng(4);
  const auto in = random_input(rng, 9, 5);
  for (Method method : {Method::kLrp, Method::kSa, Method::kIg, Method::kRandom}) {
    const auto r = explain(*m, in, "c", method);
    EXPECT_EQ(r.scores.size(), in.tokens.size()) << to_string(method);
    EXPECT_EQ(r.tokens, in.tokens);
    EXPECT_DOUBLE_EQ(r.output, m->logits(in)[1]);
    if (method != Method::kRandom) EXPECT_EQ(r.scores, explain(*m, in, "c", method).scores);
  }
}

TEST(Explain, LrpRequiresGru) {
  CnnModel cnn({.dim = 5, .widths = {2}, .maps = 2});
  Rng rng(1);
  cnn.initialize(rng);
  EXPECT_THROW(explain(cnn, random_input(rng, 3, 5), "c", Method::kLrp), UsageError);
  EXPECT_THROW(parse_method("shap"), UsageError);
}

TEST(Explain, SerializationKeys) {
  RelevanceVector r{"c9", Method::kIg, {"a", "b"}, {0.5, -1.0}, 1, 2.0};
  const auto j = nlohmann::json::parse(serialize_relevance(r));
  EXPECT_EQ(j.at("id"), "c9");
  EXPECT_EQ(j.at("method"), "ig");
  EXPECT_EQ(j.at("class"), "top");
  EXPECT_EQ(j.at("scores").size(), 2u);
}

TEST(Vocabulary, MeanAndMaxRanking) {
  std::vector<RelevanceVector> rows{{"1", Method::kLrp, {"a", "b", "a"}, {1.0, 0.5, 3.0}, 1, 0.0},
                                    {"2", Method::kLrp, {"b", "c"}, {2.5, 0.1}, 1, 0.0}};
  const auto mean = rank_vocabulary(rows);
  ASSERT_EQ(mean.size(), 3u);
  EXPECT_EQ(mean[0].word, "a");  // 2.0
  EXPECT_DOUBLE_EQ(mean[0].score, 2.0);
  EXPECT_EQ(mean[1].word, "b");  // 1.5
  EXPECT_EQ(mean[0].occurrences, 2u);
  const auto mx = rank_vocabulary(rows, VocabAggregate::kMax, 2);
  ASSERT_EQ(mx.size(), 2u);
  EXPECT_EQ(mx[0].word, "a");
  EXPECT_DOUBLE_EQ(mx[1].score, 2.5);
  std::ostringstream out;
  write_vocabulary_csv(out, mean);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "rank,word,score,occurrences");
}

TEST(Deletion, PositionsCloseUpOrZero) {
  Rng rng(1);
  const auto in = random_input(rng, 5, 3);
  const std::vector<std::size_t> del{1, 3};
  const auto closed = delete_positions(in, del, false);
  EXPECT_EQ(closed.tokens, (std::vector<std::string>{"w0", "w2", "w4"}));
  EXPECT_EQ(closed.length, 3u);
  EXPECT_TRUE(closed.x.row(1).isApprox(in.x.row(2)));
  const auto zeroed = delete_positions(in, del, true);
  EXPECT_EQ(zeroed.x.rows(), 5);
  EXPECT_EQ(zeroed.x.row(3).norm(), 0.0);
}

std::vector<EvalExample> random_population(std::size_t n, std::uint64_t seed, int dim) {
  Rng rng(seed);
  std::vector<EvalExample> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({"e" + std::to_string(i), random_input(rng, 2 + static_cast<Eigen::Index>(rng.below(8)), dim),
                   static_cast<int>(rng.below(2))});
  return out;
}

// Shifts the output bias so about half the population is predicted top.
void balance(GruModel& m, const std::vector<EvalExample>& xs) {
  std::vector<double> margins;
  for (const auto& e : xs) {
    const auto z = m.logits(e.input);
    margins.push_back(z[1] - z[0]);
  }
  std::nth_element(margins.begin(), margins.begin() + static_cast<long>(margins.size() / 2), margins.end());
  for (auto& p : m.params())
    if (p.name == "out.b") p.value(0, 1) -= margins[margins.size() / 2];
}

TEST(Deletion, EndpointsAndExhaustion) {
  auto m = small_gru(10);
  const auto xs = random_population(200, 3, 5);
  balance(*m, xs);
  const auto res = deletion_eval(*m, xs, Method::kSa, {.max_k = 5});
  ASSERT_EQ(res.true_positives.points.size(), 6u);
  ASSERT_GT(res.true_positives.points[0].n, 0u);
  ASSERT_GT(res.false_negatives.points[0].n, 0u);
  EXPECT_EQ(res.true_positives.points[0].accuracy, 1.0);
  EXPECT_EQ(res.false_negatives.points[0].accuracy, 0.0);
  std::size_t short_tp = 0;
  for (const auto& e : xs)
    if (e.label == 1 && m->predict(e.input) == 1 && e.input.tokens.size() <= 5) ++short_tp;
  EXPECT_EQ(res.true_positives.points[5].exhausted, short_tp);
  EXPECT_FALSE(res.exhausted_ids.empty());
}

TEST(Deletion, EmptyPopulationIsNan) {
  auto m = small_gru(10);
  auto xs = random_population(20, 3, 5);
  for (auto& e : xs) e.label = 0;
  const auto res = deletion_eval(*m, xs, Method::kRandom);
  EXPECT_EQ(res.true_positives.points[0].n, 0u);
  EXPECT_TRUE(std::isnan(res.true_positives.points[0].accuracy));
}

TEST(Deletion, RandomMethodMatchesUniformDeletion) {
  auto m = small_gru(12);
  auto xs = random_population(1500, 4, 5);
  for (auto& e : xs) e.label = 1;
  balance(*m, xs);
  const auto res = deletion_eval(*m, xs, Method::kRandom, {.max_k = 4});
  std::mt19937_64 gen(99);
  std::vector<EvalExample> tp;
  for (const auto& e : xs)
    if (m->predict(e.input) == 1) tp.push_back(e);
  ASSERT_GT(tp.size(), 300u);
  for (std::size_t k = 1; k <= 4; ++k) {
    std::size_t correct = 0;
    for (const auto& e : tp) {
      std::vector<Eigen::Index> keep(static_cast<std::size_t>(e.input.x.rows()));
      std::iota(keep.begin(), keep.end(), 0);
      std::shuffle(keep.begin(), keep.end(), gen);
      keep.resize(keep.size() > k ? keep.size() - k : 0);
      std::sort(keep.begin(), keep.end());
      Eigen::MatrixXd rows(static_cast<Eigen::Index>(keep.size()), 5);
      std::vector<std::string> toks;
      for (std::size_t i = 0; i < keep.size(); ++i) {
        rows.row(static_cast<Eigen::Index>(i)) = e.input.x.row(keep[i]);
        toks.push_back(e.input.tokens[static_cast<std::size_t>(keep[i])]);
      }
      if (m->predict(make_text_input(toks, rows)) == 1) ++correct;
    }
    const double direct = static_cast<double>(correct) / static_cast<double>(tp.size());
    EXPECT_NEAR(res.true_positives.points[k].accuracy, direct, 0.08) << k;
  }
}

TEST(Deletion, CsvLayout) {
  DeletionCurve c{Method::kSa, Population::kFalseNegatives, {{0, 0.0, 3, 0}, {1, 1.0 / 3.0, 3, 1}}};
  std::ostringstream out;
  write_deletion_csv(out, std::vector<DeletionCurve>{c});
  std::istringstream in(out.str());
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "method,population,k,accuracy,n,exhausted");
  EXPECT_EQ(first.substr(0, first.find(',', 3)), "sa,false_negatives");
}

}  // namespace
}  // namespace engage
