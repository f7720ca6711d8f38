#include "engage/models/features.hpp"

#include <cmath>
#include <string>

#include "engage/error.hpp"

namespace engage {

FeatureSet parse_feature_set(std::string_view name) {
  if (name == "length") return FeatureSet::kLength;
  if (name == "park") return FeatureSet::kPark;
  throw UsageError("unknown feature set '" + std::string(name) + "'");
}

std::string_view to_string(FeatureSet f) { return f == FeatureSet::kLength ? "length" : "park"; }

Eigen::VectorXd featurize_length(const TokenSequence& seq) {
  Eigen::VectorXd v(1);
  v[0] = static_cast<double>(seq.word_count);
  return v;
}

Eigen::VectorXd featurize_park(const TokenSequence& seq, const UserAggregates& author) {
  Eigen::VectorXd v(5);
  v[0] = static_cast<double>(seq.word_count);
  v[1] = seq.word_count > 0 ? ari(seq) : 0.0;
  v[2] = author.avg_comment_length;
  v[3] = author.avg_readability;
  v[4] = author.avg_upvotes;
  return v;
}

void require_user_metadata(std::string_view source_format) {
  if (source_format == "reviews")
    throw DataError("feature set inapplicable: review corpora carry no per-user information");
}

Standardizer Standardizer::fit(std::span<const Eigen::VectorXd> rows) {
  if (rows.empty()) throw UsageError("cannot fit a standardizer on zero rows");
  const Eigen::Index d = rows.front().size();
  Standardizer s;
  s.mean = Eigen::VectorXd::Zero(d);
  for (const auto& r : rows) s.mean += r;
  s.mean /= static_cast<double>(rows.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (const auto& r : rows) var += (r - s.mean).cwiseAbs2();
  var /= static_cast<double>(rows.size());
  s.scale = var.cwiseSqrt();
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(s.scale[i] > 0.0)) s.scale[i] = 1.0;
  return s;
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) throw UsageError("feature vector has wrong dimension");
  return (x - mean).cwiseQuotient(scale);
}

}  // namespace engage
