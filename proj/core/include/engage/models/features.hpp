#pragma once

#include <span>
#include <string_view>

#include <Eigen/Core>

#include "engage/textstats.hpp"

namespace engage {

enum class FeatureSet { kLength, kPark };

FeatureSet parse_feature_set(std::string_view name);
std::string_view to_string(FeatureSet f);

// (word count)
Eigen::VectorXd featurize_length(const TokenSequence& seq);

// (word count, ARI, author mean length, author mean ARI, author mean
// upvotes). A comment without words contributes ARI 0.
Eigen::VectorXd featurize_park(const TokenSequence& seq, const UserAggregates& author);

// Throws DataError("feature set inapplicable ...") for corpora that carry no
// per-user information (review dumps).
void require_user_metadata(std::string_view source_format);

// Per-dimension mean and population standard deviation; a zero deviation is
// replaced by 1 so constant features map to 0.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(std::span<const Eigen::VectorXd> rows);
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

}  // namespace engage
