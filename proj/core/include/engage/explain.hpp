#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "engage/models/classifier.hpp"
#include "engage/models/gru.hpp"

namespace engage {

enum class Method { kLrp, kSa, kIg, kRandom };

Method parse_method(std::string_view name);
std::string_view to_string(Method m);

struct RelevanceVector {
  std::string comment_id;
  Method method = Method::kLrp;
  std::vector<std::string> tokens;
  std::vector<double> scores;  // one per token
  int explained_class = 1;
  double output = 0.0;  // logit of the explained class
};

struct ExplainOptions {
  double epsilon = 1e-3;  // LRP stabilizer
  int ig_steps = 128;
  std::uint64_t seed = 1;  // random method only
};

// Epsilon rule for z = x W + b: R_in[i] = sum_j x_i W_ij / (z_j + eps sign z_j) R_out[j].
// The bias share is not redistributed. sign(0) counts as +1.
Eigen::RowVectorXd lrp_linear(const Eigen::RowVectorXd& x, const Eigen::MatrixXd& W,
                              const Eigen::RowVectorXd& z, const Eigen::RowVectorXd& r_out,
                              double epsilon);

// Fully connected stack used for conservation checks and as a reference.
struct DenseLayer {
  Eigen::MatrixXd W;  // in x out
  Eigen::RowVectorXd b;
  bool relu = true;
};

struct DenseNetwork {
  std::vector<DenseLayer> layers;
  Eigen::RowVectorXd forward(const Eigen::RowVectorXd& x) const;
};

// Relevance of each input dimension for output `out`, starting from that
// output's value.
Eigen::RowVectorXd lrp_dense(const DenseNetwork& net, const Eigen::RowVectorXd& x,
                             Eigen::Index out, double epsilon);

// Per-dimension LRP relevance (rows x dim) for the GRU. Gates act as fixed
// multipliers; relevance flows through the previous-state and candidate
// terms only.
Eigen::MatrixXd lrp_gru_dims(const GruModel& model, const ModelInput& in, int cls, double epsilon);

// Per-dimension integrated gradients with the midpoint rule. Baseline
// defaults to all zeros.
Eigen::MatrixXd integrated_gradients(const Classifier& model, const ModelInput& in, int cls, int steps,
                                     const std::optional<Eigen::MatrixXd>& baseline = std::nullopt);

std::vector<double> relevance_lrp(const GruModel& model, const ModelInput& in, int cls,
                                  double epsilon = 1e-3);
std::vector<double> relevance_sa(const Classifier& model, const ModelInput& in, int cls);
std::vector<double> relevance_ig(const Classifier& model, const ModelInput& in, int cls, int steps = 128);
// i.i.d. uniform [0,1) scores from derive_seed(seed, comment_id).
std::vector<double> relevance_random(std::size_t n_tokens, std::uint64_t seed,
                                     std::string_view comment_id);

// Dispatches on method. LRP needs a GRU model (UsageError otherwise).
RelevanceVector explain(const Classifier& model, const ModelInput& in, std::string_view comment_id,
                        Method method, int cls = 1, const ExplainOptions& options = {});

std::string serialize_relevance(const RelevanceVector& r);
void write_relevance_jsonl(std::ostream& out, std::span<const RelevanceVector> rows);

enum class VocabAggregate { kMean, kMax };

struct VocabRelevance {
  std::string word;
  double score = 0.0;
  std::size_t occurrences = 0;
};

// Word-level ranking over all explained occurrences, score descending, ties
// by word.
std::vector<VocabRelevance> rank_vocabulary(std::span<const RelevanceVector> rows,
                                            VocabAggregate aggregate = VocabAggregate::kMean,
                                            std::size_t min_occurrences = 1);
void write_vocabulary_csv(std::ostream& out, std::span<const VocabRelevance> rows);

enum class Population { kTruePositives, kFalseNegatives };
std::string_view to_string(Population p);

struct DeletionPoint {
  std::size_t k = 0;
  double accuracy = 0.0;   // NaN for an empty population
  std::size_t n = 0;       // population size
  std::size_t exhausted = 0;  // examples with <= k tokens, fully deleted
};

struct DeletionCurve {
  Method method = Method::kLrp;
  Population population = Population::kTruePositives;
  std::vector<DeletionPoint> points;  // k = 0..max_k
};

struct EvalExample {
  std::string comment_id;
  ModelInput input;
  int label = 0;
};

struct DeletionOptions {
  std::size_t max_k = 5;
  // Zero the deleted rows in place instead of removing them.
  bool zero_embedding = false;
  ExplainOptions explain;
};

struct DeletionResult {
  DeletionCurve true_positives;
  DeletionCurve false_negatives;
  std::vector<std::string> exhausted_ids;  // flagged at max_k
};

// True positives (top, predicted top) lose their k most relevant tokens;
// false negatives (top, predicted flop) lose their k least relevant. The
// explained class is top. Relevance is computed once on the full input;
// ties delete the earlier position first.
DeletionResult deletion_eval(const Classifier& model, std::span<const EvalExample> examples,
                             Method method, const DeletionOptions& options = {});

// Removes (or zeroes) the given positions.
ModelInput delete_positions(const ModelInput& in, std::span<const std::size_t> positions,
                            bool zero_embedding);

// method,population,k,accuracy,n,exhausted
void write_deletion_csv(std::ostream& out, std::span<const DeletionCurve> curves);

}  // namespace engage
