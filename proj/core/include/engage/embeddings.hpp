#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace engage {

struct EmbeddingConfig {
  int dim = 300;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  int min_count = 5;
  std::size_t buckets = 2'000'000;
  double lr = 0.05;
  std::uint64_t seed = 1;
  int min_n = 3;
  int max_n = 6;
  // More than one worker trains with unsynchronized shared updates and is
  // not reproducible run to run.
  int workers = 1;

  // dim 16, 10^4 buckets, min_count 1.
  static EmbeddingConfig desk_scale();
};

struct EmbeddingTrainLog {
  std::vector<double> epoch_loss;  // mean negative-sampling loss per update
};

// Character n-grams of "<word>" for n in [min_n, max_n], counted in code
// points. The full bracketed word itself is not a subword.
std::vector<std::string> subwords(std::string_view word, int min_n = 3, int max_n = 6);

// FNV-1a (32-bit) of the UTF-8 bytes, modulo bucket_count.
std::uint32_t subword_bucket(std::string_view ngram, std::size_t bucket_count);

class EmbeddingModel {
 public:
  using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  EmbeddingModel() = default;
  EmbeddingModel(std::vector<std::string> words, std::vector<std::uint64_t> counts,
                 Matrix vectors, Matrix buckets, int min_n = 3, int max_n = 6);

  int dim() const { return static_cast<int>(vectors_.cols()); }
  std::size_t vocab_size() const { return words_.size(); }
  std::size_t bucket_count() const { return static_cast<std::size_t>(buckets_.rows()); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::optional<std::size_t> index(std::string_view token) const;

  // In-vocabulary: mean of the word vector and its subword vectors.
  // Out-of-vocabulary: mean of the subword vectors. No subwords (or no
  // bucket table): zero vector. Never fails.
  Eigen::VectorXd lookup(std::string_view token) const;

  // Stacks lookup() for each token into a tokens x dim matrix.
  Eigen::MatrixXd lookup_sequence(std::span<const std::string> tokens) const;

  const Matrix& vectors() const { return vectors_; }
  const Matrix& buckets() const { return buckets_; }
  int min_n() const { return min_n_; }
  int max_n() const { return max_n_; }

  // Trained models keep the word-only input rows; loaded models do not.
  const Matrix& raw_word_vectors() const { return raw_words_; }
  void set_raw_word_vectors(Matrix m) { raw_words_ = std::move(m); }

  std::unordered_map<std::string, std::string> metadata;

  // Digest over vocabulary, vectors and buckets. Checkpoints record it.
  std::string digest() const;

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  Matrix vectors_;  // composed lookup vectors, |V| x dim
  Matrix buckets_;  // B x dim, possibly empty
  Matrix raw_words_;
  int min_n_ = 3;
  int max_n_ = 6;
};

// Skip-gram with negative sampling over subword-enriched inputs. Windows do
// not cross sentence boundaries. Throws DataError when no token reaches
// min_count.
EmbeddingModel train_embeddings(const std::vector<std::vector<std::string>>& sentences,
                                const EmbeddingConfig& config,
                                EmbeddingTrainLog* log = nullptr);

// Text format: "V dim" header, then "token v1 ... vdim" per line. Bucket
// rows go to a "<path>.buckets" sidecar ("B dim" text header line followed by
// little-endian float32 rows) and metadata to "<path>.meta.json".
void save_vectors(const EmbeddingModel& model, const std::filesystem::path& path);

// Reads the text format and any sidecars next to it. Without a bucket
// sidecar, out-of-vocabulary tokens map to the zero vector. Throws DataError
// naming the line on a dimension mismatch.
EmbeddingModel load_vectors(const std::filesystem::path& path);

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace engage
