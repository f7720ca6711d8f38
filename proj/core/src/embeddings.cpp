#include "engage/embeddings.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "engage/error.hpp"
#include "engage/hash.hpp"
#include "engage/rng.hpp"

namespace engage {

EmbeddingConfig EmbeddingConfig::desk_scale() {
  EmbeddingConfig c;
  c.dim = 16;
  c.buckets = 10'000;
  c.min_count = 1;
  return c;
}

std::vector<std::string> subwords(std::string_view word, int min_n, int max_n) {
  const std::string bracketed = "<" + std::string(word) + ">";
  // Code point start offsets.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < bracketed.size(); ++i)
    if ((static_cast<unsigned char>(bracketed[i]) & 0xC0) != 0x80) starts.push_back(i);
  const std::size_t n_cp = starts.size();
  starts.push_back(bracketed.size());

  std::vector<std::string> out;
  for (std::size_t i = 0; i < n_cp; ++i) {
    for (int n = min_n; n <= max_n; ++n) {
      const std::size_t end = i + static_cast<std::size_t>(n);
      if (end > n_cp) break;
      if (i == 0 && end == n_cp) continue;  // the whole "<word>"
      out.push_back(bracketed.substr(starts[i], starts[end] - starts[i]));
    }
  }
  return out;
}

std::uint32_t subword_bucket(std::string_view ngram, std::size_t bucket_count) {
  return static_cast<std::uint32_t>(fnv1a32(ngram) % bucket_count);
}

EmbeddingModel::EmbeddingModel(std::vector<std::string> words, std::vector<std::uint64_t> counts,
                               Matrix vectors, Matrix buckets, int min_n, int max_n)
    : words_(std::move(words)),
      counts_(std::move(counts)),
      vectors_(std::move(vectors)),
      buckets_(std::move(buckets)),
      min_n_(min_n),
      max_n_(max_n) {
  if (counts_.size() != words_.size()) counts_.assign(words_.size(), 0);
  if (static_cast<std::size_t>(vectors_.rows()) != words_.size())
    throw UsageError("embedding matrix rows do not match vocabulary size");
  if (buckets_.size() > 0 && buckets_.cols() != vectors_.cols())
    throw UsageError("bucket matrix dimension does not match word vectors");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

std::optional<std::size_t> EmbeddingModel::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Eigen::VectorXd EmbeddingModel::lookup(std::string_view token) const {
  if (auto i = index(token))
    return vectors_.row(static_cast<Eigen::Index>(*i)).transpose().cast<double>();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim());
  if (bucket_count() == 0) return v;
  const auto grams = subwords(token, min_n_, max_n_);
  if (grams.empty()) return v;
  for (const auto& g : grams)
    v += buckets_.row(subword_bucket(g, bucket_count())).transpose().cast<double>();
  return v / static_cast<double>(grams.size());
}

Eigen::MatrixXd EmbeddingModel::lookup_sequence(std::span<const std::string> tokens) const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(tokens.size()), dim());
  for (std::size_t t = 0; t < tokens.size(); ++t)
    m.row(static_cast<Eigen::Index>(t)) = lookup(tokens[t]).transpose();
  return m;
}

std::string EmbeddingModel::digest() const {
  Digest d;
  d.update_field(std::to_string(dim()) + "/" + std::to_string(min_n_) + "/" + std::to_string(max_n_));
  for (const auto& w : words_) d.update_field(w);
  d.update(std::string_view(reinterpret_cast<const char*>(vectors_.data()),
                            static_cast<std::size_t>(vectors_.size()) * sizeof(float)));
  d.update(std::string_view(reinterpret_cast<const char*>(buckets_.data()),
                            static_cast<std::size_t>(buckets_.size()) * sizeof(float)));
  return d.hex();
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

namespace {

// Relaxed atomic access for the multi-worker path; plain access otherwise.
template <bool kShared>
inline float load(const float& x) {
  if constexpr (kShared)
    return std::atomic_ref<float>(const_cast<float&>(x)).load(std::memory_order_relaxed);
  else
    return x;
}

template <bool kShared>
inline void add(float& x, float v) {
  if constexpr (kShared) {
    std::atomic_ref<float> r(x);
    r.store(r.load(std::memory_order_relaxed) + v, std::memory_order_relaxed);
  } else {
    x += v;
  }
}

class SkipGramTrainer {
 public:
  using Matrix = EmbeddingModel::Matrix;

  SkipGramTrainer(const EmbeddingConfig& cfg, const std::vector<std::vector<std::string>>& sentences)
      : cfg_(cfg), sentences_(sentences) {
    build_vocab();
    dim_ = cfg_.dim;
    input_.resize(static_cast<Eigen::Index>(vocab_size_ + cfg_.buckets), dim_);
    Rng init(derive_seed(cfg_.seed, "embedding-init"));
    const double bound = 1.0 / dim_;
    for (Eigen::Index i = 0; i < input_.size(); ++i)
      input_.data()[i] = static_cast<float>(init.uniform(-bound, bound));
    output_ = Matrix::Zero(static_cast<Eigen::Index>(vocab_size_), dim_);

    word_inputs_.resize(vocab_size_);
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      word_inputs_[w].push_back(static_cast<std::int32_t>(w));
      if (cfg_.buckets == 0) continue;
      for (const auto& g : subwords(words_[w], cfg_.min_n, cfg_.max_n))
        word_inputs_[w].push_back(
            static_cast<std::int32_t>(vocab_size_ + subword_bucket(g, cfg_.buckets)));
    }
    build_negative_table();

    encoded_.reserve(sentences_.size());
    for (const auto& s : sentences_) {
      std::vector<std::int32_t> ids;
      for (const auto& t : s)
        if (auto it = index_.find(t); it != index_.end()) ids.push_back(static_cast<std::int32_t>(it->second));
      total_tokens_ += ids.size();
      encoded_.push_back(std::move(ids));
    }
  }

  EmbeddingModel run(EmbeddingTrainLog* log) {
    const int workers = std::max(1, cfg_.workers);
    std::vector<std::vector<double>> loss(static_cast<std::size_t>(workers),
                                          std::vector<double>(static_cast<std::size_t>(cfg_.epochs), 0.0));
    std::vector<std::vector<std::uint64_t>> updates(
        static_cast<std::size_t>(workers), std::vector<std::uint64_t>(static_cast<std::size_t>(cfg_.epochs), 0));
    if (workers == 1) {
      worker<false>(0, 1, loss[0], updates[0]);
    } else {
      std::vector<std::thread> threads;
      for (int w = 0; w < workers; ++w)
        threads.emplace_back([&, w] {
          worker<true>(w, workers, loss[static_cast<std::size_t>(w)], updates[static_cast<std::size_t>(w)]);
        });
      for (auto& t : threads) t.join();
    }
    if (log) {
      log->epoch_loss.assign(static_cast<std::size_t>(cfg_.epochs), 0.0);
      for (int e = 0; e < cfg_.epochs; ++e) {
        double l = 0.0;
        std::uint64_t n = 0;
        for (int w = 0; w < workers; ++w) {
          l += loss[static_cast<std::size_t>(w)][static_cast<std::size_t>(e)];
          n += updates[static_cast<std::size_t>(w)][static_cast<std::size_t>(e)];
        }
        log->epoch_loss[static_cast<std::size_t>(e)] = n ? l / static_cast<double>(n) : 0.0;
      }
    }
    return finish();
  }

 private:
  void build_vocab() {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& s : sentences_)
      for (const auto& t : s) ++counts[t];
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (auto& [w, c] : counts)
      if (c >= static_cast<std::uint64_t>(std::max(1, cfg_.min_count))) kept.emplace_back(w, c);
    if (kept.empty()) throw DataError("embedding corpus has no token reaching min_count");
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (auto& [w, c] : kept) {
      index_.emplace(w, words_.size());
      words_.push_back(w);
      counts_.push_back(c);
    }
    vocab_size_ = words_.size();
  }

  void build_negative_table() {
    // Unigram counts raised to 0.5, as fastText does.
    const std::size_t size = std::clamp<std::size_t>(100 * vocab_size_, 100'000, 10'000'000);
    double z = 0.0;
    for (auto c : counts_) z += std::sqrt(static_cast<double>(c));
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      const double share = std::sqrt(static_cast<double>(counts_[w])) * static_cast<double>(size) / z;
      for (std::size_t j = 0; j < static_cast<std::size_t>(share); ++j)
        negatives_.push_back(static_cast<std::int32_t>(w));
    }
    if (negatives_.empty()) negatives_.push_back(0);
    Rng rng(derive_seed(cfg_.seed, "embedding-negative-table"));
    rng.shuffle(negatives_);
  }

  template <bool kShared>
  void worker(int id, int workers, std::vector<double>& loss, std::vector<std::uint64_t>& updates) {
    Rng rng(derive_seed(cfg_.seed, "embedding-worker-" + std::to_string(id)));
    std::size_t negpos = static_cast<std::size_t>(rng.below(negatives_.size()));
    const std::size_t begin = encoded_.size() * static_cast<std::size_t>(id) / static_cast<std::size_t>(workers);
    const std::size_t end = encoded_.size() * static_cast<std::size_t>(id + 1) / static_cast<std::size_t>(workers);
    const double total = static_cast<double>(cfg_.epochs) * static_cast<double>(std::max<std::uint64_t>(1, total_tokens_));
    std::vector<float> hidden(static_cast<std::size_t>(dim_));
    std::vector<float> grad(static_cast<std::size_t>(dim_));

    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      for (std::size_t s = begin; s < end; ++s) {
        const auto& ids = encoded_[s];
        const double progress = static_cast<double>(processed_.load(std::memory_order_relaxed)) / total;
        const float lr = static_cast<float>(cfg_.lr * std::max(0.0, 1.0 - progress));
        for (std::size_t w = 0; w < ids.size(); ++w) {
          const auto span = static_cast<std::ptrdiff_t>(rng.below(static_cast<std::uint64_t>(cfg_.window)) + 1);
          for (std::ptrdiff_t c = -span; c <= span; ++c) {
            const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(w) + c;
            if (c == 0 || pos < 0 || pos >= static_cast<std::ptrdiff_t>(ids.size())) continue;
            loss[static_cast<std::size_t>(epoch)] += update<kShared>(
                word_inputs_[static_cast<std::size_t>(ids[w])], ids[static_cast<std::size_t>(pos)], lr,
                negpos, hidden, grad);
            ++updates[static_cast<std::size_t>(epoch)];
          }
        }
        processed_.fetch_add(ids.size(), std::memory_order_relaxed);
      }
    }
  }

  template <bool kShared>
  double update(const std::vector<std::int32_t>& inputs, std::int32_t target, float lr,
                std::size_t& negpos, std::vector<float>& hidden, std::vector<float>& grad) {
    std::fill(hidden.begin(), hidden.end(), 0.0f);
    std::fill(grad.begin(), grad.end(), 0.0f);
    for (auto row : inputs) {
      const float* src = input_.row(row).data();
      for (int d = 0; d < dim_; ++d) hidden[static_cast<std::size_t>(d)] += load<kShared>(src[d]);
    }
    const float inv = 1.0f / static_cast<float>(inputs.size());
    for (auto& h : hidden) h *= inv;

    double loss = logistic<kShared>(target, true, lr, hidden, grad);
    for (int n = 0; n < cfg_.negatives; ++n) {
      std::int32_t neg;
      do {
        neg = negatives_[negpos];
        negpos = (negpos + 1) % negatives_.size();
      } while (neg == target && vocab_size_ > 1);
      if (neg == target) break;
      loss += logistic<kShared>(neg, false, lr, hidden, grad);
    }
    for (auto row : inputs) {
      float* dst = input_.row(row).data();
      for (int d = 0; d < dim_; ++d) add<kShared>(dst[d], grad[static_cast<std::size_t>(d)]);
    }
    return loss;
  }

  template <bool kShared>
  double logistic(std::int32_t target, bool label, float lr, const std::vector<float>& hidden,
                  std::vector<float>& grad) {
    float* out = output_.row(target).data();
    double dot = 0.0;
    for (int d = 0; d < dim_; ++d) dot += static_cast<double>(load<kShared>(out[d])) * hidden[static_cast<std::size_t>(d)];
    const double score = 1.0 / (1.0 + std::exp(-dot));
    const float alpha = lr * static_cast<float>((label ? 1.0 : 0.0) - score);
    for (int d = 0; d < dim_; ++d) {
      grad[static_cast<std::size_t>(d)] += alpha * load<kShared>(out[d]);
      add<kShared>(out[d], alpha * hidden[static_cast<std::size_t>(d)]);
    }
    const double p = label ? score : 1.0 - score;
    return -std::log(std::max(p, 1e-12));
  }

  EmbeddingModel finish() {
    const auto V = static_cast<Eigen::Index>(vocab_size_);
    Matrix composed(V, dim_);
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      Eigen::RowVectorXf acc = Eigen::RowVectorXf::Zero(dim_);
      for (auto row : word_inputs_[w]) acc += input_.row(row);
      composed.row(static_cast<Eigen::Index>(w)) = acc / static_cast<float>(word_inputs_[w].size());
    }
    Matrix raw = input_.topRows(V);
    Matrix buckets = input_.bottomRows(static_cast<Eigen::Index>(cfg_.buckets));
    EmbeddingModel model(words_, counts_, std::move(composed), std::move(buckets), cfg_.min_n, cfg_.max_n);
    model.set_raw_word_vectors(std::move(raw));
    auto& md = model.metadata;
    md["dim"] = std::to_string(cfg_.dim);
    md["window"] = std::to_string(cfg_.window);
    md["negatives"] = std::to_string(cfg_.negatives);
    md["epochs"] = std::to_string(cfg_.epochs);
    md["min_count"] = std::to_string(cfg_.min_count);
    md["buckets"] = std::to_string(cfg_.buckets);
    md["lr"] = std::to_string(cfg_.lr);
    md["seed"] = std::to_string(cfg_.seed);
    md["min_n"] = std::to_string(cfg_.min_n);
    md["max_n"] = std::to_string(cfg_.max_n);
    md["workers"] = std::to_string(cfg_.workers);
    md["subword_hash"] = "fnv1a32-utf8-mod-buckets";
    md["negative_distribution"] = "unigram^0.5";
    return model;
  }

  const EmbeddingConfig& cfg_;
  const std::vector<std::vector<std::string>>& sentences_;
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t vocab_size_ = 0;
  int dim_ = 0;
  Matrix input_;
  Matrix output_;
  std::vector<std::vector<std::int32_t>> word_inputs_;
  std::vector<std::int32_t> negatives_;
  std::vector<std::vector<std::int32_t>> encoded_;
  std::uint64_t total_tokens_ = 0;
  std::atomic<std::uint64_t> processed_{0};
};

}  // namespace

EmbeddingModel train_embeddings(const std::vector<std::vector<std::string>>& sentences,
                                const EmbeddingConfig& config, EmbeddingTrainLog* log) {
  if (config.dim <= 0 || config.window <= 0 || config.epochs <= 0 || config.negatives < 0)
    throw UsageError("embedding config needs positive dim, window and epochs");
  if (config.min_n < 1 || config.max_n < config.min_n) throw UsageError("bad subword range");
  SkipGramTrainer trainer(config, sentences);
  return trainer.run(log);
}

namespace {
std::filesystem::path sidecar(const std::filesystem::path& p, const char* suffix) {
  return std::filesystem::path(p.string() + suffix);
}
}  // namespace

void save_vectors(const EmbeddingModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << model.vocab_size() << ' ' << model.dim() << '\n';
  char buf[32];
  for (std::size_t w = 0; w < model.vocab_size(); ++w) {
    out << model.words()[w];
    const auto row = model.vectors().row(static_cast<Eigen::Index>(w));
    for (Eigen::Index d = 0; d < row.size(); ++d) {
      std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(row[d]));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());

  const auto bpath = sidecar(path, ".buckets");
  if (model.bucket_count() > 0) {
    std::ofstream b(bpath, std::ios::binary);
    if (!b) throw DataError("cannot write " + bpath.string());
    b << model.bucket_count() << ' ' << model.dim() << '\n';
    b.write(reinterpret_cast<const char*>(model.buckets().data()),
            static_cast<std::streamsize>(model.buckets().size() * sizeof(float)));
  } else {
    std::filesystem::remove(bpath);
  }

  nlohmann::json meta(model.metadata);
  meta["min_n"] = std::to_string(model.min_n());
  meta["max_n"] = std::to_string(model.max_n());
  std::ofstream m(sidecar(path, ".meta.json"), std::ios::binary);
  m << meta.dump(2) << '\n';
}

EmbeddingModel load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vectors " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty vector file");
  std::size_t V = 0;
  long dim = 0;
  {
    std::istringstream h(line);
    if (!(h >> V >> dim) || dim <= 0) throw DataError(path.string() + ":1: header must be 'V dim'");
  }
  std::vector<std::string> words;
  words.reserve(V);
  EmbeddingModel::Matrix vectors(static_cast<Eigen::Index>(V), dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (words.size() == V) throw DataError(path.string() + ":" + std::to_string(line_no) + ": more rows than header declares");
    const char* p = line.c_str();
    const char* sp = std::strchr(p, ' ');
    if (!sp) throw DataError(path.string() + ":" + std::to_string(line_no) + ": missing vector values");
    words.emplace_back(p, sp);
    p = sp;
    long got = 0;
    const auto row = static_cast<Eigen::Index>(words.size() - 1);
    while (true) {
      while (*p == ' ' || *p == '\t') ++p;
      if (*p == '\0') break;
      char* endp = nullptr;
      const float v = std::strtof(p, &endp);
      if (endp == p) throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad number");
      if (got < dim) vectors(row, got) = v;
      ++got;
      p = endp;
    }
    if (got != dim)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(dim) + " values, got " + std::to_string(got));
  }
  if (words.size() != V)
    throw DataError(path.string() + ": header declares " + std::to_string(V) + " rows, found " +
                    std::to_string(words.size()));

  int min_n = 3;
  int max_n = 6;
  std::unordered_map<std::string, std::string> metadata;
  if (std::ifstream m(sidecar(path, ".meta.json")); m) {
    try {
      metadata = nlohmann::json::parse(m).get<std::unordered_map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError("bad embedding metadata: " + std::string(e.what()));
    }
    if (auto it = metadata.find("min_n"); it != metadata.end()) min_n = std::stoi(it->second);
    if (auto it = metadata.find("max_n"); it != metadata.end()) max_n = std::stoi(it->second);
  }

  EmbeddingModel::Matrix buckets;
  if (std::ifstream b(sidecar(path, ".buckets"), std::ios::binary); b) {
    std::string header;
    std::getline(b, header);
    std::istringstream h(header);
    std::size_t B = 0;
    long bdim = 0;
    if (!(h >> B >> bdim)) throw DataError("bad bucket sidecar header");
    if (bdim != dim) throw DataError("bucket sidecar dimension " + std::to_string(bdim) + " != " + std::to_string(dim));
    buckets.resize(static_cast<Eigen::Index>(B), dim);
    b.read(reinterpret_cast<char*>(buckets.data()), static_cast<std::streamsize>(buckets.size() * sizeof(float)));
    if (b.gcount() != static_cast<std::streamsize>(buckets.size() * sizeof(float)))
      throw DataError("truncated bucket sidecar");
  }
  EmbeddingModel model(std::move(words), {}, std::move(vectors), std::move(buckets), min_n, max_n);
  model.metadata = std::move(metadata);
  return model;
}

}  // namespace engage
