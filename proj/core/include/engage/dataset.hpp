#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "engage/corpus.hpp"

namespace engage {

inline constexpr int kThreadSize = 10;
inline constexpr std::int64_t kMinThreadReplies = 20;

enum class Signal { kUpvotes, kReplies };

Signal parse_signal(std::string_view name);
std::string_view to_string(Signal s);

struct RankedEntry {
  std::string comment_id;
  int rank = 0;  // 1..10
  std::int64_t upvotes = 0;
  std::int64_t replies = 0;  // direct children only
  double upvote_share = 0.0;
  double reply_share = 0.0;

  double share(Signal s) const { return s == Signal::kUpvotes ? upvote_share : reply_share; }
};

// The first ten top-level comments of one thread, chronologically ordered
// (ties by comment_id), with engagement shares over those ten.
struct RankedThread {
  std::string thread_id;
  std::array<RankedEntry, kThreadSize> comments;
};

struct BuildOptions {
  // Abort on a parent_id that resolves to no record instead of counting it.
  bool strict_parents = false;
  // Drop threads failing the signal-specific engagement rules (zero total,
  // fewer than 20 replies). Off only for descriptive statistics.
  bool engagement_filters = true;
};

struct DiscardCounts {
  std::size_t too_few_comments = 0;
  std::size_t too_few_replies = 0;
  std::size_t zero_engagement = 0;
  std::size_t dangling_parents = 0;  // replies whose parent is unknown
};

struct BuildResult {
  std::vector<RankedThread> threads;  // ordered by thread_id
  DiscardCounts discards;
};

BuildResult build_threads(std::span<const CommentRecord> records, Signal signal,
                          BuildOptions options = {});

struct GroupEntry {
  std::string comment_id;
  double share = 0.0;
};

struct RankGroup {
  int rank = 0;
  std::vector<GroupEntry> entries;  // share desc, comment_id asc
};

std::array<RankGroup, kThreadSize> rank_groups(std::span<const RankedThread> threads,
                                               Signal signal);

enum class Label { kFlop = 0, kTop = 1 };

struct LabeledExample {
  std::string comment_id;
  std::string text;
  Label label = Label::kFlop;
  Signal signal = Signal::kUpvotes;
  int band = 10;
  int rank = 0;
  std::optional<std::string> taxonomy_class;

  bool operator==(const LabeledExample&) const = default;
};

// Per group of size n: the first floor(band*n/100) entries become top, the
// last floor(band*n/100) become flop, the middle is dropped. Throws
// UsageError("band too small for corpus") when that count is zero.
std::vector<LabeledExample> split_top_flop(std::span<const RankGroup> groups, int band,
                                           Signal signal);

// Fills example.text from the records by comment_id.
void attach_text(std::span<LabeledExample> examples, std::span<const CommentRecord> records);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
};

struct DatasetManifest {
  Signal signal = Signal::kUpvotes;
  std::string source_format = "comments";
  std::vector<int> bands;
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
  std::string corpus_digest;
  DiscardCounts discards;
  std::size_t threads_kept = 0;
  std::size_t test_count = 0;
  std::map<int, SplitCounts> counts;
  std::vector<std::string> test_ids;
  std::map<int, std::vector<std::string>> train_ids;
  std::map<int, std::vector<std::string>> validation_ids;
  std::map<std::string, std::string> config;  // resolved extra settings

  std::string digest() const;
};

struct BandSplit {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> validation;
};

struct SplitResult {
  DatasetManifest manifest;
  std::vector<LabeledExample> test;  // shared, drawn from band 10
  std::map<int, BandSplit> bands;
};

// Shared test set: test_fraction of the band-10 examples, stratified by
// (rank, label). Test ids are removed from every band; the rest of each band
// is split 80/20 into train/validation, also stratified. Seeded and
// byte-reproducible. Throws UsageError when test_fraction is outside (0, 1)
// or band 10 is absent.
SplitResult make_splits(const std::map<int, std::vector<LabeledExample>>& examples_per_band,
                        double test_fraction, std::uint64_t seed);

struct DatasetBuild {
  BuildResult threads;
  std::map<int, std::vector<LabeledExample>> per_band;  // before splitting, texts attached
  SplitResult splits;                                    // manifest fully populated
};

// Threads -> rank groups -> top/flop per band -> texts -> splits, with the
// manifest's corpus digest, discard counts and thread count filled in.
DatasetBuild build_dataset(std::span<const CommentRecord> records, Signal signal,
                           std::span<const int> bands, double test_fraction, std::uint64_t seed,
                           BuildOptions options = {});

// Throws DataError if any test id appears in a train or validation list.
void check_disjoint(const DatasetManifest& manifest);

// Labeled-example jsonl: {"id","text","label","rank","class"}.
std::string serialize_example(const LabeledExample& e);
LabeledExample parse_example(std::string_view line);
void write_examples(const std::filesystem::path& path, std::span<const LabeledExample> examples);
std::vector<LabeledExample> read_examples(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct RankMeans {
  int rank = 0;
  double mean_upvotes = 0.0;
  double mean_replies = 0.0;
};

// Mean raw counts per rank across threads. Throws UsageError when empty.
std::vector<RankMeans> position_bias_curve(std::span<const RankedThread> threads);
void write_bias_curve_csv(std::ostream& out, std::span<const RankMeans> curve);

}  // namespace engage
