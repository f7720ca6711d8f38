#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "engage/dataset.hpp"
#include "engage/models/classifier.hpp"

namespace engage {

inline constexpr std::size_t kMinClassSupport = 5;

struct Confusion {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;  // positive = top
  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const Confusion&) const = default;
};

struct RunResult {
  std::string model;  // baseline, park, cnn, gru
  std::string source = "comments";
  Signal signal = Signal::kUpvotes;
  int band = 10;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  // Recall over top-labelled examples of each taxonomy class; classes with
  // fewer than kMinClassSupport such examples are left out.
  std::map<std::string, double> class_recall;
  Confusion confusion;

  bool operator==(const RunResult&) const = default;
};

// Accuracy, confusion and per-class recall from predictions (0 flop, 1 top).
RunResult score_predictions(std::span<const int> predicted, std::span<const LabeledExample> examples);

// Scores the model on the test examples. With a manifest, aborts with
// DataError when any example id sits in a train or validation list.
RunResult evaluate(const Classifier& model, std::span<const ModelInput> inputs,
                   std::span<const LabeledExample> examples, const DatasetManifest* manifest = nullptr);

std::string run_result_json(const RunResult& r);
RunResult parse_run_result(std::string_view json);
void write_run_result(const std::filesystem::path& path, const RunResult& r);
RunResult read_run_result(const std::filesystem::path& path);

struct ProtocolResult {
  std::vector<RunResult> runs;
  double mean_accuracy = 0.0;
  std::optional<double> std_accuracy;  // sample std; absent for one run
};

std::vector<std::uint64_t> default_seeds(std::size_t n = 10);  // 1..n

// Calls run_one for every seed in order. Each finished run is appended to
// log_path (jsonl) as it completes; when a run throws, an error line is
// appended and the exception propagates with the partial log on disk.
ProtocolResult repeated_protocol(std::span<const std::uint64_t> seeds,
                                 const std::function<RunResult(std::uint64_t)>& run_one,
                                 const std::optional<std::filesystem::path>& log_path = std::nullopt);

struct SignificanceResult {
  std::size_t n = 0;
  int df = 0;
  double mean_difference = 0.0;
  double t = 0.0;  // +-inf when the differences have zero spread
  double critical = 0.0;
  bool reject = false;  // H0: mean(a - b) <= 0
};

// One-tailed alpha = 0.05 critical values of Student's t. Degrees of freedom
// past the table fall back to the next smaller tabulated row.
double t_critical_one_tailed_05(int df);

// Paired one-tailed t-test of a over b, pairs matched by position.
SignificanceResult paired_ttest(std::span<const double> a, std::span<const double> b);

struct ReportTable {
  std::string title;
  std::vector<std::string> columns;  // first column is the row label
  std::vector<std::vector<std::string>> rows;
};

inline constexpr std::string_view kMissingCell = "—";

// Methods x (signal, band) accuracy grid for comment data.
ReportTable comment_table(std::span<const RunResult> results);
// Methods x band accuracy grid for review data.
ReportTable review_table(std::span<const RunResult> results);
// Empty results give a header-only table.

std::string_view method_display_name(std::string_view model_id);

void write_table_csv(std::ostream& out, const ReportTable& table);
void write_table_text(std::ostream& out, const ReportTable& table);

}  // namespace engage
