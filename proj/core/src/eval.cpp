#include "engage/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "engage/error.hpp"

namespace engage {

RunResult score_predictions(std::span<const int> predicted, std::span<const LabeledExample> examples) {
  if (predicted.size() != examples.size()) throw UsageError("prediction count does not match examples");
  if (examples.empty()) throw UsageError("cannot evaluate an empty test set");
  RunResult r;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_class;  // hits, positives
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const bool truth = examples[i].label == Label::kTop;
    const bool pred = predicted[i] == 1;
    if (truth && pred) ++r.confusion.tp;
    else if (!truth && !pred) ++r.confusion.tn;
    else if (pred) ++r.confusion.fp;
    else ++r.confusion.fn;
    if (truth && examples[i].taxonomy_class) {
      auto& c = per_class[*examples[i].taxonomy_class];
      c.first += pred;
      ++c.second;
    }
  }
  r.accuracy = static_cast<double>(r.confusion.tp + r.confusion.tn) / static_cast<double>(r.confusion.total());
  for (const auto& [name, c] : per_class)
    if (c.second >= kMinClassSupport)
      r.class_recall[name] = static_cast<double>(c.first) / static_cast<double>(c.second);
  r.signal = examples.front().signal;
  r.band = examples.front().band;
  return r;
}

RunResult evaluate(const Classifier& model, std::span<const ModelInput> inputs,
                   std::span<const LabeledExample> examples, const DatasetManifest* manifest) {
  if (inputs.size() != examples.size()) throw UsageError("input count does not match examples");
  if (manifest) {
    check_disjoint(*manifest);
    std::set<std::string> seen;
    for (const auto& [band, ids] : manifest->train_ids) seen.insert(ids.begin(), ids.end());
    for (const auto& [band, ids] : manifest->validation_ids) seen.insert(ids.begin(), ids.end());
    for (const auto& e : examples)
      if (seen.contains(e.comment_id))
        throw DataError("test example " + e.comment_id + " also appears in a training or validation split");
  }
  std::vector<int> predicted;
  predicted.reserve(inputs.size());
  for (const auto& in : inputs) predicted.push_back(model.predict(in));
  return score_predictions(predicted, examples);
}

std::string run_result_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["source"] = r.source;
  j["signal"] = std::string(to_string(r.signal));
  j["band"] = r.band;
  j["seed"] = r.seed;
  j["accuracy"] = r.accuracy;
  j["class_recall"] = r.class_recall;
  j["confusion"] = {{"tp", r.confusion.tp}, {"tn", r.confusion.tn}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}};
  return j.dump();
}

RunResult parse_run_result(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunResult r;
    r.model = j.at("model").get<std::string>();
    r.source = j.value("source", "comments");
    r.signal = parse_signal(j.at("signal").get<std::string>());
    r.band = j.at("band").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.class_recall = j.value("class_recall", std::map<std::string, double>{});
    const auto& c = j.at("confusion");
    r.confusion = {c.at("tp").get<std::size_t>(), c.at("tn").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                   c.at("fn").get<std::size_t>()};
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad run result: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("bad run result: ") + e.what());
  }
}

void write_run_result(const std::filesystem::path& path, const RunResult& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << run_result_json(r) << '\n';
}

RunResult read_run_result(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_result(ss.str());
}

std::vector<std::uint64_t> default_seeds(std::size_t n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), std::uint64_t{1});
  return s;
}

ProtocolResult repeated_protocol(std::span<const std::uint64_t> seeds,
                                 const std::function<RunResult(std::uint64_t)>& run_one,
                                 const std::optional<std::filesystem::path>& log_path) {
  if (seeds.empty()) throw UsageError("protocol needs at least one seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw UsageError("protocol seeds must be distinct");
  std::ofstream log;
  if (log_path) {
    log.open(*log_path, std::ios::binary | std::ios::trunc);
    if (!log) throw DataError("cannot write " + log_path->string());
  }
  ProtocolResult out;
  for (auto seed : seeds) {
    try {
      out.runs.push_back(run_one(seed));
    } catch (const std::exception& e) {
      if (log) {
        nlohmann::json err{{"seed", seed}, {"error", e.what()}};
        log << err.dump() << '\n' << std::flush;
      }
      throw;
    }
    if (log) log << run_result_json(out.runs.back()) << '\n' << std::flush;
  }
  const double n = static_cast<double>(out.runs.size());
  for (const auto& r : out.runs) out.mean_accuracy += r.accuracy;
  out.mean_accuracy /= n;
  if (out.runs.size() > 1) {
    double ss = 0.0;
    for (const auto& r : out.runs) ss += (r.accuracy - out.mean_accuracy) * (r.accuracy - out.mean_accuracy);
    out.std_accuracy = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

double t_critical_one_tailed_05(int df) {
  static constexpr std::array<double, 30> kTable{
      6.314, 2.920, 2.353, 2.132, 2.015, 1.943, 1.895, 1.860, 1.833, 1.812,
      1.796, 1.782, 1.771, 1.761, 1.753, 1.746, 1.740, 1.734, 1.729, 1.725,
      1.721, 1.717, 1.714, 1.711, 1.708, 1.706, 1.703, 1.701, 1.699, 1.697};
  if (df < 1) throw UsageError("degrees of freedom must be positive");
  if (df <= 30) return kTable[static_cast<std::size_t>(df - 1)];
  if (df < 40) return 1.697;
  if (df < 60) return 1.684;
  if (df < 120) return 1.671;
  return 1.658;
}

SignificanceResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("paired t-test needs equal-length samples");
  if (a.size() < 2) throw UsageError("paired t-test needs at least two pairs");
  SignificanceResult r;
  r.n = a.size();
  r.df = static_cast<int>(r.n) - 1;
  r.critical = t_critical_one_tailed_05(r.df);
  std::vector<double> d(r.n);
  for (std::size_t i = 0; i < r.n; ++i) d[i] = a[i] - b[i];
  const double n = static_cast<double>(r.n);
  r.mean_difference = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : d) ss += (v - r.mean_difference) * (v - r.mean_difference);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    if (r.mean_difference == 0.0)
      r.t = 0.0;
    else
      r.t = r.mean_difference > 0.0 ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
  } else {
    r.t = r.mean_difference / (sd / std::sqrt(n));
  }
  r.reject = r.t > r.critical;
  return r;
}

std::string_view method_display_name(std::string_view id) {
  if (id == "baseline") return "Baseline";
  if (id == "park") return "Features";
  if (id == "cnn") return "CNN";
  if (id == "gru") return "GRU";
  return id;
}

namespace {

constexpr std::array<int, 3> kBands{10, 25, 50};

std::string cell(std::span<const RunResult> results, std::string_view source, std::string_view model,
                 std::optional<Signal> signal, int band) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : results)
    if (r.source == source && r.model == model && r.band == band && (!signal || r.signal == *signal)) {
      sum += r.accuracy;
      ++n;
    }
  if (n == 0) return std::string(kMissingCell);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", sum / static_cast<double>(n));
  return buf;
}

// Display width in code points.
std::size_t width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80;
  return w;
}

}  // namespace

ReportTable comment_table(std::span<const RunResult> results) {
  ReportTable t;
  t.title = "Accuracy distinguishing top and flop comments";
  t.columns = {"Method"};
  for (auto s : {Signal::kUpvotes, Signal::kReplies})
    for (int band : kBands) t.columns.push_back(std::string(to_string(s)) + " " + std::to_string(band) + "%");
  if (results.empty()) return t;
  for (const char* m : {"baseline", "park", "cnn", "gru"}) {
    std::vector<std::string> row{std::string(method_display_name(m))};
    for (auto s : {Signal::kUpvotes, Signal::kReplies})
      for (int band : kBands) row.push_back(cell(results, "comments", m, s, band));
    t.rows.push_back(std::move(row));
  }
  return t;
}

ReportTable review_table(std::span<const RunResult> results) {
  ReportTable t;
  t.title = "Accuracy distinguishing top and flop product reviews";
  t.columns = {"Method"};
  for (int band : kBands) t.columns.push_back(std::to_string(band) + "%");
  if (results.empty()) return t;
  for (const char* m : {"baseline", "cnn", "gru"}) {
    std::vector<std::string> row{std::string(method_display_name(m))};
    for (int band : kBands) row.push_back(cell(results, "reviews", m, std::nullopt, band));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_table_csv(std::ostream& out, const ReportTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

void write_table_text(std::ostream& out, const ReportTable& table) {
  std::vector<std::size_t> w(table.columns.size(), 0);
  for (std::size_t i = 0; i < table.columns.size(); ++i) w[i] = width(table.columns[i]);
  for (const auto& row : table.rows)
    for (std::size_t i = 0; i < row.size() && i < w.size(); ++i) w[i] = std::max(w[i], width(row[i]));
  auto emit = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string pad(w[i] - width(cells[i]), ' ');
      if (i) line += "  ";
      line += i == 0 ? cells[i] + pad : pad + cells[i];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  };
  out << table.title << '\n';
  emit(table.columns);
  std::size_t total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) total += w[i] + (i ? 2 : 0);
  out << std::string(total, '-') << '\n';
  for (const auto& row : table.rows) emit(row);
}

}  // namespace engage
