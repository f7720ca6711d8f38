#include "engage/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "engage/error.hpp"
#include "engage/hash.hpp"
#include "engage/rng.hpp"

namespace engage {

using nlohmann::json;

Signal parse_signal(std::string_view name) {
  if (name == "upvotes") return Signal::kUpvotes;
  if (name == "replies") return Signal::kReplies;
  throw UsageError("unknown signal: " + std::string(name));
}

std::string_view to_string(Signal s) { return s == Signal::kUpvotes ? "upvotes" : "replies"; }

BuildResult build_threads(std::span<const CommentRecord> records, Signal signal,
                          BuildOptions options) {
  BuildResult out;

  std::unordered_set<std::string_view> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.insert(r.comment_id);

  std::unordered_map<std::string_view, std::int64_t> children;
  for (const auto& r : records) {
    if (!r.parent_id) continue;
    if (!ids.contains(*r.parent_id)) {
      if (options.strict_parents)
        throw DataError("comment '" + r.comment_id + "' replies to unknown parent '" +
                        *r.parent_id + "'");
      ++out.discards.dangling_parents;
      continue;
    }
    ++children[*r.parent_id];
  }

  // std::map keeps thread output ordered by thread_id.
  std::map<std::string_view, std::vector<const CommentRecord*>> top_level;
  for (const auto& r : records) {
    auto& list = top_level[r.thread_id];
    if (!r.parent_id) list.push_back(&r);
  }

  for (auto& [thread_id, list] : top_level) {
    if (list.size() < static_cast<std::size_t>(kThreadSize)) {
      ++out.discards.too_few_comments;
      continue;
    }
    std::partial_sort(list.begin(), list.begin() + kThreadSize, list.end(),
                      [](const CommentRecord* a, const CommentRecord* b) {
                        if (a->posted_at != b->posted_at) return a->posted_at < b->posted_at;
                        return a->comment_id < b->comment_id;
                      });
    RankedThread t;
    t.thread_id = std::string(thread_id);
    std::int64_t total_up = 0;
    std::int64_t total_rep = 0;
    for (int i = 0; i < kThreadSize; ++i) {
      const CommentRecord& c = *list[static_cast<std::size_t>(i)];
      RankedEntry& e = t.comments[static_cast<std::size_t>(i)];
      e.comment_id = c.comment_id;
      e.rank = i + 1;
      e.upvotes = c.upvotes;
      auto it = children.find(c.comment_id);
      e.replies = it == children.end() ? 0 : it->second;
      total_up += e.upvotes;
      total_rep += e.replies;
    }
    if (options.engagement_filters) {
      if (signal == Signal::kReplies && total_rep < kMinThreadReplies) {
        ++out.discards.too_few_replies;
        continue;
      }
      const std::int64_t total = signal == Signal::kUpvotes ? total_up : total_rep;
      if (total == 0) {
        ++out.discards.zero_engagement;
        continue;
      }
    }
    for (auto& e : t.comments) {
      e.upvote_share = total_up > 0 ? static_cast<double>(e.upvotes) / static_cast<double>(total_up) : 0.0;
      e.reply_share = total_rep > 0 ? static_cast<double>(e.replies) / static_cast<double>(total_rep) : 0.0;
    }
    out.threads.push_back(std::move(t));
  }
  return out;
}

std::array<RankGroup, kThreadSize> rank_groups(std::span<const RankedThread> threads,
                                               Signal signal) {
  std::array<RankGroup, kThreadSize> groups;
  for (int r = 0; r < kThreadSize; ++r) {
    RankGroup& g = groups[static_cast<std::size_t>(r)];
    g.rank = r + 1;
    g.entries.reserve(threads.size());
    for (const auto& t : threads) {
      const RankedEntry& e = t.comments[static_cast<std::size_t>(r)];
      g.entries.push_back({e.comment_id, e.share(signal)});
    }
    std::sort(g.entries.begin(), g.entries.end(), [](const GroupEntry& a, const GroupEntry& b) {
      if (a.share != b.share) return a.share > b.share;
      return a.comment_id < b.comment_id;
    });
  }
  return groups;
}

std::vector<LabeledExample> split_top_flop(std::span<const RankGroup> groups, int band,
                                           Signal signal) {
  if (band <= 0 || band > 50) throw UsageError("band must be in 1..50, got " + std::to_string(band));
  std::vector<LabeledExample> out;
  for (const RankGroup& g : groups) {
    const std::size_t n = g.entries.size();
    if (n == 0) throw UsageError("empty rank group " + std::to_string(g.rank));
    const std::size_t m = static_cast<std::size_t>(band) * n / 100;
    if (m == 0) throw UsageError("band too small for corpus");
    auto emit = [&](const GroupEntry& e, Label label) {
      LabeledExample x;
      x.comment_id = e.comment_id;
      x.label = label;
      x.signal = signal;
      x.band = band;
      x.rank = g.rank;
      out.push_back(std::move(x));
    };
    for (std::size_t i = 0; i < m; ++i) emit(g.entries[i], Label::kTop);
    for (std::size_t i = n - m; i < n; ++i) emit(g.entries[i], Label::kFlop);
  }
  return out;
}

void attach_text(std::span<LabeledExample> examples, std::span<const CommentRecord> records) {
  std::unordered_map<std::string_view, const CommentRecord*> by_id;
  by_id.reserve(records.size());
  for (const auto& r : records) by_id.emplace(r.comment_id, &r);
  for (auto& e : examples) {
    auto it = by_id.find(e.comment_id);
    if (it == by_id.end()) throw DataError("no record for example '" + e.comment_id + "'");
    e.text = it->second->text;
  }
}

namespace {

using StratumKey = std::pair<int, int>;  // (rank, label)

std::map<StratumKey, std::vector<const LabeledExample*>> stratify(
    const std::vector<const LabeledExample*>& pool) {
  std::map<StratumKey, std::vector<const LabeledExample*>> strata;
  for (const auto* e : pool) strata[{e->rank, static_cast<int>(e->label)}].push_back(e);
  for (auto& [key, list] : strata)
    std::sort(list.begin(), list.end(),
              [](const auto* a, const auto* b) { return a->comment_id < b->comment_id; });
  return strata;
}

// Largest-remainder apportionment of round(fraction * N) across strata.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& sizes, double fraction) {
  std::size_t total_n = 0;
  for (auto s : sizes) total_n += s;
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total_n)));
  std::vector<std::size_t> take(sizes.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double quota = fraction * static_cast<double>(sizes[i]);
    take[i] = static_cast<std::size_t>(std::floor(quota));
    assigned += take[i];
    remainders.emplace_back(quota - std::floor(quota), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < target && k < remainders.size(); ++k) {
    const std::size_t i = remainders[k].second;
    if (take[i] < sizes[i]) {
      ++take[i];
      ++assigned;
    }
  }
  return take;
}

std::vector<std::string> sorted_ids(const std::vector<LabeledExample>& xs) {
  std::vector<std::string> ids;
  ids.reserve(xs.size());
  for (const auto& x : xs) ids.push_back(x.comment_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

json discards_json(const DiscardCounts& d) {
  return {{"too_few_comments", d.too_few_comments},
          {"too_few_replies", d.too_few_replies},
          {"zero_engagement", d.zero_engagement},
          {"dangling_parents", d.dangling_parents}};
}

json manifest_json(const DatasetManifest& m) {
  json j;
  j["format"] = "engage-dataset-manifest";
  j["version"] = 1;
  j["signal"] = std::string(to_string(m.signal));
  j["source_format"] = m.source_format;
  j["bands"] = m.bands;
  j["seed"] = m.seed;
  j["test_fraction"] = m.test_fraction;
  j["corpus_digest"] = m.corpus_digest;
  j["discards"] = discards_json(m.discards);
  j["threads_kept"] = m.threads_kept;
  j["test_count"] = m.test_count;
  j["config"] = m.config;
  json counts = json::object();
  json train = json::object();
  json val = json::object();
  for (const auto& [band, c] : m.counts) {
    counts[std::to_string(band)] = {{"train", c.train}, {"validation", c.validation}};
  }
  for (const auto& [band, ids] : m.train_ids) train[std::to_string(band)] = ids;
  for (const auto& [band, ids] : m.validation_ids) val[std::to_string(band)] = ids;
  j["counts"] = counts;
  j["test_ids"] = m.test_ids;
  j["train_ids"] = train;
  j["validation_ids"] = val;
  return j;
}

}  // namespace

SplitResult make_splits(const std::map<int, std::vector<LabeledExample>>& examples_per_band,
                        double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw UsageError("test_fraction must lie in (0, 1)");
  auto ten = examples_per_band.find(10);
  if (ten == examples_per_band.end()) throw UsageError("band 10 is required for the shared test set");

  SplitResult out;
  DatasetManifest& m = out.manifest;
  m.seed = seed;
  m.test_fraction = test_fraction;
  if (!ten->second.empty()) m.signal = ten->second.front().signal;

  // Shared test set from band 10.
  std::vector<const LabeledExample*> pool10;
  for (const auto& e : ten->second) pool10.push_back(&e);
  auto strata10 = stratify(pool10);
  std::vector<std::size_t> sizes;
  for (const auto& [k, list] : strata10) sizes.push_back(list.size());
  const auto take = apportion(sizes, test_fraction);

  Rng test_rng(derive_seed(seed, "test-split"));
  std::unordered_set<std::string> test_ids;
  std::size_t si = 0;
  for (auto& [key, list] : strata10) {
    test_rng.shuffle(list);
    for (std::size_t i = 0; i < take[si]; ++i) {
      out.test.push_back(*list[i]);
      test_ids.insert(list[i]->comment_id);
    }
    ++si;
  }

  for (const auto& [band, examples] : examples_per_band) {
    m.bands.push_back(band);
    std::vector<const LabeledExample*> pool;
    for (const auto& e : examples)
      if (!test_ids.contains(e.comment_id)) pool.push_back(&e);
    auto strata = stratify(pool);
    std::vector<std::size_t> bsizes;
    for (const auto& [k, list] : strata) bsizes.push_back(list.size());
    const auto val_take = apportion(bsizes, 0.2);

    Rng rng(derive_seed(seed, "validation-split-band-" + std::to_string(band)));
    BandSplit split;
    std::size_t bi = 0;
    for (auto& [key, list] : strata) {
      rng.shuffle(list);
      for (std::size_t i = 0; i < list.size(); ++i)
        (i < val_take[bi] ? split.validation : split.train).push_back(*list[i]);
      ++bi;
    }
    m.counts[band] = {split.train.size(), split.validation.size()};
    m.train_ids[band] = sorted_ids(split.train);
    m.validation_ids[band] = sorted_ids(split.validation);
    out.bands.emplace(band, std::move(split));
  }
  m.test_count = out.test.size();
  m.test_ids = sorted_ids(out.test);
  return out;
}

std::string DatasetManifest::digest() const {
  Digest d;
  d.update(manifest_json(*this).dump());
  return d.hex();
}

DatasetBuild build_dataset(std::span<const CommentRecord> records, Signal signal,
                           std::span<const int> bands, double test_fraction, std::uint64_t seed,
                           BuildOptions options) {
  if (bands.empty()) throw UsageError("at least one band is required");
  DatasetBuild out;
  out.threads = build_threads(records, signal, options);
  if (out.threads.threads.empty()) throw DataError("no thread survives the filters");
  const auto groups = rank_groups(out.threads.threads, signal);
  for (int band : bands) {
    if (out.per_band.contains(band)) throw UsageError("band " + std::to_string(band) + " listed twice");
    auto examples = split_top_flop(groups, band, signal);
    attach_text(examples, records);
    out.per_band.emplace(band, std::move(examples));
  }
  out.splits = make_splits(out.per_band, test_fraction, seed);
  auto& m = out.splits.manifest;
  m.signal = signal;
  m.corpus_digest = corpus_digest(records);
  m.discards = out.threads.discards;
  m.threads_kept = out.threads.threads.size();
  return out;
}

void check_disjoint(const DatasetManifest& m) {
  std::unordered_set<std::string_view> test(m.test_ids.begin(), m.test_ids.end());
  auto scan = [&](const std::map<int, std::vector<std::string>>& lists, const char* what) {
    for (const auto& [band, ids] : lists)
      for (const auto& id : ids)
        if (test.contains(id))
          throw DataError("test id '" + id + "' also appears in band " + std::to_string(band) +
                          " " + what);
  };
  scan(m.train_ids, "train");
  scan(m.validation_ids, "validation");
}

std::string serialize_example(const LabeledExample& e) {
  json j;
  j["id"] = e.comment_id;
  j["text"] = e.text;
  j["label"] = static_cast<int>(e.label);
  j["rank"] = e.rank;
  j["class"] = e.taxonomy_class ? json(*e.taxonomy_class) : json(nullptr);
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

LabeledExample parse_example(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid example JSON: ") + e.what());
  }
  LabeledExample e;
  try {
    e.comment_id = j.at("id").get<std::string>();
    e.text = j.at("text").get<std::string>();
    const int label = j.at("label").get<int>();
    if (label != 0 && label != 1) throw DataError("label must be 0 or 1");
    e.label = static_cast<Label>(label);
    e.rank = j.value("rank", 0);
    if (auto it = j.find("class"); it != j.end() && !it->is_null())
      e.taxonomy_class = it->get<std::string>();
  } catch (const json::exception& ex) {
    throw DataError(std::string("bad example record: ") + ex.what());
  }
  return e;
}

void write_examples(const std::filesystem::path& path, std::span<const LabeledExample> examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& e : examples) out << serialize_example(e) << '\n';
}

std::vector<LabeledExample> read_examples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_example(line));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  json j = manifest_json(m);
  j["digest"] = m.digest();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
    DatasetManifest m;
    m.signal = parse_signal(j.at("signal").get<std::string>());
    m.source_format = j.at("source_format").get<std::string>();
    m.bands = j.at("bands").get<std::vector<int>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.test_fraction = j.at("test_fraction").get<double>();
    m.corpus_digest = j.at("corpus_digest").get<std::string>();
    const json& d = j.at("discards");
    m.discards = {d.at("too_few_comments"), d.at("too_few_replies"), d.at("zero_engagement"),
                  d.at("dangling_parents")};
    m.threads_kept = j.at("threads_kept").get<std::size_t>();
    m.test_count = j.at("test_count").get<std::size_t>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    for (const auto& [band, c] : j.at("counts").items())
      m.counts[std::stoi(band)] = {c.at("train"), c.at("validation")};
    m.test_ids = j.at("test_ids").get<std::vector<std::string>>();
    for (const auto& [band, ids] : j.at("train_ids").items())
      m.train_ids[std::stoi(band)] = ids.get<std::vector<std::string>>();
    for (const auto& [band, ids] : j.at("validation_ids").items())
      m.validation_ids[std::stoi(band)] = ids.get<std::vector<std::string>>();
    if (auto it = j.find("digest"); it != j.end() && it->get<std::string>() != m.digest())
      throw DataError("manifest digest mismatch in " + path.string());
    return m;
  } catch (const json::exception& e) {
    throw DataError("bad manifest " + path.string() + ": " + e.what());
  }
}

std::vector<RankMeans> position_bias_curve(std::span<const RankedThread> threads) {
  if (threads.empty()) throw UsageError("position bias curve needs at least one thread");
  std::vector<RankMeans> curve(kThreadSize);
  for (int r = 0; r < kThreadSize; ++r) {
    double up = 0.0;
    double rep = 0.0;
    for (const auto& t : threads) {
      up += static_cast<double>(t.comments[static_cast<std::size_t>(r)].upvotes);
      rep += static_cast<double>(t.comments[static_cast<std::size_t>(r)].replies);
    }
    const double n = static_cast<double>(threads.size());
    curve[static_cast<std::size_t>(r)] = {r + 1, up / n, rep / n};
  }
  return curve;
}

void write_bias_curve_csv(std::ostream& out, std::span<const RankMeans> curve) {
  out << "rank,mean_upvotes,mean_replies\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", p.rank, p.mean_upvotes, p.mean_replies);
    out << buf;
  }
}

}  // namespace engage
