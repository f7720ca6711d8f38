#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "engage/dataset.hpp"
#include "engage/error.hpp"
#include "engage/rng.hpp"
#include "engage/taxonomy.hpp"
#include "oracle.hpp"
#include "synthetic.hpp"

namespace engage {
namespace {

// One thread with the given per-rank upvotes and reply counts; timestamps
// increase with rank.
std::vector<CommentRecord> make_thread(const std::string& tid, const std::vector<std::int64_t>& upvotes,
                                       const std::vector<int>& replies = {}) {
  std::vector<CommentRecord> out;
  for (std::size_t i = 0; i < upvotes.size(); ++i) {
    CommentRecord r;
    r.comment_id = tid + "-" + std::to_string(i);
    r.thread_id = tid;
    r.author_id = "u";
    r.posted_at = 1000 + static_cast<std::int64_t>(i);
    r.text = "text " + r.comment_id;
    r.upvotes = upvotes[i];
    out.push_back(r);
    const int n = i < replies.size() ? replies[i] : 0;
    for (int k = 0; k < n; ++k) {
      CommentRecord rep = r;
      rep.comment_id = r.comment_id + "/r" + std::to_string(k);
      rep.parent_id = r.comment_id;
      rep.upvotes = 0;
      out.push_back(rep);
    }
  }
  return out;
}

TEST(BuildThreads, SharesNormalizeOverFirstTen) {
  const auto rs = make_thread("t", {9, 1, 0, 0, 0, 0, 0, 0, 0, 0, 50});
  const auto b = build_threads(rs, Signal::kUpvotes);
  ASSERT_EQ(b.threads.size(), 1u);
  const auto& c = b.threads[0].comments;
  EXPECT_DOUBLE_EQ(c[0].upvote_share, 0.9);
  EXPECT_DOUBLE_EQ(c[1].upvote_share, 0.1);
  for (int i = 2; i < 10; ++i) EXPECT_EQ(c[static_cast<std::size_t>(i)].upvote_share, 0.0);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(c[static_cast<std::size_t>(i)].rank, i + 1);
}

TEST(BuildThreads, NineCommentsDiscarded) {
  const auto b = build_threads(make_thread("t", std::vector<std::int64_t>(9, 1)), Signal::kUpvotes);
  EXPECT_TRUE(b.threads.empty());
  EXPECT_EQ(b.discards.too_few_comments, 1u);
}

TEST(BuildThreads, ReplyThresholdIsTwenty) {
  const std::vector<std::int64_t> up(10, 1);
  const auto nineteen = build_threads(make_thread("a", up, {10, 9}), Signal::kReplies);
  EXPECT_TRUE(nineteen.threads.empty());
  EXPECT_EQ(nineteen.discards.too_few_replies, 1u);
  const auto twenty = build_threads(make_thread("a", up, {10, 10}), Signal::kReplies);
  ASSERT_EQ(twenty.threads.size(), 1u);
  EXPECT_EQ(twenty.threads[0].comments[0].replies, 10);
  EXPECT_DOUBLE_EQ(twenty.threads[0].comments[1].reply_share, 0.5);
}

TEST(BuildThreads, ZeroEngagementDiscarded) {
  const auto b = build_threads(make_thread("t", std::vector<std::int64_t>(10, 0)), Signal::kUpvotes);
  EXPECT_TRUE(b.threads.empty());
  EXPECT_EQ(b.discards.zero_engagement, 1u);
}

TEST(BuildThreads, TiesInTimeBrokenById) {
  auto rs = make_thread("t", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  rs[0].posted_at = rs[1].posted_at;
  rs[0].comment_id = "t-z";  // same time as t-1, larger id
  const auto b = build_threads(rs, Signal::kUpvotes);
  EXPECT_EQ(b.threads[0].comments[0].comment_id, "t-1");
  EXPECT_EQ(b.threads[0].comments[1].comment_id, "t-z");
}

TEST(BuildThreads, DanglingParentsCountedOrRejected) {
  auto rs = make_thread("t", std::vector<std::int64_t>(10, 1));
  CommentRecord orphan = rs[0];
  orphan.comment_id = "orphan";
  orphan.parent_id = "missing";
  rs.push_back(orphan);
  EXPECT_EQ(build_threads(rs, Signal::kUpvotes).discards.dangling_parents, 1u);
  BuildOptions strict;
  strict.strict_parents = true;
  EXPECT_THROW(build_threads(rs, Signal::kUpvotes, strict), DataError);
}

TEST(BuildThreads, SharesSumToOne) {
  testing::SyntheticCorpusOptions o;
  o.threads = 100;
  const auto rs = testing::synthetic_corpus(o);
  for (auto s : {Signal::kUpvotes, Signal::kReplies}) {
    const auto b = build_threads(rs, s);
    ASSERT_FALSE(b.threads.empty());
    for (const auto& t : b.threads) {
      double sum = 0.0;
      for (const auto& c : t.comments) sum += c.share(s);
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(RankGroups, TiesBrokenById) {
  std::vector<RankedThread> ts(3);
  const char* ids[] = {"A", "B", "C"};
  const double shares[] = {0.2, 0.05, 0.2};
  for (int t = 0; t < 3; ++t)
    for (int r = 0; r < 10; ++r) {
      auto& e = ts[static_cast<std::size_t>(t)].comments[static_cast<std::size_t>(r)];
      e.comment_id = std::string(ids[t]) + std::to_string(r);
      e.rank = r + 1;
      e.upvote_share = shares[t];
    }
  const auto g = rank_groups(ts, Signal::kUpvotes);
  for (const auto& grp : g) EXPECT_EQ(grp.entries.size(), 3u);
  EXPECT_EQ(g[2].entries[0].comment_id, "A2");
  EXPECT_EQ(g[2].entries[1].comment_id, "C2");
  EXPECT_EQ(g[2].entries[2].comment_id, "B2");
}

std::array<RankGroup, kThreadSize> groups_of(std::size_t n) {
  std::array<RankGroup, kThreadSize> g;
  for (int r = 0; r < kThreadSize; ++r) {
    g[static_cast<std::size_t>(r)].rank = r + 1;
    for (std::size_t i = 0; i < n; ++i)
      g[static_cast<std::size_t>(r)].entries.push_back(
          {"r" + std::to_string(r) + "e" + std::to_string(100 + i), 1.0 - static_cast<double>(i) / static_cast<double>(n)});
  }
  return g;
}

TEST(SplitTopFlop, FloorArithmetic) {
  const auto g20 = groups_of(20);
  const auto ten = split_top_flop(g20, 10, Signal::kUpvotes);
  EXPECT_EQ(ten.size(), 40u);  // 2 top + 2 flop per group
  const auto g21 = groups_of(21);
  const auto half = split_top_flop(g21, 50, Signal::kUpvotes);
  EXPECT_EQ(half.size(), 200u);
  std::set<std::string> ids;
  for (const auto& e : half) ids.insert(e.comment_id);
  for (int r = 0; r < 10; ++r) EXPECT_FALSE(ids.contains("r" + std::to_string(r) + "e110")) << "median kept";
}

TEST(SplitTopFlop, BandTooSmall) {
  try {
    split_top_flop(groups_of(9), 10, Signal::kUpvotes);
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_STREQ(e.what(), "band too small for corpus");
  }
}

TEST(Dataset, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    testing::SyntheticCorpusOptions o;
    o.threads = 120;
    o.seed = seed;
    o.min_top_level = 8;
    const auto rs = testing::synthetic_corpus(o);
    for (auto s : {Signal::kUpvotes, Signal::kReplies}) {
      const auto threads = build_threads(rs, s);
      const auto groups = rank_groups(threads.threads, s);
      for (int band : {10, 25, 50}) {
        const auto got = split_top_flop(groups, band, s);
        const auto want = testing::oracle_labels(rs, s, band);
        ASSERT_EQ(got.size(), want.size());
        for (const auto& e : got) {
          auto it = want.find(e.comment_id);
          ASSERT_NE(it, want.end()) << e.comment_id;
          EXPECT_EQ(static_cast<int>(e.label), it->second) << e.comment_id;
        }
      }
    }
  }
}

TEST(Dataset, RankStrataBalanced) {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    testing::SyntheticCorpusOptions o;
    o.threads = 80;
    o.seed = seed;
    const auto rs = testing::synthetic_corpus(o);
    const auto groups = rank_groups(build_threads(rs, Signal::kUpvotes).threads, Signal::kUpvotes);
    for (int band : {10, 25, 50}) {
      std::map<int, int> balance;
      for (const auto& e : split_top_flop(groups, band, Signal::kUpvotes))
        balance[e.rank] += e.label == Label::kTop ? 1 : -1;
      for (const auto& [rank, diff] : balance) EXPECT_LE(std::abs(diff), 1);
    }
  }
}

TEST(Dataset, LabelsInvariantUnderThreadUpvoteScaling) {
  testing::SyntheticCorpusOptions o;
  o.threads = 60;
  auto rs = testing::synthetic_corpus(o);
  const auto base = testing::oracle_labels(rs, Signal::kUpvotes, 25);
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto scaled = rs;
    const std::string tid = "t" + std::to_string(rng.below(o.threads));
    const auto k = static_cast<std::int64_t>(2 + rng.below(50));
    for (auto& r : scaled)
      if (r.thread_id == tid) r.upvotes *= k;
    const auto groups = rank_groups(build_threads(scaled, Signal::kUpvotes).threads, Signal::kUpvotes);
    for (const auto& e : split_top_flop(groups, 25, Signal::kUpvotes))
      ASSERT_EQ(static_cast<int>(e.label), base.at(e.comment_id));
  }
}

TEST(Splits, DisjointStratifiedAndReproducible) {
  testing::SyntheticCorpusOptions o;
  o.threads = 300;
  const auto rs = testing::synthetic_corpus(o);
  const std::vector<int> bands{10, 25, 50};
  const auto a = build_dataset(rs, Signal::kUpvotes, bands, 0.1, 5);
  const auto b = build_dataset(rs, Signal::kUpvotes, bands, 0.1, 5);
  const auto c = build_dataset(rs, Signal::kUpvotes, bands, 0.1, 6);
  EXPECT_EQ(a.splits.manifest.digest(), b.splits.manifest.digest());
  EXPECT_NE(a.splits.manifest.digest(), c.splits.manifest.digest());
  EXPECT_NO_THROW(check_disjoint(a.splits.manifest));
  const auto n10 = a.per_band.at(10).size();
  EXPECT_EQ(a.splits.test.size(), static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n10))));
  std::set<std::string> test;
  for (const auto& e : a.splits.test) test.insert(e.comment_id);
  for (const auto& [band, split] : a.splits.bands) {
    for (const auto* part : {&split.train, &split.validation})
      for (const auto& e : *part) EXPECT_FALSE(test.contains(e.comment_id));
    const double total = static_cast<double>(split.train.size() + split.validation.size());
    EXPECT_NEAR(static_cast<double>(split.validation.size()) / total, 0.2, 0.01);
  }
}

TEST(Splits, RejectsBadFraction) {
  std::map<int, std::vector<LabeledExample>> m{{10, {}}};
  EXPECT_THROW(make_splits(m, 0.0, 1), UsageError);
  EXPECT_THROW(make_splits(m, 1.0, 1), UsageError);
  EXPECT_THROW(make_splits({{25, {}}}, 0.1, 1), UsageError);
}

TEST(Splits, OverlapDetected) {
  DatasetManifest m;
  m.test_ids = {"x"};
  m.train_ids[25] = {"a", "x"};
  EXPECT_THROW(check_disjoint(m), DataError);
}

TEST(Manifest, FileRoundTripKeepsDigest) {
  testing::SyntheticCorpusOptions o;
  o.threads = 150;
  const auto rs = testing::synthetic_corpus(o);
  const std::vector<int> bands{10, 50};
  const auto d = build_dataset(rs, Signal::kReplies, bands, 0.1, 3);
  const auto path = std::filesystem::temp_directory_path() / "engage_manifest_test.json";
  write_manifest(path, d.splits.manifest);
  const auto back = read_manifest(path);
  EXPECT_EQ(back.digest(), d.splits.manifest.digest());
  EXPECT_EQ(back.discards.too_few_replies, d.splits.manifest.discards.too_few_replies);
  std::filesystem::remove(path);
}

TEST(Examples, JsonlRoundTrip) {
  LabeledExample e;
  e.comment_id = "c1";
  e.text = "héllo \"there\"";
  e.label = Label::kTop;
  e.rank = 4;
  e.taxonomy_class = "Joke/Humor";
  const auto back = parse_example(serialize_example(e));
  EXPECT_EQ(back.comment_id, e.comment_id);
  EXPECT_EQ(back.text, e.text);
  EXPECT_EQ(back.label, e.label);
  EXPECT_EQ(back.rank, 4);
  EXPECT_EQ(back.taxonomy_class, e.taxonomy_class);
  EXPECT_NE(serialize_example(e).find("\"class\""), std::string::npos);
}

TEST(BiasCurve, IdenticalThreadsAndDecreasingBias) {
  std::vector<CommentRecord> rs;
  for (int t = 0; t < 5; ++t) {
    std::vector<std::int64_t> up;
    for (int r = 1; r <= 10; ++r) up.push_back(11 - r);
    auto th = make_thread("t" + std::to_string(t), up);
    rs.insert(rs.end(), th.begin(), th.end());
  }
  const auto curve = position_bias_curve(build_threads(rs, Signal::kUpvotes).threads);
  ASSERT_EQ(curve.size(), 10u);
  for (int r = 0; r < 10; ++r) EXPECT_DOUBLE_EQ(curve[static_cast<std::size_t>(r)].mean_upvotes, 10 - r);
  std::ostringstream out;
  write_bias_curve_csv(out, curve);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "rank,mean_upvotes,mean_replies");
  EXPECT_THROW(position_bias_curve({}), UsageError);
}

}  // namespace
}  // namespace engage
