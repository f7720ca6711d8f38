#include <gtest/gtest.h>

#include <sstream>

#include "engage/corpus.hpp"
#include "engage/error.hpp"
#include "engage/rng.hpp"
#include "engage/timestamp.hpp"
#include "synthetic.hpp"

namespace engage {
namespace {

const char* kThree =
    R"({"id":"c1","article_id":"a1","author_id":"u1","timestamp":"2013-05-01T10:00:00Z","text":"First!","upvotes":3,"parent_id":null})"
    "\n"
    R"({"id":"c2","article_id":"a1","author_id":"u2","timestamp":"2013-05-01T10:05:00Z","text":"No.","upvotes":0,"parent_id":"c1"})"
    "\n"
    R"({"id":"c3","article_id":"a2","author_id":"u1","timestamp":"2013-05-02T08:00:00Z","text":"Hm","upvotes":7})"
    "\n";

TEST(Ingest, ValidFilePassesThrough) {
  std::istringstream in(kThree);
  const auto r = ingest(in);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.records[0].comment_id, "c1");
  EXPECT_EQ(r.records[1].parent_id, std::optional<std::string>("c1"));
  EXPECT_FALSE(r.records[2].parent_id);
  EXPECT_EQ(r.records[2].upvotes, 7);
  EXPECT_EQ(r.records[0].posted_at, 1367402400);
}

TEST(Ingest, ReviewFieldsMapOntoComments) {
  std::istringstream in(
      R"({"id":"r1","product_id":"B00X","author_id":"x","timestamp":"2014-01-01T00:00:00Z","text":"ok","helpful_votes":14})"
      "\n");
  const auto r = ingest(in, {CorpusFormat::kReviews, OnError::kAbort});
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].thread_id, "B00X");
  EXPECT_EQ(r.records[0].upvotes, 14);
  EXPECT_FALSE(r.records[0].parent_id);
}

TEST(Ingest, MissingTextAbortsOrSkips) {
  const std::string bad =
      R"({"id":"c1","article_id":"a","author_id":"u","timestamp":"2013-01-01T00:00:00Z","text":"x","upvotes":1,"parent_id":null})"
      "\n"
      R"({"id":"c2","article_id":"a","author_id":"u","timestamp":"2013-01-01T00:00:00Z","upvotes":1,"parent_id":null})"
      "\n"
      R"({"id":"c3","article_id":"a","author_id":"u","timestamp":"2013-01-01T00:00:00Z","text":"y","upvotes":1,"parent_id":null})"
      "\n";
  {
    std::istringstream in(bad);
    try {
      ingest(in);
      FAIL() << "expected DataError";
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
  std::istringstream in(bad);
  const auto r = ingest(in, {CorpusFormat::kComments, OnError::kSkip});
  EXPECT_EQ(r.records.size(), 2u);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0].line, 2u);
}

TEST(Ingest, DuplicateIdAbortsEvenInSkipMode) {
  std::string twice = std::string(kThree) +
      R"({"id":"c2","article_id":"a9","author_id":"u","timestamp":"2013-01-01T00:00:00Z","text":"x","upvotes":1,"parent_id":null})"
      "\n";
  std::istringstream in(twice);
  EXPECT_THROW(ingest(in, {CorpusFormat::kComments, OnError::kSkip}), DataError);
}

TEST(Ingest, RejectsInvariantViolations) {
  EXPECT_THROW(parse_record(R"({"id":"c","article_id":"a","author_id":"u","timestamp":"2013-01-01T00:00:00Z","text":"x","upvotes":-1,"parent_id":null})",
                            CorpusFormat::kComments),
               DataError);
  EXPECT_THROW(parse_record(R"({"id":"c","article_id":"a","author_id":"u","timestamp":"2013-01-01T00:00:00Z","text":"x","upvotes":1,"parent_id":"c"})",
                            CorpusFormat::kComments),
               DataError);
  EXPECT_THROW(parse_record("not json", CorpusFormat::kComments), DataError);
}

TEST(Ingest, SerializeThenParseIsIdentity) {
  testing::SyntheticCorpusOptions o;
  o.threads = 20;
  o.seed = 4;
  auto records = testing::synthetic_corpus(o);
  records[0].text = "quote \" backslash \\ newline \n unicode é ✓";
  records[1].section = "politics";
  std::ostringstream out;
  write_canonical(out, records);
  std::istringstream in(out.str());
  const auto back = ingest(in);
  ASSERT_EQ(back.records.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(back.records[i], records[i]) << i;
}

TEST(FilterAfter, StrictBoundaryAndIdempotence) {
  std::vector<CommentRecord> rs(3);
  rs[0].comment_id = "old";
  rs[0].posted_at = parse_rfc3339("2010-06-01T00:00:00Z");
  rs[1].comment_id = "edge";
  rs[1].posted_at = parse_rfc3339("2011-01-01T00:00:00Z");
  rs[2].comment_id = "new";
  rs[2].posted_at = parse_rfc3339("2013-06-01T00:00:00Z");
  const auto cutoff = parse_rfc3339("2011-01-01");
  const auto once = filter_after(rs, cutoff);
  ASSERT_EQ(once.size(), 1u);
  EXPECT_EQ(once[0].comment_id, "new");
  EXPECT_EQ(filter_after(once, cutoff), once);
  EXPECT_EQ(filter_after(rs, 0).size(), 3u);
}

TEST(FilterSection, KeepsMatchingSection) {
  std::vector<CommentRecord> rs(3);
  rs[0].section = "politics";
  rs[1].section = "sport";
  EXPECT_EQ(filter_section(rs, "politics").size(), 1u);
}

TEST(CorpusStats, CountsAndEmptyCase) {
  std::vector<CommentRecord> rs(4);
  for (int i = 0; i < 4; ++i) {
    rs[static_cast<std::size_t>(i)].comment_id = "c" + std::to_string(i);
    rs[static_cast<std::size_t>(i)].thread_id = i < 2 ? "a" : "b";
    rs[static_cast<std::size_t>(i)].author_id = i % 2 ? "u1" : "u2";
    rs[static_cast<std::size_t>(i)].upvotes = i;
  }
  rs[1].parent_id = "c0";
  rs[3].parent_id = "c2";
  const auto s = corpus_stats(rs);
  EXPECT_EQ(s.n_comments, 4u);
  EXPECT_EQ(s.n_threads, 2u);
  EXPECT_EQ(s.n_users, 2u);
  EXPECT_EQ(s.n_upvotes_total, 6u);
  EXPECT_DOUBLE_EQ(s.reply_fraction, 0.5);
  EXPECT_EQ(corpus_stats({}), CorpusStats{});
}

TEST(CorpusStats, OrderInvariant) {
  testing::SyntheticCorpusOptions o;
  o.threads = 30;
  auto rs = testing::synthetic_corpus(o);
  const auto base = corpus_stats(rs);
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    rng.shuffle(rs);
    EXPECT_EQ(corpus_stats(rs), base);
  }
}

}  // namespace
}  // namespace engage
