#include <gtest/gtest.h>

#include <sstream>

#include "engage/error.hpp"
#include "engage/rng.hpp"
#include "engage/textstats.hpp"
#include "synthetic.hpp"

namespace engage {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenize, UrlReplaced) {
  EXPECT_EQ(tokenize("Visit http://a.b NOW").tokens, (Tokens{"visit", "<url>", "now"}));
}

TEST(Tokenize, MentionReplaced) {
  const auto s = tokenize("@sam Why?");
  EXPECT_EQ(s.tokens, (Tokens{"<user>", "why", "?"}));
  EXPECT_EQ(s.sentence_count, 1u);
}

TEST(Tokenize, EmptyText) {
  const auto s = tokenize("");
  EXPECT_TRUE(s.tokens.empty());
  EXPECT_EQ(s.sentence_count, 1u);
  EXPECT_EQ(s.word_count, 0u);
}

TEST(Tokenize, GoldenMixedFixture) {
  const auto s = tokenize("Don't panic!  The well-known vote was 52.5% in 2016, see https://x.co/a @bob.");
  EXPECT_EQ(s.tokens, (Tokens{"don't", "panic", "!", "the", "well-known", "vote", "was", "52.5", "%", "in", "2016",
                              ",", "see", "<url>", "<user>", "."}));
  EXPECT_EQ(s.word_count, 12u);
  EXPECT_EQ(s.char_count, 40u);
  EXPECT_EQ(s.sentence_count, 2u);
}

TEST(Tokenize, LatinOneLowercased) {
  EXPECT_EQ(tokenize("ÉCOLE Café").tokens, (Tokens{"école", "café"}));
}

TEST(Tokenize, IdempotentOnNormalizedText) {
  auto corpus = testing::synthetic_corpus({.threads = 30});
  corpus.push_back({.text = "Well... THIS is it!! Isn't it? see www.example.com/x and @Ann's note"});
  for (const auto& r : corpus) {
    const auto once = tokenize(r.text);
    std::string joined;
    for (const auto& t : once.tokens) joined += (joined.empty() ? "" : " ") + t;
    EXPECT_EQ(tokenize(joined).tokens, once.tokens) << r.text;
  }
}

TEST(Ari, HandArithmetic) {
  EXPECT_NEAR(ari(tokenize("aaaa")), -2.09, 1e-9);
  TokenSequence s;
  s.word_count = 20;
  s.char_count = 100;
  s.sentence_count = 1;
  EXPECT_NEAR(ari(s), 12.12, 1e-9);
  EXPECT_THROW(ari(tokenize("?!")), UsageError);
}

TEST(Ari, IncreasesWithWordLength) {
  double prev = -1e9;
  for (int len = 1; len < 15; ++len) {
    const double v = ari(tokenize(std::string(static_cast<std::size_t>(len), 'x') + " " +
                                  std::string(static_cast<std::size_t>(len), 'y') + "."));
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Sentiment, LexiconCounting) {
  const Lexicon pos({"great"}), neg({"bad"});
  EXPECT_EQ(sentiment(tokenize("great great bad"), pos, neg), Sentiment::kPositive);
  EXPECT_EQ(sentiment(tokenize("great bad bad"), pos, neg), Sentiment::kNegative);
  EXPECT_EQ(sentiment(tokenize("great bad"), pos, neg), Sentiment::kNeutral);
  EXPECT_EQ(sentiment(tokenize(""), pos, neg), Sentiment::kNeutral);
}

TEST(Lexicon, MissingFileThrows) { EXPECT_THROW(Lexicon::load("/nonexistent/lexicon.txt"), DataError); }

TEST(Lexicon, BundledListsLoad) {
  const auto lex = Lexicons::load(ENGAGE_DATA_DIR "/lexicons");
  EXPECT_TRUE(lex.function_words.contains("the"));
  EXPECT_TRUE(lex.pronouns.contains("you"));
  EXPECT_FALSE(lex.pronouns.contains("#"));
  EXPECT_GT(lex.positive.size(), 10u);
  EXPECT_GT(lex.negative.size(), 10u);
}

Lexicons toy_lexicons() {
  Lexicons l;
  l.function_words = Lexicon({"the", "of", "and"});
  l.pronouns = Lexicon({"i", "you"});
  l.positive = Lexicon({"good"});
  l.negative = Lexicon({"bad"});
  return l;
}

TEST(Analytics, Rates) {
  const auto lex = toy_lexicons();
  EXPECT_NEAR(comment_analytics(tokenize("i you walk"), lex).pronoun_rate, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(comment_analytics(tokenize("the of and the"), lex).function_word_rate, 1.0);
  EXPECT_FALSE(comment_analytics(tokenize(""), lex).ari);
}

TEST(Analytics, RatesBoundedAndSentimentSharesSumToOne) {
  const auto lex = Lexicons::load(ENGAGE_DATA_DIR "/lexicons");
  std::vector<CommentAnalytics> items;
  for (const auto& r : testing::synthetic_corpus({.threads = 20})) {
    items.push_back(comment_analytics(tokenize(r.text), lex));
    EXPECT_GE(items.back().function_word_rate, 0.0);
    EXPECT_LE(items.back().function_word_rate, 1.0);
    EXPECT_GE(items.back().pronoun_rate, 0.0);
    EXPECT_LE(items.back().pronoun_rate, 1.0);
  }
  const auto s = aggregate_analytics(items);
  EXPECT_EQ(s.n, items.size());
  EXPECT_NEAR(s.positive + s.neutral + s.negative, 1.0, 1e-12);
}

TEST(Analytics, CsvMarksMissingColumns) {
  AnalyticsTable t;
  t.upvotes_most = aggregate_analytics(std::vector<CommentAnalytics>{comment_analytics(tokenize("good day"), toy_lexicons())});
  std::ostringstream out;
  write_analytics_csv(out, t);
  EXPECT_NE(out.str().find(",-"), std::string::npos);
}

std::vector<TokenSequence> seqs(std::initializer_list<const char*> texts) {
  std::vector<TokenSequence> out;
  for (const char* t : texts) out.push_back(tokenize(t));
  return out;
}

TEST(WordContrast, OnlyInTop) {
  const auto top = seqs({"alpha beta", "alpha gamma"});
  const auto flop = seqs({"beta gamma", "beta beta"});
  for (const auto& row : word_contrast(top, flop))
    if (row.word == "alpha") EXPECT_DOUBLE_EQ(row.delta, row.freq_top);
}

TEST(WordContrast, IdenticalCorporaGiveZero) {
  const auto a = seqs({"one two three", "two three"});
  for (const auto& row : word_contrast(a, a)) EXPECT_EQ(row.delta, 0.0);
}

TEST(WordContrast, AntisymmetricAndBounded) {
  Rng rng(9);
  std::vector<TokenSequence> top, flop;
  for (int i = 0; i < 200; ++i) {
    std::string t, f;
    for (int j = 0; j < 8; ++j) {
      t += "w" + std::to_string(rng.below(30)) + " ";
      f += "w" + std::to_string(rng.below(40)) + " ";
    }
    top.push_back(tokenize(t));
    flop.push_back(tokenize(f));
  }
  const auto ab = word_contrast(top, flop, 25);
  const auto ba = word_contrast(flop, top, 25);
  ASSERT_EQ(ab.size(), 25u);
  std::map<std::string, double> reverse;
  for (const auto& r : ba) reverse[r.word] = r.delta;
  for (std::size_t i = 0; i < ab.size(); ++i) {
    EXPECT_DOUBLE_EQ(ab[i].delta, -reverse.at(ab[i].word));
    EXPECT_LE(std::abs(ab[i].delta), std::max(ab[i].freq_top, ab[i].freq_flop));
    if (i) EXPECT_GE(std::abs(ab[i - 1].delta), std::abs(ab[i].delta));
  }
  EXPECT_THROW(word_contrast(top, {}), UsageError);
}

CommentRecord by(const std::string& author, const std::string& text, std::int64_t up) {
  CommentRecord r;
  r.comment_id = author + text;
  r.author_id = author;
  r.text = text;
  r.upvotes = up;
  return r;
}

TEST(UserAggregates, MeansAndFallback) {
  const std::string ten = "a b c d e f g h i j";
  const std::vector<CommentRecord> train{by("ann", ten, 2), by("ann", ten + " " + ten, 4), by("bo", "x", 0)};
  const auto t = UserAggregateTable::build(train);
  EXPECT_DOUBLE_EQ(t.lookup("ann").avg_comment_length, 15.0);
  EXPECT_DOUBLE_EQ(t.lookup("ann").avg_upvotes, 3.0);
  EXPECT_EQ(t.lookup("ann").n_comments, 2u);
  const auto& unseen = t.lookup("zed");
  EXPECT_DOUBLE_EQ(unseen.avg_comment_length, t.global().avg_comment_length);
  EXPECT_DOUBLE_EQ(unseen.avg_upvotes, 2.0);
}

TEST(UserAggregates, IndependentOfHeldOutRecords) {
  const auto corpus = testing::synthetic_corpus({.threads = 40});
  std::vector<CommentRecord> train(corpus.begin(), corpus.begin() + static_cast<long>(corpus.size() / 2));
  const auto a = UserAggregateTable::build(train);
  // Two different held-out partitions: the table only ever sees train.
  auto shuffled = corpus;
  Rng rng(3);
  rng.shuffle(shuffled);
  const auto b = UserAggregateTable::build(train);
  for (const auto& r : shuffled) {
    EXPECT_DOUBLE_EQ(a.lookup(r.author_id).avg_upvotes, b.lookup(r.author_id).avg_upvotes);
    EXPECT_DOUBLE_EQ(a.lookup(r.author_id).avg_readability, b.lookup(r.author_id).avg_readability);
  }
}

}  // namespace
}  // namespace engage
