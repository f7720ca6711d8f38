#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "engage/corpus.hpp"

namespace engage {

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kUserToken = "<user>";

struct TokenSequence {
  std::vector<std::string> tokens;
  std::size_t char_count = 0;      // letters and digits inside word tokens
  std::size_t word_count = 0;      // tokens that are words (not bare punctuation)
  std::size_t sentence_count = 1;  // always >= 1
};

// Lowercases (ASCII and Latin-1), replaces URLs with <url> and leading-@
// mentions with <user>, splits on Unicode whitespace and peels punctuation
// into separate tokens. Apostrophes and hyphens inside words and decimal
// separators inside numbers stay attached. A sentence ends at a run of
// . ! ? that is followed by whitespace or the end of the text.
TokenSequence tokenize(std::string_view text);

bool is_word_token(std::string_view token);
bool is_placeholder_token(std::string_view token);

// Automated readability index: 4.71*chars/words + 0.5*words/sentences - 21.43.
// Throws UsageError for a sequence without words.
double ari(const TokenSequence& seq);

// A set of lowercase tokens. Files hold one token per line; '#' starts a
// comment that runs to end of line.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<std::string> words);
  static Lexicon load(const std::filesystem::path& path);

  bool contains(std::string_view token) const { return words_.contains(std::string(token)); }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

enum class Sentiment { kPositive, kNeutral, kNegative };
std::string_view to_string(Sentiment s);

// Positive-token count against negative-token count; ties are neutral.
Sentiment sentiment(const TokenSequence& seq, const Lexicon& positive, const Lexicon& negative);

struct Lexicons {
  Lexicon function_words;
  Lexicon pronouns;
  Lexicon positive;
  Lexicon negative;

  // Expects function_words.txt, pronouns.txt, positive.txt, negative.txt.
  static Lexicons load(const std::filesystem::path& dir);
};

struct CommentAnalytics {
  std::size_t n_words = 0;
  double function_word_rate = 0.0;  // over all tokens
  double pronoun_rate = 0.0;        // over all tokens
  std::optional<double> ari;        // absent for comments without words
  Sentiment sentiment = Sentiment::kNeutral;
};

CommentAnalytics comment_analytics(const TokenSequence& seq, const Lexicons& lex);

// Per-class means in the layout of the engagement analytics table.
struct AnalyticsSummary {
  std::size_t n = 0;
  double mean_words = 0.0;
  double function_word_rate = 0.0;
  double pronoun_rate = 0.0;
  double readability = 0.0;  // mean over comments with a defined ARI
  double positive = 0.0;
  double neutral = 0.0;
  double negative = 0.0;
};

AnalyticsSummary aggregate_analytics(std::span<const CommentAnalytics> items);

// Columns: upvotes most/least, replies most/least. A missing column is
// rendered as "-".
struct AnalyticsTable {
  std::optional<AnalyticsSummary> upvotes_most, upvotes_least, replies_most, replies_least;
};

void write_analytics_csv(std::ostream& out, const AnalyticsTable& table);

struct WordContrast {
  std::string word;
  double freq_top = 0.0;   // percent of word tokens in the top class
  double freq_flop = 0.0;  // percent of word tokens in the flop class
  double delta = 0.0;      // freq_top - freq_flop
};

// Candidates are the k words with the highest freq_top + freq_flop (ties by
// word); output is sorted by |delta| descending, ties by word. Throws
// UsageError when either class has no word tokens.
std::vector<WordContrast> word_contrast(std::span<const TokenSequence> top,
                                        std::span<const TokenSequence> flop, std::size_t k = 100);
void write_contrast_csv(std::ostream& out, std::span<const WordContrast> rows);

struct UserAggregates {
  std::string author_id;
  double avg_comment_length = 0.0;  // words
  double avg_readability = 0.0;     // ARI
  double avg_upvotes = 0.0;
  std::size_t n_comments = 0;
};

// Per-author means computed from training records only. Authors absent from
// the table resolve to the global means.
class UserAggregateTable {
 public:
  static UserAggregateTable build(std::span<const CommentRecord> training_records);

  const UserAggregates& lookup(std::string_view author_id) const;
  const UserAggregates& global() const { return global_; }
  std::size_t size() const { return by_author_.size(); }

 private:
  std::unordered_map<std::string, UserAggregates> by_author_;
  UserAggregates global_;
};

}  // namespace engage
