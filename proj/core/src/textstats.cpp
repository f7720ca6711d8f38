#include "engage/textstats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "engage/error.hpp"

namespace engage {
namespace {

bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_ascii_punct(unsigned char c) {
  return c < 0x80 && c > 0x20 && c != 0x7f && !is_ascii_alnum(c);
}
// Word-internal: letters, digits and any byte of a multi-byte UTF-8 sequence.
bool is_word_byte(unsigned char c) { return is_ascii_alnum(c) || c >= 0x80; }

// Length in bytes of a Unicode whitespace character at s[i], or 0.
std::size_t whitespace_len(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c == ' ' || (c >= '\t' && c <= '\r')) return 1;
  if (c == 0xC2 && i + 1 < s.size()) {
    const auto d = static_cast<unsigned char>(s[i + 1]);
    if (d == 0x85 || d == 0xA0) return 2;
  }
  if (c == 0xE1 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x9A &&
      static_cast<unsigned char>(s[i + 2]) == 0x80)
    return 3;  // U+1680
  if (c == 0xE2 && i + 2 < s.size()) {
    const auto d = static_cast<unsigned char>(s[i + 1]);
    const auto e = static_cast<unsigned char>(s[i + 2]);
    if (d == 0x80 && ((e >= 0x80 && e <= 0x8A) || e == 0xA8 || e == 0xA9 || e == 0xAF)) return 3;
    if (d == 0x81 && e == 0x9F) return 3;  // U+205F
  }
  if (c == 0xE3 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
      static_cast<unsigned char>(s[i + 2]) == 0x80)
    return 3;  // U+3000
  return 0;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto c = static_cast<unsigned char>(out[i]);
    if (c >= 'A' && c <= 'Z') {
      out[i] = static_cast<char>(c + 32);
    } else if (c == 0xC3 && i + 1 < out.size()) {
      // Latin-1 capitals U+00C0..U+00DE except U+00D7 (multiplication sign).
      auto d = static_cast<unsigned char>(out[i + 1]);
      if (d >= 0x80 && d <= 0x9E && d != 0x97) out[i + 1] = static_cast<char>(d + 0x20);
      ++i;
    }
  }
  return out;
}

bool starts_with_url(std::string_view s) {
  return s.starts_with("http://") || s.starts_with("https://") || s.starts_with("www.");
}

bool is_sentence_end(char c) { return c == '.' || c == '!' || c == '?'; }

class Tokenizer {
 public:
  TokenSequence run(std::string_view text) {
    const std::string lower = lowercase(text);
    std::string_view s = lower;
    std::size_t i = 0;
    while (i < s.size()) {
      if (std::size_t w = whitespace_len(s, i)) {
        i += w;
        continue;
      }
      std::size_t j = i;
      while (j < s.size() && whitespace_len(s, j) == 0) ++j;
      chunk(s.substr(i, j - i));
      i = j;
    }
    if (words_since_boundary_ > 0) ++sentences_;
    seq_.sentence_count = std::max<std::size_t>(1, sentences_);
    return std::move(seq_);
  }

 private:
  void emit(std::string token) {
    if (is_word_token(token)) {
      ++seq_.word_count;
      ++words_since_boundary_;
      if (!is_placeholder_token(token)) {
        for (unsigned char c : token)
          if (is_ascii_alnum(c) || (c >= 0xC0)) ++seq_.char_count;  // lead bytes only
      }
    }
    seq_.tokens.push_back(std::move(token));
  }

  void chunk(std::string_view c) {
    if (c == kUrlToken || c == kUserToken) {
      emit(std::string(c));
      return;
    }
    std::size_t lead = 0;
    while (lead < c.size() && is_ascii_punct(static_cast<unsigned char>(c[lead])) && c[lead] != '@')
      ++lead;
    std::string_view core = c.substr(lead);

    if (starts_with_url(core)) {
      plain(c.substr(0, lead));
      std::size_t end = core.size();
      while (end > 0 && std::string_view(".,!?;:)]}\"'").find(core[end - 1]) != std::string_view::npos)
        --end;
      emit(std::string(kUrlToken));
      plain(core.substr(end));
    } else if (core.size() >= 2 && core[0] == '@' &&
               (is_word_byte(static_cast<unsigned char>(core[1])) || core[1] == '_')) {
      plain(c.substr(0, lead));
      std::size_t end = 1;
      while (end < core.size() &&
             (is_word_byte(static_cast<unsigned char>(core[end])) || core[end] == '_'))
        ++end;
      emit(std::string(kUserToken));
      plain(core.substr(end));
    } else {
      plain(c);
    }

    // A chunk always ends at whitespace or end of text.
    std::size_t k = c.size();
    bool terminal = false;
    while (k > 0 && is_ascii_punct(static_cast<unsigned char>(c[k - 1]))) {
      if (is_sentence_end(c[k - 1])) terminal = true;
      --k;
    }
    if (terminal && words_since_boundary_ > 0) {
      ++sentences_;
      words_since_boundary_ = 0;
    }
  }

  void plain(std::string_view c) {
    std::string word;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto ch = static_cast<unsigned char>(c[i]);
      if (is_word_byte(ch)) {
        word.push_back(static_cast<char>(ch));
        continue;
      }
      const bool prev_alnum = !word.empty() && is_word_byte(static_cast<unsigned char>(word.back()));
      const bool next_alnum = i + 1 < c.size() && is_word_byte(static_cast<unsigned char>(c[i + 1]));
      if ((ch == '\'' || ch == '-') && prev_alnum && next_alnum) {
        word.push_back(static_cast<char>(ch));
        continue;
      }
      if ((ch == '.' || ch == ',') && !word.empty() && is_ascii_digit(static_cast<unsigned char>(word.back())) &&
          i + 1 < c.size() && is_ascii_digit(static_cast<unsigned char>(c[i + 1]))) {
        word.push_back(static_cast<char>(ch));
        continue;
      }
      if (!word.empty()) emit(std::move(word));
      word.clear();
      emit(std::string(1, static_cast<char>(ch)));
    }
    if (!word.empty()) emit(std::move(word));
  }

  TokenSequence seq_;
  std::size_t sentences_ = 0;
  std::size_t words_since_boundary_ = 0;
};

}  // namespace

bool is_placeholder_token(std::string_view token) {
  return token == kUrlToken || token == kUserToken;
}

bool is_word_token(std::string_view token) {
  if (is_placeholder_token(token)) return true;
  return std::any_of(token.begin(), token.end(),
                     [](char c) { return is_word_byte(static_cast<unsigned char>(c)); });
}

TokenSequence tokenize(std::string_view text) { return Tokenizer{}.run(text); }

double ari(const TokenSequence& seq) {
  if (seq.word_count == 0) throw UsageError("ARI is undefined for text without words");
  const double words = static_cast<double>(seq.word_count);
  return 4.71 * (static_cast<double>(seq.char_count) / words) +
         0.5 * (words / static_cast<double>(seq.sentence_count)) - 21.43;
}

Lexicon::Lexicon(std::vector<std::string> words) {
  for (auto& w : words) words_.insert(lowercase(w));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(b, e - b + 1));
  }
  return Lexicon(std::move(words));
}

std::string_view to_string(Sentiment s) {
  switch (s) {
    case Sentiment::kPositive: return "positive";
    case Sentiment::kNegative: return "negative";
    default: return "neutral";
  }
}

Sentiment sentiment(const TokenSequence& seq, const Lexicon& positive, const Lexicon& negative) {
  std::size_t p = 0;
  std::size_t n = 0;
  for (const auto& t : seq.tokens) {
    if (positive.contains(t)) ++p;
    if (negative.contains(t)) ++n;
  }
  if (p > n) return Sentiment::kPositive;
  if (n > p) return Sentiment::kNegative;
  return Sentiment::kNeutral;
}

Lexicons Lexicons::load(const std::filesystem::path& dir) {
  return {Lexicon::load(dir / "function_words.txt"), Lexicon::load(dir / "pronouns.txt"),
          Lexicon::load(dir / "positive.txt"), Lexicon::load(dir / "negative.txt")};
}

CommentAnalytics comment_analytics(const TokenSequence& seq, const Lexicons& lex) {
  CommentAnalytics a;
  a.n_words = seq.word_count;
  std::size_t fw = 0;
  std::size_t pr = 0;
  for (const auto& t : seq.tokens) {
    if (lex.function_words.contains(t)) ++fw;
    if (lex.pronouns.contains(t)) ++pr;
  }
  if (!seq.tokens.empty()) {
    const double n = static_cast<double>(seq.tokens.size());
    a.function_word_rate = static_cast<double>(fw) / n;
    a.pronoun_rate = static_cast<double>(pr) / n;
  }
  if (seq.word_count > 0) a.ari = ari(seq);
  a.sentiment = sentiment(seq, lex.positive, lex.negative);
  return a;
}

AnalyticsSummary aggregate_analytics(std::span<const CommentAnalytics> items) {
  AnalyticsSummary s;
  s.n = items.size();
  if (items.empty()) return s;
  std::size_t n_ari = 0;
  for (const auto& a : items) {
    s.mean_words += static_cast<double>(a.n_words);
    s.function_word_rate += a.function_word_rate;
    s.pronoun_rate += a.pronoun_rate;
    if (a.ari) {
      s.readability += *a.ari;
      ++n_ari;
    }
    switch (a.sentiment) {
      case Sentiment::kPositive: s.positive += 1; break;
      case Sentiment::kNeutral: s.neutral += 1; break;
      case Sentiment::kNegative: s.negative += 1; break;
    }
  }
  const double n = static_cast<double>(items.size());
  s.mean_words /= n;
  s.function_word_rate /= n;
  s.pronoun_rate /= n;
  s.readability = n_ari ? s.readability / static_cast<double>(n_ari) : 0.0;
  s.positive /= n;
  s.neutral /= n;
  s.negative /= n;
  return s;
}

void write_analytics_csv(std::ostream& out, const AnalyticsTable& t) {
  out << "average_per_comment,upvotes_most,upvotes_least,replies_most,replies_least\n";
  const std::optional<AnalyticsSummary>* cols[] = {&t.upvotes_most, &t.upvotes_least,
                                                   &t.replies_most, &t.replies_least};
  struct Row {
    const char* name;
    double AnalyticsSummary::*field;
  };
  const Row rows[] = {
      {"Number of Words", &AnalyticsSummary::mean_words},
      {"Rate of Function Words", &AnalyticsSummary::function_word_rate},
      {"Rate of Personal Pronouns", &AnalyticsSummary::pronoun_rate},
      {"Readability Index", &AnalyticsSummary::readability},
      {"Positive Sentiment", &AnalyticsSummary::positive},
      {"Neutral Sentiment", &AnalyticsSummary::neutral},
      {"Negative Sentiment", &AnalyticsSummary::negative},
  };
  char buf[64];
  for (const auto& row : rows) {
    out << row.name;
    for (const auto* col : cols) {
      if (col->has_value()) {
        std::snprintf(buf, sizeof buf, ",%.2f", (**col).*row.field);
        out << buf;
      } else {
        out << ",-";
      }
    }
    out << '\n';
  }
}

std::vector<WordContrast> word_contrast(std::span<const TokenSequence> top,
                                        std::span<const TokenSequence> flop, std::size_t k) {
  auto count = [](std::span<const TokenSequence> seqs, std::map<std::string, double>& freq) {
    std::size_t total = 0;
    for (const auto& s : seqs)
      for (const auto& t : s.tokens)
        if (is_word_token(t) && !is_placeholder_token(t)) {
          freq[t] += 1.0;
          ++total;
        }
    for (auto& [w, c] : freq) c = 100.0 * c / static_cast<double>(total);
    return total;
  };
  std::map<std::string, double> ft;
  std::map<std::string, double> ff;
  if (count(top, ft) == 0 || count(flop, ff) == 0)
    throw UsageError("word contrast needs word tokens in both classes");

  std::vector<WordContrast> all;
  for (const auto& [w, f] : ft) {
    auto it = ff.find(w);
    all.push_back({w, f, it == ff.end() ? 0.0 : it->second, 0.0});
  }
  for (const auto& [w, f] : ff)
    if (!ft.contains(w)) all.push_back({w, 0.0, f, 0.0});
  for (auto& c : all) c.delta = c.freq_top - c.freq_flop;

  std::sort(all.begin(), all.end(), [](const WordContrast& a, const WordContrast& b) {
    const double sa = a.freq_top + a.freq_flop;
    const double sb = b.freq_top + b.freq_flop;
    if (sa != sb) return sa > sb;
    return a.word < b.word;
  });
  if (all.size() > k) all.resize(k);
  std::sort(all.begin(), all.end(), [](const WordContrast& a, const WordContrast& b) {
    const double da = std::abs(a.delta);
    const double db = std::abs(b.delta);
    if (da != db) return da > db;
    return a.word < b.word;
  });
  return all;
}

void write_contrast_csv(std::ostream& out, std::span<const WordContrast> rows) {
  out << "word,freq_top,freq_flop,delta\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f\n", r.freq_top, r.freq_flop, r.delta);
    out << r.word << buf;
  }
}

UserAggregateTable UserAggregateTable::build(std::span<const CommentRecord> records) {
  struct Acc {
    double words = 0, ari = 0, upvotes = 0;
    std::size_t n = 0, n_ari = 0;
  };
  std::unordered_map<std::string, Acc> acc;
  Acc total;
  for (const auto& r : records) {
    const TokenSequence seq = tokenize(r.text);
    Acc& a = acc[r.author_id];
    for (Acc* x : {&a, &total}) {
      x->words += static_cast<double>(seq.word_count);
      x->upvotes += static_cast<double>(r.upvotes);
      ++x->n;
      if (seq.word_count > 0) {
        x->ari += ari(seq);
        ++x->n_ari;
      }
    }
  }
  UserAggregateTable table;
  auto finish = [](const std::string& id, const Acc& a, double fallback_ari) {
    UserAggregates u;
    u.author_id = id;
    u.n_comments = a.n;
    if (a.n) {
      u.avg_comment_length = a.words / static_cast<double>(a.n);
      u.avg_upvotes = a.upvotes / static_cast<double>(a.n);
    }
    u.avg_readability = a.n_ari ? a.ari / static_cast<double>(a.n_ari) : fallback_ari;
    return u;
  };
  table.global_ = finish("", total, 0.0);
  for (const auto& [id, a] : acc) table.by_author_.emplace(id, finish(id, a, table.global_.avg_readability));
  return table;
}

const UserAggregates& UserAggregateTable::lookup(std::string_view author_id) const {
  auto it = by_author_.find(std::string(author_id));
  return it == by_author_.end() ? global_ : it->second;
}

}  // namespace engage
