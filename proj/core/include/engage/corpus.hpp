#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace engage {

// One comment (or one review normalized into comment form).
struct CommentRecord {
  std::string comment_id;
  std::string thread_id;  // article id, or product id for reviews
  std::string author_id;
  std::int64_t posted_at = 0;  // seconds since epoch, UTC
  std::string text;
  std::int64_t upvotes = 0;
  std::optional<std::string> parent_id;
  // Not part of the required schema. Carried through when the input has a
  // "section" key so corpora can be restricted to one news section.
  std::optional<std::string> section;

  bool operator==(const CommentRecord&) const = default;
};

enum class CorpusFormat { kComments, kReviews };

// What to do with a line that fails to parse or validate.
enum class OnError { kAbort, kSkip };

CorpusFormat parse_corpus_format(std::string_view name);
std::string_view to_string(CorpusFormat f);

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct IngestOptions {
  CorpusFormat format = CorpusFormat::kComments;
  OnError on_error = OnError::kAbort;
};

// Parses one line of the given schema. Throws DataError on any violation.
CommentRecord parse_record(std::string_view line, CorpusFormat format);

// Canonical comments-jsonl line (no trailing newline). Reviews are written in
// comments form: product_id -> article_id, parent_id null.
std::string serialize_record(const CommentRecord& r);

// Streams records from a line-delimited file in file order. Malformed lines
// either abort (DataError naming the line) or are skipped and reported. A
// duplicate comment_id always aborts. Blank lines are ignored.
class CorpusReader {
 public:
  CorpusReader(const std::filesystem::path& path, IngestOptions options);
  CorpusReader(std::istream& in, IngestOptions options);

  std::optional<CommentRecord> next();

  const std::vector<LineError>& skipped() const { return skipped_; }
  std::size_t lines_read() const { return line_no_; }

 private:
  std::ifstream owned_;
  std::istream* in_;
  IngestOptions options_;
  std::size_t line_no_ = 0;
  std::vector<LineError> skipped_;
  std::unordered_set<std::string> seen_ids_;
};

struct IngestResult {
  std::vector<CommentRecord> records;
  std::vector<LineError> skipped;
};

IngestResult ingest(const std::filesystem::path& path, IngestOptions options = {});
IngestResult ingest(std::istream& in, IngestOptions options = {});

void write_canonical(std::ostream& out, std::span<const CommentRecord> records);
void write_canonical(const std::filesystem::path& path, std::span<const CommentRecord> records);

// Keeps records with posted_at strictly greater than cutoff, order preserved.
std::vector<CommentRecord> filter_after(std::span<const CommentRecord> records,
                                        std::int64_t cutoff);
std::vector<CommentRecord> filter_section(std::span<const CommentRecord> records,
                                          std::string_view section);

struct CorpusStats {
  std::size_t n_comments = 0;
  std::size_t n_threads = 0;
  std::size_t n_users = 0;
  std::uint64_t n_upvotes_total = 0;
  double reply_fraction = 0.0;  // records with a parent / n_comments; 0 when empty

  bool operator==(const CorpusStats&) const = default;
};

CorpusStats corpus_stats(std::span<const CommentRecord> records);

// Order-sensitive digest over the canonical serialization of every record.
std::string corpus_digest(std::span<const CommentRecord> records);

}  // namespace engage
