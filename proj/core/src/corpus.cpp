#include "engage/corpus.hpp"

#include <istream>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "engage/error.hpp"
#include "engage/hash.hpp"
#include "engage/timestamp.hpp"

namespace engage {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_string()) throw DataError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::int64_t require_count(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number_integer())
    throw DataError(std::string("field '") + key + "' must be an integer");
  const auto n = v.get<std::int64_t>();
  if (n < 0) throw DataError(std::string("field '") + key + "' must be non-negative");
  return n;
}

std::int64_t require_time(const json& obj) {
  const json& v = require(obj, "timestamp");
  if (v.is_string()) return parse_rfc3339(v.get<std::string>());
  if (v.is_number_integer()) return v.get<std::int64_t>();
  throw DataError("field 'timestamp' must be an RFC 3339 string");
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string or null");
  return it->get<std::string>();
}

}  // namespace

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "comments" || name == "comments-jsonl") return CorpusFormat::kComments;
  if (name == "reviews" || name == "reviews-jsonl") return CorpusFormat::kReviews;
  throw UsageError("unknown corpus format: " + std::string(name));
}

std::string_view to_string(CorpusFormat f) {
  return f == CorpusFormat::kComments ? "comments" : "reviews";
}

CommentRecord parse_record(std::string_view line, CorpusFormat format) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("record is not a JSON object");

  CommentRecord r;
  r.comment_id = require_string(obj, "id");
  if (r.comment_id.empty()) throw DataError("empty 'id'");
  r.author_id = require_string(obj, "author_id");
  r.posted_at = require_time(obj);
  r.text = require_string(obj, "text");
  r.section = optional_string(obj, "section");
  if (format == CorpusFormat::kComments) {
    r.thread_id = require_string(obj, "article_id");
    r.upvotes = require_count(obj, "upvotes");
    r.parent_id = optional_string(obj, "parent_id");
    if (r.parent_id && *r.parent_id == r.comment_id)
      throw DataError("comment '" + r.comment_id + "' is its own parent");
  } else {
    // Reviews never reference each other.
    r.thread_id = require_string(obj, "product_id");
    r.upvotes = require_count(obj, "helpful_votes");
  }
  if (r.thread_id.empty()) throw DataError("empty thread id");
  return r;
}

std::string serialize_record(const CommentRecord& r) {
  json obj = json::object();
  obj["id"] = r.comment_id;
  obj["article_id"] = r.thread_id;
  obj["author_id"] = r.author_id;
  obj["timestamp"] = format_rfc3339(r.posted_at);
  obj["text"] = r.text;
  obj["upvotes"] = r.upvotes;
  obj["parent_id"] = r.parent_id ? json(*r.parent_id) : json(nullptr);
  if (r.section) obj["section"] = *r.section;
  return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

CorpusReader::CorpusReader(const std::filesystem::path& path, IngestOptions options)
    : owned_(path, std::ios::binary), in_(&owned_), options_(options) {
  if (!owned_) throw DataError("cannot open corpus file: " + path.string());
}

CorpusReader::CorpusReader(std::istream& in, IngestOptions options)
    : in_(&in), options_(options) {}

std::optional<CommentRecord> CorpusReader::next() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    CommentRecord rec;
    try {
      rec = parse_record(line, options_.format);
    } catch (const DataError& e) {
      if (options_.on_error == OnError::kAbort)
        throw DataError("line " + std::to_string(line_no_) + ": " + e.what());
      skipped_.push_back({line_no_, e.what()});
      continue;
    }
    if (!seen_ids_.insert(rec.comment_id).second)
      throw DataError("line " + std::to_string(line_no_) + ": duplicate comment id '" +
                      rec.comment_id + "'");
    return rec;
  }
  return std::nullopt;
}

namespace {
IngestResult drain(CorpusReader& reader) {
  IngestResult out;
  while (auto r = reader.next()) out.records.push_back(std::move(*r));
  out.skipped = reader.skipped();
  return out;
}
}  // namespace

IngestResult ingest(const std::filesystem::path& path, IngestOptions options) {
  CorpusReader reader(path, options);
  return drain(reader);
}

IngestResult ingest(std::istream& in, IngestOptions options) {
  CorpusReader reader(in, options);
  return drain(reader);
}

void write_canonical(std::ostream& out, std::span<const CommentRecord> records) {
  for (const auto& r : records) out << serialize_record(r) << '\n';
}

void write_canonical(const std::filesystem::path& path, std::span<const CommentRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_canonical(out, records);
}

std::vector<CommentRecord> filter_after(std::span<const CommentRecord> records,
                                        std::int64_t cutoff) {
  std::vector<CommentRecord> out;
  for (const auto& r : records)
    if (r.posted_at > cutoff) out.push_back(r);
  return out;
}

std::vector<CommentRecord> filter_section(std::span<const CommentRecord> records,
                                          std::string_view section) {
  std::vector<CommentRecord> out;
  for (const auto& r : records)
    if (r.section && *r.section == section) out.push_back(r);
  return out;
}

CorpusStats corpus_stats(std::span<const CommentRecord> records) {
  CorpusStats s;
  std::unordered_set<std::string_view> threads;
  std::unordered_set<std::string_view> users;
  std::size_t replies = 0;
  for (const auto& r : records) {
    ++s.n_comments;
    threads.insert(r.thread_id);
    users.insert(r.author_id);
    s.n_upvotes_total += static_cast<std::uint64_t>(r.upvotes);
    if (r.parent_id) ++replies;
  }
  s.n_threads = threads.size();
  s.n_users = users.size();
  s.reply_fraction =
      s.n_comments == 0 ? 0.0 : static_cast<double>(replies) / static_cast<double>(s.n_comments);
  return s;
}

std::string corpus_digest(std::span<const CommentRecord> records) {
  Digest d;
  for (const auto& r : records) {
    d.update(serialize_record(r));
    d.update("\n");
  }
  return d.hex();
}

}  // namespace engage
