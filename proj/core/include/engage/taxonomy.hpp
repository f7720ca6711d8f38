#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "engage/dataset.hpp"

namespace engage {

// Which engagement signal a comment class tends to attract.
enum class Trigger { kUpvotes, kReplies, kBoth };

struct TaxonomyClass {
  std::string id;
  std::optional<std::string> parent;
  Trigger trigger = Trigger::kBoth;
};

// Fixed label schema for engaging comments. Class ids are the strings that
// appear in taxonomy label files, e.g. "Joke/Humor" or "Q:Fact".
class TaxonomySchema {
 public:
  static const TaxonomySchema& standard();

  explicit TaxonomySchema(std::vector<TaxonomyClass> classes);

  const std::vector<TaxonomyClass>& classes() const { return classes_; }
  const TaxonomyClass* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::vector<std::string> children(std::string_view id) const;

 private:
  std::vector<TaxonomyClass> classes_;
};

struct TaxonomyLabel {
  std::string comment_id;
  std::string class_id;
  std::size_t line = 0;
};

// CSV "comment_id,class_id"; an optional header row with exactly those
// names is skipped.
std::vector<TaxonomyLabel> read_taxonomy_labels(const std::filesystem::path& path);
std::vector<TaxonomyLabel> parse_taxonomy_labels(std::string_view csv);

struct AttachReport {
  std::size_t annotated = 0;
  std::vector<TaxonomyLabel> unmatched;  // label rows naming no example
};

// Unknown class ids abort with DataError naming the offending row.
AttachReport attach_taxonomy(std::span<LabeledExample> examples,
                             std::span<const TaxonomyLabel> labels,
                             const TaxonomySchema& schema = TaxonomySchema::standard());

}  // namespace engage
