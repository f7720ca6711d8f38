#include "engage/taxonomy.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "engage/error.hpp"

namespace engage {

const TaxonomySchema& TaxonomySchema::standard() {
  static const TaxonomySchema schema({
      {"Question", std::nullopt, Trigger::kReplies},
      {"Q:Explanation", "Question", Trigger::kReplies},
      {"Q:Opinion", "Question", Trigger::kReplies},
      {"Q:Fact", "Question", Trigger::kReplies},
      {"Joke/Humor", std::nullopt, Trigger::kUpvotes},
      {"Speculation", std::nullopt, Trigger::kBoth},
      {"Future", "Speculation", Trigger::kBoth},
      {"Reasons", "Speculation", Trigger::kBoth},
      {"Correction", std::nullopt, Trigger::kReplies},
      {"Comment Consent", std::nullopt, Trigger::kUpvotes},
      {"Comment Dissent", std::nullopt, Trigger::kBoth},
      {"Fact", std::nullopt, Trigger::kUpvotes},
  });
  return schema;
}

TaxonomySchema::TaxonomySchema(std::vector<TaxonomyClass> classes) : classes_(std::move(classes)) {
  std::unordered_set<std::string> ids;
  for (const auto& c : classes_)
    if (!ids.insert(c.id).second) throw UsageError("duplicate taxonomy class id: " + c.id);
  for (const auto& c : classes_) {
    if (!c.parent) continue;
    if (!ids.contains(*c.parent))
      throw UsageError("taxonomy class '" + c.id + "' has unknown parent '" + *c.parent + "'");
    // Walk up; a cycle would revisit the start.
    std::string cur = *c.parent;
    for (std::size_t steps = 0; steps <= classes_.size(); ++steps) {
      if (cur == c.id) throw UsageError("taxonomy hierarchy has a cycle at '" + c.id + "'");
      const TaxonomyClass* p = find(cur);
      if (!p->parent) break;
      cur = *p->parent;
    }
  }
}

const TaxonomyClass* TaxonomySchema::find(std::string_view id) const {
  for (const auto& c : classes_)
    if (c.id == id) return &c;
  return nullptr;
}

std::vector<std::string> TaxonomySchema::children(std::string_view id) const {
  std::vector<std::string> out;
  for (const auto& c : classes_)
    if (c.parent && *c.parent == id) out.push_back(c.id);
  return out;
}

std::vector<TaxonomyLabel> parse_taxonomy_labels(std::string_view csv) {
  std::vector<TaxonomyLabel> out;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (n == 1 && line == "comment_id,class_id") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("taxonomy labels line " + std::to_string(n) + ": expected comment_id,class_id");
    out.push_back({line.substr(0, comma), line.substr(comma + 1), n});
  }
  return out;
}

std::vector<TaxonomyLabel> read_taxonomy_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open taxonomy labels " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_taxonomy_labels(ss.str());
}

AttachReport attach_taxonomy(std::span<LabeledExample> examples,
                             std::span<const TaxonomyLabel> labels,
                             const TaxonomySchema& schema) {
  for (const auto& l : labels)
    if (!schema.contains(l.class_id))
      throw DataError("taxonomy labels line " + std::to_string(l.line) + ": unknown class '" +
                      l.class_id + "' for comment '" + l.comment_id + "'");

  std::unordered_map<std::string_view, LabeledExample*> by_id;
  for (auto& e : examples) by_id.emplace(e.comment_id, &e);
  AttachReport report;
  for (const auto& l : labels) {
    auto it = by_id.find(l.comment_id);
    if (it == by_id.end()) {
      report.unmatched.push_back(l);
      continue;
    }
    it->second->taxonomy_class = l.class_id;
    ++report.annotated;
  }
  return report;
}

}  // namespace engage
