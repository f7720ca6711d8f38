#include <gtest/gtest.h>

#include "engage/error.hpp"
#include "engage/taxonomy.hpp"

namespace engage {
namespace {

TEST(Taxonomy, StandardSchemaIsATree) {
  const auto& s = TaxonomySchema::standard();
  EXPECT_EQ(s.classes().size(), 12u);
  for (const char* id : {"Question", "Q:Explanation", "Q:Opinion", "Q:Fact", "Joke/Humor", "Speculation",
                         "Future", "Reasons", "Correction", "Comment Consent", "Comment Dissent", "Fact"})
    EXPECT_TRUE(s.contains(id)) << id;
  EXPECT_EQ(s.children("Question").size(), 3u);
  EXPECT_EQ(s.children("Speculation").size(), 2u);
  EXPECT_EQ(s.find("Joke/Humor")->trigger, Trigger::kUpvotes);
  EXPECT_EQ(s.find("Q:Opinion")->trigger, Trigger::kReplies);
}

TEST(Taxonomy, RejectsMalformedSchemas) {
  EXPECT_THROW(TaxonomySchema({{"a", std::nullopt, Trigger::kBoth}, {"a", std::nullopt, Trigger::kBoth}}), UsageError);
  EXPECT_THROW(TaxonomySchema({{"a", std::string("zz"), Trigger::kBoth}}), UsageError);
  EXPECT_THROW(TaxonomySchema({{"a", std::string("b"), Trigger::kBoth}, {"b", std::string("a"), Trigger::kBoth}}),
               UsageError);
}

std::vector<LabeledExample> examples() {
  std::vector<LabeledExample> xs(2);
  xs[0].comment_id = "c1";
  xs[1].comment_id = "c2";
  return xs;
}

TEST(AttachTaxonomy, EmptyFileLeavesExamplesAlone) {
  auto xs = examples();
  const auto report = attach_taxonomy(xs, parse_taxonomy_labels(""));
  EXPECT_EQ(report.annotated, 0u);
  EXPECT_FALSE(xs[0].taxonomy_class);
}

TEST(AttachTaxonomy, AnnotatesAndReportsUnmatched) {
  auto xs = examples();
  const auto report = attach_taxonomy(xs, parse_taxonomy_labels("comment_id,class_id\nc1,Joke/Humor\nc9,Fact\n"));
  EXPECT_EQ(report.annotated, 1u);
  EXPECT_EQ(xs[0].taxonomy_class, std::optional<std::string>("Joke/Humor"));
  ASSERT_EQ(report.unmatched.size(), 1u);
  EXPECT_EQ(report.unmatched[0].comment_id, "c9");
}

TEST(AttachTaxonomy, UnknownClassAbortsNamingRow) {
  auto xs = examples();
  try {
    attach_taxonomy(xs, parse_taxonomy_labels("c1,Fact\nc2,Sarcasm\n"));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("Sarcasm"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

}  // namespace
}  // namespace engage
