#include <gtest/gtest.h>

#include "engage/error.hpp"
#include "engage/rng.hpp"
#include "engage/timestamp.hpp"

namespace engage {
namespace {

TEST(Timestamp, ParsesUtcAndOffsets) {
  EXPECT_EQ(parse_rfc3339("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(parse_rfc3339("2013-05-01T10:00:00Z"), 1367402400);
  EXPECT_EQ(parse_rfc3339("2013-05-01T12:00:00+02:00"), 1367402400);
  EXPECT_EQ(parse_rfc3339("2013-05-01T05:30:00-04:30"), 1367402400);
  EXPECT_EQ(parse_rfc3339("2013-05-01t10:00:00z"), 1367402400);
}

TEST(Timestamp, FractionsTruncateAndBareDatesAreMidnight) {
  EXPECT_EQ(parse_rfc3339("2013-05-01T10:00:00.999Z"), 1367402400);
  EXPECT_EQ(parse_rfc3339("2011-01-01"), 1293840000);
  EXPECT_EQ(parse_rfc3339("2000-02-29T00:00:00Z"), 951782400);
}

TEST(Timestamp, RejectsMalformed) {
  for (const char* bad : {"", "2013-13-01T00:00:00Z", "2013-02-30T00:00:00Z", "2013-05-01 10:00",
                          "2013-05-01T25:00:00Z", "yesterday", "2013-05-01T10:00:00+2"})
    EXPECT_THROW(parse_rfc3339(bad), DataError) << bad;
}

TEST(Timestamp, FormatRoundTrips) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto t = static_cast<std::int64_t>(rng.below(4'000'000'000ull));
    EXPECT_EQ(parse_rfc3339(format_rfc3339(t)), t);
  }
  EXPECT_EQ(format_rfc3339(1367402400), "2013-05-01T10:00:00Z");
}

}  // namespace
}  // namespace engage
