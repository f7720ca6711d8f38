#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace engage {

// Parses an RFC 3339 date-time ("2013-05-01T10:00:00Z",
// "2013-05-01T12:00:00.25+02:00") into integer seconds since the Unix epoch,
// UTC. Fractional seconds are truncated toward negative infinity. A bare date
// "YYYY-MM-DD" is accepted as midnight UTC. Throws DataError.
std::int64_t parse_rfc3339(std::string_view text);

// Canonical form: "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(std::int64_t seconds);

}  // namespace engage
