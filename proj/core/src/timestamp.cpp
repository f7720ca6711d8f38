#include "engage/timestamp.hpp"

#include <chrono>
#include <cstdio>

#include "engage/error.hpp"

namespace engage {
namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw DataError("truncated timestamp: " + std::string(s));
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') throw DataError("bad digit in timestamp: " + std::string(s));
    v = v * 10 + (c - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c)
    throw DataError("malformed timestamp: " + std::string(s));
}

}  // namespace

std::int64_t parse_rfc3339(std::string_view s) {
  using namespace std::chrono;
  const int year = digits(s, 0, 4);
  expect(s, 4, '-');
  const int month = digits(s, 5, 2);
  expect(s, 7, '-');
  const int day = digits(s, 8, 2);
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) throw DataError("invalid calendar date: " + std::string(s));
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  if (s.size() == 10) return days * 86400;

  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ')
    throw DataError("malformed timestamp: " + std::string(s));
  const int hh = digits(s, 11, 2);
  expect(s, 13, ':');
  const int mm = digits(s, 14, 2);
  expect(s, 16, ':');
  const int ss = digits(s, 17, 2);
  if (hh > 23 || mm > 59 || ss > 60) throw DataError("time out of range: " + std::string(s));

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) throw DataError("empty fraction in timestamp: " + std::string(s));
  }
  if (pos >= s.size()) throw DataError("timestamp lacks offset: " + std::string(s));

  std::int64_t offset = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '+' ? 1 : -1;
    const int oh = digits(s, pos + 1, 2);
    expect(s, pos + 3, ':');
    const int om = digits(s, pos + 4, 2);
    offset = sign * (oh * 3600 + om * 60);
    pos += 6;
  } else {
    throw DataError("bad offset in timestamp: " + std::string(s));
  }
  if (pos != s.size()) throw DataError("trailing characters in timestamp: " + std::string(s));
  return days * 86400 + hh * 3600 + mm * 60 + ss - offset;
}

std::string format_rfc3339(std::int64_t seconds) {
  using namespace std::chrono;
  std::int64_t days = seconds / 86400;
  std::int64_t rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60),
                static_cast<int>(rem % 60));
  return buf;
}

}  // namespace engage
