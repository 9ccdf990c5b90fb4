#include "bikecast/timeutil.hpp"

#include <cstdio>

namespace bikecast {

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = unsigned(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + std::int64_t(doe) - 719468;
}

namespace {

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = unsigned(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = std::int64_t(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = yy + (m <= 2);
}

bool digits(std::string_view s, std::size_t pos, std::size_t count, long& out) {
  if (pos + count > s.size()) return false;
  long v = 0;
  for (std::size_t k = 0; k < count; ++k) {
    char c = s[pos + k];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

bool days_in_month_ok(long y, long m, long d) {
  static const int len[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12 || d < 1) return false;
  long lim = len[m - 1];
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (m == 2 && leap) lim = 29;
  return d <= lim;
}

}  // namespace

std::optional<std::int64_t> parse_iso8601(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (!s.empty() && s.front() == '"' && s.back() == '"' && s.size() >= 2) {
    s = s.substr(1, s.size() - 2);
  }

  long y, mo, d, h, mi, sec = 0;
  if (!digits(s, 0, 4, y)) return std::nullopt;
  if (s.size() < 16 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!digits(s, 5, 2, mo) || !digits(s, 8, 2, d)) return std::nullopt;
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  if (!digits(s, 11, 2, h) || s[13] != ':' || !digits(s, 14, 2, mi))
    return std::nullopt;
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    if (!digits(s, pos + 1, 2, sec)) return std::nullopt;
    pos += 3;
  }
  if (pos < s.size() && s[pos] == '.') {  // fraction: truncate
    ++pos;
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) return std::nullopt;
  }

  long off = 0;
  if (pos < s.size()) {
    char c = s[pos];
    if (c == 'Z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      long oh, om = 0;
      if (!digits(s, pos + 1, 2, oh)) return std::nullopt;
      std::size_t p2 = pos + 3;
      if (p2 < s.size() && s[p2] == ':') ++p2;
      if (p2 < s.size()) {
        if (!digits(s, p2, 2, om)) return std::nullopt;
        p2 += 2;
      }
      off = (oh * 60 + om) * 60;
      if (c == '-') off = -off;
      pos = p2;
    }
  }
  if (pos != s.size()) return std::nullopt;

  if (!days_in_month_ok(y, mo, d)) return std::nullopt;
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;  // allow leap second
  if (sec == 60) sec = 59;

  return days_from_civil(y, unsigned(mo), unsigned(d)) * 86400 + h * 3600 +
         mi * 60 + sec - off;
}

std::string format_utc(std::int64_t t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                (long long)y, m, d, (long long)(rem / 3600),
                (long long)(rem / 60 % 60), (long long)(rem % 60));
  return buf;
}

}  // namespace bikecast
