#include "cds/timestamp.hpp"

#include <fmt/format.h>

#include <cctype>

#include "cds/error.hpp"

namespace cds {

namespace {

using namespace std::chrono;

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw Error(ErrorCode::kInvalidArgument, fmt::format("invalid RFC-3339 UTC timestamp: '{}'", text));
}

int read_digits(std::string_view text, std::size_t& pos, std::size_t count) {
  if (pos + count > text.size()) bad_timestamp(text);
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c))) bad_timestamp(text);
    value = value * 10 + (c - '0');
  }
  pos += count;
  return value;
}

void expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || (text[pos] != c && std::tolower(static_cast<unsigned char>(text[pos])) != std::tolower(c)))
    bad_timestamp(text);
  ++pos;
}

}  // namespace

Timestamp now_utc() { return floor<milliseconds>(system_clock::now()); }

std::string format_rfc3339(Timestamp t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss<milliseconds> tod{t - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:03d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), tod.hours().count(),
                     tod.minutes().count(), tod.seconds().count(), tod.subseconds().count());
}

Timestamp parse_rfc3339(std::string_view text) {
  std::size_t pos = 0;
  const int y = read_digits(text, pos, 4);
  expect(text, pos, '-');
  const int mo = read_digits(text, pos, 2);
  expect(text, pos, '-');
  const int d = read_digits(text, pos, 2);
  expect(text, pos, 'T');
  const int h = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int mi = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int s = read_digits(text, pos, 2);
  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0 || digits > 9) bad_timestamp(text);
    for (int i = digits; i < 3; ++i) millis *= 10;
  }
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (text.substr(pos) == "+00:00") {
    pos += 6;
  } else {
    bad_timestamp(text);
  }
  if (pos != text.size()) bad_timestamp(text);

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) bad_timestamp(text);
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + milliseconds{millis};
}

}  // namespace cds
