// Copyright 2026 The Marsad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "marsad/time.hpp"

#include <cctype>
#include <cstdio>

namespace marsad {
namespace {

using namespace std::chrono;

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return pos_ == s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  bool eat(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  // Reads exactly n decimal digits.
  std::optional<int> digits(int n) {
    if (pos_ + static_cast<std::size_t>(n) > s_.size()) return std::nullopt;
    int v = 0;
    for (int i = 0; i < n; ++i) {
      char c = s_[pos_ + static_cast<std::size_t>(i)];
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      v = v * 10 + (c - '0');
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<Instant> parse_iso8601(std::string_view text) {
  Cursor c(text);
  auto y = c.digits(4);
  if (!y || !c.eat('-')) return std::nullopt;
  auto mo = c.digits(2);
  if (!mo || !c.eat('-')) return std::nullopt;
  auto d = c.digits(2);
  if (!d) return std::nullopt;

  year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  sys_days date{ymd};
  if (c.done()) return Instant{date};

  if (!c.eat('T') && !c.eat(' ')) return std::nullopt;
  auto hh = c.digits(2);
  if (!hh || !c.eat(':')) return std::nullopt;
  auto mm = c.digits(2);
  if (!mm) return std::nullopt;
  int ss = 0;
  int millis = 0;
  if (c.eat(':')) {
    auto s = c.digits(2);
    if (!s) return std::nullopt;
    ss = *s;
    if (c.eat('.') || c.eat(',')) {
      int scale = 100;
      bool any = false;
      while (std::isdigit(static_cast<unsigned char>(c.peek()))) {
        int digit = *c.digits(1);
        millis += digit * scale;
        scale /= 10;
        any = true;
      }
      if (!any) return std::nullopt;
    }
  }
  // 24:00:00 is not accepted; leap seconds are not representable.
  if (*hh > 23 || *mm > 59 || ss > 59) return std::nullopt;

  minutes offset{0};
  if (c.eat('Z') || c.eat('z')) {
  } else if (c.peek() == '+' || c.peek() == '-') {
    int sign = c.peek() == '-' ? -1 : 1;
    c.eat(c.peek());
    auto oh = c.digits(2);
    if (!oh) return std::nullopt;
    c.eat(':');
    auto om = c.digits(2);
    if (!om || *oh > 23 || *om > 59) return std::nullopt;
    offset = minutes{sign * (*oh * 60 + *om)};
  }
  if (!c.done()) return std::nullopt;

  auto local = Instant{date} + hours{*hh} + minutes{*mm} + seconds{ss} + milliseconds{millis};
  return local - offset;
}

std::string format_iso8601(Instant t) {
  auto day_point = floor<days>(t);
  year_month_day ymd{day_point};
  hh_mm_ss<milliseconds> tod{t - day_point};
  char buf[40];
  long long ms = tod.subseconds().count();
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(tod.hours().count()),
                  static_cast<long long>(tod.minutes().count()),
                  static_cast<long long>(tod.seconds().count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<long long>(tod.hours().count()),
                  static_cast<long long>(tod.minutes().count()),
                  static_cast<long long>(tod.seconds().count()), ms);
  }
  return buf;
}

Instant now_utc() { return floor<milliseconds>(system_clock::now()); }

}  // namespace marsad
