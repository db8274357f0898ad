#include "boxcouple/rational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "boxcouple/errors.hpp"

namespace boxcouple {

namespace {

using i128 = __int128;

Rational from_wide(i128 num, i128 den) {
  if (den == 0) throw ValidationError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 a = num < 0 ? -num : num;
  i128 b = den;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  constexpr i128 kMax = INT64_MAX;
  if (num > kMax || num < -kMax || den > kMax) throw ValidationError("rational overflow");
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

}  // namespace

Rational::Rational(std::int64_t value) : num_(value), den_(1) {}

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw ValidationError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num, den);
  if (g == 0) g = 1;
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::parse(std::string_view text) {
  if (text.empty()) throw ValidationError("empty number");
  bool negative = false;
  std::size_t pos = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  i128 num = 0;
  i128 den = 1;
  bool seen_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    char ch = text[pos];
    if (ch == '.') {
      if (seen_point) throw ValidationError("malformed number '" + std::string(text) + "'");
      seen_point = true;
      continue;
    }
    if (ch < '0' || ch > '9') throw ValidationError("malformed number '" + std::string(text) + "'");
    seen_digit = true;
    num = num * 10 + (ch - '0');
    if (seen_point) den *= 10;
    if (num > (i128{1} << 100) || den > (i128{1} << 100)) {
      throw ValidationError("number too long '" + std::string(text) + "'");
    }
  }
  if (!seen_digit) throw ValidationError("malformed number '" + std::string(text) + "'");
  return from_wide(negative ? -num : num, den);
}

std::int64_t Rational::floor() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

std::int64_t Rational::ceil() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ > 0) ++q;
  return q;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string Rational::to_decimal() const {
  std::int64_t d = den_;
  int twos = 0;
  int fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1) throw ValidationError(to_string() + " has no terminating decimal form");
  int digits = std::max(twos, fives);
  i128 scaled = i128{num_ < 0 ? -num_ : num_};
  for (int i = 0; i < digits; ++i) scaled *= 10;
  scaled /= den_;
  std::string body;
  if (scaled == 0) body = "0";
  while (scaled > 0) {
    body.insert(body.begin(), static_cast<char>('0' + static_cast<int>(scaled % 10)));
    scaled /= 10;
  }
  if (digits > 0) {
    while (static_cast<int>(body.size()) <= digits) body.insert(body.begin(), '0');
    body.insert(body.end() - digits, '.');
  }
  return (num_ < 0 ? "-" : "") + body;
}

Rational operator+(const Rational& a, const Rational& b) {
  return from_wide(i128{a.num_} * b.den_ + i128{b.num_} * a.den_, i128{a.den_} * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return from_wide(i128{a.num_} * b.den_ - i128{b.num_} * a.den_, i128{a.den_} * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return from_wide(i128{a.num_} * b.num_, i128{a.den_} * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  return from_wide(i128{a.num_} * b.den_, i128{a.den_} * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  i128 lhs = i128{a.num_} * b.den_;
  i128 rhs = i128{b.num_} * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

int compare(const Rational& r, double x) {
  if (std::isfinite(x) && x == std::floor(x) && std::fabs(x) < 9.0e15) {
    auto c = r <=> Rational(static_cast<std::int64_t>(x));
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  double v = r.to_double();
  if (std::fabs(v - x) <= 1e-12) return 0;
  return v < x ? -1 : 1;
}

}  // namespace boxcouple
