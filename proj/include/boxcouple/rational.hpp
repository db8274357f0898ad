#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace boxcouple {

/// Exact rational number with a 64-bit numerator and positive denominator.
/// Comparisons go through 128-bit cross products so they never overflow.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t value);  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den);

  /// Parses "3", "-2", "0.25", "1e-3" is rejected; decimals are read exactly.
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_integer() const { return den_ == 1; }
  /// Smallest integer >= this.
  std::int64_t ceil() const;
  std::int64_t floor() const;

  std::string to_string() const;
  /// Exact decimal form ("0.25", "-3"); throws ValidationError when the
  /// expansion does not terminate.
  std::string to_decimal() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const { return Rational(-num_, den_); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Compares a rational against a double. Integral doubles are compared
/// exactly; anything else falls back to a 1e-12 tolerance.
int compare(const Rational& r, double x);

}  // namespace boxcouple
