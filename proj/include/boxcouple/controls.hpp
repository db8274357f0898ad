#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "boxcouple/rational.hpp"

namespace boxcouple::coarse {

/// Nondecreasing control function: either a*t + b with a > 0, or a
/// piecewise-linear table that is constant before its first sample and
/// continues with a positive terminal slope after its last.
class ControlFunction {
 public:
  ControlFunction() = default;
  static ControlFunction affine(Rational a, Rational b);
  static ControlFunction table(std::vector<std::pair<Rational, Rational>> points, Rational slope);

  /// "affine:a,b" or "table:(t0,v0);(t1,v1);...,slope".
  static ControlFunction parse(std::string_view text);
  std::string to_string() const;

  Rational operator()(const Rational& t) const;

  bool is_affine() const { return affine_; }
  const Rational& slope() const { return slope_; }
  const Rational& intercept() const { return intercept_; }
  const std::vector<std::pair<Rational, Rational>>& points() const { return points_; }

  /// The same function shifted up by `delta`.
  ControlFunction plus(const Rational& delta) const;

  friend bool operator==(const ControlFunction&, const ControlFunction&) = default;

 private:
  bool affine_ = true;
  Rational slope_ = 1;
  Rational intercept_ = 0;
  std::vector<std::pair<Rational, Rational>> points_;
};

struct ControlData {
  ControlFunction rho_plus;
  ControlFunction rho_minus;
  Rational c = 0;

  /// "RHO_PLUS/RHO_MINUS/C", e.g. "affine:2,0/affine:1,0/1".
  static ControlData parse(std::string_view text);
  std::string to_string() const;

  /// Integer window [ceil rho_minus(t), floor rho_plus(t)] allowed for image
  /// distances at integer domain distance t.
  std::pair<std::int64_t, std::int64_t> window(std::int64_t t) const;

  /// Checks rho_minus <= rho_plus at t = 0..max_t and c >= 0.
  void validate(std::int64_t max_t) const;

  friend bool operator==(const ControlData&, const ControlData&) = default;
};

}  // namespace boxcouple::coarse
