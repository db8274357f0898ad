#include "boxcouple/controls.hpp"

#include "boxcouple/errors.hpp"

namespace boxcouple::coarse {

namespace {

std::string strip(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

ControlFunction ControlFunction::affine(Rational a, Rational b) {
  if (a <= Rational(0)) throw ValidationError("affine control needs a positive slope");
  ControlFunction f;
  f.affine_ = true;
  f.slope_ = a;
  f.intercept_ = b;
  return f;
}

ControlFunction ControlFunction::table(std::vector<std::pair<Rational, Rational>> points, Rational slope) {
  if (points.empty()) throw ValidationError("control table needs at least one sample");
  if (slope <= Rational(0)) throw ValidationError("control table needs a positive terminal slope");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].first <= points[i - 1].first) throw ValidationError("control table abscissae must increase");
    if (points[i].second < points[i - 1].second) throw ValidationError("control table must be nondecreasing");
  }
  ControlFunction f;
  f.affine_ = false;
  f.slope_ = slope;
  f.points_ = std::move(points);
  return f;
}

ControlFunction ControlFunction::parse(std::string_view text) {
  std::string t = strip(text);
  if (t.rfind("affine:", 0) == 0) {
    std::string body = t.substr(7);
    auto comma = body.find(',');
    if (comma == std::string::npos) throw ValidationError("affine control must be 'affine:a,b'");
    return affine(Rational::parse(strip(body.substr(0, comma))), Rational::parse(strip(body.substr(comma + 1))));
  }
  if (t.rfind("table:", 0) == 0) {
    std::string body = t.substr(6);
    auto last_comma = body.rfind(',');
    auto last_paren = body.rfind(')');
    if (last_comma == std::string::npos || last_paren == std::string::npos || last_comma < last_paren) {
      throw ValidationError("table control must end with ',slope'");
    }
    Rational slope = Rational::parse(strip(body.substr(last_comma + 1)));
    std::vector<std::pair<Rational, Rational>> points;
    std::size_t pos = 0;
    std::string samples = body.substr(0, last_paren + 1);
    while (pos < samples.size()) {
      auto open = samples.find('(', pos);
      if (open == std::string::npos) break;
      auto close = samples.find(')', open);
      if (close == std::string::npos) throw ValidationError("unterminated control sample");
      std::string pair = samples.substr(open + 1, close - open - 1);
      auto comma = pair.find(',');
      if (comma == std::string::npos) throw ValidationError("control sample must be '(t,v)'");
      points.emplace_back(Rational::parse(strip(pair.substr(0, comma))), Rational::parse(strip(pair.substr(comma + 1))));
      pos = close + 1;
    }
    return table(std::move(points), slope);
  }
  throw ValidationError("control must start with 'affine:' or 'table:', got '" + t + "'");
}

std::string ControlFunction::to_string() const {
  if (affine_) return "affine:" + slope_.to_decimal() + "," + intercept_.to_decimal();
  std::string out = "table:";
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (i) out += ";";
    out += "(" + points_[i].first.to_decimal() + "," + points_[i].second.to_decimal() + ")";
  }
  return out + "," + slope_.to_decimal();
}

Rational ControlFunction::operator()(const Rational& t) const {
  if (affine_) return slope_ * t + intercept_;
  if (t <= points_.front().first) return points_.front().second;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (t <= points_[i].first) {
      const auto& [t0, v0] = points_[i - 1];
      const auto& [t1, v1] = points_[i];
      return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }
  }
  return points_.back().second + slope_ * (t - points_.back().first);
}

ControlFunction ControlFunction::plus(const Rational& delta) const {
  ControlFunction f = *this;
  if (affine_) {
    f.intercept_ = intercept_ + delta;
  } else {
    for (auto& p : f.points_) p.second = p.second + delta;
  }
  return f;
}

ControlData ControlData::parse(std::string_view text) {
  std::string t(text);
  auto first = t.find('/');
  auto second = first == std::string::npos ? std::string::npos : t.find('/', first + 1);
  if (second == std::string::npos || t.find('/', second + 1) != std::string::npos) {
    throw ValidationError("controls must look like 'RHO_PLUS/RHO_MINUS/C'");
  }
  ControlData data;
  data.rho_plus = ControlFunction::parse(t.substr(0, first));
  data.rho_minus = ControlFunction::parse(t.substr(first + 1, second - first - 1));
  data.c = Rational::parse(strip(t.substr(second + 1)));
  if (data.c < Rational(0)) throw ValidationError("density radius c must be nonnegative");
  return data;
}

std::string ControlData::to_string() const {
  return rho_plus.to_string() + "/" + rho_minus.to_string() + "/" + c.to_decimal();
}

std::pair<std::int64_t, std::int64_t> ControlData::window(std::int64_t t) const {
  return {rho_minus(Rational(t)).ceil(), rho_plus(Rational(t)).floor()};
}

void ControlData::validate(std::int64_t max_t) const {
  if (c < Rational(0)) throw ValidationError("density radius c must be nonnegative");
  for (std::int64_t t = 0; t <= max_t; ++t) {
    if (rho_minus(Rational(t)) > rho_plus(Rational(t))) {
      throw ValidationError("rho_minus exceeds rho_plus at t = " + std::to_string(t));
    }
  }
}

}  // namespace boxcouple::coarse
