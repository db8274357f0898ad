#include "boxcouple/metric_space.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "boxcouple/errors.hpp"

namespace boxcouple {

namespace {
constexpr double kTolerance = 1e-12;
}

std::string format_key(std::span<const std::int32_t> key) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(key[i]);
  }
  return out;
}

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> labels, std::vector<double> matrix, bool check)
    : labels_(std::move(labels)), matrix_(std::move(matrix)) {
  if (matrix_.size() != labels_.size() * labels_.size()) {
    throw ValidationError("distance matrix is not " + std::to_string(labels_.size()) + "x" +
                          std::to_string(labels_.size()));
  }
  if (check) validate();
}

FiniteMetricSpace FiniteMetricSpace::from_quotient(const groups::FiniteQuotient& q) {
  const std::size_t n = q.order();
  std::vector<std::string> labels(n);
  std::vector<double> m(n * n);
  for (std::size_t x = 0; x < n; ++x) labels[x] = format_key(q.key(x));
#pragma omp parallel for schedule(static)
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t inv = q.inverse(x);
    for (std::size_t y = 0; y < n; ++y) m[x * n + y] = q.distance_from_identity(q.multiply(inv, y));
  }
  return FiniteMetricSpace(std::move(labels), std::move(m), false);
}

double FiniteMetricSpace::diameter() const {
  double best = 0;
  for (double v : matrix_) best = std::max(best, v);
  return best;
}

double FiniteMetricSpace::eccentricity(std::size_t i) const {
  double best = 0;
  for (std::size_t j = 0; j < size(); ++j) best = std::max(best, d(i, j));
  return best;
}

double FiniteMetricSpace::distance_to(std::size_t x, const std::vector<std::size_t>& subset) const {
  if (subset.empty()) throw ValidationError("distance to an empty subset");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a : subset) best = std::min(best, d(x, a));
  return best;
}

void FiniteMetricSpace::validate() const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) != 0) throw ValidationError("nonzero diagonal at " + labels_[i]);
    for (std::size_t j = 0; j < n; ++j) {
      double v = d(i, j);
      if (!std::isfinite(v) || v < 0) throw ValidationError("negative or non-finite distance");
      if (d(j, i) != v) throw ValidationError("asymmetric distance between " + labels_[i] + " and " + labels_[j]);
      if (i != j && v <= 0) throw ValidationError("distinct points " + labels_[i] + ", " + labels_[j] + " at distance 0");
    }
  }
  std::atomic<bool> broken{false};
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < n; ++i) {
    if (broken.load(std::memory_order_relaxed)) continue;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (d(i, k) > d(i, j) + d(j, k) + kTolerance) broken.store(true, std::memory_order_relaxed);
      }
    }
  }
  if (broken) throw ValidationError("triangle inequality fails");
}

FiniteMetricSpace FiniteMetricSpace::scaled(double factor) const {
  if (!(factor > 0)) throw ValidationError("scale factor must be positive");
  std::vector<double> m = matrix_;
  for (double& v : m) v *= factor;
  return FiniteMetricSpace(labels_, std::move(m), false);
}

}  // namespace boxcouple
