#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "boxcouple/groups.hpp"

namespace boxcouple {

/// A finite metric space stored as a dense row-major distance matrix.
class FiniteMetricSpace {
 public:
  FiniteMetricSpace() = default;
  /// Throws ValidationError unless the matrix is a metric (tolerance 1e-12),
  /// when `validate` is set.
  FiniteMetricSpace(std::vector<std::string> labels, std::vector<double> matrix, bool validate = true);

  /// Word metric of a finite quotient; labels are the element keys.
  static FiniteMetricSpace from_quotient(const groups::FiniteQuotient& q);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& matrix() const { return matrix_; }
  double d(std::size_t i, std::size_t j) const { return matrix_[i * labels_.size() + j]; }

  double diameter() const;
  double eccentricity(std::size_t i) const;
  /// Point-set distance d(x, A) for a nonempty subset.
  double distance_to(std::size_t x, const std::vector<std::size_t>& subset) const;

  /// Checks the metric axioms; the triangle sweep runs in parallel.
  void validate() const;

  /// Same space with every distance multiplied by `factor` > 0.
  FiniteMetricSpace scaled(double factor) const;

  friend bool operator==(const FiniteMetricSpace&, const FiniteMetricSpace&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<double> matrix_;
};

std::string format_key(std::span<const std::int32_t> key);

}  // namespace boxcouple
