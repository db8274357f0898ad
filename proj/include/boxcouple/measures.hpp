#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boxcouple/groups.hpp"
#include "boxcouple/metric_space.hpp"

namespace boxcouple::measures {

inline constexpr double kMassTolerance = 1e-12;
inline constexpr std::size_t kSweepLimit = 22;

/// Permutation action of a marked generating set on the points of a finite space.
class GroupAction {
 public:
  GroupAction() = default;
  /// `inverse[i]` is the generator acting as the inverse of generator i.
  GroupAction(std::size_t size, std::vector<std::string> symbols, std::vector<std::size_t> inverse,
              std::vector<std::vector<std::uint32_t>> permutations);

  /// Left translation x -> s x of a finite quotient on itself.
  static GroupAction regular(const groups::FiniteQuotient& q);

  std::size_t size() const { return size_; }
  std::size_t generator_count() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  std::size_t inverse_of(std::size_t generator) const { return inverse_[generator]; }
  const std::vector<std::uint32_t>& permutation(std::size_t generator) const { return perms_[generator]; }

  /// s_1 ... s_k . x = s_1 . (s_2 . ( ... s_k . x)).
  std::size_t apply(std::span<const std::size_t> word, std::size_t x) const;
  std::vector<std::uint32_t> permutation_of(std::span<const std::size_t> word) const;
  std::vector<std::size_t> inverse_word(std::span<const std::size_t> word) const;

  std::vector<std::size_t> parse_word(std::string_view text) const;
  std::string format_word(std::span<const std::size_t> word) const;

  /// Checks that every relator acts as the identity permutation.
  void check_relators(const std::vector<std::vector<std::size_t>>& relators) const;

  friend bool operator==(const GroupAction&, const GroupAction&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::string> symbols_;
  std::vector<std::size_t> inverse_;
  std::vector<std::vector<std::uint32_t>> perms_;
};

class FiniteMeasure {
 public:
  FiniteMeasure() = default;
  FiniteMeasure(std::shared_ptr<const FiniteMetricSpace> space, std::vector<double> weights);

  const FiniteMetricSpace& space() const { return *space_; }
  const std::shared_ptr<const FiniteMetricSpace>& space_ptr() const { return space_; }
  const std::vector<double>& weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::size_t size() const { return weights_.size(); }

  friend bool operator==(const FiniteMeasure& a, const FiniteMeasure& b) {
    return *a.space_ == *b.space_ && a.weights_ == b.weights_;
  }

 private:
  std::shared_ptr<const FiniteMetricSpace> space_;
  std::vector<double> weights_;
};

FiniteMeasure uniform(std::shared_ptr<const FiniteMetricSpace> space);
FiniteMeasure point_mass(std::shared_ptr<const FiniteMetricSpace> space, std::size_t x);

/// Mass of each codomain point is the sum over its fiber.
FiniteMeasure pushforward(const FiniteMeasure& mu, const std::vector<std::uint32_t>& f,
                          std::shared_ptr<const FiniteMetricSpace> codomain);

double total_variation(const FiniteMeasure& a, const FiniteMeasure& b);

enum class ProkhorovMethod { automatic, sweep, flow };

struct ProkhorovResult {
  double value = 0;
  /// Set for the exhaustive subset sweep; the flow mode evaluates the same
  /// deficiency through max-flow and is reported separately.
  bool exact = false;
  std::string method;
};

/// m(eta) = max over subsets A of max(l(A) - n(A^eta), n(A) - l(A^eta)), closed neighborhoods.
double deficiency(const FiniteMeasure& a, const FiniteMeasure& b, double eta,
                  ProkhorovMethod method = ProkhorovMethod::automatic);

ProkhorovResult prokhorov(const FiniteMeasure& a, const FiniteMeasure& b,
                          ProkhorovMethod method = ProkhorovMethod::automatic);

/// (g . mu)(x) = mu(g^-1 . x).
FiniteMeasure translate(std::span<const std::size_t> word, const FiniteMeasure& mu, const GroupAction& action);

struct DefectRow {
  std::string word;
  double tv = 0;
  double prokhorov = 0;
};

struct DefectReport {
  double max_tv = 0;
  double max_prokhorov = 0;
  std::string worst_word;
  bool exact = true;
  /// One row per distinct group element reached by words of length <= L,
  /// labelled by its shortlex-first word.
  std::vector<DefectRow> rows;
};

DefectReport invariance_defect(const FiniteMeasure& mu, const GroupAction& action, std::size_t max_length,
                               ProkhorovMethod method = ProkhorovMethod::automatic);

std::string to_csv(const DefectReport& report);

struct WeakStarEvidence {
  FiniteMeasure limit;
  std::vector<std::vector<double>> table;
  /// envelope[m] = max over j, k >= m of table[j][k].
  std::vector<double> envelope;
  bool cauchy = false;
  bool exact = true;
};

inline constexpr double kCauchyTolerance = 1e-5;

WeakStarEvidence weak_star_evidence(const std::vector<FiniteMeasure>& sequence,
                                    ProkhorovMethod method = ProkhorovMethod::automatic);

namespace reference {

/// Serial subset sweep of the deficiency, one neighborhood per subset.
double deficiency(const FiniteMeasure& a, const FiniteMeasure& b, double eta);

}  // namespace reference

}  // namespace boxcouple::measures
