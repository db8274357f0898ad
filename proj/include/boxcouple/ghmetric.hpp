#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "boxcouple/coarse.hpp"
#include "boxcouple/metric_space.hpp"

namespace boxcouple::gh {

inline constexpr double kTolerance = 1e-12;
inline constexpr std::uint64_t kDefaultGhBudget = 20'000'000;

double hausdorff(const FiniteMetricSpace& ambient, const std::vector<std::size_t>& a,
                 const std::vector<std::size_t>& b);

struct IsometryReport {
  bool passed = false;
  double epsilon = 0;
  double distortion = 0;
  double density = 0;
  /// Pair realizing the distortion when it exceeds epsilon.
  std::optional<std::pair<std::size_t, std::size_t>> witness;
  /// Codomain point realizing the density when it exceeds epsilon.
  std::optional<std::size_t> uncovered;
};

/// dis f = max |d(f x, f x') - d(x, x')|, density = max_y d(y, f(X)).
double map_distortion(const FiniteMetricSpace& x, const FiniteMetricSpace& y, const std::vector<std::uint32_t>& f);
double map_density(const FiniteMetricSpace& x, const FiniteMetricSpace& y, const std::vector<std::uint32_t>& f);

IsometryReport certify_eps_isometry(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                                    const std::vector<std::uint32_t>& f, double epsilon);
IsometryReport certify_eps_isometry(const coarse::MapRecord& f, double epsilon);

/// Correspondence R = graph(forward) union graph(backward)^T.
struct Correspondence {
  std::vector<std::uint32_t> forward;   // X -> Y
  std::vector<std::uint32_t> backward;  // Y -> X
};

double relation_distortion(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                           const std::vector<std::pair<std::size_t, std::size_t>>& relation);
std::vector<std::pair<std::size_t, std::size_t>> relation_of(const Correspondence& c);

/// Relational product R;S, a correspondence X <-> Z when R and S cover their sides.
std::vector<std::pair<std::size_t, std::size_t>> compose(const std::vector<std::pair<std::size_t, std::size_t>>& r,
                                                         const std::vector<std::pair<std::size_t, std::size_t>>& s);

struct GHResult {
  double lower = 0;
  double upper = 0;
  bool exact = false;
  std::optional<Correspondence> witness;
  std::uint64_t nodes = 0;
};

/// Lower bound on d_GH from diameters, eccentricities and distance profiles.
double gh_lower_bound(const FiniteMetricSpace& x, const FiniteMetricSpace& y);

/// Certified bounds on d_GH(X, Y) = 1/2 min dis R over correspondences.
GHResult gh_bounds(const FiniteMetricSpace& x, const FiniteMetricSpace& y, std::uint64_t budget = kDefaultGhBudget);

struct EvidenceItem {
  double epsilon = 0;
  double distortion = 0;
  double density = 0;
  std::vector<std::uint32_t> map;
  bool exact = false;
};

struct ConvergenceEvidence {
  std::vector<EvidenceItem> items;
  bool nonincreasing = false;
  std::string caveat;
};

inline constexpr const char* kTruncationCaveat =
    "finite snapshots only: the limit objects are compact infinite spaces and are not computed";

/// Minimal epsilon such that some map X -> target is an epsilon-isometry.
EvidenceItem best_eps_isometry(const FiniteMetricSpace& x, const FiniteMetricSpace& target,
                               std::uint64_t budget = kDefaultGhBudget);

ConvergenceEvidence convergence_evidence(const std::vector<FiniteMetricSpace>& sequence,
                                         const FiniteMetricSpace& target, std::uint64_t budget = kDefaultGhBudget);

namespace reference {

/// Minimum distortion over every covering relation, by plain enumeration of
/// all subsets of X x Y. Limited to |X| * |Y| <= 25.
double min_relation_distortion(const FiniteMetricSpace& x, const FiniteMetricSpace& y);

}  // namespace reference

}  // namespace boxcouple::gh
