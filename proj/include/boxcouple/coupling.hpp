#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boxcouple/measures.hpp"
#include "boxcouple/metric_space.hpp"

namespace boxcouple::coupling {

using Table = std::vector<std::uint32_t>;

/// A finite metric space with a permutation action of the marked generators.
struct GSpace {
  std::shared_ptr<const FiniteMetricSpace> space;
  measures::GroupAction action;

  void check() const;
};

/// sup_x d(g . f(x), f(g . x)).
double equivariance_defect(const GSpace& x, const GSpace& y, const Table& f, std::span<const std::size_t> word);

struct WordDefect {
  std::string word;
  double defect = 0;
};

struct EquivariantMapReport {
  double epsilon = 0;  // max(distortion, density)
  double distortion = 0;
  double density = 0;
  /// One row per word of length <= L in shortlex order.
  std::vector<WordDefect> xi_per_word;
  double max_defect = 0;
};

EquivariantMapReport equivariant_report(const GSpace& x, const GSpace& y, const Table& f, std::size_t max_length);

struct Extension {
  Table table;
  /// Nearest net point used for every domain point.
  std::vector<std::size_t> anchor;
  double net_radius = 0;
  double epsilon = 0;
  double distortion = 0;
  double density = 0;
  double bound = 0;  // 3 epsilon
  bool within_bound = false;
};

/// Extends f from the net N (f_net[i] is the image of net[i]) to all of X by
/// sending each point to the image of its nearest net point (ties: lowest
/// index). Requires every point within `net_radius` of N and f an
/// epsilon-isometry on N with epsilon >= net_radius.
Extension extend_from_net(const FiniteMetricSpace& x, const std::vector<std::size_t>& net, const Table& f_net,
                          const FiniteMetricSpace& y, double net_radius, double epsilon);

enum class PreimageStatus { pass, fail, vacuous, inapplicable };
std::string to_string(PreimageStatus s);

struct PreimageReport {
  PreimageStatus status = PreimageStatus::inapplicable;
  double measured = 0;
  double bound = 0;  // 2 xi
  double xi = 0;
  double distortion = 0;
  double density = 0;
  double defect = 0;
  /// g . (A meet f(X)) = (g . A) meet f(X).
  bool image_compatible = false;
  std::string reason;
};

/// Hausdorff distance between g . f^-1(A) and f^-1(g . A) against 2 xi, after
/// validating the hypotheses (xi-isometry, defect <= xi, image compatibility).
PreimageReport preimage_hausdorff_check(const GSpace& x, const GSpace& y, const Table& f,
                                        std::span<const std::size_t> word, const std::vector<std::size_t>& a,
                                        double xi);

/// Seeded instance generators for the property suites.
struct PreimageInstance {
  GSpace x;
  GSpace y;
  Table f;
  std::vector<std::size_t> word;
  std::vector<std::size_t> a;
  double xi = 0;
};

PreimageInstance generate_preimage_instance(std::uint64_t seed);

struct NetInstance {
  FiniteMetricSpace x;
  FiniteMetricSpace y;
  std::vector<std::size_t> net;
  Table f_net;
  double net_radius = 0;
  double epsilon = 0;
};

NetInstance generate_net_instance(std::uint64_t seed);

struct SuiteSummary {
  std::size_t instances = 0;
  std::size_t passed = 0;
  std::size_t violations = 0;
  std::size_t skipped = 0;  // vacuous or inapplicable
  double worst_ratio = 0;   // measured / bound
  std::optional<std::uint64_t> first_violation_seed;
};

/// Runs `count` instances with seeds base_seed + i, in parallel.
SuiteSummary preimage_suite(std::size_t count, std::uint64_t base_seed);
SuiteSummary net_extension_suite(std::size_t count, std::uint64_t base_seed);

}  // namespace boxcouple::coupling
