#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "boxcouple/groups.hpp"
#include "boxcouple/metric_space.hpp"

namespace boxcouple::box {

/// Disjoint union of a chain's quotients, laid out along a ray. Distinct
/// components are joined through their identities:
/// d((m,x),(n,y)) = d_m(x,1) + |t_m - t_n| + d_n(1,y).
struct BoxSpace {
  groups::NormalChain chain;
  std::vector<std::int64_t> anchors;
  std::vector<std::int32_t> diameters;

  struct Point {
    std::size_t level = 1;  // 1-based
    std::size_t element = 0;
  };

  std::size_t total_points() const;
  std::int64_t distance(Point a, Point b) const;
  /// Dense metric over every point, ordered by level then element.
  FiniteMetricSpace to_metric_space() const;
};

BoxSpace assemble(groups::NormalChain chain);

struct GraphDiagnostics {
  std::size_t level = 0;
  std::size_t order = 0;
  std::size_t degree = 0;
  std::int32_t diameter = 0;
  std::int64_t girth = 0;
  bool girth_infinite = false;
  /// Present unless the level was degraded to bounds.
  std::optional<double> lambda1;
  double lambda1_lo = 0;
  double lambda1_hi = 0;
  std::string lambda_method;  // "dense", "lanczos", "bounds", "trivial"
  double residual = 0;
  bool cheeger_exact = false;
  std::int64_t cheeger_num = 0;
  std::int64_t cheeger_den = 1;
  double cheeger_lo = 0;
  double cheeger_hi = 0;
  bool degraded = false;
  bool multi_edges_collapsed = false;
  std::string note;
};

struct DiagnosticsOptions {
  std::size_t eigen_budget = 5000;
  std::size_t dense_limit = 2000;
  std::size_t cheeger_exact_limit = 20;
};

GraphDiagnostics diagnostics(const groups::FiniteQuotient& q, const DiagnosticsOptions& options = {});

struct ExpanderReport {
  std::string family;
  std::vector<GraphDiagnostics> levels;
  std::optional<double> min_lambda1;
  std::size_t min_level = 0;
  std::string caveat;
};

inline constexpr const char* kExpanderCaveat =
    "finite prefix only: a positive gap at finitely many levels is evidence, not a proof of expansion";

/// Per-level diagnostics (computed concurrently, reported by level). Levels
/// over budget are marked degraded instead of aborting the report.
ExpanderReport expander_report(const groups::NormalChain& chain, const DiagnosticsOptions& options = {});

std::string to_csv(const ExpanderReport& report);

}  // namespace boxcouple::box
