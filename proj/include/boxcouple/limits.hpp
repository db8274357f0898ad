#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "boxcouple/coarse.hpp"
#include "boxcouple/groups.hpp"

namespace boxcouple::limits {

/// Basepoint-preserving map on the ball B_R(1_G) of the infinite group.
struct PartialMap {
  std::shared_ptr<const groups::MarkedGroup> source;
  std::shared_ptr<const groups::MarkedGroup> target;
  std::int64_t radius = 0;
  /// B_R(1_G) in canonical order (distance, carrier form).
  std::vector<groups::BallEntry> domain;
  std::vector<groups::Element> images;
  /// provenance[r] lists the chain levels surviving at radius r (r = 0..R).
  std::vector<std::vector<std::size_t>> provenance;

  std::optional<std::size_t> index_of(const groups::Element& x) const;
  /// Restriction to B_r(1_G), r <= radius.
  PartialMap restrict(std::int64_t r) const;
};

/// One level's quotient map together with its chain level index.
struct LevelMap {
  std::size_t level = 0;
  coarse::MapRecord map;
};

struct Lift {
  std::vector<groups::BallEntry> ball;
  std::vector<groups::Element> images;
};

/// Lifts a basepointed quotient map to B_r(1_G) through the commuting square.
/// Requires injectivity radius >= r on the source side and >= ceil(rho_plus(r))
/// on the target side.
Lift lift(const coarse::MapRecord& phi, std::int64_t r, const coarse::ControlData& controls,
          std::size_t budget = groups::kDefaultElementBudget);

/// Largest r <= r_max at which `phi` can be lifted.
std::int64_t liftable_radius(const coarse::MapRecord& phi, std::int64_t r_max, const coarse::ControlData& controls,
                             std::size_t budget = groups::kDefaultElementBudget);

/// Diagonal extraction: at each radius keep the largest class of surviving
/// levels whose lifts agree (ties go to the class with the lowest level).
PartialMap diagonal_limit(const std::vector<LevelMap>& maps, const coarse::ControlData& controls, std::int64_t radius,
                          std::size_t budget = groups::kDefaultElementBudget);

struct PartialReport {
  bool passed = false;
  std::optional<std::pair<std::size_t, std::size_t>> violation;
  std::int64_t domain_distance = 0;
  std::int64_t image_distance = 0;
  /// max over B^H_{ceil rho_plus(R)}(1) of the distance to the image (reported, not asserted).
  std::int64_t density_radius = 0;
  std::int64_t target_radius = 0;
};

PartialReport verify_partial(const PartialMap& pm, const coarse::ControlData& controls,
                             std::size_t budget = groups::kDefaultElementBudget);

/// [g.phi](x) = phi(g^-1)^-1 phi(g^-1 x) on B_{R-|g|}(1_G).
PartialMap act_on_partial(std::span<const std::size_t> word, const PartialMap& pm);

/// m_r = max{r + |g^-1|, ceil(rho_plus(r + |g^-1|))}.
std::int64_t index_shift(std::int64_t r, std::int64_t inverse_length, const coarse::ControlFunction& rho_plus);

}  // namespace boxcouple::limits
