#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "boxcouple/controls.hpp"
#include "boxcouple/groups.hpp"
#include "boxcouple/metric_space.hpp"

namespace boxcouple::coarse {

/// A finite quotient, optionally multiplied by a cyclic tag group Z/M, with
/// dense distance, multiplication and inverse tables. Points are indexed
/// base-major: (x, i) has index x * M + i, so index 0 is the identity.
///
/// Tag-product metric: d((x,i),(y,j)) = d(x,y) + [i != j].
class GroupSpace {
 public:
  static std::shared_ptr<const GroupSpace> from_quotient(std::shared_ptr<const groups::FiniteQuotient> q);
  static std::shared_ptr<const GroupSpace> tag_product(std::shared_ptr<const groups::FiniteQuotient> q,
                                                       std::size_t tags);

  const groups::FiniteQuotient& base() const { return *base_; }
  const std::shared_ptr<const groups::FiniteQuotient>& base_ptr() const { return base_; }
  std::size_t tags() const { return tags_; }
  std::size_t size() const { return size_; }
  std::size_t identity() const { return 0; }

  std::int32_t d(std::size_t a, std::size_t b) const { return dist_[a * size_ + b]; }
  std::int32_t norm(std::size_t a) const { return dist_[a]; }
  std::size_t multiply(std::size_t a, std::size_t b) const { return mult_[a * size_ + b]; }
  std::size_t inverse(std::size_t a) const { return inv_[a]; }
  std::int32_t diameter() const { return diameter_; }

  std::size_t point(std::size_t base_element, std::size_t tag) const { return base_element * tags_ + tag; }
  std::size_t base_of(std::size_t a) const { return a / tags_; }
  std::size_t tag_of(std::size_t a) const { return a % tags_; }

  std::string label(std::size_t a) const;
  FiniteMetricSpace metric_space() const;

 private:
  GroupSpace() = default;

  std::shared_ptr<const groups::FiniteQuotient> base_;
  std::size_t tags_ = 1;
  std::size_t size_ = 0;
  std::int32_t diameter_ = 0;
  std::vector<std::int32_t> dist_;
  std::vector<std::uint32_t> mult_;
  std::vector<std::uint32_t> inv_;
};

using Table = std::vector<std::uint32_t>;

struct MapRecord {
  std::shared_ptr<const GroupSpace> domain;
  std::shared_ptr<const GroupSpace> codomain;
  Table table;

  /// Throws unless the table is total with in-range values.
  void check() const;
};

enum class Mode { embedding, equivalence };

struct PairWitness {
  std::size_t x1 = 0;
  std::size_t x2 = 0;
  std::int64_t domain_distance = 0;
  std::int64_t image_distance = 0;
  bool lower_bound = false;  // true: rho_minus violated, false: rho_plus violated
};

struct VerifyReport {
  Mode mode = Mode::embedding;
  bool embedding = false;
  bool equivalence = false;
  /// First violating pair in (x1, x2) lexicographic order.
  std::optional<PairWitness> violation;
  /// Smallest codomain point farther than c from the image.
  std::optional<std::size_t> uncovered;
  std::int64_t distortion = 0;
  std::int64_t density_radius = 0;

  bool passed() const { return mode == Mode::embedding ? embedding : equivalence; }
};

VerifyReport verify(const MapRecord& f, const ControlData& controls, Mode mode);
std::int64_t distortion(const MapRecord& f);
/// max over codomain points of the distance to the image.
std::int64_t density_radius(const MapRecord& f);

struct MapSpace {
  std::shared_ptr<const GroupSpace> domain;
  std::shared_ptr<const GroupSpace> codomain;
  ControlData controls;
  bool basepointed = true;
  bool injective_required = false;
  /// Members in lexicographic order of their tables.
  std::vector<Table> members;
  bool complete = true;
  std::uint64_t nodes = 0;
  std::uint64_t budget = 0;
  std::string domain_ref;
  std::string codomain_ref;

  std::optional<std::size_t> find(const Table& table) const;
  MapRecord record(std::size_t member) const { return {domain, codomain, members.at(member)}; }
};

inline constexpr std::uint64_t kDefaultNodeBudget = 100'000'000;

/// All maps passing equivalence-mode verification, in canonical order. The
/// search tree is split into subtrees that run concurrently; under a budget
/// the kept members are the canonical prefix from fully explored subtrees.
MapSpace enumerate_map_space(std::shared_ptr<const GroupSpace> domain, std::shared_ptr<const GroupSpace> codomain,
                             const ControlData& controls, bool basepointed, bool injective_required,
                             std::uint64_t budget = kDefaultNodeBudget);

struct InjectiveLift {
  MapRecord map;
  std::size_t tags = 1;
  /// Controls the lifted map satisfies when the original satisfied `controls`:
  /// rho_plus + 1 and c + 1 once tags are in play.
  ControlData adjusted;
};

InjectiveLift make_injective(const MapRecord& f, const ControlData& controls);

/// Largest r with full agreement on B_r(1); nullopt when the tables agree
/// everywhere, -1 when they differ at the basepoint.
std::optional<std::int64_t> agreement_radius(const GroupSpace& domain, const Table& a, const Table& b);

/// 2^-r for the agreement radius r; 0 for equal tables and 1 when they
/// already differ at the basepoint.
double map_distance(const GroupSpace& domain, const Table& a, const Table& b);

/// Ultrametric space on the chosen members (all when `members` is empty),
/// labelled by their tables.
FiniteMetricSpace map_space_metric(const MapSpace& space, const std::vector<std::size_t>& members = {});

struct NetCertificate {
  std::int64_t radius = 0;
  std::size_t members = 0;
  std::size_t net_size = 0;
  bool net_property = false;
  double max_distance_to_net = 0;
  std::size_t generators_domain = 0;
  std::size_t generators_codomain = 0;
  std::int64_t rho_plus_ceiling = 0;
  /// |S_G|^R * |S_H|^ceil(rho_plus(R)), saturating.
  std::uint64_t bound = 0;
  bool bound_saturated = false;
  bool cardinality_ok = false;
  /// Count of all possible restrictions: |B^H_ceil(rho_plus(R))|^(|B^G_R| - 1)
  /// for basepointed spaces (|Y|^|B^G_R| otherwise), saturating.
  std::uint64_t corrected_bound = 0;
  bool corrected_saturated = false;
  bool corrected_ok = false;
};

struct EpsNet {
  std::vector<std::size_t> net;       // member indices, canonical-least per fiber
  std::vector<std::size_t> fiber_of;  // member index -> position in `net`
  NetCertificate certificate;
};

/// Fiber net: members grouped by their restriction to B_R(1).
EpsNet eps_net(const MapSpace& space, std::int64_t radius);

struct ActResult {
  Table table;
  std::optional<std::size_t> member;
  VerifyReport report;
};

/// [g.phi](x) = phi(g^-1)^-1 phi(g^-1 x), with g given as a word in the
/// domain group's generators.
ActResult act(const MapSpace& space, std::span<const std::size_t> word, const Table& phi);
Table act_table(const GroupSpace& domain, const GroupSpace& codomain, std::size_t g, const Table& phi);

namespace reference {
VerifyReport verify(const MapRecord& f, const ControlData& controls, Mode mode);
std::vector<Table> enumerate(const GroupSpace& domain, const GroupSpace& codomain, const ControlData& controls,
                             bool basepointed, bool injective_required);
bool net_property(const MapSpace& space, const EpsNet& net);
}  // namespace reference

}  // namespace boxcouple::coarse
