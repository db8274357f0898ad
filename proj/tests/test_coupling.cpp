#include "doctest.h"

#include <cmath>

#include "boxcouple/coupling.hpp"
#include "boxcouple/errors.hpp"
#include "boxcouple/ghmetric.hpp"
#include "support.hpp"

using namespace boxcouple;
using coupling::GSpace;
using coupling::PreimageStatus;

namespace {

/// C_n with t acting as x -> x + shift.
GSpace rotating_cycle(std::int64_t n, std::int64_t shift) {
  auto q = groups::cyclic_quotient(n);
  std::vector<std::uint32_t> fwd(static_cast<std::size_t>(n)), back(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    std::int32_t k = q.key(i)[0];
    fwd[i] = static_cast<std::uint32_t>(*q.index_of(groups::Key{static_cast<std::int32_t>(((k + shift) % n + n) % n)}));
    back[fwd[i]] = static_cast<std::uint32_t>(i);
  }
  return {std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_quotient(q)),
          measures::GroupAction(fwd.size(), {"t", "t^-1"}, {1, 0}, {fwd, back})};
}

coupling::Table identity(std::size_t n) {
  coupling::Table t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<std::uint32_t>(i);
  return t;
}

std::uint32_t at(std::int32_t k, std::int64_t n) {
  return static_cast<std::uint32_t>(*groups::cyclic_quotient(n).index_of(groups::Key{k}));
}

}  // namespace

TEST_CASE("equivariance defect examples") {
  auto x = rotating_cycle(8, 1);
  auto shifted = rotating_cycle(8, 2);
  auto id = identity(8);
  for (const char* w : {"t", "t^-1", "t t", "t^-1 t"}) {
    CHECK(coupling::equivariance_defect(x, x, id, x.action.parse_word(w)) == 0);
  }
  CHECK(coupling::equivariance_defect(x, shifted, id, x.action.parse_word("t")) == 1);
  CHECK(coupling::equivariance_defect(x, shifted, id, x.action.parse_word("t^-1")) == 1);
  CHECK(coupling::equivariance_defect(x, shifted, id, {}) == 0);

  // A fixed point of the codomain action.
  auto pt = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace({"*", "a", "b"}, {0, 1, 1, 1, 0, 1, 1, 1, 0}));
  GSpace y{pt, measures::GroupAction(3, {"t", "t^-1"}, {1, 0}, {{0, 2, 1}, {0, 2, 1}})};
  CHECK(coupling::equivariance_defect(x, y, coupling::Table(8, 0), x.action.parse_word("t t t")) == 0);

  auto report = coupling::equivariant_report(x, shifted, id, 2);
  CHECK(report.xi_per_word.size() == 7);
  CHECK(report.xi_per_word[0].word == "1");
  CHECK(report.xi_per_word[0].defect == 0);
  CHECK(report.max_defect == 2);
  CHECK(report.epsilon == 0);
}

TEST_CASE("extend_from_net examples") {
  auto c8 = FiniteMetricSpace::from_quotient(groups::cyclic_quotient(8));
  auto all = identity(8);
  std::vector<std::size_t> everything(8);
  for (std::size_t i = 0; i < 8; ++i) everything[i] = i;
  auto same = coupling::extend_from_net(c8, everything, all, c8, 0, 0);
  CHECK(same.table == all);
  CHECK(same.within_bound);

  std::vector<std::size_t> net{at(0, 8), at(2, 8), at(4, 8), at(6, 8)};
  std::sort(net.begin(), net.end());
  coupling::Table f_net(net.begin(), net.end());
  auto ext = coupling::extend_from_net(c8, net, f_net, c8, 1, 1);
  CHECK(ext.table[at(1, 8)] == at(0, 8));  // tie between 0 and 2 goes to the lower index
  CHECK(ext.table[at(7, 8)] == at(0, 8));  // tie between 6 and 0 as well, so 1 and 7 collide
  CHECK(ext.distortion == 2);
  CHECK(ext.within_bound);

  // Over every way of breaking the four ties the distortion ranges over {1, 2}.
  double lo = 1e9, hi = 0;
  for (int choice = 0; choice < 16; ++choice) {
    coupling::Table t(8);
    for (std::int32_t k = 0; k < 8; ++k) {
      std::int32_t image = k % 2 == 0 ? k : (choice >> (k / 2) & 1 ? (k + 1) % 8 : k - 1);
      t[at(k, 8)] = at(image, 8);
    }
    double d = gh::map_distortion(c8, c8, t);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  CHECK(lo == 1);
  CHECK(hi == 2);

  std::vector<std::size_t> sparse{at(0, 8), at(4, 8)};
  CHECK_THROWS_AS(coupling::extend_from_net(c8, sparse, coupling::Table{at(0, 8), at(4, 8)}, c8, 1, 2),
                  ValidationError);
  CHECK_THROWS_AS(coupling::extend_from_net(c8, net, f_net, c8, 1, 0.5), ValidationError);
  coupling::Table squashed(net.size(), at(0, 8));
  CHECK_THROWS_AS(coupling::extend_from_net(c8, net, squashed, c8, 1, 1), ValidationError);
}

TEST_CASE("preimage check examples") {
  auto x = rotating_cycle(8, 1);
  auto id = identity(8);
  std::vector<std::size_t> a{at(0, 8), at(1, 8), at(5, 8)};
  auto eq = coupling::preimage_hausdorff_check(x, x, id, x.action.parse_word("t"), a, 0);
  CHECK(eq.status == PreimageStatus::pass);
  CHECK(eq.measured == 0);

  auto shifted = rotating_cycle(8, 2);
  auto vac = coupling::preimage_hausdorff_check(x, shifted, id, x.action.parse_word("t"), a, 0.5);
  CHECK(vac.status == PreimageStatus::vacuous);
  CHECK(vac.defect == 1);

  // Constant map onto a point outside A: both preimages are empty.
  auto none = coupling::preimage_hausdorff_check(x, x, coupling::Table(8, at(3, 8)), x.action.parse_word("t"), a, 10);
  CHECK(none.status == PreimageStatus::inapplicable);
}

TEST_CASE("image compatibility is needed for the preimage bound") {
  // f collapses C_8 onto {0, 4}; a rotation by one moves that image off itself.
  auto x = rotating_cycle(8, 1);
  coupling::Table f(8);
  for (std::int32_t k = 0; k < 8; ++k) f[at(k, 8)] = at(k < 4 ? 0 : 4, 8);
  auto r = coupling::preimage_hausdorff_check(x, x, f, x.action.parse_word("t"), {at(0, 8), at(7, 8)}, 100);
  CHECK_FALSE(r.image_compatible);
  CHECK(r.status == PreimageStatus::vacuous);
}

TEST_CASE("generated preimage instances satisfy the hypotheses and the bound") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto inst = coupling::generate_preimage_instance(seed);
    auto r = coupling::preimage_hausdorff_check(inst.x, inst.y, inst.f, inst.word, inst.a, inst.xi);
    CHECK(r.image_compatible);
    CHECK(r.status == PreimageStatus::pass);
    CHECK(r.measured <= 2 * inst.xi + 1e-12);
  }
  auto suite = coupling::preimage_suite(1000, 1);
  CHECK(suite.violations == 0);
  CHECK(suite.skipped == 0);
  CHECK(suite.passed == 1000);
  CHECK(suite.worst_ratio <= 1);
  CHECK(suite.worst_ratio > 0);
}

TEST_CASE("net extension instances stay within three epsilon") {
  auto suite = coupling::net_extension_suite(1000, 7);
  CHECK(suite.violations == 0);
  CHECK(suite.passed == 1000);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto inst = coupling::generate_net_instance(seed);
    auto ext = coupling::extend_from_net(inst.x, inst.net, inst.f_net, inst.y, inst.net_radius, inst.epsilon);
    CHECK(ext.within_bound);
    for (std::size_t i = 0; i < inst.net.size(); ++i) CHECK(ext.table[inst.net[i]] == inst.f_net[i]);
    CHECK(gh::map_distortion(inst.x, inst.y, ext.table) <= 3 * inst.epsilon + 1e-12);
  }
}

TEST_CASE("instance generators are reproducible") {
  auto a = coupling::generate_preimage_instance(42);
  auto b = coupling::generate_preimage_instance(42);
  CHECK(a.f == b.f);
  CHECK(a.a == b.a);
  CHECK(a.word == b.word);
  CHECK(*a.x.space == *b.x.space);
  auto n1 = coupling::generate_net_instance(42);
  auto n2 = coupling::generate_net_instance(42);
  CHECK(n1.net == n2.net);
  CHECK(n1.f_net == n2.f_net);
}

TEST_CASE("invariance transport through an almost equivariant map") {
  // mu is invariant under the permutation action, so g.(f_* mu) and f_* mu are
  // coupled pointwise within the equivariance defect.
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto inst = coupling::generate_preimage_instance(seed);
    auto mu = measures::uniform(inst.x.space);
    auto pushed = measures::pushforward(mu, inst.f, inst.y.space);
    auto moved = measures::translate(inst.word, pushed, inst.y.action);
    double xi = coupling::equivariance_defect(inst.x, inst.y, inst.f, inst.word);
    auto d = measures::prokhorov(moved, pushed);
    CHECK(d.exact);
    CHECK(d.value <= std::min(xi, 1.0) + 1e-12);
  }
}
