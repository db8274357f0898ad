#include "doctest.h"

#include <cmath>

#include "boxcouple/errors.hpp"
#include "boxcouple/ghmetric.hpp"
#include "support.hpp"

using namespace boxcouple;

namespace {

FiniteMetricSpace random_space(support::Gen& gen, std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
  return FiniteMetricSpace(labels, gen.metric(n));
}

FiniteMetricSpace cycle_metric(std::size_t n, double diameter) {
  auto space = FiniteMetricSpace::from_quotient(groups::cyclic_quotient(static_cast<std::int64_t>(n)));
  return space.scaled(diameter / space.diameter());
}

FiniteMetricSpace point() { return FiniteMetricSpace({"*"}, {0.0}); }

}  // namespace

TEST_CASE("hausdorff examples") {
  auto c8 = FiniteMetricSpace::from_quotient(groups::cyclic_quotient(8));
  auto idx = [&](int k) { return *groups::cyclic_quotient(8).index_of(groups::Key{k}); };
  CHECK(gh::hausdorff(c8, {idx(0), idx(2)}, {idx(0), idx(2)}) == 0);
  CHECK(gh::hausdorff(c8, {idx(0)}, {idx(3)}) == 3);
  CHECK(gh::hausdorff(c8, {idx(0), idx(4)}, {idx(1), idx(5)}) == 1);
  CHECK_THROWS_AS(gh::hausdorff(c8, {}, {idx(1)}), ValidationError);
}

TEST_CASE("epsilon-isometry certification") {
  auto c4 = support::cyclic_space(4);
  auto c8 = support::cyclic_space(8);
  coarse::MapRecord id{c4, c4, support::linear_map(*c4, *c4, 1)};
  CHECK(gh::certify_eps_isometry(id, 0).passed);
  coarse::MapRecord dbl{c4, c8, support::linear_map(*c4, *c8, 2)};
  auto pass = gh::certify_eps_isometry(dbl, 2);
  CHECK(pass.passed);
  CHECK(pass.distortion == 2);
  CHECK(pass.density == 1);
  auto fail = gh::certify_eps_isometry(dbl, 1);
  CHECK_FALSE(fail.passed);
  REQUIRE(fail.witness);
  auto [a, b] = *fail.witness;
  CHECK(std::abs(c8->d(dbl.table[a], dbl.table[b]) - c4->d(a, b)) == 2);
  CHECK_FALSE(fail.uncovered);
}

TEST_CASE("gh bounds examples") {
  support::Gen gen(11);
  auto x = random_space(gen, 7);
  auto same = gh::gh_bounds(x, x);
  CHECK(same.exact);
  CHECK(same.lower == 0);
  CHECK(same.upper == 0);

  auto r = gh::gh_bounds(point(), x);
  CHECK(r.exact);
  CHECK(r.upper == doctest::Approx(x.diameter() / 2).epsilon(1e-12));

  auto c4 = cycle_metric(4, 2);
  auto c4x2 = c4.scaled(2);
  auto scaled = gh::gh_bounds(c4, c4x2);
  CHECK(scaled.upper <= 1 + 1e-12);
  CHECK(scaled.exact);
}

TEST_CASE("self distance is exactly zero up to twelve points") {
  support::Gen gen(5);
  for (std::size_t n = 1; n <= 12; ++n) {
    auto x = random_space(gen, n);
    auto r = gh::gh_bounds(x, x);
    CHECK(r.exact);
    CHECK(r.lower == 0);
    CHECK(r.upper == 0);
  }
}

TEST_CASE("point versus X is half the diameter on seeded spaces") {
  support::Gen gen(21);
  for (int k = 0; k < 20; ++k) {
    auto x = random_space(gen, 2 + gen.below(9));
    auto r = gh::gh_bounds(point(), x);
    CHECK(r.exact);
    CHECK(std::abs(r.upper - x.diameter() / 2) <= 1e-12);
    CHECK(std::abs(r.lower - x.diameter() / 2) <= 1e-12);
  }
}

TEST_CASE("exact bounds agree with the full relation enumeration") {
  support::Gen gen(8);
  std::vector<FiniteMetricSpace> spaces;
  for (std::size_t n : {1, 2, 3, 3, 4, 4, 5, 5}) spaces.push_back(random_space(gen, n));
  int compared = 0;
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    for (std::size_t j = 0; j < spaces.size(); ++j) {
      if (spaces[i].size() * spaces[j].size() > 25) continue;
      auto r = gh::gh_bounds(spaces[i], spaces[j]);
      double oracle = gh::reference::min_relation_distortion(spaces[i], spaces[j]) / 2;
      CHECK(r.exact);
      CHECK(std::abs(r.upper - oracle) <= 1e-12);
      CHECK(r.lower <= r.upper);
      REQUIRE(r.witness);
      CHECK(gh::relation_distortion(spaces[i], spaces[j], gh::relation_of(*r.witness)) / 2 ==
            doctest::Approx(r.upper).epsilon(1e-12));
      ++compared;
    }
  }
  CHECK(compared == 64);
}

TEST_CASE("lower bound is sound against the oracle") {
  support::Gen gen(99);
  for (int k = 0; k < 60; ++k) {
    std::size_t a = 1 + gen.below(4);
    std::size_t b = 1 + gen.below(4);
    auto x = random_space(gen, a);
    auto y = random_space(gen, b);
    double oracle = gh::reference::min_relation_distortion(x, y) / 2;
    CHECK(gh::gh_lower_bound(x, y) <= oracle + 1e-12);
  }
}

TEST_CASE("gh bounds are symmetric") {
  support::Gen gen(3);
  for (int k = 0; k < 30; ++k) {
    auto x = random_space(gen, 1 + gen.below(8));
    auto y = random_space(gen, 1 + gen.below(8));
    auto xy = gh::gh_bounds(x, y);
    auto yx = gh::gh_bounds(y, x);
    CHECK(xy.lower == yx.lower);
    CHECK(xy.upper == yx.upper);
    CHECK(xy.exact == yx.exact);
    REQUIRE(xy.witness);
    CHECK(gh::relation_distortion(x, y, gh::relation_of(*xy.witness)) / 2 ==
          doctest::Approx(xy.upper).epsilon(1e-12));
  }
}

TEST_CASE("upper bounds satisfy the triangle inequality through composed correspondences") {
  support::Gen gen(17);
  for (int k = 0; k < 40; ++k) {
    auto x = random_space(gen, 1 + gen.below(7));
    auto y = random_space(gen, 1 + gen.below(7));
    auto z = random_space(gen, 1 + gen.below(7));
    auto xy = gh::gh_bounds(x, y);
    auto yz = gh::gh_bounds(y, z);
    auto xz = gh::gh_bounds(x, z);
    CHECK(xz.upper <= xy.upper + yz.upper + 1e-9);
    auto composed = gh::compose(gh::relation_of(*xy.witness), gh::relation_of(*yz.witness));
    CHECK(gh::relation_distortion(x, z, composed) / 2 <= xy.upper + yz.upper + 1e-9);
  }
}

TEST_CASE("budget exhaustion keeps valid bounds") {
  support::Gen gen(4);
  auto x = random_space(gen, 12);
  auto y = random_space(gen, 11);
  auto r = gh::gh_bounds(x, y, 50);
  CHECK(r.lower <= r.upper);
  REQUIRE(r.witness);
  CHECK(gh::relation_distortion(x, y, gh::relation_of(*r.witness)) / 2 == doctest::Approx(r.upper));
}

TEST_CASE("convergence evidence") {
  support::Gen gen(6);
  auto target = random_space(gen, 6);
  auto constant = gh::convergence_evidence({target, target, target}, target);
  for (const auto& item : constant.items) {
    CHECK(item.epsilon == 0);
    CHECK(item.exact);
  }
  CHECK(constant.nonincreasing);

  auto circle = cycle_metric(64, 1);
  std::vector<FiniteMetricSpace> seq;
  for (int k = 2; k <= 5; ++k) seq.push_back(cycle_metric(std::size_t{1} << k, 1));
  auto ev = gh::convergence_evidence(seq, circle);
  CHECK(ev.nonincreasing);
  for (std::size_t k = 1; k < ev.items.size(); ++k) CHECK(ev.items[k].epsilon < ev.items[k - 1].epsilon);
  // Pinned: the cycles embed isometrically, so epsilon is the covering radius 1/2^k.
  const double pinned[] = {0.25, 0.125, 0.0625, 0.03125};
  for (std::size_t k = 0; k < ev.items.size(); ++k) {
    CHECK(ev.items[k].exact);
    CHECK(ev.items[k].distortion == 0);
    CHECK(std::abs(ev.items[k].epsilon - pinned[k]) <= 1e-9);
  }
}
