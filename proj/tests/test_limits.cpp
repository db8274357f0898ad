#include "doctest.h"

#include "boxcouple/errors.hpp"
#include "boxcouple/limits.hpp"
#include "support.hpp"

using namespace boxcouple;
using groups::Element;

namespace {

groups::NormalChain chain(const std::string& family, std::size_t depth) {
  return groups::build_family(groups::FamilySpec::parse(family), depth);
}

/// Level maps x -> a*x between matching levels of two cyclic chains.
std::vector<limits::LevelMap> linear_levels(const groups::NormalChain& g, const groups::NormalChain& h,
                                            std::int64_t a, std::size_t from) {
  std::vector<limits::LevelMap> out;
  for (std::size_t n = from; n <= g.depth(); ++n) {
    auto x = coarse::GroupSpace::from_quotient(g.level_ptr(n));
    auto y = coarse::GroupSpace::from_quotient(h.level_ptr(n));
    out.push_back({n, coarse::MapRecord{x, y, support::linear_map(*x, *y, a)}});
  }
  return out;
}

}  // namespace

TEST_CASE("identity tower has the identity as diagonal limit") {
  auto g = chain("cyclic:2", 6);
  auto controls = coarse::ControlData::parse("affine:1,0/affine:1,0/0");
  auto pm = limits::diagonal_limit(linear_levels(g, g, 1, 1), controls, 4);
  REQUIRE(pm.domain.size() == 9);
  for (std::size_t i = 0; i < pm.domain.size(); ++i) CHECK(pm.images[i] == pm.domain[i].element);
  CHECK(pm.provenance.size() == 5);
  // Levels below 4 cannot be lifted to radius 4 (Z/8 has injectivity radius 3).
  CHECK(pm.provenance[4] == std::vector<std::size_t>{4, 5, 6});
  auto report = limits::verify_partial(pm, controls);
  CHECK(report.passed);
  CHECK(report.density_radius == 0);
}

TEST_CASE("doubling tower has the doubling map as diagonal limit") {
  auto g = chain("cyclic:2", 6);
  auto h = chain("cyclic:2@1", 6);
  auto controls = coarse::ControlData::parse("affine:2,0/affine:1,0/1");
  for (std::int64_t r : {3, 4}) {
    auto pm = limits::diagonal_limit(linear_levels(g, h, 2, 1), controls, r);
    for (std::size_t i = 0; i < pm.domain.size(); ++i) CHECK(pm.images[i][0] == 2 * pm.domain[i].element[0]);
    auto report = limits::verify_partial(pm, controls);
    CHECK(report.passed);
    CHECK(report.density_radius == 1);
    CHECK(report.target_radius == 2 * r);
  }
}

TEST_CASE("majority vote discards a corrupted level") {
  auto g = chain("cyclic:2", 6);
  auto controls = coarse::ControlData::parse("affine:1,1/affine:1,-1/1");
  auto levels = linear_levels(g, g, 1, 3);
  // Level 5: swap the images of 1 and 2, a valid but different map at radius 2.
  auto& table = levels[2].map.table;
  const auto& space = *levels[2].map.domain;
  std::swap(table[support::residue(space, 1)], table[support::residue(space, 2)]);
  auto pm = limits::diagonal_limit(levels, controls, 3);
  for (std::size_t i = 0; i < pm.domain.size(); ++i) CHECK(pm.images[i] == pm.domain[i].element);
  CHECK(pm.provenance[1] == std::vector<std::size_t>{3, 4, 6});
  CHECK(pm.provenance[3] == std::vector<std::size_t>{4, 6});
}

TEST_CASE("ties between classes go to the lowest level") {
  auto g = chain("cyclic:2", 5);
  auto controls = coarse::ControlData::parse("affine:1,0/affine:1,0/0");
  auto levels = linear_levels(g, g, 1, 4);
  levels[0] = linear_levels(g, g, -1, 4)[0];
  auto pm = limits::diagonal_limit(levels, controls, 2);
  CHECK(pm.provenance[2] == std::vector<std::size_t>{4});
  CHECK(pm.images[1][0] == -pm.domain[1].element[0]);
}

TEST_CASE("lift rejects radii beyond the injectivity radius") {
  auto g = chain("cyclic:2", 4);
  auto controls = coarse::ControlData::parse("affine:1,0/affine:1,0/0");
  auto levels = linear_levels(g, g, 1, 2);
  CHECK_THROWS_AS(limits::lift(levels[0].map, 2, controls), ValidationError);
  CHECK_NOTHROW(limits::lift(levels[0].map, 1, controls));
  CHECK(limits::liftable_radius(levels[0].map, 10, controls) == 1);
  CHECK_THROWS_AS(limits::diagonal_limit(levels, controls, 8), InfeasibleStage);
}

TEST_CASE("lift requires a basepointed map") {
  auto g = chain("cyclic:2", 4);
  auto controls = coarse::ControlData::parse("affine:1,1/affine:1,-1/1");
  auto x = coarse::GroupSpace::from_quotient(g.level_ptr(4));
  coarse::Table t(x->size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<std::uint32_t>(x->multiply(i, 1));
  CHECK_THROWS_AS(limits::lift(coarse::MapRecord{x, x, t}, 2, controls), ValidationError);
}

TEST_CASE("verify_partial reports the first violating pair") {
  auto g = chain("cyclic:2", 6);
  auto controls = coarse::ControlData::parse("affine:1,0/affine:1,0/0");
  auto pm = limits::diagonal_limit(linear_levels(g, g, 1, 4), controls, 3);
  auto two = pm.index_of(Element{2});
  REQUIRE(two);
  pm.images[*two] = Element{3};
  auto report = limits::verify_partial(pm, controls);
  CHECK_FALSE(report.passed);
  REQUIRE(report.violation);
  CHECK(report.violation->first == 0);
  CHECK(report.violation->second == *two);
  CHECK(report.domain_distance == 2);
  CHECK(report.image_distance == 3);
}

TEST_CASE("action on partial maps") {
  auto g = chain("cyclic:2", 6);
  auto h = chain("cyclic:2@1", 6);
  auto controls = coarse::ControlData::parse("affine:2,0/affine:1,0/1");
  auto pm = limits::diagonal_limit(linear_levels(g, h, 2, 1), controls, 4);
  const auto& G = *pm.source;
  auto word = G.parse_word("t");
  auto moved = limits::act_on_partial(word, pm);
  CHECK(moved.radius == 3);
  // Homomorphisms are fixed points of the action.
  for (std::size_t i = 0; i < moved.domain.size(); ++i) CHECK(moved.images[i] == pm.images[i]);
  CHECK_THROWS_AS(limits::act_on_partial(G.parse_word("t t t t t"), pm), ValidationError);

  // A non-homomorphic partial map moves, and still fixes the basepoint.
  auto bumped = pm;
  bumped.images[*bumped.index_of(Element{2})] = Element{5};
  auto moved2 = limits::act_on_partial(word, bumped);
  CHECK(moved2.images[0] == Element{0});
  bool differs = false;
  for (std::size_t i = 0; i < moved2.domain.size(); ++i) differs = differs || moved2.images[i] != bumped.images[i];
  CHECK(differs);

  // Composition: acting by t then by t^-1 returns the restriction.
  auto back = limits::act_on_partial(G.parse_word("t^-1"), moved2);
  auto restricted = bumped.restrict(back.radius);
  CHECK(back.images == restricted.images);
}

TEST_CASE("index shift") {
  auto rho = coarse::ControlFunction::affine(Rational(2), Rational(0));
  CHECK(limits::index_shift(2, 1, rho) == 6);
  CHECK(limits::index_shift(0, 0, rho) == 0);
  auto slow = coarse::ControlFunction::affine(Rational(1, 2), Rational(0));
  CHECK(limits::index_shift(3, 2, slow) == 5);
}
