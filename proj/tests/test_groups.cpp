#include "doctest.h"

#include <set>

#include "boxcouple/errors.hpp"
#include "boxcouple/groups.hpp"

using namespace boxcouple::groups;
using boxcouple::ValidationError;

namespace {

// Brute-force word length in Z/m with generators {±1}.
int cyclic_length(int k, int m) {
  k = ((k % m) + m) % m;
  return std::min(k, m - k);
}

}  // namespace

TEST_CASE("Z/8 word metric") {
  auto q = cyclic_quotient(8);
  CHECK(q.order() == 8);
  auto five = q.index_of(Key{5});
  REQUIRE(five);
  CHECK(word_metric(q, 0, *five) == 3);
  CHECK(q.diameter() == 4);
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      auto x = *q.index_of(Key{a});
      auto y = *q.index_of(Key{b});
      CHECK(word_metric(q, x, y) == cyclic_length(b - a, 8));
    }
  }
}

TEST_CASE("SL2 congruence quotients have the declared order") {
  auto chain = build_family(FamilySpec::parse("sl2:3,5"), 2);
  CHECK(chain.level(1).order() == 24);
  CHECK(chain.level(2).order() == 2880);
  CHECK(sl2_order(105) == 967680);
  CHECK(chain.connecting_maps.size() == 1);
  validate_chain(chain);
}

TEST_CASE("elements are ordered by distance then key, identity first") {
  auto chain = build_family(FamilySpec::parse("sl2:5"), 1);
  const auto& q = chain.level(1);
  CHECK(q.distance_from_identity(0) == 0);
  for (std::size_t i = 1; i < q.order(); ++i) {
    CHECK(q.distance_from_identity(i - 1) <= q.distance_from_identity(i));
    CHECK(q.multiply(i, q.inverse(i)) == 0);
  }
}

TEST_CASE("free group balls") {
  auto f2 = MarkedGroup::free_group(2);
  CHECK(ball_in_group(f2, 2).size() == 17);
  CHECK(ball_in_group(f2, 3).size() == 53);
  auto z = MarkedGroup::integers();
  CHECK(ball_in_group(z, 4).size() == 9);
  auto w = f2.parse_word("a b a^-1");
  auto g = f2.evaluate(w);
  CHECK(f2.closed_form_length(g) == 3);
  CHECK(f2.multiply(g, f2.inverse(g)) == f2.identity());
}

TEST_CASE("injectivity radius of cyclic quotients") {
  auto z = MarkedGroup::integers();
  auto q8 = cyclic_quotient(8);
  auto r8 = injectivity_radius(z, q8, 10);
  CHECK(r8.radius == 3);
  CHECK_FALSE(r8.saturated);
  CHECK(injectivity_radius(z, cyclic_quotient(2), 5).radius == 0);
  auto sat = injectivity_radius(z, q8, 2);
  CHECK(sat.radius == 2);
  CHECK(sat.saturated);
  CHECK(injectivity_radius(z, q8, 0).radius == 0);
}

TEST_CASE("cyclic tower chain and shift") {
  auto chain = build_family(FamilySpec::parse("cyclic:2@1"), 3);
  CHECK(chain.level(1).order() == 4);
  CHECK(chain.level(3).order() == 16);
  for (std::size_t x = 0; x < chain.level(2).order(); ++x) {
    auto k = chain.level(2).key(x)[0];
    CHECK(chain.level(1).key(chain.connecting_maps[0][x])[0] == k % 4);
  }
  CHECK(FamilySpec::parse("cyclic:3@2").to_string() == "cyclic:3@2");
}

TEST_CASE("free homomorphism family") {
  auto spec = FamilySpec::parse("free:2:(1,0,2)(1,2,0)/(1,0,2,3)(1,2,3,0)");
  auto chain = build_family(spec, 2);
  CHECK(chain.level(1).order() == 6);
  CHECK(chain.level(2).order() % 24 == 0);
  CHECK(spec.to_string() == "free:2:(1,0,2)(1,2,0)/(1,0,2,3)(1,2,3,0)");
  auto bad = FamilySpec::parse("free:2:(0,1,2)(1,2,0)");
  CHECK_THROWS_AS(build_family(bad, 1), ValidationError);
}

TEST_CASE("malformed families are rejected") {
  CHECK_THROWS_AS(FamilySpec::parse("torus:3"), ValidationError);
  CHECK_THROWS_AS(build_family(FamilySpec::parse("sl2:4"), 1), ValidationError);
  CHECK_THROWS_AS(build_family(FamilySpec::parse("cyclic:2"), 30, 1000), boxcouple::BudgetExceeded);
}

TEST_CASE("SL2 generator images sit at distance one") {
  auto chain = build_family(FamilySpec::parse("sl2:3"), 1);
  const auto& q = chain.level(1);
  std::set<std::size_t> gens(q.generator_images().begin(), q.generator_images().end());
  CHECK(gens.size() == 4);
  for (auto g : gens) CHECK(q.distance_from_identity(g) == 1);
  auto m = MarkedGroup::special_linear(2);
  auto e = m.evaluate(m.parse_word("e12 e21^-1 e12"));
  CHECK(m.multiply(e, m.inverse(e)) == m.identity());
}

TEST_CASE("left invariance of the word metric, exhaustively on small quotients") {
  for (const char* family : {"cyclic:3", "sl2:3", "free:2:(1,0,2)(1,2,0)"}) {
    auto chain = build_family(FamilySpec::parse(family), 1);
    const auto& q = chain.level(1);
    REQUIRE(q.order() <= 200);
    for (std::size_t x = 0; x < q.order(); ++x) {
      for (std::size_t y = 0; y < q.order(); ++y) {
        auto d = word_metric(q, x, y);
        CHECK(d == word_metric(q, y, x));
        for (std::size_t z = 0; z < q.order(); ++z) {
          if (word_metric(q, q.multiply(z, x), q.multiply(z, y)) != d) FAIL("left invariance broken");
          if (word_metric(q, x, z) > d + word_metric(q, y, z)) FAIL("triangle inequality broken");
        }
      }
    }
  }
}

TEST_CASE("connecting maps are 1-Lipschitz and injectivity radii grow") {
  for (const char* family : {"cyclic:2", "cyclic:3", "sl2:3,5", "free:2:(1,0,2)(1,2,0)/(1,2,3,0)(1,0,2,3)"}) {
    auto spec = FamilySpec::parse(family);
    std::size_t depth = spec.kind == FamilySpec::Kind::cyclic_tower ? 4 : 2;
    auto chain = build_family(spec, depth);
    std::int64_t previous = -1;
    for (std::size_t n = 1; n <= chain.depth(); ++n) {
      auto r = injectivity_radius(*chain.group, chain.level(n), 6).radius;
      CHECK(r >= previous);
      previous = r;
    }
    for (std::size_t i = 0; i + 1 < chain.depth(); ++i) {
      const auto& fine = chain.level(i + 2);
      const auto& coarse = chain.level(i + 1);
      const auto& conn = chain.connecting_maps[i];
      std::size_t limit = std::min<std::size_t>(fine.order(), 150);
      for (std::size_t x = 0; x < limit; ++x) {
        for (std::size_t y = 0; y < fine.order(); ++y) {
          if (word_metric(coarse, conn[x], conn[y]) > word_metric(fine, x, y)) FAIL("connecting map stretches");
        }
      }
    }
  }
}

TEST_CASE("projection agrees with evaluating words") {
  auto chain = build_family(FamilySpec::parse("sl2:5"), 1);
  const auto& g = *chain.group;
  const auto& q = chain.level(1);
  for (const auto& entry : ball_in_group(g, 3)) {
    auto image = q.project(entry.element);
    CHECK(q.distance_from_identity(image) <= entry.distance);
  }
  auto word = g.parse_word("e12 e21 e12^-1");
  CHECK(q.evaluate(word) == q.project(g.evaluate(word)));
  CHECK(to_dot(q).find("graph cayley") == 0);
}
