#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "boxcouple/boxspace.hpp"
#include "boxcouple/errors.hpp"
#include "boxcouple/spectral.hpp"

using namespace boxcouple;

namespace {

// Conductance by plain enumeration of vector<bool> subsets.
double brute_conductance(const spectral::Graph& g) {
  const std::size_t n = g.order();
  double total = 0;
  for (const auto& row : g.adj) total += static_cast<double>(row.size());
  double best = 1e300;
  for (unsigned long long s = 1; s + 1 < (1ULL << n); ++s) {
    std::vector<bool> in(n);
    for (std::size_t v = 0; v < n; ++v) in[v] = (s >> v) & 1U;
    double vol = 0;
    double cut = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in[v]) continue;
      vol += static_cast<double>(g.adj[v].size());
      for (auto w : g.adj[v]) cut += in[w] ? 0 : 1;
    }
    if (vol > 0 && 2 * vol <= total) best = std::min(best, cut / vol);
  }
  return best;
}

}  // namespace

TEST_CASE("cycle spectral gap matches the closed form") {
  for (int n = 3; n <= 64; ++n) {
    auto q = groups::cyclic_quotient(n);
    auto d = box::diagnostics(q);
    REQUIRE(d.lambda1);
    CHECK(std::abs(*d.lambda1 - (1 - std::cos(2 * std::numbers::pi / n))) < 1e-9);
    CHECK(d.girth == n);
    CHECK_FALSE(d.girth_infinite);
  }
}

TEST_CASE("K4 as Z/4 with steps 1,2,3") {
  auto q = groups::cyclic_quotient(4, {1, 2, 3});
  auto d = box::diagnostics(q);
  CHECK(d.degree == 3);
  CHECK(std::abs(*d.lambda1 - 4.0 / 3.0) < 1e-12);
  CHECK(d.girth == 3);
  CHECK(d.cheeger_exact);
  // Best cut of K4 splits it in half: 4 crossing edges over volume 6.
  CHECK(d.cheeger_num * 3 == d.cheeger_den * 2);
}

TEST_CASE("two-vertex quotient collapses the double edge and has infinite girth") {
  auto q = groups::cyclic_quotient(2);
  auto d = box::diagnostics(q);
  CHECK(d.multi_edges_collapsed);
  CHECK(d.degree == 1);
  CHECK(d.girth_infinite);
  CHECK(std::abs(*d.lambda1 - 2.0) < 1e-12);
}

TEST_CASE("exact Cheeger agrees with brute force and the serial reference") {
  std::vector<groups::FiniteQuotient> graphs;
  for (int n : {3, 5, 8, 12, 16}) graphs.push_back(groups::cyclic_quotient(n));
  graphs.push_back(groups::cyclic_quotient(10, {1, 3}));
  graphs.push_back(groups::cyclic_quotient(12, {2, 3}));
  for (const auto& q : graphs) {
    auto g = spectral::cayley_graph(q).graph;
    auto fast = spectral::exact_cheeger(g);
    auto slow = spectral::reference::exact_cheeger(g);
    CHECK(fast.boundary == slow.boundary);
    CHECK(fast.volume == slow.volume);
    CHECK(fast.witness == slow.witness);
    CHECK(std::abs(fast.value() - brute_conductance(g)) < 1e-12);
  }
}

TEST_CASE("Cheeger-Buser sandwich on exactly computed graphs") {
  std::vector<groups::FiniteQuotient> graphs;
  for (int n = 3; n <= 20; ++n) graphs.push_back(groups::cyclic_quotient(n));
  graphs.push_back(groups::cyclic_quotient(9, {1, 2}));
  graphs.push_back(groups::cyclic_quotient(20, {1, 4, 5}));
  auto chain = groups::build_family(groups::FamilySpec::parse("free:2:(1,0,2)(1,2,0)"), 1);
  graphs.push_back(chain.level(1));
  for (const auto& q : graphs) {
    auto d = box::diagnostics(q);
    REQUIRE(d.cheeger_exact);
    double h = d.cheeger_lo;
    CHECK(*d.lambda1 / 2 <= h + 1e-12);
    CHECK(h <= std::sqrt(2 * *d.lambda1) + 1e-12);
  }
}

TEST_CASE("girth through the root equals the all-roots girth on Cayley graphs") {
  for (const char* family : {"sl2:3", "sl2:5", "free:2:(1,2,3,0)(1,0,2,3)"}) {
    auto chain = groups::build_family(groups::FamilySpec::parse(family), 1);
    auto g = spectral::cayley_graph(chain.level(1)).graph;
    auto fast = spectral::girth_through_root(g);
    auto slow = spectral::reference::girth(g);
    CHECK(fast.length == slow.length);
    CHECK(spectral::diameter(g) == chain.level(1).diameter());
  }
}

TEST_CASE("Lanczos agrees with the dense solver") {
  auto chain = groups::build_family(groups::FamilySpec::parse("sl2:7"), 1);
  auto g = spectral::cayley_graph(chain.level(1)).graph;
  auto dense = spectral::normalized_laplacian_spectrum(g);
  auto lanczos = spectral::lanczos_gap(g);
  CHECK(lanczos.converged);
  CHECK(std::abs(lanczos.lambda1 - dense[1]) < 1e-9);
  auto c200 = spectral::cayley_graph(groups::cyclic_quotient(200)).graph;
  auto lc = spectral::lanczos_gap(c200);
  CHECK(std::abs(lc.lambda1 - (1 - std::cos(2 * std::numbers::pi / 200))) < 1e-9);
}

TEST_CASE("box-space anchors and cross distances") {
  auto box = box::assemble(groups::build_family(groups::FamilySpec::parse("cyclic:2"), 2));
  REQUIRE(box.anchors.size() == 2);
  CHECK(box.anchors[0] == 0);
  CHECK(box.anchors[1] == 4);
  auto three = *box.chain.level(2).index_of(groups::Key{3});
  CHECK(box.distance({1, 1}, {2, three}) == 1 + 4 + 1);
  auto single = box::assemble(groups::build_family(groups::FamilySpec::parse("cyclic:3"), 1));
  auto m = single.to_metric_space();
  auto direct = FiniteMetricSpace::from_quotient(single.chain.level(1));
  CHECK(m.matrix() == direct.matrix());
}

TEST_CASE("box-space metric axioms and separation, exhaustively") {
  for (const char* family : {"cyclic:2", "cyclic:3", "sl2:3,5"}) {
    std::size_t depth = std::string(family) == "sl2:3,5" ? 1 : 4;
    auto box = box::assemble(groups::build_family(groups::FamilySpec::parse(family), depth));
    REQUIRE(box.total_points() <= 300);
    auto m = box.to_metric_space();
    CHECK_NOTHROW(m.validate());
    for (std::size_t a = 1; a <= box.chain.depth(); ++a) {
      for (std::size_t b = a + 1; b <= box.chain.depth(); ++b) {
        CHECK(box.anchors[b - 1] - box.anchors[a - 1] >= box.diameters[a - 1] + box.diameters[b - 1] + 1);
        for (std::size_t x = 0; x < box.chain.level(a).order(); ++x) {
          for (std::size_t y = 0; y < box.chain.level(b).order(); ++y) {
            CHECK(box.distance({a, x}, {b, y}) >= box.anchors[b - 1] - box.anchors[a - 1]);
          }
        }
      }
    }
  }
}

TEST_CASE("expander report on the dyadic cycle tower") {
  auto chain = groups::build_family(groups::FamilySpec::parse("cyclic:2"), 4);
  auto report = box::expander_report(chain);
  REQUIRE(report.levels.size() == 4);
  for (std::size_t i = 1; i < 4; ++i) CHECK(*report.levels[i].lambda1 < *report.levels[i - 1].lambda1);
  CHECK(report.min_level == 4);
  auto csv = box::to_csv(report);
  CHECK(csv.rfind("# finite prefix only", 0) == 0);
  CHECK(csv.find("level,order,degree,diameter,girth,lambda1,cheeger_lo,cheeger_hi") != std::string::npos);
}

TEST_CASE("over-budget level degrades to bounds") {
  auto chain = groups::build_family(groups::FamilySpec::parse("sl2:3,5"), 2);
  box::DiagnosticsOptions options;
  options.eigen_budget = 100;
  options.dense_limit = 100;
  auto report = box::expander_report(chain, options);
  CHECK_FALSE(report.levels[0].degraded);
  CHECK(report.levels[1].degraded);
  CHECK_FALSE(report.levels[1].lambda1);
  CHECK(report.levels[1].lambda1_lo > 0);
  CHECK(report.levels[1].lambda1_lo <= report.levels[1].lambda1_hi);
  CHECK(report.min_level == 1);
  // The true gap of the degraded level must lie inside the reported bounds.
  auto exact = box::diagnostics(chain.level(2));
  CHECK(report.levels[1].lambda1_lo <= *exact.lambda1);
  CHECK(*exact.lambda1 <= report.levels[1].lambda1_hi);
}
