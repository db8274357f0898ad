#include "doctest.h"

#include "boxcouple/errors.hpp"
#include "boxcouple/serialize.hpp"
#include "support.hpp"

using namespace boxcouple;
using io::json;

namespace {

/// Serializes to text and parses it back, so the round trip covers the wire form.
json through_text(const json& j) { return json::parse(io::dump(j)); }

template <class T>
T round_trip(const T& value) {
  return io::parse<T>(through_text(io::to_json(value)));
}

}  // namespace

TEST_CASE("chains round-trip for every family") {
  for (auto [family, depth] : {std::pair{"cyclic:2", 5}, {"cyclic:3@1", 3}, {"sl2:3,5", 2},
                               {"free:2:(1,2,0)(0,2,1)/(1,2,3,0)(1,0,2,3)", 2}}) {
    CAPTURE(family);
    auto chain = groups::build_family(groups::FamilySpec::parse(family), depth);
    auto back = io::parse<groups::NormalChain>(through_text(io::to_json(chain)));
    CHECK(io::same_chain(chain, back));
    CHECK(io::dump(io::to_json(back)) == io::dump(io::to_json(chain)));
  }
}

TEST_CASE("tampered chains are rejected") {
  auto chain = groups::build_family(groups::FamilySpec::parse("cyclic:2"), 3);
  auto j = io::to_json(chain);
  j["depth"] = 7;
  CHECK_THROWS_AS(io::parse<groups::NormalChain>(j), ValidationError);
  j = io::to_json(chain);
  j["quotients"][1]["elements"][2] = json::array({5});
  CHECK_THROWS_AS(io::parse<groups::NormalChain>(j), ValidationError);
  j = io::to_json(chain);
  j["quotients"][0].erase("carrier");
  CHECK_THROWS_AS(io::parse<groups::NormalChain>(j), ValidationError);
}

TEST_CASE("metric spaces, maps and map spaces round-trip") {
  support::Gen gen(11);
  for (std::size_t n : {1, 3, 6}) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
    FiniteMetricSpace x(labels, gen.metric(n));
    CHECK(round_trip(x) == x);
  }
  auto c4 = support::cyclic_space(4);
  auto c8 = support::cyclic_space(8);
  coarse::MapRecord f{c4, c8, support::linear_map(*c4, *c8, 2)};
  auto g = round_trip(f);
  CHECK(g.table == f.table);
  CHECK(io::same_space(*g.domain, *f.domain));
  CHECK(io::same_space(*g.codomain, *f.codomain));

  auto controls = coarse::ControlData::parse("affine:1,1/affine:1,-1/1");
  auto space = coarse::enumerate_map_space(c8, c8, controls, true, false);
  auto back = round_trip(space);
  CHECK(back.members == space.members);
  CHECK(back.controls == space.controls);
  CHECK(back.nodes == space.nodes);
  CHECK(io::same_space(*back.domain, *space.domain));

  auto tagged = coarse::GroupSpace::tag_product(support::cyclic(4), 3);
  auto tagged_back = io::parse<std::shared_ptr<const coarse::GroupSpace>>(through_text(io::to_json(*tagged)));
  CHECK(io::same_space(*tagged, *tagged_back));
}

TEST_CASE("reports round-trip") {
  auto c4 = support::cyclic_space(4);
  auto c8 = support::cyclic_space(8);
  auto controls = coarse::ControlData::parse("affine:1,0/affine:1,0/0");
  auto report = coarse::verify({c4, c8, support::linear_map(*c4, *c8, 2)}, controls, coarse::Mode::equivalence);
  REQUIRE(report.violation.has_value());
  auto back = round_trip(report);
  CHECK(back.passed() == report.passed());
  CHECK(back.violation->x1 == report.violation->x1);
  CHECK(back.violation->lower_bound == report.violation->lower_bound);
  CHECK(back.uncovered == report.uncovered);

  auto space = coarse::enumerate_map_space(c8, c8, coarse::ControlData::parse("affine:1,1/affine:1,-1/1"), true, false);
  auto net = coarse::eps_net(space, 2);
  auto net_back = round_trip(net);
  CHECK(net_back.net == net.net);
  CHECK(net_back.fiber_of == net.fiber_of);
  CHECK(net_back.certificate.corrected_bound == net.certificate.corrected_bound);
  CHECK(net_back.certificate.cardinality_ok == net.certificate.cardinality_ok);

  auto diag = round_trip(box::expander_report(groups::build_family(groups::FamilySpec::parse("sl2:3,5"), 2)));
  REQUIRE(diag.levels.size() == 2);
  CHECK(diag.levels[0].lambda1.has_value());
  CHECK(*diag.levels[0].lambda1 == doctest::Approx(0.316987298107781).epsilon(1e-12));
  CHECK(io::dump(io::to_json(diag)) ==
        io::dump(io::to_json(box::expander_report(groups::build_family(groups::FamilySpec::parse("sl2:3,5"), 2)))));
}

TEST_CASE("partial maps round-trip") {
  auto g = groups::build_family(groups::FamilySpec::parse("cyclic:2"), 5);
  auto controls = coarse::ControlData::parse("affine:1,0/affine:1,0/0");
  std::vector<limits::LevelMap> levels;
  for (std::size_t n = 1; n <= 5; ++n) {
    auto x = coarse::GroupSpace::from_quotient(g.level_ptr(n));
    levels.push_back({n, coarse::MapRecord{x, x, support::linear_map(*x, *x, 1)}});
  }
  auto pm = limits::diagonal_limit(levels, controls, 3);
  auto back = round_trip(pm);
  CHECK(*back.source == *pm.source);
  CHECK(back.radius == pm.radius);
  CHECK(back.images == pm.images);
  CHECK(back.provenance == pm.provenance);
  REQUIRE(back.domain.size() == pm.domain.size());
  for (std::size_t i = 0; i < pm.domain.size(); ++i) CHECK(back.domain[i].element == pm.domain[i].element);
  auto report = limits::verify_partial(pm, controls);
  auto report_back = round_trip(report);
  CHECK(report_back.passed == report.passed);
  CHECK(report_back.density_radius == report.density_radius);
}

TEST_CASE("gh results and evidence round-trip") {
  auto x = support::cyclic_space(4)->metric_space();
  auto y = support::cyclic_space(6)->metric_space();
  auto r = gh::gh_bounds(x, y);
  auto back = round_trip(r);
  CHECK(back.lower == r.lower);
  CHECK(back.upper == r.upper);
  CHECK(back.exact == r.exact);
  REQUIRE(back.witness.has_value());
  CHECK(back.witness->forward == r.witness->forward);
  auto j = io::to_json(r);
  j["lower"] = 5;
  CHECK_THROWS_AS(io::parse<gh::GHResult>(j), ValidationError);
}

TEST_CASE("measures, actions and G-spaces round-trip") {
  auto q = groups::cyclic_quotient(6);
  auto space = std::make_shared<const FiniteMetricSpace>(support::cyclic_space(6)->metric_space());
  measures::FiniteMeasure mu(space, {0.5, 0.25, 0.125, 0.125, 0, 0});
  CHECK(round_trip(mu) == mu);
  auto action = measures::GroupAction::regular(q);
  CHECK(round_trip(action) == action);
  coupling::GSpace gs{space, action};
  auto gs_back = round_trip(gs);
  CHECK(*gs_back.space == *space);
  CHECK(gs_back.action == action);

  auto defect = measures::invariance_defect(mu, action, 2);
  auto defect_back = round_trip(defect);
  CHECK(defect_back.max_tv == defect.max_tv);
  CHECK(defect_back.rows.size() == defect.rows.size());

  auto j = io::to_json(mu);
  j["weights"].erase(space->labels()[0]);
  CHECK_THROWS_AS(io::parse<measures::FiniteMeasure>(j), ValidationError);
  j = io::to_json(action);
  j["generators"][0]["permutation"][0] = j["generators"][0]["permutation"][1];
  CHECK_THROWS_AS(io::parse<measures::GroupAction>(j), ValidationError);
}

TEST_CASE("integral doubles are written as integers") {
  CHECK(io::number(2.0).is_number_integer());
  CHECK(io::number(0.5).is_number_float());
  CHECK(io::dump(io::number(-3.0)) == "-3\n");
}

TEST_CASE("malformed input becomes a validation error") {
  CHECK_THROWS_AS(io::parse<FiniteMetricSpace>(json::parse(R"({"labels":["a"]})")), ValidationError);
  CHECK_THROWS_AS(io::parse<FiniteMetricSpace>(json::parse(R"({"labels":["a","b"],"matrix":[[0,1],[2,0]]})")),
                  ValidationError);
  CHECK_THROWS_AS(io::parse<std::shared_ptr<const groups::MarkedGroup>>(json::parse(R"({"kind":"lie"})")),
                  ValidationError);
}
