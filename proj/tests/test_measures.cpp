#include "doctest.h"

#include <cmath>

#include "boxcouple/coarse.hpp"
#include "boxcouple/errors.hpp"
#include "boxcouple/measures.hpp"
#include "support.hpp"

using namespace boxcouple;
using measures::FiniteMeasure;

namespace {

std::shared_ptr<const FiniteMetricSpace> random_space(support::Gen& gen, std::size_t n, double scale = 0.25) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
  return std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace(labels, gen.metric(n)).scaled(scale));
}

FiniteMeasure random_measure(support::Gen& gen, std::shared_ptr<const FiniteMetricSpace> space) {
  std::vector<double> w(space->size());
  double total = 0;
  for (auto& v : w) {
    v = gen.below(4) == 0 ? 0.0 : gen.uniform();
    total += v;
  }
  if (total == 0) {
    w[0] = 1;
    total = 1;
  }
  for (auto& v : w) v /= total;
  return FiniteMeasure(space, w);
}

/// Independent oracle: bisection on eta against the defining subset condition.
double prokhorov_bisection(const FiniteMeasure& a, const FiniteMeasure& b) {
  const auto& s = a.space();
  const std::size_t n = s.size();
  auto holds = [&](double eta) {
    std::vector<std::uint32_t> nbr(n, 0);
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        if (s.d(x, y) <= eta) nbr[x] |= 1u << y;
      }
    }
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      std::uint32_t hood = 0;
      double a_set = 0, b_set = 0, a_hood = 0, b_hood = 0;
      for (std::size_t x = 0; x < n; ++x) {
        if (mask >> x & 1u) {
          hood |= nbr[x];
          a_set += a[x];
          b_set += b[x];
        }
      }
      for (std::size_t y = 0; y < n; ++y) {
        if (hood >> y & 1u) {
          a_hood += a[y];
          b_hood += b[y];
        }
      }
      if (a_set > b_hood + eta + 1e-12 || b_set > a_hood + eta + 1e-12) return false;
    }
    return true;
  };
  double lo = 0, hi = 1;
  if (holds(0)) return 0;
  while (hi - lo > 1e-11) {
    double mid = (lo + hi) / 2;
    (holds(mid) ? hi : lo) = mid;
  }
  return hi;
}

std::shared_ptr<const FiniteMetricSpace> cyclic_metric(std::int64_t n) {
  return std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_quotient(groups::cyclic_quotient(n)));
}

}  // namespace

TEST_CASE("uniform examples") {
  support::Gen gen(1);
  auto four = random_space(gen, 4);
  auto quarter = measures::uniform(four);
  for (double w : quarter.weights()) CHECK(w == 0.25);
  CHECK(measures::uniform(random_space(gen, 1)).weights() == std::vector<double>{1.0});
  CHECK_THROWS_AS(measures::uniform(std::make_shared<const FiniteMetricSpace>()), ValidationError);

  auto c4 = support::cyclic_space(4);
  auto controls = coarse::ControlData::parse("affine:1,0/affine:1,0/0");
  auto space = coarse::enumerate_map_space(c4, c4, controls, true, false);
  REQUIRE(space.members.size() == 2);
  auto mu = measures::uniform(std::make_shared<const FiniteMetricSpace>(coarse::map_space_metric(space)));
  CHECK(mu.weights() == std::vector<double>{0.5, 0.5});
}

TEST_CASE("measure validation") {
  support::Gen gen(2);
  auto s = random_space(gen, 3);
  CHECK_THROWS_AS(FiniteMeasure(s, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(FiniteMeasure(s, {0.5, 0.6, -0.1}), ValidationError);
  CHECK_THROWS_AS(FiniteMeasure(s, {0.5, 0.4, 0.0}), ValidationError);
  CHECK_NOTHROW(FiniteMeasure(s, {0.5, 0.5, 0.0}));
}

TEST_CASE("pushforward examples") {
  auto c4 = support::cyclic_space(4);
  auto c8 = support::cyclic_space(8);
  auto m4 = std::make_shared<const FiniteMetricSpace>(c4->metric_space());
  auto m8 = std::make_shared<const FiniteMetricSpace>(c8->metric_space());
  auto mu = measures::uniform(m4);
  CHECK(measures::pushforward(mu, support::linear_map(*c4, *c4, 1), m4) == mu);
  auto constant = measures::pushforward(mu, coarse::Table(4, 2), m4);
  CHECK(constant == measures::point_mass(m4, 2));
  auto doubled = measures::pushforward(mu, support::linear_map(*c4, *c8, 2), m8);
  for (int k = 0; k < 8; ++k) CHECK(doubled[support::residue(*c8, k)] == (k % 2 == 0 ? 0.25 : 0.0));

  support::Gen gen(3);
  for (int t = 0; t < 50; ++t) {
    auto x = random_space(gen, 1 + gen.below(10));
    auto y = random_space(gen, 1 + gen.below(10));
    auto m = random_measure(gen, x);
    std::vector<std::uint32_t> f(x->size());
    for (auto& v : f) v = static_cast<std::uint32_t>(gen.below(y->size()));
    auto pushed = measures::pushforward(m, f, y);
    double total = 0;
    for (double w : pushed.weights()) total += w;
    CHECK(std::abs(total - 1) <= 1e-12);
  }
}

TEST_CASE("prokhorov examples") {
  support::Gen gen(10);
  auto s = random_space(gen, 10, 0.3);
  auto mu = random_measure(gen, s);
  CHECK(measures::prokhorov(mu, mu).value == 0);
  for (std::size_t x = 0; x < s->size(); ++x) {
    for (std::size_t y = 0; y < s->size(); ++y) {
      auto r = measures::prokhorov(measures::point_mass(s, x), measures::point_mass(s, y));
      CHECK(r.exact);
      CHECK(r.value == std::min(s->d(x, y), 1.0));
    }
  }
  auto u = measures::uniform(s);
  std::vector<double> shuffled(u.weights().rbegin(), u.weights().rend());
  CHECK(measures::prokhorov(u, FiniteMeasure(s, shuffled)).value == 0);
}

TEST_CASE("sweep deficiency matches the serial reference and the flow formulation") {
  support::Gen gen(12);
  for (int t = 0; t < 60; ++t) {
    auto s = random_space(gen, 1 + gen.below(12));
    auto a = random_measure(gen, s);
    auto b = random_measure(gen, s);
    double eta = gen.uniform() * 1.3;
    double sweep = measures::deficiency(a, b, eta, measures::ProkhorovMethod::sweep);
    CHECK(std::abs(sweep - measures::reference::deficiency(a, b, eta)) <= 1e-12);
    CHECK(std::abs(sweep - measures::deficiency(a, b, eta, measures::ProkhorovMethod::flow)) <= 1e-12);
  }
}

TEST_CASE("prokhorov metric axioms on seeded triples against the bisection oracle") {
  support::Gen gen(200);
  for (int t = 0; t < 200; ++t) {
    auto s = random_space(gen, 2 + gen.below(11));
    auto a = random_measure(gen, s);
    auto b = random_measure(gen, s);
    auto c = random_measure(gen, s);
    double ab = measures::prokhorov(a, b).value;
    double ba = measures::prokhorov(b, a).value;
    double bc = measures::prokhorov(b, c).value;
    double ac = measures::prokhorov(a, c).value;
    CHECK(ab == ba);
    CHECK(ac <= ab + bc + 1e-9);
    CHECK((ab == 0) == (a.weights() == b.weights()));
    CHECK(std::abs(ab - prokhorov_bisection(a, b)) <= 1e-9);
    CHECK(ab <= measures::total_variation(a, b) + 1e-12);
    CHECK(std::abs(measures::prokhorov(a, b, measures::ProkhorovMethod::flow).value - ab) <= 1e-12);
  }
}

TEST_CASE("prokhorov modes and limits") {
  support::Gen gen(30);
  auto big = random_space(gen, 30);
  auto a = random_measure(gen, big);
  auto b = random_measure(gen, big);
  auto r = measures::prokhorov(a, b);
  CHECK_FALSE(r.exact);
  CHECK(r.method == "flow");
  CHECK(r.value <= measures::total_variation(a, b) + 1e-12);
  CHECK_THROWS_AS(measures::prokhorov(a, b, measures::ProkhorovMethod::sweep), BudgetExceeded);
  auto other = random_space(gen, 30);
  CHECK_THROWS_AS(measures::prokhorov(a, random_measure(gen, other)), ValidationError);
}

TEST_CASE("translate examples and composition") {
  auto q = groups::cyclic_quotient(8);
  auto space = cyclic_metric(8);
  auto action = measures::GroupAction::regular(q);
  auto t = action.parse_word("t");
  auto u = measures::uniform(space);
  CHECK(measures::translate(t, u, action) == u);
  auto x = support::residue(*support::cyclic_space(8), 3);
  auto moved = measures::translate(t, measures::point_mass(space, x), action);
  CHECK(moved == measures::point_mass(space, action.apply(t, x)));
  CHECK(q.key(action.apply(t, x))[0] == 4);

  auto pair = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace({"a", "b"}, {0, 1, 1, 0}));
  measures::GroupAction swap(2, {"s"}, {0}, {{1, 0}});
  auto swapped = measures::translate(swap.parse_word("s"), FiniteMeasure(pair, {0.7, 0.3}), swap);
  CHECK(swapped.weights() == std::vector<double>{0.3, 0.7});

  support::Gen gen(40);
  for (int k = 0; k < 30; ++k) {
    std::vector<std::size_t> w1, w2;
    for (std::size_t i = 0, len = gen.below(4); i < len; ++i) w1.push_back(gen.below(2));
    for (std::size_t i = 0, len = gen.below(4); i < len; ++i) w2.push_back(gen.below(2));
    auto w12 = w1;
    w12.insert(w12.end(), w2.begin(), w2.end());
    auto mu = random_measure(gen, space);
    CHECK(measures::translate(w12, mu, action) == measures::translate(w1, measures::translate(w2, mu, action), action));
    auto nu = random_measure(gen, space);
    std::vector<double> mix(8);
    for (std::size_t i = 0; i < 8; ++i) mix[i] = 0.5 * mu[i] + 0.5 * nu[i];
    auto lhs = measures::translate(w1, FiniteMeasure(space, mix), action);
    auto a = measures::translate(w1, mu, action);
    auto b = measures::translate(w1, nu, action);
    for (std::size_t i = 0; i < 8; ++i) CHECK(lhs[i] == 0.5 * a[i] + 0.5 * b[i]);
  }
}

TEST_CASE("group action validation") {
  CHECK_THROWS_AS(measures::GroupAction(2, {"s"}, {0}, {{0, 0}}), ValidationError);
  CHECK_THROWS_AS(measures::GroupAction(3, {"s", "S"}, {1, 0}, {{1, 2, 0}, {1, 2, 0}}), ValidationError);
  measures::GroupAction rot(3, {"s", "S"}, {1, 0}, {{1, 2, 0}, {2, 0, 1}});
  CHECK_NOTHROW(rot.check_relators({rot.parse_word("s s s")}));
  CHECK_THROWS_AS(rot.check_relators({rot.parse_word("s s")}), ValidationError);
  auto q = groups::cyclic_quotient(5);
  auto action = measures::GroupAction::regular(q);
  CHECK_NOTHROW(action.check_relators({action.parse_word("t t t t t")}));
}

TEST_CASE("invariance defect examples") {
  auto q = groups::cyclic_quotient(6);
  auto space = cyclic_metric(6);
  auto action = measures::GroupAction::regular(q);
  auto report = measures::invariance_defect(measures::uniform(space), action, 3);
  CHECK(report.max_tv == 0);
  CHECK(report.max_prokhorov == 0);
  CHECK(report.rows.size() == 6);

  auto pair = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace({"a", "b"}, {0, 2, 2, 0}));
  measures::GroupAction swap(2, {"s"}, {0}, {{1, 0}});
  auto r = measures::invariance_defect(measures::point_mass(pair, 0), swap, 1);
  CHECK(r.max_tv == 1);
  CHECK(r.max_prokhorov == 1);
  CHECK(r.worst_word == "s");
  CHECK(measures::to_csv(r) == "word,tv,prokhorov\n1,0,0\ns,1,1\n");
}

TEST_CASE("weak star evidence") {
  support::Gen gen(50);
  auto s = random_space(gen, 5);
  auto mu = random_measure(gen, s);
  auto constant = measures::weak_star_evidence({mu, mu, mu});
  CHECK(constant.cauchy);
  for (const auto& row : constant.table) {
    for (double v : row) CHECK(v == 0);
  }

  auto pair = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace({"a", "b"}, {0, 1, 1, 0}));
  std::vector<FiniteMeasure> seq;
  for (int k = 1; k <= 20; ++k) {
    double tail = std::ldexp(1.0, -k);
    seq.emplace_back(pair, std::vector<double>{1 - tail, tail});
  }
  auto ev = measures::weak_star_evidence(seq);
  CHECK(ev.cauchy);
  CHECK(std::abs(ev.limit[0] - 1) <= 1e-6);
  CHECK(std::abs(ev.limit[1]) <= 1e-6);
  // Two-point closed form: d_P = min(|p - q|, d) for distance d = 1.
  CHECK(ev.table[0][1] == doctest::Approx(0.25).epsilon(1e-12));
  for (std::size_t m = 1; m < ev.envelope.size(); ++m) CHECK(ev.envelope[m] <= ev.envelope[m - 1]);

  std::vector<FiniteMeasure> osc;
  for (int k = 0; k < 10; ++k) osc.push_back(k % 2 ? measures::point_mass(pair, 0) : measures::point_mass(pair, 1));
  CHECK_FALSE(measures::weak_star_evidence(osc).cauchy);
}
