// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails that is not a documented expected failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "CLI11.hpp"
#include "boxcouple/boxspace.hpp"
#include "boxcouple/coarse.hpp"
#include "boxcouple/coupling.hpp"
#include "boxcouple/ghmetric.hpp"
#include "boxcouple/limits.hpp"
#include "boxcouple/measures.hpp"

using namespace boxcouple;

namespace {

struct Outcome {
  bool passed = false;
  bool expected_failure = false;
  std::string detail;
  std::vector<std::string> notes;
};

const char* kSettings[] = {"affine:1,0/affine:1,0/0", "affine:1,1/affine:1,-1/1", "affine:2,0/affine:0.5,0/2"};
const std::pair<int, int> kPairs[] = {{4, 4}, {8, 8}, {8, 16}, {16, 8}};

std::shared_ptr<const coarse::GroupSpace> cyclic_space(std::int64_t n) {
  return coarse::GroupSpace::from_quotient(std::make_shared<const groups::FiniteQuotient>(groups::cyclic_quotient(n)));
}

struct Bundled {
  std::string name;
  coarse::MapSpace space;
};

const std::vector<Bundled>& bundled_spaces() {
  static const std::vector<Bundled> spaces = [] {
    std::vector<Bundled> out;
    for (auto [a, b] : kPairs) {
      for (const char* s : kSettings) {
        auto space = coarse::enumerate_map_space(cyclic_space(a), cyclic_space(b), coarse::ControlData::parse(s), true,
                                                 false);
        if (!space.complete) throw std::runtime_error("bundled map space is not fully enumerated");
        out.push_back({"C" + std::to_string(a) + "->C" + std::to_string(b) + " " + s, std::move(space)});
      }
    }
    return out;
  }();
  return spaces;
}

/// Independent map distance: 2^-(r-1) for the smallest domain distance r at
/// which the tables differ, 1 if they differ at the basepoint, 0 if equal.
double oracle_map_distance(const coarse::GroupSpace& x, const coarse::Table& a, const coarse::Table& b) {
  std::int64_t first = -1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i] && (first < 0 || x.norm(i) < first)) first = x.norm(i);
  }
  if (first < 0) return 0;
  if (first == 0) return 1;
  return std::ldexp(1.0, static_cast<int>(1 - first));
}

std::vector<double> random_metric(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_int_distribution<int> weight(1, 5);
  std::vector<double> d(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = weight(rng);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
    }
  }
  for (auto& v : d) v *= scale;
  return d;
}

FiniteMetricSpace random_space(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
  return FiniteMetricSpace(std::move(labels), random_metric(rng, n, scale));
}

// ---- 1: ultrametric ----

Outcome ultrametric() {
  std::uint64_t triples = 0, violations = 0, mismatches = 0;
  std::size_t spaces = 0;
  for (const auto& b : bundled_spaces()) {
    const auto& s = b.space;
    auto metric = coarse::map_space_metric(s);
    const std::size_t n = s.members.size();
    ++spaces;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (metric.d(i, j) != oracle_map_distance(*s.domain, s.members[i], s.members[j])) ++mismatches;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double dij = metric.d(i, j);
        for (std::size_t k = 0; k < n; ++k) {
          if (metric.d(i, k) > std::max(dij, metric.d(j, k))) ++violations;
        }
      }
    }
    triples += static_cast<std::uint64_t>(n) * n * n;
  }
  Outcome o;
  o.passed = violations == 0 && mismatches == 0;
  o.detail = std::to_string(spaces) + " map spaces, " + std::to_string(triples) + " triples, " +
             std::to_string(violations) + " violations, " + std::to_string(mismatches) +
             " distance mismatches against the agreement-radius oracle";
  return o;
}

// ---- 2: net bound ----

Outcome net_bound() {
  std::size_t nets = 0, net_failures = 0, stated = 0, corrected = 0;
  std::string worst;
  for (const auto& b : bundled_spaces()) {
    for (std::int64_t r : {1, 2, 3}) {
      auto net = coarse::eps_net(b.space, r);
      const auto& c = net.certificate;
      ++nets;
      if (!c.net_property || !coarse::reference::net_property(b.space, net)) ++net_failures;
      if (!c.cardinality_ok) {
        ++stated;
        if (worst.empty()) {
          worst = b.name + " at R=" + std::to_string(r) + ": " + std::to_string(c.net_size) + " > " +
                  std::to_string(c.bound);
        }
      }
      if (!c.corrected_ok) ++corrected;
    }
  }
  Outcome o;
  o.detail = std::to_string(nets) + " nets; 2^-R net property: " + std::to_string(net_failures) +
             " violations; |A| <= |S_G|^R |S_H|^ceil(rho+(R)): " + std::to_string(stated) + " violations";
  o.passed = net_failures == 0 && stated == 0;
  // The generator-count bound undercounts the restrictions B_R -> B_{rho+(R)};
  // the count of all restrictions is the bound that actually holds.
  o.expected_failure = !o.passed && net_failures == 0 && corrected == 0;
  if (!worst.empty()) o.notes.push_back("first violation: " + worst);
  o.notes.push_back("corrected bound |B^H_ceil(rho+(R))|^(|B^G_R| - 1): " + std::to_string(corrected) +
                    " violations on " + std::to_string(nets) + " nets");
  if (o.expected_failure) o.notes.push_back("expected failure: the generator-count bound is not a valid upper bound");
  return o;
}

// ---- 3: diagonal limit ----

std::vector<limits::LevelMap> linear_levels(const groups::NormalChain& g, const groups::NormalChain& h, std::int64_t a) {
  std::vector<limits::LevelMap> out;
  for (std::size_t n = 1; n <= g.depth(); ++n) {
    auto x = coarse::GroupSpace::from_quotient(g.level_ptr(n));
    auto y = coarse::GroupSpace::from_quotient(h.level_ptr(n));
    coarse::Table t(x->size());
    const auto m = static_cast<std::int64_t>(y->size());
    for (std::size_t i = 0; i < x->size(); ++i) {
      std::int64_t k = x->base().key(i)[0];
      auto id = y->base().index_of(groups::Key{static_cast<std::int32_t>(((a * k) % m + m) % m)});
      t[i] = static_cast<std::uint32_t>(*id);
    }
    out.push_back({n, coarse::MapRecord{x, y, std::move(t)}});
  }
  return out;
}

Outcome diagonal_limit() {
  struct Tower {
    const char* name;
    const char* g;
    const char* h;
    std::int64_t factor;
    const char* controls;
  };
  const Tower towers[] = {{"identity", "cyclic:2", "cyclic:2", 1, "affine:1,0/affine:1,0/0"},
                          {"doubling", "cyclic:2", "cyclic:2@1", 2, "affine:2,0/affine:1,0/1"}};
  const std::int64_t R = 4;
  Outcome o;
  o.passed = true;
  std::ostringstream detail;
  for (const auto& t : towers) {
    auto g = groups::build_family(groups::FamilySpec::parse(t.g), 6);
    auto h = groups::build_family(groups::FamilySpec::parse(t.h), 6);
    auto controls = coarse::ControlData::parse(t.controls);
    auto maps = linear_levels(g, h, t.factor);
    auto pm = limits::diagonal_limit(maps, controls, R);

    // Hand-computed modular lift at the finest level: the representative of
    // factor*x mod m in (-m/2, m/2].
    std::size_t table_mismatches = 0;
    const auto m = static_cast<std::int64_t>(h.level(h.depth()).order());
    for (std::size_t i = 0; i < pm.domain.size(); ++i) {
      auto x = pm.domain[i].element[0];
      auto r = ((t.factor * x) % m + m) % m;
      auto lift = r > m / 2 ? r - m : r;
      if (pm.images[i] != groups::Element{lift} || lift != t.factor * x) ++table_mismatches;
    }
    bool domain_ok = pm.domain.size() == static_cast<std::size_t>(2 * R + 1);

    std::size_t restriction_failures = 0;
    for (std::int64_t r = 0; r <= R; ++r) {
      auto restricted = pm.restrict(r);
      auto direct = limits::diagonal_limit(maps, controls, r);
      if (restricted.images != direct.images || restricted.domain.size() != direct.domain.size()) {
        ++restriction_failures;
        continue;
      }
      for (std::size_t i = 0; i < direct.domain.size(); ++i) {
        if (restricted.domain[i].element != direct.domain[i].element) ++restriction_failures;
      }
    }
    auto rep = limits::verify_partial(pm, controls);
    bool ok = domain_ok && table_mismatches == 0 && restriction_failures == 0 && rep.passed;
    o.passed = o.passed && ok;
    detail << t.name << ": " << pm.domain.size() << " points, " << table_mismatches << " table mismatches, "
           << restriction_failures << " restriction failures, verify " << (rep.passed ? "passed" : "failed") << "; ";
  }
  o.detail = detail.str();
  o.detail.resize(o.detail.size() - 2);
  return o;
}

// ---- 4: equicontinuity ----

Outcome equicontinuity() {
  std::uint64_t checks = 0, violations = 0;
  for (const auto& b : bundled_spaces()) {
    const auto& s = b.space;
    if (s.members.empty()) continue;
    const auto& X = *s.domain;
    const auto& group = X.base().parent();
    std::vector<std::vector<std::size_t>> words{{}};
    for (std::size_t len = 1; len <= 3; ++len) {
      std::vector<std::vector<std::size_t>> next;
      for (const auto& w : words) {
        if (w.size() != len - 1) continue;
        for (std::size_t gen = 0; gen < group.generators().size(); ++gen) {
          auto v = w;
          v.push_back(gen);
          next.push_back(std::move(v));
        }
      }
      words.insert(words.end(), next.begin(), next.end());
    }
    for (const auto& w : words) {
      auto length = groups::word_length(group, group.evaluate(w));
      auto g = X.base().evaluate(w);
      std::vector<coarse::Table> moved;
      moved.reserve(s.members.size());
      for (const auto& phi : s.members) moved.push_back(coarse::act_table(X, *s.codomain, g, phi));
      for (std::size_t i = 0; i < moved.size(); ++i) {
        for (std::size_t j = 0; j < moved.size(); ++j) {
          double before = coarse::map_distance(X, s.members[i], s.members[j]);
          double after = coarse::map_distance(X, moved[i], moved[j]);
          ++checks;
          if (after > std::ldexp(before, static_cast<int>(length))) ++violations;
        }
      }
    }
  }
  Outcome o;
  o.passed = violations == 0;
  o.detail = std::to_string(checks) + " (pair, word) checks with |g| <= 3, " + std::to_string(violations) + " violations";
  return o;
}

// ---- 5: coupling ----

Outcome coupling_suites(std::uint64_t seed) {
  auto pre = coupling::preimage_suite(1000, seed);
  auto ext = coupling::net_extension_suite(1000, seed);
  Outcome o;
  o.passed = pre.violations == 0 && ext.violations == 0 && pre.instances == 1000 && ext.instances == 1000;
  std::ostringstream out;
  out << "preimage 2xi: " << pre.instances << " instances, " << pre.violations << " violations, " << pre.skipped
      << " outside the hypotheses, worst ratio " << pre.worst_ratio << "; net extension 3eps: " << ext.instances
      << " instances, " << ext.violations << " violations, worst ratio " << ext.worst_ratio;
  o.detail = out.str();
  return o;
}

// ---- 6: Prokhorov ----

/// Exact one-sided-both-ways oracle: the deficiency is a step function of eta
/// that only changes at pairwise distances, so the infimum is found interval
/// by interval by plain subset enumeration.
double prokhorov_oracle(const measures::FiniteMeasure& a, const measures::FiniteMeasure& b) {
  const auto& s = a.space();
  const std::size_t n = s.size();
  std::set<double> cuts{0.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cuts.insert(s.d(i, j));
  }
  std::vector<double> eta(cuts.begin(), cuts.end());
  auto deficiency = [&](double e) {
    double worst = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      double a_set = 0, b_set = 0, a_hood = 0, b_hood = 0;
      for (std::size_t y = 0; y < n; ++y) {
        bool near = false;
        for (std::size_t x = 0; x < n && !near; ++x) near = (mask >> x & 1u) && s.d(x, y) <= e;
        if (mask >> y & 1u) {
          a_set += a[y];
          b_set += b[y];
        }
        if (near) {
          a_hood += b[y];
          b_hood += a[y];
        }
      }
      worst = std::max({worst, a_set - a_hood, b_set - b_hood});
    }
    return worst;
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < eta.size(); ++i) {
    double m = deficiency(eta[i]);
    double hi = i + 1 < eta.size() ? eta[i + 1] : std::numeric_limits<double>::infinity();
    if (m <= eta[i]) {
      best = std::min(best, eta[i]);
    } else if (m < hi) {
      best = std::min(best, m);
    }
  }
  return best;
}

measures::FiniteMeasure random_measure(std::mt19937_64& rng, std::shared_ptr<const FiniteMetricSpace> space) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> w(space->size());
  double total = 0;
  for (auto& v : w) {
    v = u(rng) < 0.25 ? 0.0 : u(rng);
    total += v;
  }
  if (total == 0) {
    w[0] = 1;
    total = 1;
  }
  for (auto& v : w) v /= total;
  return measures::FiniteMeasure(space, std::move(w));
}

Outcome prokhorov(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t axiom_failures = 0, oracle_failures = 0;
  double worst_gap = 0;
  for (int t = 0; t < 200; ++t) {
    auto n = 2 + std::uniform_int_distribution<std::size_t>(0, 10)(rng);
    auto space = std::make_shared<const FiniteMetricSpace>(random_space(rng, n, 0.25));
    auto a = random_measure(rng, space);
    auto b = random_measure(rng, space);
    auto c = random_measure(rng, space);
    double ab = measures::prokhorov(a, b).value;
    double ba = measures::prokhorov(b, a).value;
    double bc = measures::prokhorov(b, c).value;
    double ac = measures::prokhorov(a, c).value;
    double aa = measures::prokhorov(a, a).value;
    if (ab != ba || ac > ab + bc + 1e-9 || aa != 0 || ((ab == 0) != (a.weights() == b.weights()))) ++axiom_failures;
    for (auto [x, y, v] : {std::tuple{&a, &b, ab}, {&b, &c, bc}, {&a, &c, ac}}) {
      double gap = std::abs(v - prokhorov_oracle(*x, *y));
      worst_gap = std::max(worst_gap, gap);
      if (gap > 1e-9) ++oracle_failures;
    }
  }
  // Point masses on a seeded 10-point space whose distances straddle 1.
  auto ten = std::make_shared<const FiniteMetricSpace>(random_space(rng, 10, 0.3));
  std::size_t point_failures = 0, point_pairs = 0;
  for (std::size_t x = 0; x < 10; ++x) {
    for (std::size_t y = 0; y < 10; ++y) {
      ++point_pairs;
      double v = measures::prokhorov(measures::point_mass(ten, x), measures::point_mass(ten, y)).value;
      if (v != std::min(ten->d(x, y), 1.0)) ++point_failures;
    }
  }
  Outcome o;
  o.passed = axiom_failures == 0 && oracle_failures == 0 && point_failures == 0;
  std::ostringstream out;
  out << "200 triples: " << axiom_failures << " axiom failures, " << oracle_failures
      << " oracle mismatches beyond 1e-9 (max gap " << worst_gap << "); point masses: " << point_failures
      << " of " << point_pairs << " pairs differ from min(d, 1)";
  o.detail = out.str();
  return o;
}

// ---- 7: Gromov-Hausdorff ----

Outcome gromov_hausdorff(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<FiniteMetricSpace> spaces;
  for (std::size_t n : {1, 2, 3, 3, 4, 4, 5, 5}) spaces.push_back(random_space(rng, n));
  std::size_t pairs = 0, failures = 0;
  for (const auto& x : spaces) {
    for (const auto& y : spaces) {
      if (x.size() * y.size() > 25) continue;
      ++pairs;
      auto r = gh::gh_bounds(x, y);
      double oracle = gh::reference::min_relation_distortion(x, y) / 2;
      if (!r.exact || std::abs(r.lower - oracle) > 1e-12 || std::abs(r.upper - oracle) > 1e-12) ++failures;
    }
  }
  FiniteMetricSpace point({"o"}, {0.0});
  std::size_t point_failures = 0;
  for (int t = 0; t < 20; ++t) {
    auto n = 1 + std::uniform_int_distribution<std::size_t>(0, 11)(rng);
    auto x = random_space(rng, n);
    auto r = gh::gh_bounds(point, x);
    if (std::abs(r.upper - x.diameter() / 2) > 1e-12 || std::abs(r.lower - x.diameter() / 2) > 1e-12) ++point_failures;
  }
  Outcome o;
  o.passed = failures == 0 && point_failures == 0;
  o.detail = std::to_string(pairs) + " ordered pairs against the full-relation enumeration: " + std::to_string(failures) +
             " failures; point vs X on 20 spaces: " + std::to_string(point_failures) + " failures";
  return o;
}

// ---- 8: spectral ----

Outcome spectral() {
  std::size_t cycle_failures = 0;
  double worst = 0;
  for (int n = 3; n <= 64; ++n) {
    auto d = box::diagnostics(groups::cyclic_quotient(n));
    double expected = 1 - std::cos(2 * M_PI / n);
    double gap = d.lambda1 ? std::abs(*d.lambda1 - expected) : 1.0;
    worst = std::max(worst, gap);
    if (gap > 1e-9) ++cycle_failures;
  }

  std::vector<groups::FiniteQuotient> graphs;
  for (int n = 3; n <= 20; ++n) {
    graphs.push_back(groups::cyclic_quotient(n));
    if (n >= 5) graphs.push_back(groups::cyclic_quotient(n, {1, 2}));
  }
  for (const char* family : {"cyclic:2", "cyclic:3", "free:2:(1,0,2)(1,2,0)"}) {
    auto chain = groups::build_family(groups::FamilySpec::parse(family), family[0] == 'f' ? 1 : 3);
    for (const auto& q : chain.quotients) {
      if (q->order() <= 20) graphs.push_back(*q);
    }
  }
  std::size_t sandwich_failures = 0, exact_graphs = 0;
  for (const auto& q : graphs) {
    auto d = box::diagnostics(q);
    if (!d.cheeger_exact || !d.lambda1) continue;
    ++exact_graphs;
    double h = static_cast<double>(d.cheeger_num) / static_cast<double>(d.cheeger_den);
    if (!(*d.lambda1 / 2 <= h + 1e-12 && h <= std::sqrt(2 * *d.lambda1) + 1e-12)) ++sandwich_failures;
  }

  // Regression values from the first oracle run.
  const std::pair<int, double> pinned[] = {{3, 0.316987298107781},
                                           {5, 0.190983005625052},
                                           {7, 0.146446609406726},
                                           {11, 0.095491502812526},
                                           {13, 0.081217282358334}};
  std::size_t sl2_failures = 0;
  std::ostringstream gaps;
  for (auto [p, value] : pinned) {
    auto chain = groups::build_family(groups::FamilySpec::parse("sl2:" + std::to_string(p)), 1);
    auto d = box::diagnostics(chain.level(1));
    if (!d.lambda1 || *d.lambda1 <= 0 || std::abs(*d.lambda1 - value) > 1e-9) ++sl2_failures;
    gaps << " p=" << p << ":" << (d.lambda1 ? *d.lambda1 : -1.0);
  }
  Outcome o;
  o.passed = cycle_failures == 0 && sandwich_failures == 0 && sl2_failures == 0 && exact_graphs > 0;
  std::ostringstream out;
  out << "cycles n=3..64: " << cycle_failures << " failures (max error " << worst << "); Cheeger-Buser on "
      << exact_graphs << " graphs: " << sandwich_failures << " failures; SL2(Z/p) gaps: " << sl2_failures
      << " failures";
  o.detail = out.str();
  o.notes.push_back("SL2 gaps:" + gaps.str());
  return o;
}

// ---- 9: determinism ----

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& cli, const std::string& args) {
  int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const std::string& cli, const std::filesystem::path& configs) {
  Outcome o;
  if (cli.empty()) {
    o.detail = "no --cli path given";
    return o;
  }
  auto dir = std::filesystem::temp_directory_path() / ("boxcouple_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::size_t identical = 0, total = 0;
  std::ostringstream out;
  for (const char* name : {"identity_cyclic", "doubling_cyclic", "sl2_vs_cyclic"}) {
    auto config = (configs / (std::string(name) + ".json")).string();
    std::vector<std::string> reports;
    std::vector<int> codes;
    for (int threads : {1, 4}) {
      auto report = dir / (std::string(name) + "_" + std::to_string(threads) + ".json");
      codes.push_back(run_cli(cli, "--threads " + std::to_string(threads) + " pipeline run --config '" + config +
                                       "' -o '" + report.string() + "'"));
      reports.push_back(slurp(report));
    }
    ++total;
    bool same = !reports[0].empty() && reports[0] == reports[1] && codes[0] == codes[1] && (codes[0] == 0 || codes[0] == 4);
    if (same) ++identical;
    out << name << " " << (same ? "identical" : "DIFFERENT") << " (exit " << codes[0] << "); ";
  }
  std::filesystem::remove_all(dir);
  o.passed = identical == total;
  o.detail = out.str();
  o.detail.resize(o.detail.size() - 2);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::string cli;
  std::string configs = "configs";
  std::uint64_t seed = 20240601;
  std::vector<int> only;
  app.add_option("--cli", cli, "Path of the boxcouple executable (criterion 9)");
  app.add_option("--configs", configs, "Directory of bundled pipeline configs");
  app.add_option("--seed", seed, "Base seed of the generated instances");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"ultrametric inequality on bundled map spaces", ultrametric},
      {"fiber nets: 2^-R net property and generator-count bound", net_bound},
      {"diagonal limit of the identity and doubling towers", diagonal_limit},
      {"equicontinuity of the action, |g| <= 3", equicontinuity},
      {"coupling suites: preimage 2xi and net extension 3eps", [&] { return coupling_suites(seed); }},
      {"Prokhorov metric axioms, oracle and point masses", [&] { return prokhorov(seed); }},
      {"Gromov-Hausdorff bounds against brute force", [&] { return gromov_hausdorff(seed); }},
      {"spectral gaps, Cheeger-Buser, SL2 regression", spectral},
      {"pipeline reports byte-identical across --threads", [&] { return determinism(cli, configs); }},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("error: ") + e.what();
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << id << ": " << criteria[i].first << " -- " << o.detail;
    if (!o.passed && o.expected_failure) std::cout << " [expected failure]";
    std::cout << " (" << std::fixed << std::setprecision(2) << seconds << " s)" << std::defaultfloat << "\n";
    for (const auto& note : o.notes) std::cout << "    " << note << "\n";
    std::cout.flush();
    if (!o.passed && !o.expected_failure) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
