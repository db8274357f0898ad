#include "boxcouple/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "boxcouple/errors.hpp"
#include "boxcouple/ghmetric.hpp"
#include "boxcouple/groups.hpp"

namespace boxcouple::coupling {

namespace {

constexpr double kTolerance = 1e-12;

void check_map(const GSpace& x, const GSpace& y, const Table& f) {
  x.check();
  y.check();
  if (f.size() != x.space->size()) throw ValidationError("map is not total on the domain");
  for (auto v : f) {
    if (v >= y.space->size()) throw ValidationError("map value outside the codomain");
  }
  if (x.action.symbols() != y.action.symbols()) {
    throw ValidationError("domain and codomain actions use different generators");
  }
}

std::size_t below(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

FiniteMetricSpace random_metric(std::mt19937_64& rng, std::size_t n, std::size_t max_weight) {
  std::vector<double> d(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = 1.0 + static_cast<double>(below(rng, max_weight));
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
    }
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
  return FiniteMetricSpace(std::move(labels), std::move(d));
}

/// Action of Z (generators t, t^-1) through a single permutation.
measures::GroupAction cyclic_action(const std::vector<std::uint32_t>& perm) {
  std::vector<std::uint32_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<std::uint32_t>(i);
  return measures::GroupAction(perm.size(), {"t", "t^-1"}, {1, 0}, {perm, inv});
}

std::vector<std::vector<std::size_t>> orbits(const std::vector<std::uint32_t>& perm) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<char> seen(perm.size(), 0);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    out.emplace_back();
    for (std::size_t j = i; !seen[j]; j = perm[j]) {
      seen[j] = 1;
      out.back().push_back(j);
    }
  }
  return out;
}

std::size_t smallest_orbit(const std::vector<std::uint32_t>& perm) {
  std::size_t best = perm.size();
  for (const auto& o : orbits(perm)) best = std::min(best, o.size());
  return best;
}

std::vector<std::size_t> random_word(std::mt19937_64& rng) {
  std::vector<std::size_t> w(1 + below(rng, 3));
  for (auto& v : w) v = below(rng, 2);
  return w;
}

}  // namespace

void GSpace::check() const {
  if (!space) throw ValidationError("G-space needs a metric space");
  if (action.size() != space->size()) throw ValidationError("action size does not match the space");
}

double equivariance_defect(const GSpace& x, const GSpace& y, const Table& f, std::span<const std::size_t> word) {
  check_map(x, y, f);
  double worst = 0;
  for (std::size_t p = 0; p < f.size(); ++p) {
    worst = std::max(worst, y.space->d(y.action.apply(word, f[p]), f[x.action.apply(word, p)]));
  }
  return worst;
}

EquivariantMapReport equivariant_report(const GSpace& x, const GSpace& y, const Table& f, std::size_t max_length) {
  check_map(x, y, f);
  EquivariantMapReport r;
  r.distortion = gh::map_distortion(*x.space, *y.space, f);
  r.density = gh::map_density(*x.space, *y.space, f);
  r.epsilon = std::max(r.distortion, r.density);
  std::vector<std::vector<std::size_t>> words{{}};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_length; ++len) {
    std::size_t end = words.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t s = 0; s < x.action.generator_count(); ++s) {
        auto w = words[i];
        w.push_back(s);
        words.push_back(std::move(w));
      }
    }
    begin = end;
  }
  r.xi_per_word.resize(words.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < words.size(); ++i) {
    r.xi_per_word[i] = {x.action.format_word(words[i]), equivariance_defect(x, y, f, words[i])};
  }
  for (const auto& row : r.xi_per_word) r.max_defect = std::max(r.max_defect, row.defect);
  return r;
}

Extension extend_from_net(const FiniteMetricSpace& x, const std::vector<std::size_t>& net, const Table& f_net,
                          const FiniteMetricSpace& y, double net_radius, double epsilon) {
  if (net.empty()) throw ValidationError("net must be nonempty");
  if (net.size() != f_net.size()) throw ValidationError("net and its map table have different sizes");
  for (auto p : net) {
    if (p >= x.size()) throw ValidationError("net point outside the space");
  }
  for (auto v : f_net) {
    if (v >= y.size()) throw ValidationError("map value outside the codomain");
  }
  if (epsilon < net_radius) {
    throw ValidationError("epsilon " + std::to_string(epsilon) + " is below the net radius " + std::to_string(net_radius));
  }
  Extension out;
  out.net_radius = net_radius;
  out.epsilon = epsilon;
  out.bound = 3 * epsilon;
  out.table.assign(x.size(), 0);
  out.anchor.assign(x.size(), 0);
  for (std::size_t p = 0; p < x.size(); ++p) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < net.size(); ++i) {
      double di = x.d(p, net[i]);
      double db = x.d(p, net[best]);
      if (di < db || (di == db && net[i] < net[best])) best = i;
    }
    if (x.d(p, net[best]) > net_radius + kTolerance) {
      throw ValidationError("point " + x.labels()[p] + " is at distance " + std::to_string(x.d(p, net[best])) +
                            " from the net, beyond the radius " + std::to_string(net_radius));
    }
    out.anchor[p] = net[best];
    out.table[p] = f_net[best];
  }
  // f must be an epsilon-isometry on the net itself.
  double net_distortion = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (std::size_t j = i + 1; j < net.size(); ++j) {
      net_distortion = std::max(net_distortion, std::abs(y.d(f_net[i], f_net[j]) - x.d(net[i], net[j])));
    }
  }
  std::vector<std::size_t> image(f_net.begin(), f_net.end());
  double net_density = 0;
  for (std::size_t v = 0; v < y.size(); ++v) net_density = std::max(net_density, y.distance_to(v, image));
  if (net_distortion > epsilon + kTolerance || net_density > epsilon + kTolerance) {
    throw ValidationError("map on the net is not an epsilon-isometry (distortion " + std::to_string(net_distortion) +
                          ", density " + std::to_string(net_density) + ", epsilon " + std::to_string(epsilon) + ")");
  }
  out.distortion = gh::map_distortion(x, y, out.table);
  out.density = gh::map_density(x, y, out.table);
  out.within_bound = out.distortion <= out.bound + kTolerance && out.density <= out.bound + kTolerance;
  return out;
}

std::string to_string(PreimageStatus s) {
  switch (s) {
    case PreimageStatus::pass:
      return "pass";
    case PreimageStatus::fail:
      return "fail";
    case PreimageStatus::vacuous:
      return "vacuous";
    case PreimageStatus::inapplicable:
      return "inapplicable";
  }
  return "unknown";
}

PreimageReport preimage_hausdorff_check(const GSpace& x, const GSpace& y, const Table& f,
                                        std::span<const std::size_t> word, const std::vector<std::size_t>& a,
                                        double xi) {
  check_map(x, y, f);
  std::set<std::size_t> a_set;
  for (auto v : a) {
    if (v >= y.space->size()) throw ValidationError("subset point outside the codomain");
    a_set.insert(v);
  }
  PreimageReport r;
  r.xi = xi;
  r.bound = 2 * xi;
  r.distortion = gh::map_distortion(*x.space, *y.space, f);
  r.density = gh::map_density(*x.space, *y.space, f);
  r.defect = equivariance_defect(x, y, f, word);

  std::set<std::size_t> image(f.begin(), f.end());
  std::set<std::size_t> ga;
  for (auto v : a_set) ga.insert(y.action.apply(word, v));
  std::set<std::size_t> lhs, rhs;
  for (auto v : a_set) {
    if (image.count(v)) lhs.insert(y.action.apply(word, v));
  }
  for (auto v : ga) {
    if (image.count(v)) rhs.insert(v);
  }
  r.image_compatible = lhs == rhs;

  std::vector<std::size_t> moved_preimage, preimage_of_moved;
  for (std::size_t p = 0; p < f.size(); ++p) {
    if (a_set.count(f[p])) moved_preimage.push_back(x.action.apply(word, p));
    if (ga.count(f[p])) preimage_of_moved.push_back(p);
  }
  std::sort(moved_preimage.begin(), moved_preimage.end());
  if (moved_preimage.empty() || preimage_of_moved.empty()) {
    r.status = PreimageStatus::inapplicable;
    r.reason = "empty preimage";
    return r;
  }
  r.measured = gh::hausdorff(*x.space, moved_preimage, preimage_of_moved);
  std::vector<std::string> missing;
  if (r.distortion > xi + kTolerance) missing.push_back("distortion exceeds xi");
  if (r.density > xi + kTolerance) missing.push_back("density exceeds xi");
  if (r.defect > xi + kTolerance) missing.push_back("equivariance defect exceeds xi");
  if (!r.image_compatible) missing.push_back("g does not preserve A within the image");
  if (!missing.empty()) {
    r.status = PreimageStatus::vacuous;
    for (std::size_t i = 0; i < missing.size(); ++i) r.reason += (i ? "; " : "") + missing[i];
    return r;
  }
  r.status = r.measured <= r.bound + kTolerance ? PreimageStatus::pass : PreimageStatus::fail;
  return r;
}

PreimageInstance generate_preimage_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PreimageInstance inst;
  std::vector<std::uint32_t> perm_x, perm_y;
  if (below(rng, 2) == 0) {
    // Cycle C_n with rotation by a divisor s of n on both sides.
    std::int64_t n = 4 + static_cast<std::int64_t>(below(rng, 13));
    std::vector<std::int64_t> divisors;
    for (std::int64_t s = 1; s < n; ++s) {
      if (n % s == 0) divisors.push_back(s);
    }
    std::int64_t s = divisors[below(rng, divisors.size())];
    auto q = groups::cyclic_quotient(n);
    auto space = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_quotient(q));
    std::vector<std::uint32_t> perm(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < perm.size(); ++i) {
      std::int32_t k = q.key(i)[0];
      perm[i] = static_cast<std::uint32_t>(*q.index_of(groups::Key{static_cast<std::int32_t>((k + s) % n)}));
    }
    inst.x = {space, cyclic_action(perm)};
    inst.y = inst.x;
    perm_x = perm_y = perm;
  } else {
    std::size_t n = 2 + below(rng, 9);
    std::size_t m = 2 + below(rng, 9);
    auto shuffled = [&](std::size_t k) {
      std::vector<std::uint32_t> p(k);
      std::iota(p.begin(), p.end(), 0u);
      std::shuffle(p.begin(), p.end(), rng);
      return p;
    };
    perm_x = shuffled(n);
    // Redraw until some orbit fits into the domain, so f can cover it.
    do {
      perm_y = shuffled(m);
    } while (smallest_orbit(perm_y) > n);
    inst.x = {std::make_shared<const FiniteMetricSpace>(random_metric(rng, n, 5)), cyclic_action(perm_x)};
    inst.y = {std::make_shared<const FiniteMetricSpace>(random_metric(rng, m, 5)), cyclic_action(perm_y)};
  }
  const std::size_t n = perm_x.size();
  // The image is a union of orbits that f covers, so it is G-invariant.
  auto orb = orbits(perm_y);
  std::shuffle(orb.begin(), orb.end(), rng);
  std::vector<std::size_t> target;
  for (const auto& o : orb) {
    if (target.size() + o.size() <= n && (target.empty() || below(rng, 2) == 0)) {
      target.insert(target.end(), o.begin(), o.end());
    }
  }
  if (target.empty()) {
    target = *std::min_element(orb.begin(), orb.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  }
  std::sort(target.begin(), target.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  inst.f.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    inst.f[order[i]] = static_cast<std::uint32_t>(i < target.size() ? target[i] : target[below(rng, target.size())]);
  }
  inst.word = random_word(rng);
  do {
    inst.a.clear();
    for (std::size_t v = 0; v < perm_y.size(); ++v) {
      if (below(rng, 2) == 0) inst.a.push_back(v);
    }
    inst.a.push_back(target[below(rng, target.size())]);
    std::sort(inst.a.begin(), inst.a.end());
    inst.a.erase(std::unique(inst.a.begin(), inst.a.end()), inst.a.end());
  } while (inst.a.empty());
  inst.xi = std::max({gh::map_distortion(*inst.x.space, *inst.y.space, inst.f),
                      gh::map_density(*inst.x.space, *inst.y.space, inst.f),
                      equivariance_defect(inst.x, inst.y, inst.f, inst.word)});
  return inst;
}

NetInstance generate_net_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NetInstance inst;
  std::size_t n = 3 + below(rng, 12);
  inst.x = random_metric(rng, n, 6);
  std::vector<double> values(inst.x.matrix().begin(), inst.x.matrix().end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  inst.net_radius = values[below(rng, values.size())];
  // Maximal r-separated set in a random order: a net of radius r.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (auto p : order) {
    if (inst.net.empty() || inst.x.distance_to(p, inst.net) > inst.net_radius) inst.net.push_back(p);
  }
  std::sort(inst.net.begin(), inst.net.end());
  if (below(rng, 2) == 0) {
    inst.y = random_metric(rng, 2 + below(rng, 11), 6);
    for (std::size_t i = 0; i < inst.net.size(); ++i) inst.f_net.push_back(static_cast<std::uint32_t>(below(rng, inst.y.size())));
  } else {
    // Perturbation of the inclusion into X itself.
    inst.y = inst.x;
    for (auto p : inst.net) {
      std::vector<std::size_t> near;
      for (std::size_t v = 0; v < n; ++v) {
        if (inst.x.d(p, v) <= inst.net_radius) near.push_back(v);
      }
      inst.f_net.push_back(static_cast<std::uint32_t>(near[below(rng, near.size())]));
    }
  }
  double distortion = 0;
  for (std::size_t i = 0; i < inst.net.size(); ++i) {
    for (std::size_t j = i + 1; j < inst.net.size(); ++j) {
      distortion = std::max(distortion, std::abs(inst.y.d(inst.f_net[i], inst.f_net[j]) - inst.x.d(inst.net[i], inst.net[j])));
    }
  }
  std::vector<std::size_t> image(inst.f_net.begin(), inst.f_net.end());
  double density = 0;
  for (std::size_t v = 0; v < inst.y.size(); ++v) density = std::max(density, inst.y.distance_to(v, image));
  inst.epsilon = std::max({inst.net_radius, distortion, density});
  return inst;
}

SuiteSummary preimage_suite(std::size_t count, std::uint64_t base_seed) {
  std::vector<PreimageReport> reports(count);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < count; ++i) {
    auto inst = generate_preimage_instance(base_seed + i);
    reports[i] = preimage_hausdorff_check(inst.x, inst.y, inst.f, inst.word, inst.a, inst.xi);
  }
  SuiteSummary s;
  s.instances = count;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& r = reports[i];
    if (r.status == PreimageStatus::pass) {
      ++s.passed;
    } else if (r.status == PreimageStatus::fail) {
      ++s.violations;
      if (!s.first_violation_seed) s.first_violation_seed = base_seed + i;
    } else {
      ++s.skipped;
    }
    if (r.bound > 0 && (r.status == PreimageStatus::pass || r.status == PreimageStatus::fail)) {
      s.worst_ratio = std::max(s.worst_ratio, r.measured / r.bound);
    }
  }
  return s;
}

SuiteSummary net_extension_suite(std::size_t count, std::uint64_t base_seed) {
  std::vector<Extension> results(count);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < count; ++i) {
    auto inst = generate_net_instance(base_seed + i);
    results[i] = extend_from_net(inst.x, inst.net, inst.f_net, inst.y, inst.net_radius, inst.epsilon);
  }
  SuiteSummary s;
  s.instances = count;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& r = results[i];
    if (r.within_bound) {
      ++s.passed;
    } else {
      ++s.violations;
      if (!s.first_violation_seed) s.first_violation_seed = base_seed + i;
    }
    if (r.bound > 0) s.worst_ratio = std::max(s.worst_ratio, std::max(r.distortion, r.density) / r.bound);
  }
  return s;
}

}  // namespace boxcouple::coupling
