#include "boxcouple/ghmetric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "boxcouple/errors.hpp"

namespace boxcouple::gh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_table(const FiniteMetricSpace& x, const FiniteMetricSpace& y, const std::vector<std::uint32_t>& f) {
  if (f.size() != x.size()) throw ValidationError("map table size does not match the domain");
  for (auto v : f) {
    if (v >= y.size()) throw ValidationError("map table entry outside the codomain");
  }
}

/// Sorted distance profile {d(x, x')} of every point.
std::vector<std::vector<double>> profiles(const FiniteMetricSpace& s) {
  std::vector<std::vector<double>> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i].reserve(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) out[i].push_back(s.d(i, j));
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

/// Hausdorff distance between two sorted finite sets of reals.
double profile_gap(const std::vector<double>& a, const std::vector<double>& b) {
  auto one_side = [](const std::vector<double>& p, const std::vector<double>& q) {
    double worst = 0;
    for (double v : p) {
      auto it = std::lower_bound(q.begin(), q.end(), v);
      double best = kInf;
      if (it != q.end()) best = *it - v;
      if (it != q.begin()) best = std::min(best, v - *std::prev(it));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_side(a, b), one_side(b, a));
}

/// gap[x * |Y| + y]: any correspondence containing (x, y) has distortion >= gap.
std::vector<double> pair_gaps(const FiniteMetricSpace& x, const FiniteMetricSpace& y) {
  auto px = profiles(x);
  auto py = profiles(y);
  std::vector<double> gap(x.size() * y.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) gap[i * y.size() + j] = profile_gap(px[i], py[j]);
  }
  return gap;
}

std::vector<std::size_t> by_eccentricity(const FiniteMetricSpace& s) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> ecc(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) ecc[i] = s.eccentricity(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ecc[a] > ecc[b]; });
  return order;
}

bool canonical_before(const FiniteMetricSpace& a, const FiniteMetricSpace& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  if (a.matrix() != b.matrix()) return a.matrix() < b.matrix();
  return a.labels() <= b.labels();
}

/// One decision of the correspondence search: a point on either side and its
/// partner on the other side.
struct Variable {
  bool from_x = true;
  std::size_t point = 0;
  std::vector<std::size_t> candidates;  // ascending by pair gap, then index
};

class CorrespondenceSearch {
 public:
  CorrespondenceSearch(const FiniteMetricSpace& x, const FiniteMetricSpace& y) : x_(x), y_(y), gap_(pair_gaps(x, y)) {
    for (auto p : by_eccentricity(x)) vars_.push_back(make_variable(true, p));
    for (auto p : by_eccentricity(y)) vars_.push_back(make_variable(false, p));
  }

  const std::vector<Variable>& variables() const { return vars_; }

  /// Pair gap of assigning candidate `c` to variable `v`.
  double gap(const Variable& v, std::size_t c) const {
    return v.from_x ? gap_[v.point * y_.size() + c] : gap_[c * y_.size() + v.point];
  }

  std::pair<std::size_t, std::size_t> pair_of(const Variable& v, std::size_t c) const {
    return v.from_x ? std::pair{v.point, c} : std::pair{c, v.point};
  }

  /// Largest |d_X - d_Y| between (a, b) and the pairs already placed.
  double increment(const std::vector<std::pair<std::size_t, std::size_t>>& placed, std::size_t a,
                   std::size_t b) const {
    double worst = 0;
    for (const auto& [pa, pb] : placed) worst = std::max(worst, std::abs(x_.d(a, pa) - y_.d(b, pb)));
    return worst;
  }

  /// Greedy incumbent: each variable takes the partner with the smallest increment.
  std::pair<double, std::vector<std::size_t>> greedy() const {
    std::vector<std::pair<std::size_t, std::size_t>> placed;
    std::vector<std::size_t> choice;
    double dis = 0;
    for (const auto& v : vars_) {
      double best = kInf;
      std::size_t pick = 0;
      for (auto c : v.candidates) {
        auto [a, b] = pair_of(v, c);
        double inc = std::max(increment(placed, a, b), gap(v, c));
        if (inc < best - kTolerance) {
          best = inc;
          pick = c;
        }
      }
      choice.push_back(pick);
      placed.push_back(pair_of(v, pick));
      dis = std::max(dis, best);
    }
    return {dis, choice};
  }

  struct Outcome {
    double best = kInf;
    std::vector<std::size_t> choice;
    bool complete = true;
    std::uint64_t nodes = 0;
  };

  /// Depth-first search below a fixed prefix of choices. Only strict
  /// improvements over `incumbent` are recorded; the search stops early once
  /// `floor` is reached.
  Outcome search(const std::vector<std::size_t>& prefix, double incumbent, double floor, std::uint64_t cap) const {
    Outcome out;
    out.best = incumbent;
    std::vector<std::pair<std::size_t, std::size_t>> placed;
    std::vector<std::size_t> choice;
    double dis = 0;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      const auto& v = vars_[i];
      auto [a, b] = pair_of(v, prefix[i]);
      dis = std::max({dis, increment(placed, a, b), gap(v, prefix[i])});
      placed.push_back({a, b});
      choice.push_back(prefix[i]);
    }
    if (dis >= out.best - kTolerance) return out;
    recurse(placed, choice, dis, floor, cap, out);
    return out;
  }

 private:
  Variable make_variable(bool from_x, std::size_t p) const {
    Variable v{from_x, p, {}};
    std::size_t other = from_x ? y_.size() : x_.size();
    for (std::size_t c = 0; c < other; ++c) v.candidates.push_back(c);
    std::stable_sort(v.candidates.begin(), v.candidates.end(),
                     [&](std::size_t a, std::size_t b) { return gap(v, a) < gap(v, b); });
    return v;
  }

  void recurse(std::vector<std::pair<std::size_t, std::size_t>>& placed, std::vector<std::size_t>& choice, double dis,
               double floor, std::uint64_t cap, Outcome& out) const {
    if (out.best <= floor + kTolerance) return;
    if (++out.nodes > cap) {
      out.complete = false;
      return;
    }
    std::size_t depth = choice.size();
    if (depth == vars_.size()) {
      out.best = dis;
      out.choice = choice;
      return;
    }
    const auto& v = vars_[depth];
    for (auto c : v.candidates) {
      if (gap(v, c) >= out.best - kTolerance) break;
      auto [a, b] = pair_of(v, c);
      double next = std::max({dis, increment(placed, a, b), gap(v, c)});
      if (next >= out.best - kTolerance) continue;
      placed.push_back({a, b});
      choice.push_back(c);
      recurse(placed, choice, next, floor, cap, out);
      placed.pop_back();
      choice.pop_back();
      if (!out.complete || out.best <= floor + kTolerance) return;
    }
  }

  const FiniteMetricSpace& x_;
  const FiniteMetricSpace& y_;
  std::vector<double> gap_;
  std::vector<Variable> vars_;
};

Correspondence correspondence_from(const CorrespondenceSearch& s, const std::vector<std::size_t>& choice,
                                   std::size_t nx, std::size_t ny) {
  Correspondence c;
  c.forward.assign(nx, 0);
  c.backward.assign(ny, 0);
  const auto& vars = s.variables();
  for (std::size_t i = 0; i < vars.size(); ++i) {
    auto& side = vars[i].from_x ? c.forward : c.backward;
    side[vars[i].point] = static_cast<std::uint32_t>(choice[i]);
  }
  return c;
}

GHResult oriented_bounds(const FiniteMetricSpace& x, const FiniteMetricSpace& y, std::uint64_t budget) {
  GHResult result;
  const double lower = gh_lower_bound(x, y);
  result.lower = lower;
  CorrespondenceSearch search(x, y);
  auto [greedy_dis, greedy_choice] = search.greedy();
  const double floor = 2 * lower;

  // Split on the first two decisions; every subtree has its own incumbent and
  // node cap, so the outcome does not depend on the schedule.
  std::vector<std::vector<std::size_t>> prefixes{{}};
  const auto& vars = search.variables();
  for (std::size_t depth = 0; depth < std::min<std::size_t>(2, vars.size()); ++depth) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& p : prefixes) {
      for (auto c : vars[depth].candidates) {
        auto q = p;
        q.push_back(c);
        next.push_back(std::move(q));
      }
    }
    prefixes = std::move(next);
  }
  std::vector<CorrespondenceSearch::Outcome> outcomes(prefixes.size());
  const std::uint64_t cap = std::max<std::uint64_t>(1, budget / std::max<std::size_t>(1, prefixes.size()));
  if (greedy_dis > floor + kTolerance) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < prefixes.size(); ++i) outcomes[i] = search.search(prefixes[i], greedy_dis, floor, cap);
  }

  double best = greedy_dis;
  std::vector<std::size_t> choice = greedy_choice;
  bool complete = true;
  for (const auto& o : outcomes) {
    result.nodes += o.nodes;
    complete = complete && o.complete;
    if (!o.choice.empty() && o.best < best - kTolerance) {
      best = o.best;
      choice = o.choice;
    }
  }
  result.upper = best / 2;
  result.witness = correspondence_from(search, choice, x.size(), y.size());
  result.exact = complete || best <= floor + kTolerance;
  if (result.exact) {
    result.lower = result.upper;
  } else {
    result.lower = std::min(result.lower, result.upper);
  }
  return result;
}

class MapSearch {
 public:
  MapSearch(const FiniteMetricSpace& x, const FiniteMetricSpace& y) : x_(x), y_(y), gap_(pair_gaps(x, y)) {
    order_ = by_eccentricity(x);
    for (auto p : order_) {
      std::vector<std::size_t> cand(y.size());
      std::iota(cand.begin(), cand.end(), 0);
      std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
        return gap_[p * y.size() + a] < gap_[p * y.size() + b];
      });
      candidates_.push_back(std::move(cand));
    }
  }

  EvidenceItem run(std::uint64_t budget) {
    best_ = kInf;
    nodes_ = 0;
    cap_ = budget;
    complete_ = true;
    table_.assign(x_.size(), 0);
    // Greedy incumbent first.
    std::vector<std::uint32_t> f(x_.size(), 0);
    std::vector<std::size_t> placed;
    for (std::size_t k = 0; k < order_.size(); ++k) {
      double best = kInf;
      std::size_t pick = 0;
      for (auto c : candidates_[k]) {
        double inc = 0;
        for (auto q : placed) inc = std::max(inc, std::abs(x_.d(order_[k], q) - y_.d(c, f[q])));
        if (inc < best - kTolerance) {
          best = inc;
          pick = c;
        }
      }
      f[order_[k]] = static_cast<std::uint32_t>(pick);
      placed.push_back(order_[k]);
    }
    offer(f);
    std::vector<std::uint32_t> g(x_.size(), 0);
    recurse(0, 0, g);
    EvidenceItem item;
    item.map = table_;
    item.distortion = map_distortion(x_, y_, table_);
    item.density = map_density(x_, y_, table_);
    item.epsilon = std::max(item.distortion, item.density);
    item.exact = complete_;
    return item;
  }

 private:
  void offer(const std::vector<std::uint32_t>& f) {
    double eps = std::max(map_distortion(x_, y_, f), map_density(x_, y_, f));
    if (eps < best_ - kTolerance) {
      best_ = eps;
      table_ = f;
    }
  }

  void recurse(std::size_t depth, double dis, std::vector<std::uint32_t>& f) {
    if (!complete_) return;
    if (++nodes_ > cap_) {
      complete_ = false;
      return;
    }
    if (depth == order_.size()) {
      offer(f);
      return;
    }
    if (!coverable(depth, f)) return;
    const std::size_t p = order_[depth];
    for (auto c : candidates_[depth]) {
      // A pair gap bounds the distortion of every map through (p, c) from below
      // only for correspondences; for maps it is not a valid cut, so only the
      // partial distortion prunes here.
      double next = dis;
      for (std::size_t k = 0; k < depth && next < best_ - kTolerance; ++k) {
        std::size_t q = order_[k];
        next = std::max(next, std::abs(x_.d(p, q) - y_.d(c, f[q])));
      }
      if (next >= best_ - kTolerance) continue;
      f[p] = static_cast<std::uint32_t>(c);
      recurse(depth + 1, next, f);
      if (!complete_) return;
    }
  }

  /// Target points at distance >= best from the placed images, chosen
  /// pairwise >= 2 best apart, each need a different remaining image.
  bool coverable(std::size_t depth, const std::vector<std::uint32_t>& f) const {
    const std::size_t remaining = order_.size() - depth;
    std::vector<std::size_t> far;
    for (std::size_t v = 0; v < y_.size(); ++v) {
      bool covered = false;
      for (std::size_t k = 0; k < depth && !covered; ++k) covered = y_.d(v, f[order_[k]]) < best_ - kTolerance;
      if (covered) continue;
      bool separated = true;
      for (auto w : far) {
        if (y_.d(v, w) < 2 * best_ - kTolerance) {
          separated = false;
          break;
        }
      }
      if (separated) {
        far.push_back(v);
        if (far.size() > remaining) return false;
      }
    }
    return true;
  }

  const FiniteMetricSpace& x_;
  const FiniteMetricSpace& y_;
  std::vector<double> gap_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::size_t>> candidates_;
  double best_ = kInf;
  std::uint64_t nodes_ = 0;
  std::uint64_t cap_ = 0;
  bool complete_ = true;
  std::vector<std::uint32_t> table_;
};

}  // namespace

double hausdorff(const FiniteMetricSpace& ambient, const std::vector<std::size_t>& a,
                 const std::vector<std::size_t>& b) {
  if (a.empty() || b.empty()) throw ValidationError("Hausdorff distance needs nonempty subsets");
  for (auto v : a) {
    if (v >= ambient.size()) throw ValidationError("subset point outside the ambient space");
  }
  for (auto v : b) {
    if (v >= ambient.size()) throw ValidationError("subset point outside the ambient space");
  }
  double worst = 0;
  for (auto v : a) worst = std::max(worst, ambient.distance_to(v, b));
  for (auto v : b) worst = std::max(worst, ambient.distance_to(v, a));
  return worst;
}

double map_distortion(const FiniteMetricSpace& x, const FiniteMetricSpace& y, const std::vector<std::uint32_t>& f) {
  check_table(x, y, f);
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) worst = std::max(worst, std::abs(y.d(f[i], f[j]) - x.d(i, j)));
  }
  return worst;
}

double map_density(const FiniteMetricSpace& x, const FiniteMetricSpace& y, const std::vector<std::uint32_t>& f) {
  check_table(x, y, f);
  if (x.size() == 0) return y.size() == 0 ? 0 : kInf;
  std::vector<std::size_t> image(f.begin(), f.end());
  double worst = 0;
  for (std::size_t v = 0; v < y.size(); ++v) worst = std::max(worst, y.distance_to(v, image));
  return worst;
}

IsometryReport certify_eps_isometry(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                                    const std::vector<std::uint32_t>& f, double epsilon) {
  check_table(x, y, f);
  IsometryReport r;
  r.epsilon = epsilon;
  std::pair<std::size_t, std::size_t> worst_pair{0, 0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      double dev = std::abs(y.d(f[i], f[j]) - x.d(i, j));
      if (dev > r.distortion) {
        r.distortion = dev;
        worst_pair = {i, j};
      }
    }
  }
  std::vector<std::size_t> image(f.begin(), f.end());
  std::size_t worst_point = 0;
  for (std::size_t v = 0; v < y.size(); ++v) {
    double dv = image.empty() ? kInf : y.distance_to(v, image);
    if (dv > r.density) {
      r.density = dv;
      worst_point = v;
    }
  }
  if (r.distortion > epsilon + kTolerance) r.witness = worst_pair;
  if (r.density > epsilon + kTolerance) r.uncovered = worst_point;
  r.passed = !r.witness && !r.uncovered;
  return r;
}

IsometryReport certify_eps_isometry(const coarse::MapRecord& f, double epsilon) {
  f.check();
  return certify_eps_isometry(f.domain->metric_space(), f.codomain->metric_space(), f.table, epsilon);
}

double relation_distortion(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                           const std::vector<std::pair<std::size_t, std::size_t>>& relation) {
  double worst = 0;
  for (std::size_t i = 0; i < relation.size(); ++i) {
    for (std::size_t j = i + 1; j < relation.size(); ++j) {
      const auto& [a, b] = relation[i];
      const auto& [c, d] = relation[j];
      worst = std::max(worst, std::abs(x.d(a, c) - y.d(b, d)));
    }
  }
  return worst;
}

std::vector<std::pair<std::size_t, std::size_t>> relation_of(const Correspondence& c) {
  std::vector<std::pair<std::size_t, std::size_t>> r;
  for (std::size_t i = 0; i < c.forward.size(); ++i) r.emplace_back(i, c.forward[i]);
  for (std::size_t j = 0; j < c.backward.size(); ++j) r.emplace_back(c.backward[j], j);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

std::vector<std::pair<std::size_t, std::size_t>> compose(const std::vector<std::pair<std::size_t, std::size_t>>& r,
                                                         const std::vector<std::pair<std::size_t, std::size_t>>& s) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [a, b] : r) {
    for (const auto& [c, d] : s) {
      if (b == c) out.emplace_back(a, d);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double gh_lower_bound(const FiniteMetricSpace& x, const FiniteMetricSpace& y) {
  if (x.size() == 0 || y.size() == 0) throw ValidationError("GH bounds need nonempty spaces");
  double bound = std::abs(x.diameter() - y.diameter());
  auto gap = pair_gaps(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < y.size(); ++j) best = std::min(best, gap[i * y.size() + j]);
    bound = std::max(bound, best);
  }
  for (std::size_t j = 0; j < y.size(); ++j) {
    double best = kInf;
    for (std::size_t i = 0; i < x.size(); ++i) best = std::min(best, gap[i * y.size() + j]);
    bound = std::max(bound, best);
  }
  return bound / 2;
}

GHResult gh_bounds(const FiniteMetricSpace& x, const FiniteMetricSpace& y, std::uint64_t budget) {
  if (canonical_before(x, y)) return oriented_bounds(x, y, budget);
  GHResult r = oriented_bounds(y, x, budget);
  if (r.witness) std::swap(r.witness->forward, r.witness->backward);
  return r;
}

EvidenceItem best_eps_isometry(const FiniteMetricSpace& x, const FiniteMetricSpace& target, std::uint64_t budget) {
  if (x.size() == 0 || target.size() == 0) throw ValidationError("epsilon-isometry search needs nonempty spaces");
  MapSearch search(x, target);
  return search.run(budget);
}

ConvergenceEvidence convergence_evidence(const std::vector<FiniteMetricSpace>& sequence,
                                         const FiniteMetricSpace& target, std::uint64_t budget) {
  ConvergenceEvidence ev;
  ev.caveat = kTruncationCaveat;
  ev.items.resize(sequence.size());
  std::vector<std::string> errors(sequence.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    try {
      ev.items[k] = best_eps_isometry(sequence[k], target, budget);
    } catch (const Error& e) {
      errors[k] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw ValidationError(e);
  }
  ev.nonincreasing = true;
  for (std::size_t k = 1; k < ev.items.size(); ++k) {
    if (ev.items[k].epsilon > ev.items[k - 1].epsilon + 1e-9) ev.nonincreasing = false;
  }
  return ev;
}

namespace reference {

double min_relation_distortion(const FiniteMetricSpace& x, const FiniteMetricSpace& y) {
  const std::size_t nx = x.size();
  const std::size_t ny = y.size();
  if (nx == 0 || ny == 0) throw ValidationError("relations need nonempty spaces");
  if (nx * ny > 25) throw BudgetExceeded("full relation enumeration is limited to |X| * |Y| <= 25");
  const std::size_t cells = nx * ny;
  double best = kInf;
  std::vector<std::size_t> chosen;
  std::vector<double> running{0};
  std::vector<int> hx(nx, 0), hy(ny, 0);
  std::size_t covered_x = 0, covered_y = 0;
  // Include/exclude every cell; distortion and coverage are kept incrementally along the path.
  auto walk = [&](auto&& self, std::size_t cell) -> void {
    if (cell == cells) {
      if (covered_x == nx && covered_y == ny) best = std::min(best, running.back());
      return;
    }
    self(self, cell + 1);
    std::size_t a = cell / ny, b = cell % ny;
    double dis = running.back();
    for (auto c : chosen) dis = std::max(dis, std::abs(x.d(a, c / ny) - y.d(b, c % ny)));
    chosen.push_back(cell);
    running.push_back(dis);
    covered_x += hx[a]++ == 0;
    covered_y += hy[b]++ == 0;
    self(self, cell + 1);
    covered_x -= --hx[a] == 0;
    covered_y -= --hy[b] == 0;
    chosen.pop_back();
    running.pop_back();
  };
  walk(walk, 0);
  return best;
}

}  // namespace reference

}  // namespace boxcouple::gh
