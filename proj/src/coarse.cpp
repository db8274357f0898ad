#include "boxcouple/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boxcouple/errors.hpp"
#include "boxcouple/parallel.hpp"

namespace boxcouple::coarse {

namespace {

constexpr std::size_t kMaxDenseSpace = 4096;
constexpr std::size_t kFrontierTarget = 256;

// Integer control windows per domain distance, and the density threshold.
struct Rules {
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;
  std::int64_t density = 0;

  Rules(const ControlData& controls, std::int32_t max_t) {
    for (std::int32_t t = 0; t <= max_t; ++t) {
      auto [a, b] = controls.window(t);
      lo.push_back(a);
      hi.push_back(b);
    }
    density = controls.c.floor();
  }
  bool allows(std::int32_t t, std::int32_t s) const { return lo[t] <= s && s <= hi[t]; }
};

class Search {
 public:
  Search(const GroupSpace& x, const GroupSpace& y, const ControlData& controls, bool basepointed, bool injective)
      : x_(x), y_(y), rules_(controls, x.diameter()), basepointed_(basepointed), injective_(injective) {}

  std::size_t depth() const { return x_.size(); }

  // Candidate values for point k given a consistent prefix, in canonical order.
  template <typename Visit>
  void children(const Table& prefix, const std::vector<std::uint32_t>& used, Visit&& visit) const {
    const std::size_t k = prefix.size();
    if (basepointed_ && k == 0) {
      visit(0u);
      return;
    }
    for (std::uint32_t v = 0; v < y_.size(); ++v) {
      if (injective_ && used[v]) continue;
      bool ok = true;
      for (std::size_t j = 0; j < k && ok; ++j) {
        ok = rules_.allows(x_.d(j, k), y_.d(prefix[j], v));
      }
      if (ok) visit(v);
    }
  }

  bool dense(const Table& table) const {
    for (std::size_t yv = 0; yv < y_.size(); ++yv) {
      std::int32_t best = std::numeric_limits<std::int32_t>::max();
      for (auto fx : table) best = std::min(best, y_.d(yv, fx));
      if (best > rules_.density) return false;
    }
    return true;
  }

  // Depth-first exploration below `prefix`. Returns false when the node cap
  // was hit or the caller asked to stop.
  bool explore(Table& prefix, std::vector<std::uint32_t>& used, std::uint64_t& nodes, std::uint64_t cap,
               const std::function<bool()>& stop, std::vector<Table>& out) const {
    if (prefix.size() == depth()) {
      if (dense(prefix)) out.push_back(prefix);
      return true;
    }
    bool alive = true;
    children(prefix, used, [&](std::uint32_t v) {
      if (!alive) return;
      if (++nodes > cap || ((nodes & 4095) == 0 && stop && stop())) {
        alive = false;
        return;
      }
      prefix.push_back(v);
      ++used[v];
      alive = explore(prefix, used, nodes, cap, stop, out);
      --used[v];
      prefix.pop_back();
    });
    return alive;
  }

  std::vector<std::uint32_t> usage(const Table& prefix) const {
    std::vector<std::uint32_t> used(y_.size(), 0);
    for (auto v : prefix) ++used[v];
    return used;
  }

 private:
  const GroupSpace& x_;
  const GroupSpace& y_;
  Rules rules_;
  bool basepointed_;
  bool injective_;
};

void row_scan(const MapRecord& f, const Rules& rules, std::size_t x1, std::optional<PairWitness>& first,
              std::int64_t& worst) {
  const auto& X = *f.domain;
  const auto& Y = *f.codomain;
  for (std::size_t x2 = x1 + 1; x2 < X.size(); ++x2) {
    std::int32_t t = X.d(x1, x2);
    std::int32_t s = Y.d(f.table[x1], f.table[x2]);
    worst = std::max<std::int64_t>(worst, std::abs(s - t));
    if (!first && !rules.allows(t, s)) first = PairWitness{x1, x2, t, s, s < rules.lo[t]};
  }
}

std::uint64_t saturating_pow(std::uint64_t base, std::int64_t exp, bool& saturated) {
  std::uint64_t out = 1;
  for (std::int64_t i = 0; i < exp; ++i) {
    if (base != 0 && out > std::numeric_limits<std::uint64_t>::max() / base) {
      saturated = true;
      return std::numeric_limits<std::uint64_t>::max();
    }
    out *= base;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// GroupSpace

std::shared_ptr<const GroupSpace> GroupSpace::from_quotient(std::shared_ptr<const groups::FiniteQuotient> q) {
  return tag_product(std::move(q), 1);
}

std::shared_ptr<const GroupSpace> GroupSpace::tag_product(std::shared_ptr<const groups::FiniteQuotient> q,
                                                          std::size_t tags) {
  if (!q) throw ValidationError("group space needs a quotient");
  if (tags == 0) throw ValidationError("tag group must be nonempty");
  const std::size_t n = q->order();
  if (n * tags > kMaxDenseSpace) {
    throw BudgetExceeded("group space of " + std::to_string(n * tags) + " points exceeds the dense-table limit of " +
                         std::to_string(kMaxDenseSpace));
  }
  std::shared_ptr<GroupSpace> s(new GroupSpace());
  s->base_ = q;
  s->tags_ = tags;
  s->size_ = n * tags;
  std::vector<std::uint32_t> base_mult(n * n);
  std::vector<std::int32_t> base_dist(n * n);
#pragma omp parallel for schedule(static)
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      base_mult[x * n + y] = static_cast<std::uint32_t>(q->multiply(x, y));
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t inv = q->inverse(x);
    for (std::size_t y = 0; y < n; ++y) base_dist[x * n + y] = q->distance_from_identity(base_mult[inv * n + y]);
  }
  const std::size_t N = s->size_;
  s->dist_.resize(N * N);
  s->mult_.resize(N * N);
  s->inv_.resize(N);
  for (std::size_t a = 0; a < N; ++a) {
    std::size_t xa = a / tags;
    std::size_t ia = a % tags;
    s->inv_[a] = static_cast<std::uint32_t>(q->inverse(xa) * tags + (tags - ia) % tags);
    for (std::size_t b = 0; b < N; ++b) {
      std::size_t xb = b / tags;
      std::size_t ib = b % tags;
      s->dist_[a * N + b] = base_dist[xa * n + xb] + (ia != ib ? 1 : 0);
      s->mult_[a * N + b] = static_cast<std::uint32_t>(base_mult[xa * n + xb] * tags + (ia + ib) % tags);
      s->diameter_ = std::max(s->diameter_, s->dist_[a * N + b]);
    }
  }
  return s;
}

std::string GroupSpace::label(std::size_t a) const {
  std::string out = format_key(base_->key(base_of(a)));
  if (tags_ > 1) out += "#" + std::to_string(tag_of(a));
  return out;
}

FiniteMetricSpace GroupSpace::metric_space() const {
  std::vector<std::string> labels(size_);
  std::vector<double> m(dist_.begin(), dist_.end());
  for (std::size_t a = 0; a < size_; ++a) labels[a] = label(a);
  return FiniteMetricSpace(std::move(labels), std::move(m), false);
}

// ---------------------------------------------------------------------------
// Verification

void MapRecord::check() const {
  if (!domain || !codomain) throw ValidationError("map needs a domain and a codomain");
  if (table.size() != domain->size()) {
    throw ValidationError("map table has " + std::to_string(table.size()) + " entries for a domain of " +
                          std::to_string(domain->size()));
  }
  for (auto v : table) {
    if (v >= codomain->size()) throw ValidationError("map value " + std::to_string(v) + " outside the codomain");
  }
}

std::int64_t density_radius(const MapRecord& f) {
  f.check();
  const auto& Y = *f.codomain;
  std::int64_t worst = 0;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (std::size_t y = 0; y < Y.size(); ++y) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (auto fx : f.table) best = std::min<std::int64_t>(best, Y.d(y, fx));
    worst = std::max(worst, best);
  }
  return worst;
}

VerifyReport verify(const MapRecord& f, const ControlData& controls, Mode mode) {
  f.check();
  Rules rules(controls, f.domain->diameter());
  const std::size_t n = f.domain->size();
  std::vector<std::optional<PairWitness>> first(n);
  std::vector<std::int64_t> worst(n, 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t x1 = 0; x1 < n; ++x1) row_scan(f, rules, x1, first[x1], worst[x1]);

  VerifyReport report;
  report.mode = mode;
  for (std::size_t x1 = 0; x1 < n; ++x1) {
    if (!report.violation && first[x1]) report.violation = first[x1];
    report.distortion = std::max(report.distortion, worst[x1]);
  }
  const auto& Y = *f.codomain;
  for (std::size_t y = 0; y < Y.size(); ++y) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (auto fx : f.table) best = std::min<std::int64_t>(best, Y.d(y, fx));
    report.density_radius = std::max(report.density_radius, best);
    if (!report.uncovered && best > rules.density) report.uncovered = y;
  }
  report.embedding = !report.violation;
  report.equivalence = report.embedding && !report.uncovered;
  return report;
}

std::int64_t distortion(const MapRecord& f) {
  f.check();
  const auto& X = *f.domain;
  const auto& Y = *f.codomain;
  std::int64_t worst = 0;
#pragma omp parallel for schedule(dynamic, 4) reduction(max : worst)
  for (std::size_t a = 0; a < X.size(); ++a) {
    for (std::size_t b = a + 1; b < X.size(); ++b) {
      worst = std::max<std::int64_t>(worst, std::abs(Y.d(f.table[a], f.table[b]) - X.d(a, b)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Enumeration

std::optional<std::size_t> MapSpace::find(const Table& table) const {
  auto it = std::lower_bound(members.begin(), members.end(), table);
  if (it == members.end() || *it != table) return std::nullopt;
  return static_cast<std::size_t>(it - members.begin());
}

MapSpace enumerate_map_space(std::shared_ptr<const GroupSpace> domain, std::shared_ptr<const GroupSpace> codomain,
                             const ControlData& controls, bool basepointed, bool injective_required,
                             std::uint64_t budget) {
  if (!domain || !codomain) throw ValidationError("map space needs a domain and a codomain");
  if (budget == 0) throw ValidationError("node budget must be positive");
  controls.validate(domain->diameter());
  MapSpace space;
  space.domain = domain;
  space.codomain = codomain;
  space.controls = controls;
  space.basepointed = basepointed;
  space.injective_required = injective_required;
  space.budget = budget;

  Search search(*domain, *codomain, controls, basepointed, injective_required);

  // Breadth-first expansion to a frontier whose size does not depend on the
  // thread count, so the budgeted prefix is schedule independent.
  std::vector<Table> frontier{Table{}};
  std::uint64_t nodes = 0;
  while (!frontier.empty() && frontier.front().size() < search.depth() && frontier.size() < kFrontierTarget) {
    std::vector<Table> next;
    for (const auto& prefix : frontier) {
      auto used = search.usage(prefix);
      search.children(prefix, used, [&](std::uint32_t v) {
        Table t = prefix;
        t.push_back(v);
        next.push_back(std::move(t));
      });
    }
    nodes += next.size();
    frontier = std::move(next);
    if (nodes > budget) {
      space.complete = false;
      space.nodes = nodes;
      return space;
    }
  }

  std::vector<std::vector<Table>> found(frontier.size());
  auto outcome = parallel::explore_prefix(
      frontier.size(), budget - nodes,
      [&](std::size_t i, std::uint64_t cap, const std::function<bool()>& stop) -> std::uint64_t {
        Table prefix = frontier[i];
        auto used = search.usage(prefix);
        std::uint64_t count = 0;
        bool finished = search.explore(prefix, used, count, cap, stop, found[i]);
        if (!finished && count <= cap) count = cap + 1;  // stopped early: never part of the prefix
        return count;
      });
  for (std::size_t i = 0; i < outcome.completed_prefix; ++i) {
    for (auto& t : found[i]) space.members.push_back(std::move(t));
  }
  space.complete = outcome.complete;
  space.nodes = nodes + outcome.nodes;
  return space;
}

InjectiveLift make_injective(const MapRecord& f, const ControlData& controls) {
  f.check();
  if (f.codomain->tags() != 1) throw ValidationError("codomain already carries tags");
  std::vector<std::size_t> fiber(f.codomain->size(), 0);
  std::vector<std::size_t> tag(f.table.size());
  std::size_t tags = 1;
  for (std::size_t x = 0; x < f.table.size(); ++x) {
    tag[x] = fiber[f.table[x]]++;
    tags = std::max(tags, fiber[f.table[x]]);
  }
  InjectiveLift lift;
  lift.tags = tags;
  lift.map.domain = f.domain;
  lift.map.codomain = GroupSpace::tag_product(f.codomain->base_ptr(), tags);
  lift.map.table.resize(f.table.size());
  for (std::size_t x = 0; x < f.table.size(); ++x) {
    lift.map.table[x] = static_cast<std::uint32_t>(lift.map.codomain->point(f.table[x], tag[x]));
  }
  lift.adjusted = controls;
  if (tags > 1) {
    lift.adjusted.rho_plus = controls.rho_plus.plus(Rational(1));
    lift.adjusted.c = controls.c + Rational(1);
  }
  return lift;
}

// ---------------------------------------------------------------------------
// Ultrametric, nets, action

std::optional<std::int64_t> agreement_radius(const GroupSpace& domain, const Table& a, const Table& b) {
  if (a.size() != domain.size() || b.size() != domain.size()) {
    throw ValidationError("map tables do not match the domain");
  }
  std::optional<std::int64_t> first;
  for (std::size_t x = 0; x < a.size(); ++x) {
    if (a[x] != b[x] && (!first || domain.norm(x) < *first)) first = domain.norm(x);
  }
  if (!first) return std::nullopt;
  return *first - 1;
}

double map_distance(const GroupSpace& domain, const Table& a, const Table& b) {
  auto r = agreement_radius(domain, a, b);
  if (!r) return 0.0;
  if (*r < 0) return 1.0;
  return std::ldexp(1.0, static_cast<int>(-*r));
}

FiniteMetricSpace map_space_metric(const MapSpace& space, const std::vector<std::size_t>& members) {
  std::vector<std::size_t> chosen = members;
  if (chosen.empty()) {
    chosen.resize(space.members.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
  }
  const std::size_t n = chosen.size();
  std::vector<std::string> labels;
  for (auto i : chosen) {
    const auto& t = space.members.at(i);
    std::string label;
    for (std::size_t k = 0; k < t.size(); ++k) label += (k ? "," : "") + std::to_string(t[k]);
    labels.push_back(std::move(label));
  }
  std::vector<double> matrix(n * n, 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = map_distance(*space.domain, space.members[chosen[i]], space.members[chosen[j]]);
      matrix[i * n + j] = d;
      matrix[j * n + i] = d;
    }
  }
  return FiniteMetricSpace(std::move(labels), std::move(matrix));
}

EpsNet eps_net(const MapSpace& space, std::int64_t radius) {
  if (!space.complete) throw ValidationError("eps_net needs a fully enumerated map space");
  if (radius < 0) throw ValidationError("net radius must be nonnegative");
  const auto& X = *space.domain;
  std::size_t ball = 0;
  while (ball < X.size() && X.norm(ball) <= radius) ++ball;

  EpsNet out;
  out.fiber_of.resize(space.members.size());
  for (std::size_t i = 0; i < space.members.size(); ++i) {
    const auto& t = space.members[i];
    bool fresh = out.net.empty() ||
                 !std::equal(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(ball),
                             space.members[out.net.back()].begin());
    if (fresh) out.net.push_back(i);
    out.fiber_of[i] = out.net.size() - 1;
  }

  auto& cert = out.certificate;
  cert.radius = radius;
  cert.members = space.members.size();
  cert.net_size = out.net.size();
  double worst = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(max : worst)
  for (std::size_t i = 0; i < space.members.size(); ++i) {
    double best = 1.0;
    for (auto j : out.net) best = std::min(best, map_distance(X, space.members[i], space.members[j]));
    worst = std::max(worst, best);
  }
  cert.max_distance_to_net = worst;
  cert.net_property = worst <= std::ldexp(1.0, static_cast<int>(-std::min<std::int64_t>(radius, 1000)));
  cert.generators_domain = X.base().parent().generators().size();
  cert.generators_codomain = space.codomain->base().parent().generators().size();
  cert.rho_plus_ceiling = space.controls.rho_plus(Rational(radius)).ceil();
  bool saturated = false;
  std::uint64_t a = saturating_pow(cert.generators_domain, radius, saturated);
  std::uint64_t b = saturating_pow(cert.generators_codomain, std::max<std::int64_t>(cert.rho_plus_ceiling, 0), saturated);
  if (!saturated && a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) saturated = true;
  cert.bound_saturated = saturated;
  cert.bound = saturated ? std::numeric_limits<std::uint64_t>::max() : a * b;
  cert.cardinality_ok = saturated || cert.net_size <= cert.bound;

  const auto& Y = *space.codomain;
  std::uint64_t targets = Y.size();
  std::int64_t free_points = static_cast<std::int64_t>(ball);
  if (space.basepointed) {
    targets = 0;
    for (std::size_t y = 0; y < Y.size(); ++y) targets += Y.norm(y) <= cert.rho_plus_ceiling ? 1 : 0;
    free_points -= 1;
  }
  bool corrected_saturated = false;
  cert.corrected_bound = saturating_pow(targets, free_points, corrected_saturated);
  cert.corrected_saturated = corrected_saturated;
  cert.corrected_ok = corrected_saturated || cert.net_size <= cert.corrected_bound;
  return out;
}

Table act_table(const GroupSpace& domain, const GroupSpace& codomain, std::size_t g, const Table& phi) {
  if (phi.size() != domain.size()) throw ValidationError("map table does not match the domain");
  std::size_t ginv = domain.inverse(g);
  std::size_t shift = codomain.inverse(phi[ginv]);
  Table out(phi.size());
  for (std::size_t x = 0; x < phi.size(); ++x) {
    out[x] = static_cast<std::uint32_t>(codomain.multiply(shift, phi[domain.multiply(ginv, x)]));
  }
  return out;
}

ActResult act(const MapSpace& space, std::span<const std::size_t> word, const Table& phi) {
  const auto& X = *space.domain;
  if (X.tags() != 1) throw ValidationError("the acting group needs an untagged domain");
  std::size_t g = X.base().evaluate(word);
  ActResult result;
  result.table = act_table(X, *space.codomain, g, phi);
  result.member = space.find(result.table);
  result.report = verify(MapRecord{space.domain, space.codomain, result.table}, space.controls, Mode::equivalence);
  return result;
}

// ---------------------------------------------------------------------------
// Serial references

namespace reference {

VerifyReport verify(const MapRecord& f, const ControlData& controls, Mode mode) {
  f.check();
  const auto& X = *f.domain;
  const auto& Y = *f.codomain;
  VerifyReport report;
  report.mode = mode;
  for (std::size_t a = 0; a < X.size(); ++a) {
    for (std::size_t b = a + 1; b < X.size(); ++b) {
      Rational t(X.d(a, b));
      Rational s(Y.d(f.table[a], f.table[b]));
      report.distortion = std::max<std::int64_t>(report.distortion, std::llabs(s.num() - t.num()));
      bool low = s < controls.rho_minus(t);
      bool high = s > controls.rho_plus(t);
      if (!report.violation && (low || high)) {
        report.violation = PairWitness{a, b, t.num(), s.num(), low};
      }
    }
  }
  for (std::size_t y = 0; y < Y.size(); ++y) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (auto fx : f.table) best = std::min<std::int64_t>(best, Y.d(y, fx));
    report.density_radius = std::max(report.density_radius, best);
    if (!report.uncovered && Rational(best) > controls.c) report.uncovered = y;
  }
  report.embedding = !report.violation;
  report.equivalence = report.embedding && !report.uncovered;
  return report;
}

std::vector<Table> enumerate(const GroupSpace& domain, const GroupSpace& codomain, const ControlData& controls,
                             bool basepointed, bool injective_required) {
  Search search(domain, codomain, controls, basepointed, injective_required);
  Table prefix;
  std::vector<std::uint32_t> used(codomain.size(), 0);
  std::uint64_t nodes = 0;
  std::vector<Table> out;
  search.explore(prefix, used, nodes, std::numeric_limits<std::uint64_t>::max(), {}, out);
  return out;
}

bool net_property(const MapSpace& space, const EpsNet& net) {
  double limit = std::ldexp(1.0, static_cast<int>(-net.certificate.radius));
  for (const auto& member : space.members) {
    bool covered = false;
    for (auto j : net.net) covered = covered || map_distance(*space.domain, member, space.members[j]) <= limit;
    if (!covered) return false;
  }
  return true;
}

}  // namespace reference

}  // namespace boxcouple::coarse
