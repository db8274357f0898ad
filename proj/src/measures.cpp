#include "boxcouple/measures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include "boxcouple/errors.hpp"

namespace boxcouple::measures {

namespace {

constexpr double kFlowEpsilon = 1e-15;
constexpr double kCompareTolerance = 1e-12;

void require_common_space(const FiniteMeasure& a, const FiniteMeasure& b) {
  if (a.space_ptr() != b.space_ptr() && !(a.space() == b.space())) {
    throw ValidationError("measures live on different spaces");
  }
}

/// Dinic max-flow on a unit-depth bipartite network with real capacities.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes) : adj_(nodes), level_(nodes), cursor_(nodes) {}

  void add_edge(std::size_t u, std::size_t v, double cap) {
    adj_[u].push_back(edges_.size());
    edges_.push_back({v, cap});
    adj_[v].push_back(edges_.size());
    edges_.push_back({u, 0});
  }

  double max_flow(std::size_t s, std::size_t t) {
    double total = 0;
    while (bfs(s, t)) {
      std::fill(cursor_.begin(), cursor_.end(), 0);
      while (true) {
        double pushed = dfs(s, t, std::numeric_limits<double>::infinity());
        if (pushed <= kFlowEpsilon) break;
        total += pushed;
      }
    }
    return total;
  }

 private:
  struct Edge {
    std::size_t to;
    double cap;
  };

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (auto e : adj_[u]) {
        if (edges_[e].cap > kFlowEpsilon && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(std::size_t u, std::size_t t, double limit) {
    if (u == t) return limit;
    for (auto& i = cursor_[u]; i < adj_[u].size(); ++i) {
      auto e = adj_[u][i];
      auto v = edges_[e].to;
      if (edges_[e].cap > kFlowEpsilon && level_[v] == level_[u] + 1) {
        double got = dfs(v, t, std::min(limit, edges_[e].cap));
        if (got > kFlowEpsilon) {
          edges_[e].cap -= got;
          edges_[e ^ 1].cap += got;
          return got;
        }
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> cursor_;
};

/// sup_A a(A) - b(A^eta) = 1 - maxflow, by max-flow/min-cut on the
/// bipartite graph of pairs within distance eta.
double flow_deficiency(const FiniteMeasure& a, const FiniteMeasure& b, double eta) {
  const std::size_t n = a.size();
  const auto& s = a.space();
  FlowNetwork net(2 * n + 2);
  const std::size_t src = 2 * n, sink = 2 * n + 1;
  for (std::size_t x = 0; x < n; ++x) {
    if (a[x] > 0) net.add_edge(src, x, a[x]);
    if (b[x] > 0) net.add_edge(n + x, sink, b[x]);
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (a[x] <= 0) continue;
    for (std::size_t y = 0; y < n; ++y) {
      if (b[y] > 0 && s.d(x, y) <= eta) net.add_edge(x, n + y, 2.0);
    }
  }
  double total_a = std::accumulate(a.weights().begin(), a.weights().end(), 0.0);
  return std::max(0.0, total_a - net.max_flow(src, sink));
}

/// Subset sweep with the ground set split into low and high halves, so the
/// neighborhood and mass of every subset come from two table lookups. The
/// same tables give the mass of any mask, neighborhoods included.
double sweep_deficiency(const FiniteMeasure& a, const FiniteMeasure& b, double eta) {
  const std::size_t n = a.size();
  const auto& s = a.space();
  const std::size_t lo_bits = n / 2;
  const std::size_t hi_bits = n - lo_bits;
  const std::uint32_t lo_mask = (1u << lo_bits) - 1;
  std::vector<std::uint32_t> nbr(n, 0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (s.d(x, y) <= eta) nbr[x] |= 1u << y;
    }
  }
  auto tables = [&](std::size_t offset, std::size_t bits, std::vector<std::uint32_t>& hood, std::vector<double>& ma,
                    std::vector<double>& mb) {
    std::size_t count = std::size_t{1} << bits;
    hood.assign(count, 0);
    ma.assign(count, 0);
    mb.assign(count, 0);
    for (std::size_t m = 1; m < count; ++m) {
      std::size_t low = static_cast<std::size_t>(std::countr_zero(static_cast<std::uint32_t>(m)));
      std::size_t rest = m & (m - 1);
      hood[m] = hood[rest] | nbr[offset + low];
      ma[m] = ma[rest] + a[offset + low];
      mb[m] = mb[rest] + b[offset + low];
    }
  };
  std::vector<std::uint32_t> hood_lo, hood_hi;
  std::vector<double> a_lo, b_lo, a_hi, b_hi;
  tables(0, lo_bits, hood_lo, a_lo, b_lo);
  tables(lo_bits, hi_bits, hood_hi, a_hi, b_hi);
  double worst = 0;
  const std::int64_t hi_count = std::int64_t{1} << hi_bits;
  const std::size_t lo_count = std::size_t{1} << lo_bits;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (std::int64_t h = 0; h < hi_count; ++h) {
    for (std::size_t l = 0; l < lo_count; ++l) {
      std::uint32_t hood = hood_lo[l] | hood_hi[static_cast<std::size_t>(h)];
      double a_set = a_lo[l] + a_hi[static_cast<std::size_t>(h)];
      double b_set = b_lo[l] + b_hi[static_cast<std::size_t>(h)];
      double a_hood = a_lo[hood & lo_mask] + a_hi[hood >> lo_bits];
      double b_hood = b_lo[hood & lo_mask] + b_hi[hood >> lo_bits];
      worst = std::max(worst, std::max(a_set - b_hood, b_set - a_hood));
    }
  }
  return worst;
}

ProkhorovMethod resolve(ProkhorovMethod method, std::size_t n) {
  if (method == ProkhorovMethod::automatic) return n <= kSweepLimit ? ProkhorovMethod::sweep : ProkhorovMethod::flow;
  if (method == ProkhorovMethod::sweep && n > kSweepLimit) {
    throw BudgetExceeded("exact subset sweep is limited to " + std::to_string(kSweepLimit) + " points, got " +
                         std::to_string(n) + "; use the flow mode");
  }
  return method;
}

}  // namespace

GroupAction::GroupAction(std::size_t size, std::vector<std::string> symbols, std::vector<std::size_t> inverse,
                         std::vector<std::vector<std::uint32_t>> permutations)
    : size_(size), symbols_(std::move(symbols)), inverse_(std::move(inverse)), perms_(std::move(permutations)) {
  const std::size_t k = symbols_.size();
  if (inverse_.size() != k || perms_.size() != k) throw ValidationError("group action tables have mismatched sizes");
  for (std::size_t i = 0; i < k; ++i) {
    if (perms_[i].size() != size_) throw ValidationError("generator " + symbols_[i] + " has a table of wrong size");
    std::vector<char> seen(size_, 0);
    for (auto v : perms_[i]) {
      if (v >= size_ || seen[v]) throw ValidationError("generator " + symbols_[i] + " does not act as a bijection");
      seen[v] = 1;
    }
    if (inverse_[i] >= k) throw ValidationError("inverse index out of range for " + symbols_[i]);
  }
  for (std::size_t i = 0; i < k; ++i) {
    const auto& p = perms_[i];
    const auto& q = perms_[inverse_[i]];
    for (std::size_t x = 0; x < size_; ++x) {
      if (q[p[x]] != x) {
        throw ValidationError("generator " + symbols_[inverse_[i]] + " does not act as the inverse of " + symbols_[i]);
      }
    }
  }
}

GroupAction GroupAction::regular(const groups::FiniteQuotient& q) {
  const auto& gens = q.parent().generators();
  std::vector<std::string> symbols;
  std::vector<std::size_t> inverse;
  std::vector<std::vector<std::uint32_t>> perms;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    symbols.push_back(gens[i].symbol);
    inverse.push_back(gens[i].inverse);
    std::vector<std::uint32_t> p(q.order());
    for (std::size_t x = 0; x < q.order(); ++x) p[x] = static_cast<std::uint32_t>(q.multiply(q.generator_image(i), x));
    perms.push_back(std::move(p));
  }
  return GroupAction(q.order(), std::move(symbols), std::move(inverse), std::move(perms));
}

std::size_t GroupAction::apply(std::span<const std::size_t> word, std::size_t x) const {
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (*it >= perms_.size()) throw ValidationError("word letter out of range");
    x = perms_[*it][x];
  }
  return x;
}

std::vector<std::uint32_t> GroupAction::permutation_of(std::span<const std::size_t> word) const {
  std::vector<std::uint32_t> p(size_);
  for (std::size_t x = 0; x < size_; ++x) p[x] = static_cast<std::uint32_t>(apply(word, x));
  return p;
}

std::vector<std::size_t> GroupAction::inverse_word(std::span<const std::size_t> word) const {
  std::vector<std::size_t> out;
  for (auto it = word.rbegin(); it != word.rend(); ++it) out.push_back(inverse_[*it]);
  return out;
}

std::vector<std::size_t> GroupAction::parse_word(std::string_view text) const {
  std::vector<std::size_t> word;
  std::string token;
  auto flush = [&]() {
    if (token.empty() || token == "1") {
      token.clear();
      return;
    }
    auto it = std::find(symbols_.begin(), symbols_.end(), token);
    if (it == symbols_.end()) throw ValidationError("unknown generator symbol '" + token + "'");
    word.push_back(static_cast<std::size_t>(it - symbols_.begin()));
    token.clear();
  };
  for (char c : text) {
    if (c == ' ' || c == '*' || c == '.') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return word;
}

std::string GroupAction::format_word(std::span<const std::size_t> word) const {
  if (word.empty()) return "1";
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out += ' ';
    out += symbols_.at(word[i]);
  }
  return out;
}

void GroupAction::check_relators(const std::vector<std::vector<std::size_t>>& relators) const {
  for (const auto& r : relators) {
    for (std::size_t x = 0; x < size_; ++x) {
      if (apply(r, x) != x) {
        throw ValidationError("relator " + format_word(r) + " moves point " + std::to_string(x));
      }
    }
  }
}

FiniteMeasure::FiniteMeasure(std::shared_ptr<const FiniteMetricSpace> space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  if (!space_) throw ValidationError("measure needs a space");
  if (weights_.size() != space_->size()) throw ValidationError("weight vector does not match the space size");
  double total = 0;
  for (double w : weights_) {
    if (!(w >= 0) || !std::isfinite(w)) throw ValidationError("measure weights must be finite and nonnegative");
    total += w;
  }
  if (std::abs(total - 1) > kMassTolerance * std::max<double>(1, static_cast<double>(weights_.size()))) {
    throw ValidationError("measure weights sum to " + std::to_string(total) + ", not 1");
  }
}

FiniteMeasure uniform(std::shared_ptr<const FiniteMetricSpace> space) {
  if (!space || space->size() == 0) throw ValidationError("uniform measure needs a nonempty space");
  std::size_t n = space->size();
  return FiniteMeasure(space, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

FiniteMeasure point_mass(std::shared_ptr<const FiniteMetricSpace> space, std::size_t x) {
  if (!space || x >= space->size()) throw ValidationError("point mass outside the space");
  std::vector<double> w(space->size(), 0);
  w[x] = 1;
  return FiniteMeasure(space, std::move(w));
}

FiniteMeasure pushforward(const FiniteMeasure& mu, const std::vector<std::uint32_t>& f,
                          std::shared_ptr<const FiniteMetricSpace> codomain) {
  if (f.size() != mu.size()) throw ValidationError("map is not total on the measure's space");
  std::vector<double> w(codomain->size(), 0);
  // Fibers are summed in domain order, so the result is reproducible.
  for (std::size_t x = 0; x < f.size(); ++x) {
    if (f[x] >= w.size()) throw ValidationError("map value outside the codomain");
    w[f[x]] += mu[x];
  }
  return FiniteMeasure(std::move(codomain), std::move(w));
}

double total_variation(const FiniteMeasure& a, const FiniteMeasure& b) {
  require_common_space(a, b);
  double pos = 0, neg = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    (d > 0 ? pos : neg) += std::abs(d);
  }
  return std::max(pos, neg);
}

double deficiency(const FiniteMeasure& a, const FiniteMeasure& b, double eta, ProkhorovMethod method) {
  require_common_space(a, b);
  if (resolve(method, a.size()) == ProkhorovMethod::sweep) return sweep_deficiency(a, b, eta);
  return std::max(flow_deficiency(a, b, eta), flow_deficiency(b, a, eta));
}

ProkhorovResult prokhorov(const FiniteMeasure& a, const FiniteMeasure& b, ProkhorovMethod method) {
  require_common_space(a, b);
  method = resolve(method, a.size());
  ProkhorovResult result;
  result.exact = method == ProkhorovMethod::sweep;
  result.method = result.exact ? "sweep" : "flow";
  if (a.weights() == b.weights()) return result;

  // The deficiency m is a nonincreasing step function that only drops at
  // distance values, so the infimum of {eta : m(eta) <= eta} is
  // min(d_i*, m(d_{i*-1})) for the first breakpoint d_i* with m(d_i*) <= d_i*.
  std::vector<double> breaks{0};
  const auto& s = a.space();
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) breaks.push_back(s.d(i, j));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  if (breaks.back() < 1) breaks.push_back(1);  // m(1) <= 1 always holds

  std::vector<double> cache(breaks.size(), -1);
  auto m = [&](std::size_t i) {
    if (cache[i] < 0) cache[i] = deficiency(a, b, breaks[i], method);
    return cache[i];
  };
  std::size_t lo = 0, hi = breaks.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (m(mid) <= breaks[mid] + kCompareTolerance) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  result.value = lo == 0 ? 0.0 : std::min(breaks[lo], m(lo - 1));
  return result;
}

FiniteMeasure translate(std::span<const std::size_t> word, const FiniteMeasure& mu, const GroupAction& action) {
  if (action.size() != mu.size()) throw ValidationError("action and measure live on different spaces");
  std::vector<double> w(mu.size(), 0);
  for (std::size_t x = 0; x < mu.size(); ++x) w[action.apply(word, x)] = mu[x];
  return FiniteMeasure(mu.space_ptr(), std::move(w));
}

DefectReport invariance_defect(const FiniteMeasure& mu, const GroupAction& action, std::size_t max_length,
                               ProkhorovMethod method) {
  if (action.size() != mu.size()) throw ValidationError("action and measure live on different spaces");
  method = resolve(method, mu.size());
  // Breadth-first over group elements in shortlex order of their first word.
  std::map<std::vector<std::uint32_t>, std::size_t> seen;
  std::vector<std::vector<std::size_t>> words{{}};
  std::vector<std::vector<std::uint32_t>> perms{action.permutation_of({})};
  seen.emplace(perms[0], 0);
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_length; ++len) {
    std::size_t end = words.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t s = 0; s < action.generator_count(); ++s) {
        auto w = words[i];
        w.push_back(s);
        std::vector<std::uint32_t> p(action.size());
        const auto& gen = action.permutation(s);
        for (std::size_t x = 0; x < p.size(); ++x) p[x] = perms[i][gen[x]];
        if (seen.emplace(p, words.size()).second) {
          words.push_back(std::move(w));
          perms.push_back(std::move(p));
        }
      }
    }
    begin = end;
  }

  DefectReport report;
  report.exact = method == ProkhorovMethod::sweep;
  report.rows.resize(words.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto moved = translate(words[i], mu, action);
    report.rows[i] = {action.format_word(words[i]), total_variation(moved, mu), prokhorov(moved, mu, method).value};
  }
  report.worst_word = "1";
  for (const auto& row : report.rows) {
    report.max_tv = std::max(report.max_tv, row.tv);
    if (row.prokhorov > report.max_prokhorov) {
      report.max_prokhorov = row.prokhorov;
      report.worst_word = row.word;
    }
  }
  return report;
}

std::string to_csv(const DefectReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "word,tv,prokhorov\n";
  for (const auto& row : report.rows) out << row.word << ',' << row.tv << ',' << row.prokhorov << '\n';
  return out.str();
}

WeakStarEvidence weak_star_evidence(const std::vector<FiniteMeasure>& sequence, ProkhorovMethod method) {
  if (sequence.empty()) throw ValidationError("weak* evidence needs a nonempty sequence");
  for (const auto& mu : sequence) require_common_space(sequence.front(), mu);
  const std::size_t k = sequence.size();
  method = resolve(method, sequence.front().size());
  WeakStarEvidence ev;
  ev.limit = sequence.back();
  ev.exact = method == ProkhorovMethod::sweep;
  ev.table.assign(k, std::vector<double>(k, 0));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) ev.table[i][j] = prokhorov(sequence[i], sequence[j], method).value;
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < i; ++j) ev.table[i][j] = ev.table[j][i];
  }
  ev.envelope.assign(k, 0);
  for (std::size_t m = k; m-- > 0;) {
    double row = 0;
    for (std::size_t j = m; j < k; ++j) row = std::max(row, ev.table[m][j]);
    ev.envelope[m] = std::max(row, m + 1 < k ? ev.envelope[m + 1] : 0.0);
  }
  if (k == 1) {
    ev.cauchy = true;
  } else {
    double tail = ev.envelope[k - 2];
    double half = ev.envelope[(k - 1) / 2];
    ev.cauchy = tail <= kCauchyTolerance && (half == 0 || tail < half);
  }
  return ev;
}

namespace reference {

double deficiency(const FiniteMeasure& a, const FiniteMeasure& b, double eta) {
  const std::size_t n = a.size();
  if (n > 20) throw BudgetExceeded("reference sweep is limited to 20 points");
  const auto& s = a.space();
  double worst = 0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    double a_set = 0, b_set = 0, a_hood = 0, b_hood = 0;
    for (std::size_t y = 0; y < n; ++y) {
      bool in = mask >> y & 1u;
      bool near = false;
      for (std::size_t x = 0; x < n && !near; ++x) near = (mask >> x & 1u) && s.d(x, y) <= eta;
      if (in) {
        a_set += a[y];
        b_set += b[y];
      }
      if (near) {
        a_hood += a[y];
        b_hood += b[y];
      }
    }
    worst = std::max({worst, a_set - b_hood, b_set - a_hood});
  }
  return worst;
}

}  // namespace reference

}  // namespace boxcouple::measures
