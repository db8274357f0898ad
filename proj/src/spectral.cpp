#include "boxcouple/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "boxcouple/errors.hpp"

namespace boxcouple::spectral {

namespace {

bool better(const Conductance& a, const Conductance& b) {
  __int128 lhs = __int128{a.boundary} * b.volume;
  __int128 rhs = __int128{b.boundary} * a.volume;
  if (lhs != rhs) return lhs < rhs;
  return a.witness < b.witness;
}

std::vector<std::uint64_t> masks_of(const Graph& g) {
  if (g.order() > 30) throw ValidationError("exact Cheeger sweep limited to 30 vertices");
  std::vector<std::uint64_t> masks(g.order(), 0);
  for (std::size_t v = 0; v < g.order(); ++v) {
    for (auto w : g.adj[v]) masks[v] |= std::uint64_t{1} << w;
  }
  return masks;
}

// Scores one subset; returns false when S is not on the small-volume side.
bool score(const Graph& g, const std::vector<std::uint64_t>& masks, std::uint64_t s, std::int64_t total,
           Conductance& out) {
  std::int64_t vol = 0;
  std::int64_t boundary = 0;
  for (std::uint64_t rest = s; rest; rest &= rest - 1) {
    auto v = static_cast<std::size_t>(std::countr_zero(rest));
    vol += static_cast<std::int64_t>(g.adj[v].size());
    boundary += std::popcount(masks[v] & ~s);
  }
  if (vol == 0 || 2 * vol > total) return false;
  out = {boundary, vol, s};
  return true;
}

std::vector<std::int32_t> bfs(const Graph& g, std::size_t root) {
  std::vector<std::int32_t> dist(g.order(), -1);
  std::vector<std::uint32_t> queue{static_cast<std::uint32_t>(root)};
  dist[root] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto u = queue[head];
    for (auto v : g.adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

Girth girth_from(const Graph& g, std::size_t root) {
  std::vector<std::int32_t> dist(g.order(), -1);
  std::vector<std::int64_t> parent(g.order(), -1);
  std::vector<std::uint32_t> queue{static_cast<std::uint32_t>(root)};
  dist[root] = 0;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto u = queue[head];
    for (auto v : g.adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        parent[v] = u;
        queue.push_back(v);
      } else if (parent[u] != static_cast<std::int64_t>(v)) {
        best = std::min<std::int64_t>(best, dist[u] + dist[v] + 1);
      }
    }
  }
  if (best == std::numeric_limits<std::int64_t>::max()) return {0, true};
  return {best, false};
}

}  // namespace

std::size_t Graph::volume() const {
  std::size_t v = 0;
  for (const auto& a : adj) v += a.size();
  return v;
}

bool Graph::regular() const {
  for (const auto& a : adj) {
    if (a.size() != adj.front().size()) return false;
  }
  return true;
}

CayleyGraph cayley_graph(const groups::FiniteQuotient& q) {
  CayleyGraph out;
  auto gens = q.simple_generators();
  std::size_t nonidentity = 0;
  for (auto img : q.generator_images()) {
    if (img != 0) ++nonidentity;
    else out.self_loops_dropped = true;
  }
  // Several formal generators with one image (s = s^-1 in Z/2, say) would
  // give parallel edges in the multigraph.
  out.multi_edges_collapsed = nonidentity > gens.size();
  out.graph.adj.resize(q.order());
#pragma omp parallel for schedule(static)
  for (std::size_t x = 0; x < q.order(); ++x) {
    auto& row = out.graph.adj[x];
    for (auto s : gens) row.push_back(static_cast<std::uint32_t>(q.multiply(x, s)));
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return out;
}

Graph graph_from_edges(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  Graph g;
  g.adj.resize(n);
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw ValidationError("edge endpoint out of range");
    if (a == b) continue;
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  }
  for (auto& row : g.adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return g;
}

std::vector<double> normalized_laplacian_spectrum(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.order());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = g.adj[static_cast<std::size_t>(i)];
    if (row.empty()) continue;
    lap(i, i) = 1.0;
    for (auto j : row) {
      double dj = static_cast<double>(g.adj[j].size());
      lap(i, j) = -1.0 / std::sqrt(static_cast<double>(row.size()) * dj);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ValidationError("eigensolver failed to converge");
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

LanczosResult lanczos_gap(const Graph& g, double tolerance, std::uint64_t seed) {
  const std::size_t n = g.order();
  LanczosResult result;
  if (n < 2) return result;

  Eigen::VectorXd sqrt_deg(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) sqrt_deg[static_cast<Eigen::Index>(i)] = std::sqrt(static_cast<double>(g.adj[i].size()));
  Eigen::VectorXd stationary = sqrt_deg.normalized();

  auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      double di = sqrt_deg[static_cast<Eigen::Index>(i)];
      if (di == 0) continue;
      double acc = 0;
      for (auto j : g.adj[i]) acc += x[j] / sqrt_deg[j];
      y[static_cast<Eigen::Index>(i)] = acc / di;
    }
    return y;
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::VectorXd start(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) start[static_cast<Eigen::Index>(i)] = uniform(rng);

  const std::size_t max_block = std::min<std::size_t>(n - 1, 600);
  for (int restart = 0; restart < 40; ++restart) {
    start -= stationary.dot(start) * stationary;
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(max_block));
    std::vector<double> alpha;
    std::vector<double> beta;
    Eigen::VectorXd q = start.normalized();
    double best_theta = 0;
    Eigen::VectorXd best_vec;
    for (std::size_t k = 0; k < max_block; ++k) {
      basis.col(static_cast<Eigen::Index>(k)) = q;
      Eigen::VectorXd w = apply(q);
      alpha.push_back(q.dot(w));
      // Full reorthogonalization, twice for stability.
      for (int pass = 0; pass < 2; ++pass) {
        w -= stationary.dot(w) * stationary;
        auto active = basis.leftCols(static_cast<Eigen::Index>(k + 1));
        w -= active * (active.transpose() * w);
      }
      double b = w.norm();
      ++result.iterations;
      bool exhausted = b < 1e-12 || k + 1 == max_block;
      if (exhausted || (k + 1) % 10 == 0) {
        const auto m = static_cast<Eigen::Index>(alpha.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
          t(i, i) = alpha[static_cast<std::size_t>(i)];
          if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
        best_theta = small.eigenvalues()[m - 1];
        Eigen::VectorXd s = small.eigenvectors().col(m - 1);
        if (exhausted || std::abs(b * s[m - 1]) < tolerance * 0.1) {
          best_vec = basis.leftCols(m) * s;
          best_vec.normalize();
          double residual = (apply(best_vec) - best_theta * best_vec).norm();
          result.lambda1 = 1.0 - best_theta;
          result.residual = residual;
          if (residual < tolerance) {
            result.converged = true;
            return result;
          }
          start = best_vec;
          break;
        }
      }
      beta.push_back(b);
      q = w / b;
    }
  }
  return result;
}

Conductance exact_cheeger(const Graph& g) {
  const std::size_t n = g.order();
  if (n < 2) throw ValidationError("Cheeger constant needs at least two vertices");
  auto masks = masks_of(g);
  const auto total = static_cast<std::int64_t>(g.volume());
  const std::uint64_t count = std::uint64_t{1} << n;
  const std::size_t low_bits = std::min<std::size_t>(n, 12);
  const std::uint64_t chunks = count >> low_bits;
  std::vector<Conductance> best(chunks);
  std::vector<char> found(chunks, 0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::uint64_t c = 0; c < chunks; ++c) {
    Conductance local;
    bool any = false;
    for (std::uint64_t low = 0; low < (std::uint64_t{1} << low_bits); ++low) {
      std::uint64_t s = (c << low_bits) | low;
      if (s == 0 || s == count - 1) continue;
      Conductance cand;
      if (score(g, masks, s, total, cand) && (!any || better(cand, local))) {
        local = cand;
        any = true;
      }
    }
    best[c] = local;
    found[c] = any;
  }
  Conductance out;
  bool any = false;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    if (found[c] && (!any || better(best[c], out))) {
      out = best[c];
      any = true;
    }
  }
  if (!any) throw ValidationError("graph has no edges to measure");
  return out;
}

double ball_sweep_conductance(const Graph& g) {
  if (g.order() < 2) return 1.0;
  auto dist = bfs(g, 0);
  const auto total = static_cast<std::int64_t>(g.volume());
  std::int32_t max_r = *std::max_element(dist.begin(), dist.end());
  double best = 1.0;
  std::vector<char> in(g.order(), 0);
  std::int64_t vol = 0;
  for (std::int32_t r = 0; r <= max_r; ++r) {
    for (std::size_t v = 0; v < g.order(); ++v) {
      if (dist[v] == r) {
        in[v] = 1;
        vol += static_cast<std::int64_t>(g.adj[v].size());
      }
    }
    if (vol == 0 || 2 * vol > total) break;
    std::int64_t boundary = 0;
    for (std::size_t v = 0; v < g.order(); ++v) {
      if (!in[v]) continue;
      for (auto w : g.adj[v]) boundary += in[w] ? 0 : 1;
    }
    best = std::min(best, static_cast<double>(boundary) / static_cast<double>(vol));
  }
  return best;
}

std::int32_t diameter(const Graph& g) {
  std::int32_t best = 0;
  bool disconnected = false;
#pragma omp parallel for schedule(dynamic, 8) reduction(max : best) reduction(|| : disconnected)
  for (std::size_t v = 0; v < g.order(); ++v) {
    auto dist = bfs(g, v);
    for (auto d : dist) {
      if (d < 0) disconnected = true;
      best = std::max(best, d);
    }
  }
  if (disconnected) throw ValidationError("graph is disconnected");
  return best;
}

Girth girth_through_root(const Graph& g) {
  if (g.order() == 0) return {0, true};
  return girth_from(g, 0);
}

namespace reference {

Conductance exact_cheeger(const Graph& g) {
  auto masks = masks_of(g);
  const auto total = static_cast<std::int64_t>(g.volume());
  const std::uint64_t count = std::uint64_t{1} << g.order();
  Conductance out;
  bool any = false;
  for (std::uint64_t s = 1; s + 1 < count; ++s) {
    Conductance cand;
    if (score(g, masks, s, total, cand) && (!any || better(cand, out))) {
      out = cand;
      any = true;
    }
  }
  if (!any) throw ValidationError("graph has no edges to measure");
  return out;
}

Girth girth(const Graph& g) {
  Girth best{0, true};
  for (std::size_t v = 0; v < g.order(); ++v) {
    Girth here = girth_from(g, v);
    if (!here.infinite && (best.infinite || here.length < best.length)) best = here;
  }
  return best;
}

}  // namespace reference

}  // namespace boxcouple::spectral
