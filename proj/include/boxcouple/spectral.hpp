#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "boxcouple/groups.hpp"

namespace boxcouple::spectral {

/// Simple undirected graph as sorted adjacency lists.
struct Graph {
  std::vector<std::vector<std::uint32_t>> adj;

  std::size_t order() const { return adj.size(); }
  std::size_t volume() const;
  bool regular() const;
};

struct CayleyGraph {
  Graph graph;
  /// True when several generators (or a generator and its inverse) share an
  /// image, so parallel edges were merged.
  bool multi_edges_collapsed = false;
  bool self_loops_dropped = false;
};

/// Right-multiplication Cayley graph on the distinct nonidentity generator images.
CayleyGraph cayley_graph(const groups::FiniteQuotient& q);

/// Graph built directly from a list of connection sets (for K_n, paths, ...).
Graph graph_from_edges(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

/// Full spectrum of the normalized Laplacian I - D^{-1/2} A D^{-1/2}, ascending.
std::vector<double> normalized_laplacian_spectrum(const Graph& g);

struct LanczosResult {
  double lambda1 = 0;
  double residual = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Second-smallest normalized Laplacian eigenvalue by Lanczos with full
/// reorthogonalization on the complement of the stationary vector.
LanczosResult lanczos_gap(const Graph& g, double tolerance = 1e-9, std::uint64_t seed = 0x5eed);

/// Exact conductance min |E(S, S^c)| / vol(S) over vol(S) <= vol/2, as a fraction.
struct Conductance {
  std::int64_t boundary = 0;
  std::int64_t volume = 1;
  std::uint64_t witness = 0;  // bitmask of S
  double value() const { return static_cast<double>(boundary) / static_cast<double>(volume); }
};

/// Subset sweep split across threads. Requires order <= 30.
Conductance exact_cheeger(const Graph& g);

/// Conductance of the largest BFS ball around vertex 0 with vol <= vol/2.
double ball_sweep_conductance(const Graph& g);

int32_t diameter(const Graph& g);

struct Girth {
  std::int64_t length = 0;
  bool infinite = false;
};

/// Shortest cycle through vertex 0; equals the girth on vertex-transitive graphs.
Girth girth_through_root(const Graph& g);

namespace reference {
Conductance exact_cheeger(const Graph& g);
/// Girth as the minimum over every root.
Girth girth(const Graph& g);
}  // namespace reference

}  // namespace boxcouple::spectral
