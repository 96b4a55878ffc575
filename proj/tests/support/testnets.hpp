#pragma once

// Small deterministic fixture networks shared across the test suites.

#include <cmath>
#include <vector>

#include "netlod/network.hpp"
#include "netlod/rng.hpp"

namespace netlod::testing {

/// Path graph embedded on the x-axis at the given positions. Node 0 is
/// Dirichlet by default; domain-boundary flags are all off unless given.
inline SpatialNetwork path_network(const std::vector<double>& positions,
                                   std::vector<std::uint8_t> dirichlet = {},
                                   std::vector<std::uint8_t> boundary = {}) {
  const int n = static_cast<int>(positions.size());
  std::vector<double> coords;
  for (double p : positions) {
    coords.push_back(p);
    coords.push_back(0.0);
  }
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0, 0.0});
  if (dirichlet.empty()) {
    dirichlet.assign(n, 0);
    dirichlet[0] = 1;
  }
  if (boundary.empty()) boundary.assign(n, 0);
  return SpatialNetwork(2, coords, edges, dirichlet, boundary);
}

inline SpatialNetwork unit_path(int n) {
  std::vector<double> pos(n);
  for (int i = 0; i < n; ++i) pos[i] = i;
  return path_network(pos);
}

/// m x m grid graph with unit spacing; frame nodes carry Dirichlet and
/// domain-boundary flags.
inline SpatialNetwork grid_network(int m) {
  std::vector<double> coords;
  std::vector<std::uint8_t> dirichlet(m * m), boundary(m * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      coords.push_back(i);
      coords.push_back(j);
      bool bd = (i == 0 || i == m - 1 || j == 0 || j == m - 1);
      dirichlet[j * m + i] = bd;
      boundary[j * m + i] = bd;
    }
  std::vector<Edge> edges;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      if (i + 1 < m) edges.push_back({j * m + i, j * m + i + 1, 1.0, 0.0});
      if (j + 1 < m) edges.push_back({j * m + i, (j + 1) * m + i, 1.0, 0.0});
    }
  return SpatialNetwork(2, coords, edges, dirichlet, boundary);
}

/// Like grid_network but scaled to the unit square (spacing 1/(m-1)), the
/// right setting for the N^{-1/d} conventions.
inline SpatialNetwork unit_grid_network(int m) {
  std::vector<double> coords;
  std::vector<std::uint8_t> dirichlet(m * m), boundary(m * m);
  const double h = 1.0 / (m - 1);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      coords.push_back(i * h);
      coords.push_back(j * h);
      bool bd = (i == 0 || i == m - 1 || j == 0 || j == m - 1);
      dirichlet[j * m + i] = bd;
      boundary[j * m + i] = bd;
    }
  std::vector<Edge> edges;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      if (i + 1 < m) edges.push_back({j * m + i, j * m + i + 1, 1.0, 0.0});
      if (j + 1 < m) edges.push_back({j * m + i, (j + 1) * m + i, 1.0, 0.0});
    }
  return SpatialNetwork(2, coords, edges, dirichlet, boundary);
}

/// Random connected graph: random coordinates, a greedy spanning tree plus
/// extra random chords. Node 0 is Dirichlet.
inline SpatialNetwork random_connected(int n, int extra_edges, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> coords;
  for (int i = 0; i < n; ++i) {
    coords.push_back(rng.next_double());
    coords.push_back(rng.next_double());
  }
  std::vector<Edge> edges;
  std::vector<std::pair<int, int>> have;
  for (int i = 1; i < n; ++i) {
    int j = static_cast<int>(rng.uniform_int(i)); // attach to an earlier node
    edges.push_back({j, i, 1.0, 0.0});
    have.push_back({std::min(i, j), std::max(i, j)});
  }
  int added = 0, attempts = 0;
  while (added < extra_edges && attempts < 100 * extra_edges + 100) {
    ++attempts;
    int a = static_cast<int>(rng.uniform_int(n));
    int b = static_cast<int>(rng.uniform_int(n));
    if (a == b) continue;
    std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    bool dup = false;
    for (auto& h : have)
      if (h == key) {
        dup = true;
        break;
      }
    if (dup) continue;
    have.push_back(key);
    edges.push_back({key.first, key.second, 1.0, 0.0});
    ++added;
  }
  std::vector<std::uint8_t> dirichlet(n, 0), boundary(n, 0);
  dirichlet[0] = 1;
  return SpatialNetwork(2, coords, edges, dirichlet, boundary);
}

inline Vec random_vector(int n, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  return v;
}

/// Random vector vanishing on the Dirichlet set.
inline Vec random_free_vector(const SpatialNetwork& net, std::uint64_t seed) {
  Vec v = random_vector(net.num_nodes(), seed);
  for (int i = 0; i < net.num_nodes(); ++i)
    if (net.is_dirichlet(i)) v[i] = 0.0;
  return v;
}

} // namespace netlod::testing
