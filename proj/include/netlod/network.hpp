#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace netlod {

/// Sorted, duplicate-free set of node indices.
class NodeSet {
public:
  NodeSet() = default;

  /// Sorts and deduplicates.
  static NodeSet of(std::vector<int> ids);
  /// Requires ids already sorted and unique (checked).
  static NodeSet from_sorted(std::vector<int> ids);
  /// {0, 1, ..., n-1}
  static NodeSet range(int n);

  bool contains(int x) const;
  int size() const { return static_cast<int>(ids_.size()); }
  bool empty() const { return ids_.empty(); }
  const std::vector<int>& ids() const { return ids_; }
  int operator[](int i) const { return ids_[i]; }

  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  /// True if every index of this set is contained in other.
  bool subset_of(const NodeSet& other) const;
  NodeSet set_union(const NodeSet& other) const;
  NodeSet set_difference(const NodeSet& other) const;
  bool intersects(const NodeSet& other) const;

  bool operator==(const NodeSet& other) const { return ids_ == other.ids_; }

private:
  std::vector<int> ids_;
};

struct Edge {
  int u = 0;
  int v = 0;
  double weight = 1.0; // gamma_xy, strictly positive
  double length = 0.0; // |x - y|, computed from coordinates
};

/// Immutable embedded graph: node coordinates in R^2 or R^3, edges with
/// Euclidean lengths and positive weights, per-node Dirichlet and
/// domain-boundary flags. Connectivity, simple-graph structure and the
/// presence of at least one Dirichlet node are enforced at construction.
class SpatialNetwork {
public:
  /// coords has num_nodes*dim entries, node-major. Edge lengths are
  /// computed here; weights are taken from the pairs (default 1.0).
  SpatialNetwork(int dim, std::vector<double> coords, std::vector<Edge> edges,
                 std::vector<std::uint8_t> dirichlet,
                 std::vector<std::uint8_t> domain_boundary);

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int dim() const { return dim_; }

  double coord(int node, int axis) const { return coords_[static_cast<std::size_t>(node) * dim_ + axis]; }
  const std::vector<double>& coords() const { return coords_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool is_dirichlet(int node) const { return dirichlet_[node] != 0; }
  bool on_domain_boundary(int node) const { return domain_boundary_[node] != 0; }

  int degree(int node) const { return adj_ptr_[node + 1] - adj_ptr_[node]; }
  std::span<const int> neighbors(int node) const;
  /// Edge indices incident to node, aligned with neighbors().
  std::span<const int> incident_edges(int node) const;

  NodeSet all_nodes() const { return NodeSet::range(num_nodes_); }
  NodeSet dirichlet_nodes() const;
  NodeSet free_nodes() const;
  NodeSet domain_boundary_nodes() const;

  /// Copy with replaced edge weights (same topology).
  SpatialNetwork with_weights(std::vector<double> weights) const;

  /// Text format, round-trip faithful at 17 significant digits:
  ///   n_nodes n_edges dim
  ///   id x y [z] dirichlet domain_boundary     (per node)
  ///   u v weight                               (per edge)
  static SpatialNetwork load(const std::string& path);
  void save(const std::string& path) const;

private:
  int dim_ = 2;
  int num_nodes_ = 0;
  std::vector<double> coords_;
  std::vector<Edge> edges_;
  std::vector<std::uint8_t> dirichlet_;
  std::vector<std::uint8_t> domain_boundary_;
  std::vector<int> adj_ptr_;  // CSR adjacency
  std::vector<int> adj_node_;
  std::vector<int> adj_edge_;
};

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Shortest path length between x and y using only edges with both endpoints
/// in S; kInfiniteDistance when x and y are disconnected within S.
double graph_distance(const SpatialNetwork& net, const NodeSet& S, int x, int y);

/// Multi-source distances dist_S(x, R) for all x. Entries outside S (and for
/// nodes unreachable within S) are kInfiniteDistance. R must be a nonempty
/// subset of S.
std::vector<double> dist_to_set(const SpatialNetwork& net, const NodeSet& S, const NodeSet& R);

/// bnd_S(R) = { x in R : exists edge {x,y} with y in S \ R }. R must be a
/// subset of S.
NodeSet boundary_nodes(const SpatialNetwork& net, const NodeSet& R, const NodeSet& S);

/// Element boundary (domain-boundary nodes of T) union bnd_N(T).
NodeSet element_boundary(const SpatialNetwork& net, const NodeSet& T);

} // namespace netlod
