#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "netlod/network.hpp"
#include "netlod/operators.hpp"

namespace netlod {

/// Disjoint connected node sets covering the network, produced by k-center
/// clustering. H_T / H are graph-distance diameters (filled by measure_H);
/// H_nominal follows the N^{-1/d} convention and drives partition-of-unity
/// radii and convergence plots.
struct Partition {
  std::vector<NodeSet> elements;
  std::vector<int> centers;                      // one node per element
  std::vector<int> elem_of;                      // node -> element id
  std::vector<std::vector<int>> element_adjacency; // sorted neighbor element ids
  std::vector<double> H_T;                       // measured diameters (empty until measure_H)
  double H = 0.0;                                // max H_T
  double H_nominal = 0.0;                        // N^{-1/d}
  int iso_dim = 2;                               // configured isoperimetric dimension d

  int num_elements() const { return static_cast<int>(elements.size()); }
};

/// Greedy k-center: first center = start, then repeatedly the node farthest
/// from the chosen set (ties to the lowest index).
std::vector<int> gonzalez_centers(const SpatialNetwork& net, int count, int start);

/// Default start policy: lowest-index node among those at maximal graph
/// distance from the Dirichlet set.
int default_gonzalez_start(const SpatialNetwork& net);

/// Nearest-center assignment (ties toward the earliest center in the list),
/// followed by a connectivity repair pass for stray components.
Partition assign_to_centers(const SpatialNetwork& net, const std::vector<int>& centers,
                            int iso_dim);

/// Exact per-element graph-diameter measurement; fills H_T and H.
void measure_H(const SpatialNetwork& net, Partition& partition);

/// Union of elements reached by ell applications of the one-layer
/// neighborhood rule, starting from the given element ids. ell = 0 returns
/// the input set.
std::vector<int> patch_elements(const Partition& partition, const std::vector<int>& seed_elems,
                                int ell);
NodeSet patch_node_set(const Partition& partition, const std::vector<int>& patch_elems);

/// Smallest ell such that patch_elements(partition, {t}, ell) covers every
/// element, maximized over t (saturation order of the element graph).
int saturation_order(const Partition& partition);

struct PoincareOptions {
  double eig_rel_tol = 1e-8;
  int max_iterations = 500;
};

struct PartitionDiagnostics {
  double sigma = 0.0;            // max_T |1|^2_{M,T} / min_T |1|^2_{M,T}
  double max_edge_length = 0.0;
  double H_measured = 0.0;
  std::vector<double> element_mass; // |1|^2_{M,T}
  std::vector<double> vol;          // vol_T(T) = sum of in-element degrees
  std::vector<double> C_po;         // per-element Poincare constant (NaN if unavailable)
  std::vector<std::uint8_t> C_po_ok;
};

/// Quasi-uniformity, locality and Poincare diagnostics for one partition.
/// C_po,T = 1/sqrt(lambda_2) for the pencil (node-sum stiffness restricted
/// to T, mass on T) over mean-zero vectors, via inverse iteration.
PartitionDiagnostics diagnostics(const SpatialNetwork& net, const Partition& partition,
                                 const SparseSymOperator& mass, const SparseSymOperator& stiff,
                                 const PoincareOptions& opts = {});

struct PartitionHierarchy {
  std::vector<Partition> levels;  // one per requested element count, ascending
  std::uint64_t seed = 0;         // recorded for provenance; Gonzalez itself is deterministic
};

/// Independent Gonzalez partitions per count (strictly increasing), shared
/// start-node policy, measured H alongside the nominal N^{-1/d} values.
PartitionHierarchy build_hierarchy(const SpatialNetwork& net, const std::vector<int>& counts,
                                   int iso_dim, std::uint64_t seed,
                                   std::optional<int> start_override = std::nullopt);

} // namespace netlod
