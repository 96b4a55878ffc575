#pragma once

#include <optional>
#include <vector>

#include "netlod/operators.hpp"
#include "netlod/partition.hpp"

namespace netlod {

/// Sparse nodal vector: parallel (sorted node index, value) arrays.
struct LocalVector {
  std::vector<int> idx;
  std::vector<double> val;

  Vec to_dense(int n) const;
  void add_to(Vec& dense, double scale) const;
  NodeSet support() const { return NodeSet::from_sorted(idx); }
};

struct PartitionOfUnity {
  double radius = 0.0;
  std::vector<NodeSet> supports;     // U_T
  std::vector<LocalVector> lambda;   // Lambda_T, supported on U_T
};

/// Partition-adapted coarse data: per-element bubbles (unit element average,
/// supported inside the element), optional partition of unity with the
/// conforming/constant-preserving element sets, and the element masses used
/// by all q_T evaluations.
struct CoarseSpace {
  Partition partition;
  Vec mass_diag;
  std::vector<double> element_mass;   // |1|^2_{M,T}
  std::vector<LocalVector> bubbles;   // b_T
  std::optional<PartitionOfUnity> pu;
  std::vector<std::uint8_t> in_K_H;   // Lambda_T vanishes on the Dirichlet set
  std::vector<std::uint8_t> in_G_H;   // element meets no non-conforming support

  int num_elements() const { return partition.num_elements(); }
};

struct CoarseSpaceOptions {
  bool with_pu = true;
  /// PU dilation radius; NaN means max(H_nominal / 2, slightly more than the
  /// longest edge). The H/2 convention alone leaves the normalization
  /// denominator zero at nodes whose longest edge jumps straight out of the
  /// dilated patch; radius >= max edge length rules that out on any network.
  double pu_radius = std::numeric_limits<double>::quiet_NaN();
  /// Degenerate-bubble guard: error if q_T(b~_T) < guard * H_nominal.
  double bubble_guard = 1e-14;
};

CoarseSpace build_coarse_space(const SpatialNetwork& net, const Partition& partition,
                               const SparseSymOperator& mass,
                               const CoarseSpaceOptions& opts = {});

/// q_T(v) = (M_T v, 1) / |1|^2_{M,T}.
double element_average(const SparseSymOperator& mass, const NodeSet& T, const Vec& v);

/// Piecewise-constant projection: sum_T q_T(v) 1_T.
Vec pi_H(const CoarseSpace& cs, const Vec& v);

/// Element bubble b_T (unit element average, zero outside T).
const LocalVector& bubble(const CoarseSpace& cs, int element);

/// Bubble operator: sum_T q_T(v) b_T.
Vec bubble_op(const CoarseSpace& cs, const Vec& v);

/// Partition of unity built from graph distances: U_T dilates T by the
/// radius, Lambda~_T is the distance to the patch boundary (domain-boundary
/// nodes of T itself excluded), normalized to sum to one.
PartitionOfUnity build_pu(const SpatialNetwork& net, const Partition& partition, double radius);

/// (K_H, G_H) membership flags for a built PU.
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> conforming_sets(
    const SpatialNetwork& net, const Partition& partition, const PartitionOfUnity& pu);

/// Quasi-interpolation I_H v = sum_{T in K_H} q_T(v) Lambda_T.
Vec i_H(const CoarseSpace& cs, const Vec& v);

/// P_H v = I_H v + B_H(v - I_H v).
Vec p_H(const CoarseSpace& cs, const Vec& v);

/// Smallest k with U_T inside the k-th order patch of T, maximized over T.
int pu_overlap_order(const CoarseSpace& cs);

/// "node value" text dump of a sparse nodal vector (for plotting).
void dump_local_vector(const LocalVector& v, const std::string& path);

} // namespace netlod
