#pragma once

#include <span>
#include <string>

#include "netlod/network.hpp"
#include "netlod/types.hpp"

namespace netlod {

enum class OperatorKind { Mass, Stiffness, WeightedLaplacian, FemAssembled };

/// Symmetric sparse operator on the node space. Mass kind is diagonal with
/// strictly positive entries; the Laplacian-type kinds are PSD with zero row
/// sums away from the domain boundary and admit the per-node splitting used
/// by node-sum localization.
class SparseSymOperator {
public:
  SparseSymOperator(OperatorKind kind, double alpha, SpMat mat);

  OperatorKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  int dim() const { return static_cast<int>(mat_.rows()); }
  const SpMat& matrix() const { return mat_; }

  Vec apply(const Vec& v) const { return mat_ * v; }
  double quad(const Vec& v) const { return v.dot(mat_ * v); }
  Vec diagonal() const { return mat_.diagonal(); }

private:
  OperatorKind kind_;
  double alpha_;
  SpMat mat_;
};

enum class LocalizeMode { NodeSum, PrincipalSubmatrix };

/// Localization of a SparseSymOperator to a node set S. Node-sum mode keeps
/// the full dimension (entries may touch neighbors of S); principal mode is
/// the |S| x |S| submatrix acting on vectors restricted to S.
class LocalizedOperator {
public:
  LocalizedOperator(OperatorKind parent_kind, NodeSet S, LocalizeMode mode, SpMat mat);

  LocalizeMode mode() const { return mode_; }
  const NodeSet& node_set() const { return S_; }
  const SpMat& matrix() const { return mat_; }
  OperatorKind parent_kind() const { return parent_kind_; }

  /// Quadratic form evaluated on a full-length nodal vector (principal mode
  /// gathers the S entries internally).
  double quad(const Vec& full) const;
  Vec apply(const Vec& full) const;

private:
  OperatorKind parent_kind_;
  NodeSet S_;
  LocalizeMode mode_;
  SpMat mat_;
};

SparseSymOperator assemble_mass(const SpatialNetwork& net, double alpha);
SparseSymOperator assemble_stiffness(const SpatialNetwork& net, double alpha);
SparseSymOperator assemble_weighted_laplacian(const SpatialNetwork& net, double alpha,
                                              std::span<const double> weights);
/// Convenience overload using the weights stored on the network edges.
SparseSymOperator assemble_weighted_laplacian(const SpatialNetwork& net, double alpha);

LocalizedOperator localize(const SparseSymOperator& op, const NodeSet& S, LocalizeMode mode);

/// sqrt of the quadratic form; tiny negative round-off (>= -clamp_tol * |v|^2)
/// is clamped to zero, anything more negative throws.
double seminorm(const SparseSymOperator& op, const Vec& v, double clamp_tol = 1e-12);
double seminorm(const LocalizedOperator& op, const Vec& v, double clamp_tol = 1e-12);

/// |f|_{M^-1} = |M^{-1/2} f|_2 for a diagonal positive mass operator.
double dual_norm_rhs(const SparseSymOperator& mass, const Vec& f);
/// f_tilde = M^{-1} f.
Vec mass_solve(const SparseSymOperator& mass, const Vec& f);

/// Coordinate text export: header "n nnz symmetric", then "i j value" for
/// the stored (upper-triangle-inclusive) entries.
void export_matrix(const SpMat& mat, const std::string& path);
SpMat import_matrix(const std::string& path);

/// Gather/scatter between full-length vectors and a NodeSet's local indexing.
Vec restrict_to(const NodeSet& S, const Vec& full);
Vec extend_from(const NodeSet& S, const Vec& local, int n);

} // namespace netlod
