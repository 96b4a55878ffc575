#pragma once

#include <memory>
#include <string>
#include <vector>

#include "netlod/coarse_space.hpp"
#include "netlod/operators.hpp"

namespace netlod {

inline constexpr int kGlobalPatch = -1; // ell sentinel: patch covers every element

enum class BasisVariant { Ideal, Naive, Stabilized };

const char* variant_name(BasisVariant v);
BasisVariant variant_from_name(const std::string& name);

struct SolveTolerances {
  double corrector_rel = 1e-10; // KKT residual checks, relative
  double reference_rel = 1e-12; // CG fallback for the reference solve
  double spectral_rel = 1e-4;   // power-iteration convergence
  int max_power_iterations = 500;
};

/// Constrained patch problem for one element: stiffness block on the free
/// patch nodes plus one zero-average constraint row per patch element.
struct CorrectorProblem {
  int element = -1;
  int ell = kGlobalPatch;
  std::vector<int> patch_elems;
  NodeSet patch_nodes;            // P = nodes of the patch
  NodeSet free_nodes;             // F = P minus the Dirichlet set
  SpMat A;                        // K restricted to F (principal submatrix)
  SpMat C;                        // constraint rows, element masses on F
  std::vector<int> constraint_elems;
};

CorrectorProblem make_corrector_problem(const SpatialNetwork& net, const SparseSymOperator& K,
                                        const CoarseSpace& cs, int element, int ell);

/// Functional w -> (K_T v, w) as a full-length vector, with K_T the node-sum
/// localization of K (half-contributions on edges crossing the element
/// boundary, diagonal remainders staying with their node).
Vec corrector_rhs(const SparseSymOperator& K, const NodeSet& T, const Vec& v);

/// Factorization of the saddle-point system [A C^T; C 0], reusable across
/// right-hand sides on the same patch.
class CorrectorSolver {
public:
  CorrectorSolver(CorrectorProblem problem, SolveTolerances tol = {});
  ~CorrectorSolver();
  CorrectorSolver(CorrectorSolver&&) noexcept;
  CorrectorSolver& operator=(CorrectorSolver&&) noexcept;

  const CorrectorProblem& problem() const { return problem_; }

  /// Solves for the corrector given the full-length functional vector;
  /// returns the full-length corrector (zero outside the free patch nodes).
  /// Throws on factorization failure or residual-check failure.
  Vec solve(const Vec& rhs_full) const;

private:
  CorrectorProblem problem_;
  SolveTolerances tol_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper.
Vec solve_corrector(const CorrectorProblem& problem, const Vec& rhs_full,
                    SolveTolerances tol = {});

/// Column vectors (1 - C^ell) applied to the per-element inputs: bubbles for
/// the ideal/naive variants, P_H-images of bubbles for the stabilized one.
struct MultiscaleBasis {
  BasisVariant variant = BasisVariant::Ideal;
  int ell = kGlobalPatch;
  SpMat phi;                       // num_nodes x num_elements
  std::vector<int> support_size;   // per-column node count
  long corrector_solves = 0;
};

MultiscaleBasis build_basis(const SpatialNetwork& net, const SparseSymOperator& K,
                            const CoarseSpace& cs, BasisVariant variant, int ell,
                            SolveTolerances tol = {}, int workers = 1);

/// |C_T v|_{L, complement of the ell-th patch} for ell = 0 .. saturation,
/// computed from the global corrector of element T.
std::vector<double> decay_profile(const SpatialNetwork& net, const CoarseSpace& cs,
                                  const SparseSymOperator& K, int element, const Vec& v,
                                  SolveTolerances tol = {});

/// Per-column "node value" text files (basis_000.txt, ...) plus a manifest
/// recording variant, ell and per-column support sizes.
void dump_basis(const MultiscaleBasis& basis, const std::string& dir);

} // namespace netlod
