#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netlod/correctors.hpp"
#include "netlod/generators.hpp"

namespace netlod {

/// Solves (K u, v) = (f, v) on the free nodes by sparse Cholesky (one step of
/// iterative refinement) with a diagonally preconditioned CG fallback;
/// Dirichlet nodes are set to zero.
Vec reference_solve(const SparseSymOperator& K, const Vec& f, const NodeSet& dirichlet,
                    const SolveTolerances& tol = {});

struct GalerkinResult {
  Vec coeffs;
  Vec u_H;
  double cond_estimate = 0.0; // NaN when not computed (large coarse systems)
};

/// Coarse Galerkin solve in span(basis): G = Phi^T K Phi, dense Cholesky up
/// to 2000 columns, sparse beyond.
GalerkinResult galerkin_solve(const SparseSymOperator& K, const Vec& f,
                              const MultiscaleBasis& basis);

/// sqrt((K e, e)) / sqrt((K u, u)) with e = u - u_H.
double relative_error_K(const SparseSymOperator& K, const Vec& u, const Vec& u_H);

struct SpectralBounds {
  double gamma = 0.0;       // lower bound estimate
  double gamma_prime = 0.0; // upper bound estimate
  bool converged = false;
};

/// Extreme generalized Rayleigh quotients (Kv,v)/(Lv,v) over the free nodes
/// by power iteration on the factorized pencils.
SpectralBounds spectral_bounds_estimate(const SparseSymOperator& K, const SparseSymOperator& L,
                                        const NodeSet& dirichlet,
                                        const SolveTolerances& tol = {});

struct StudyConfig {
  std::vector<int> counts;               // partition sizes N
  std::vector<int> ells;                 // localization parameters
  std::vector<BasisVariant> variants;
  SourceTerm source = SourceTerm::G1;
  std::optional<Vec> custom_f;           // overrides the source term when set
  int iso_dim = 2;
  std::uint64_t seed = 0;                // echoed into outputs
  SolveTolerances tol;
  int workers = 1;
  bool report_timings = true;            // false writes 0 into the seconds column
  std::optional<int> gonzalez_start;
};

struct StudyRow {
  int N = 0;
  double H = 0.0; // nominal N^{-1/d}
  int ell = kGlobalPatch;
  BasisVariant variant = BasisVariant::Ideal;
  double rel_err = 0.0;
  int coarse_dim = 0;
  long corrector_solves = 0;
  double seconds = 0.0;
  bool failed = false;
  bool saturated = false; // every patch covers the whole element set
  std::string note;
};

struct ConvergenceFit {
  int ell = 0;
  BasisVariant variant = BasisVariant::Ideal;
  double slope = 0.0; // log err vs log H
  int points_used = 0;
};

struct LocalizationFit {
  int N = 0;
  BasisVariant variant = BasisVariant::Ideal;
  double mean_ratio = 0.0; // geometric mean of successive error ratios
  int points_used = 0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<ConvergenceFit> conv_fits;
  std::vector<LocalizationFit> loc_fits;
};

/// Error vs H for each (ell, variant): one partition per requested N, shared
/// reference solution, least-squares slopes with localization-dominated
/// cells (successive error ratio > 0.9) excluded from the fit. Failed cells
/// are recorded and the study continues.
StudyResult run_convergence_study(const SpatialNetwork& net, const SparseSymOperator& K,
                                  const StudyConfig& cfg);

/// Error vs ell for each (N, variant), with per-cell saturation flags and
/// geometric-mean decay ratios.
StudyResult run_localization_study(const SpatialNetwork& net, const SparseSymOperator& K,
                                   const StudyConfig& cfg);

/// CSV with header N,H,ell,variant,rel_err_K,coarse_dim,corrector_solves,seconds.
/// Byte-identical across runs and worker counts when timings are disabled.
std::string study_csv(const StudyResult& result);
void write_study_csv(const StudyResult& result, const std::string& path);

/// Ordinary least squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace netlod
