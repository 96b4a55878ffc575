#include "netlod/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "netlod/rng.hpp"

namespace netlod {

Vec reference_solve(const SparseSymOperator& K, const Vec& f, const NodeSet& dirichlet,
                    const SolveTolerances& tol) {
  NodeSet free = NodeSet::range(K.dim()).set_difference(dirichlet);
  if (free.empty()) throw std::invalid_argument("reference_solve: no free nodes");
  SpMat A = localize(K, free, LocalizeMode::PrincipalSubmatrix).matrix();
  Vec b = restrict_to(free, f);
  double bnorm = b.norm();
  if (bnorm == 0.0) return Vec::Zero(K.dim());

  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  Vec u;
  bool direct_ok = (ldlt.info() == Eigen::Success);
  if (direct_ok) {
    u = ldlt.solve(b);
    u += ldlt.solve(b - A * u); // one refinement step
    direct_ok = (A * u - b).norm() <= 1e-8 * bnorm;
  }
  if (!direct_ok) {
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg(A);
    cg.setTolerance(tol.reference_rel);
    cg.setMaxIterations(20L * A.rows());
    u = cg.solve(b);
    double res = (A * u - b).norm() / bnorm;
    if (cg.info() != Eigen::Success && res > 1e-8)
      throw std::runtime_error("reference_solve: CG fallback did not converge (relative residual " +
                               std::to_string(res) + ")");
  }
  return extend_from(free, u, K.dim());
}

GalerkinResult galerkin_solve(const SparseSymOperator& K, const Vec& f,
                              const MultiscaleBasis& basis) {
  const int N = static_cast<int>(basis.phi.cols());
  SpMat kphi = K.matrix() * basis.phi;
  Vec b = basis.phi.transpose() * f;
  GalerkinResult out;
  const std::string cell = std::string(variant_name(basis.variant)) +
                           ", ell=" + std::to_string(basis.ell);

  if (N <= 2000) {
    Eigen::MatrixXd G = Eigen::MatrixXd(basis.phi.transpose() * kphi);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
    double emin = eig.eigenvalues().minCoeff();
    double emax = eig.eigenvalues().maxCoeff();
    out.cond_estimate = emax / emin;
    if (!(emin > 0.0) || out.cond_estimate > 1e14)
      throw std::runtime_error("galerkin_solve: coarse matrix numerically singular (" + cell +
                               "); localization too aggressive");
    out.coeffs = G.ldlt().solve(b);
  } else {
    SpMat G = (basis.phi.transpose() * kphi).pruned();
    Eigen::SimplicialLDLT<SpMat> ldlt(G);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("galerkin_solve: coarse factorization failed (" + cell + ")");
    out.coeffs = ldlt.solve(b);
    out.cond_estimate = std::numeric_limits<double>::quiet_NaN();
  }
  out.u_H = basis.phi * out.coeffs;
  return out;
}

double relative_error_K(const SparseSymOperator& K, const Vec& u, const Vec& u_H) {
  if (u.size() != u_H.size() || u.size() != K.dim())
    throw std::invalid_argument("relative_error_K: dimension mismatch");
  double denom = seminorm(K, u);
  if (denom == 0.0) throw std::invalid_argument("relative_error_K: |u|_K = 0");
  Vec e = u - u_H;
  return seminorm(K, e) / denom;
}

namespace {

double power_iterate_pencil(const SpMat& A, const Eigen::SimplicialLDLT<SpMat>& ldltB,
                            const SpMat& B, const SolveTolerances& tol, bool& converged) {
  Rng rng(0x5eedULL);
  Vec x(A.rows());
  for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
  x /= x.norm();
  double rho = x.dot(A * x) / x.dot(B * x);
  converged = false;
  for (int it = 0; it < tol.max_power_iterations; ++it) {
    Vec y = ldltB.solve(A * x);
    double norm = y.norm();
    if (!(norm > 0.0)) break;
    y /= norm;
    double rho_new = y.dot(A * y) / y.dot(B * y);
    x = y;
    if (std::abs(rho_new - rho) <= tol.spectral_rel * std::abs(rho_new)) {
      converged = true;
      return rho_new;
    }
    rho = rho_new;
  }
  return rho;
}

} // namespace

SpectralBounds spectral_bounds_estimate(const SparseSymOperator& K, const SparseSymOperator& L,
                                        const NodeSet& dirichlet, const SolveTolerances& tol) {
  NodeSet free = NodeSet::range(K.dim()).set_difference(dirichlet);
  SpMat A = localize(K, free, LocalizeMode::PrincipalSubmatrix).matrix();
  SpMat B = localize(L, free, LocalizeMode::PrincipalSubmatrix).matrix();

  Eigen::SimplicialLDLT<SpMat> ldltB(B);
  if (ldltB.info() != Eigen::Success)
    throw std::runtime_error("spectral_bounds_estimate: stiffness factorization failed");
  Eigen::SimplicialLDLT<SpMat> ldltA(A);
  if (ldltA.info() != Eigen::Success)
    throw std::runtime_error("spectral_bounds_estimate: operator factorization failed");

  SpectralBounds out;
  bool conv_hi = false, conv_lo = false;
  out.gamma_prime = power_iterate_pencil(A, ldltB, B, tol, conv_hi);
  double inv_gamma = power_iterate_pencil(B, ldltA, A, tol, conv_lo);
  out.gamma = 1.0 / inv_gamma;
  out.converged = conv_hi && conv_lo;
  return out;
}

namespace {

struct Cell {
  int N;
  int ell; // kGlobalPatch for the ideal variant
  BasisVariant variant;
};

int variant_order(BasisVariant v) {
  switch (v) {
    case BasisVariant::Ideal: return 0;
    case BasisVariant::Naive: return 1;
    case BasisVariant::Stabilized: return 2;
  }
  return 3;
}

StudyResult run_study(const SpatialNetwork& net, const SparseSymOperator& K,
                      const StudyConfig& cfg, bool localization) {
  if (cfg.counts.empty()) throw std::invalid_argument("study: no partition counts");
  if (cfg.variants.empty()) throw std::invalid_argument("study: no variants");
  for (BasisVariant v : cfg.variants)
    if (v != BasisVariant::Ideal && cfg.ells.empty())
      throw std::invalid_argument("study: localized variants need at least one ell");

  SparseSymOperator mass = assemble_mass(net, K.alpha());
  Vec f = cfg.custom_f ? *cfg.custom_f : source_vector(net, mass, cfg.source);
  Vec u_ref = reference_solve(K, f, net.dirichlet_nodes(), cfg.tol);

  int start = cfg.gonzalez_start ? *cfg.gonzalez_start : default_gonzalez_start(net);

  StudyResult result;
  for (int count : cfg.counts) {
    auto centers = gonzalez_centers(net, count, start);
    Partition partition = assign_to_centers(net, centers, cfg.iso_dim);
    CoarseSpace cs = build_coarse_space(net, partition, mass);
    int sat_order = saturation_order(partition);

    std::vector<Cell> cells;
    for (BasisVariant v : cfg.variants) {
      if (v == BasisVariant::Ideal) {
        cells.push_back({count, kGlobalPatch, v});
      } else {
        for (int ell : cfg.ells) cells.push_back({count, ell, v});
      }
    }
    for (const Cell& cell : cells) {
      StudyRow row;
      row.N = count;
      row.H = partition.H_nominal;
      row.ell = cell.ell;
      row.variant = cell.variant;
      row.coarse_dim = count;
      row.saturated = (cell.ell == kGlobalPatch) || (cell.ell >= sat_order);
      auto t0 = std::chrono::steady_clock::now();
      try {
        MultiscaleBasis basis =
            build_basis(net, K, cs, cell.variant, cell.ell, cfg.tol, cfg.workers);
        GalerkinResult g = galerkin_solve(K, f, basis);
        row.rel_err = relative_error_K(K, u_ref, g.u_H);
        row.corrector_solves = basis.corrector_solves;
      } catch (const std::exception& e) {
        row.failed = true;
        row.rel_err = std::numeric_limits<double>::quiet_NaN();
        row.note = e.what();
      }
      auto t1 = std::chrono::steady_clock::now();
      row.seconds =
          cfg.report_timings ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
      result.rows.push_back(std::move(row));
    }
  }

  std::sort(result.rows.begin(), result.rows.end(), [](const StudyRow& a, const StudyRow& b) {
    if (a.N != b.N) return a.N < b.N;
    if (a.ell != b.ell) return a.ell < b.ell;
    return variant_order(a.variant) < variant_order(b.variant);
  });

  if (!localization) {
    // slope of log err vs log H per (ell, variant), excluding cells with a
    // plateaued error (successive ratio > 0.9: localization-dominated)
    for (BasisVariant v : cfg.variants) {
      std::vector<int> ells = (v == BasisVariant::Ideal) ? std::vector<int>{kGlobalPatch}
                                                         : cfg.ells;
      for (int ell : ells) {
        std::vector<double> logH, logE;
        double prev_err = -1.0;
        for (const StudyRow& row : result.rows) {
          if (row.variant != v || row.ell != ell || row.failed) continue;
          bool plateaued = prev_err > 0.0 && row.rel_err > 0.9 * prev_err;
          prev_err = row.rel_err;
          if (plateaued || !(row.rel_err > 0.0)) continue;
          logH.push_back(std::log(row.H));
          logE.push_back(std::log(row.rel_err));
        }
        ConvergenceFit fit;
        fit.ell = ell;
        fit.variant = v;
        fit.points_used = static_cast<int>(logH.size());
        fit.slope = (logH.size() >= 2) ? ols_slope(logH, logE)
                                       : std::numeric_limits<double>::quiet_NaN();
        result.conv_fits.push_back(fit);
      }
    }
  } else {
    for (int count : cfg.counts) {
      for (BasisVariant v : cfg.variants) {
        if (v == BasisVariant::Ideal) continue;
        std::vector<double> errs;
        for (const StudyRow& row : result.rows)
          if (row.N == count && row.variant == v && !row.failed && row.rel_err > 0.0)
            errs.push_back(row.rel_err);
        LocalizationFit fit;
        fit.N = count;
        fit.variant = v;
        fit.points_used = static_cast<int>(errs.size());
        fit.mean_ratio = (errs.size() >= 2)
                             ? std::pow(errs.back() / errs.front(),
                                        1.0 / (static_cast<double>(errs.size()) - 1.0))
                             : std::numeric_limits<double>::quiet_NaN();
        result.loc_fits.push_back(fit);
      }
    }
  }
  return result;
}

} // namespace

StudyResult run_convergence_study(const SpatialNetwork& net, const SparseSymOperator& K,
                                  const StudyConfig& cfg) {
  return run_study(net, K, cfg, /*localization=*/false);
}

StudyResult run_localization_study(const SpatialNetwork& net, const SparseSymOperator& K,
                                   const StudyConfig& cfg) {
  return run_study(net, K, cfg, /*localization=*/true);
}

std::string study_csv(const StudyResult& result) {
  std::string out = "N,H,ell,variant,rel_err_K,coarse_dim,corrector_solves,seconds\n";
  char buf[64];
  for (const StudyRow& row : result.rows) {
    out += std::to_string(row.N) + ",";
    std::snprintf(buf, sizeof(buf), "%.17g", row.H);
    out += std::string(buf) + "," + std::to_string(row.ell) + "," + variant_name(row.variant) +
           ",";
    std::snprintf(buf, sizeof(buf), "%.17g", row.rel_err);
    out += std::string(buf) + "," + std::to_string(row.coarse_dim) + "," +
           std::to_string(row.corrector_solves) + ",";
    std::snprintf(buf, sizeof(buf), "%.6f", row.seconds);
    out += std::string(buf) + "\n";
  }
  return out;
}

void write_study_csv(const StudyResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << study_csv(result);
  if (!out) throw std::runtime_error("write failed: " + path);
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ols_slope: need at least two points");
  double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace netlod
