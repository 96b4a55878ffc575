#include "netlod/correctors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include <Eigen/SparseLU>

namespace netlod {

const char* variant_name(BasisVariant v) {
  switch (v) {
    case BasisVariant::Ideal: return "ideal";
    case BasisVariant::Naive: return "naive";
    case BasisVariant::Stabilized: return "stabilized";
  }
  return "?";
}

BasisVariant variant_from_name(const std::string& name) {
  if (name == "ideal") return BasisVariant::Ideal;
  if (name == "naive") return BasisVariant::Naive;
  if (name == "stabilized") return BasisVariant::Stabilized;
  throw std::invalid_argument("unknown basis variant: " + name);
}

CorrectorProblem make_corrector_problem(const SpatialNetwork& net, const SparseSymOperator& K,
                                        const CoarseSpace& cs, int element, int ell) {
  const Partition& part = cs.partition;
  CorrectorProblem p;
  p.element = element;
  p.ell = ell;
  if (ell == kGlobalPatch) {
    p.patch_elems.resize(part.num_elements());
    for (int t = 0; t < part.num_elements(); ++t) p.patch_elems[t] = t;
  } else {
    p.patch_elems = patch_elements(part, {element}, ell);
  }
  p.patch_nodes = patch_node_set(part, p.patch_elems);
  p.free_nodes = p.patch_nodes.set_difference(net.dirichlet_nodes());
  if (p.free_nodes.empty())
    throw std::runtime_error("corrector: patch of element " + std::to_string(element) +
                             " has no free nodes");

  p.A = localize(K, p.free_nodes, LocalizeMode::PrincipalSubmatrix).matrix();

  std::vector<int> pos(net.num_nodes(), -1);
  for (int i = 0; i < p.free_nodes.size(); ++i) pos[p.free_nodes[i]] = i;
  std::vector<Triplet> rows;
  for (int t : p.patch_elems) {
    bool any = false;
    int row = static_cast<int>(p.constraint_elems.size());
    for (int x : part.elements[t]) {
      if (pos[x] < 0) continue;
      rows.emplace_back(row, pos[x], cs.mass_diag[x]);
      any = true;
    }
    if (any)
      p.constraint_elems.push_back(t);
    else
      // all-Dirichlet element: its zero-average constraint is vacuous
      rows.erase(std::remove_if(rows.begin(), rows.end(),
                                [row](const Triplet& tr) { return tr.row() == row; }),
                 rows.end());
  }
  p.C.resize(static_cast<int>(p.constraint_elems.size()), p.free_nodes.size());
  p.C.setFromTriplets(rows.begin(), rows.end());
  return p;
}

Vec corrector_rhs(const SparseSymOperator& K, const NodeSet& T, const Vec& v) {
  const SpMat& A = K.matrix();
  Vec r = Vec::Zero(v.size());
  const bool laplacian_kind =
      K.kind() == OperatorKind::Stiffness || K.kind() == OperatorKind::WeightedLaplacian;
  for (int x : T) {
    double diag = 0.0, offsum = 0.0;
    for (SpMat::InnerIterator it(A, x); it; ++it) {
      int y = static_cast<int>(it.row());
      if (y == x) {
        diag = it.value();
        continue;
      }
      double c = -it.value();
      offsum += c;
      double half = 0.5 * c * (v[x] - v[y]);
      r[x] += half;
      r[y] -= half;
    }
    if (!laplacian_kind) r[x] += (diag - offsum) * v[x];
  }
  return r;
}

struct CorrectorSolver::Impl {
  Eigen::SparseLU<SpMat> lu;
};

CorrectorSolver::CorrectorSolver(CorrectorProblem problem, SolveTolerances tol)
    : problem_(std::move(problem)), tol_(tol), impl_(std::make_unique<Impl>()) {
  const int nf = problem_.free_nodes.size();
  const int m = static_cast<int>(problem_.constraint_elems.size());
  std::vector<Triplet> trips;
  trips.reserve(problem_.A.nonZeros() + 2 * problem_.C.nonZeros());
  for (int col = 0; col < problem_.A.outerSize(); ++col)
    for (SpMat::InnerIterator it(problem_.A, col); it; ++it)
      trips.emplace_back(it.row(), col, it.value());
  for (int col = 0; col < problem_.C.outerSize(); ++col)
    for (SpMat::InnerIterator it(problem_.C, col); it; ++it) {
      trips.emplace_back(nf + it.row(), col, it.value());
      trips.emplace_back(col, nf + it.row(), it.value());
    }
  SpMat kkt(nf + m, nf + m);
  kkt.setFromTriplets(trips.begin(), trips.end());
  impl_->lu.compute(kkt);
  if (impl_->lu.info() != Eigen::Success)
    throw std::runtime_error("corrector: KKT factorization failed for element " +
                             std::to_string(problem_.element) + " (patch of " +
                             std::to_string(problem_.patch_nodes.size()) + " nodes)");
}

CorrectorSolver::~CorrectorSolver() = default;
CorrectorSolver::CorrectorSolver(CorrectorSolver&&) noexcept = default;
CorrectorSolver& CorrectorSolver::operator=(CorrectorSolver&&) noexcept = default;

Vec CorrectorSolver::solve(const Vec& rhs_full) const {
  const int nf = problem_.free_nodes.size();
  const int m = static_cast<int>(problem_.constraint_elems.size());
  Vec r = restrict_to(problem_.free_nodes, rhs_full);
  double rnorm = r.norm();
  if (rnorm == 0.0) return Vec::Zero(rhs_full.size());

  Vec rhs = Vec::Zero(nf + m);
  rhs.head(nf) = r;
  Vec sol = impl_->lu.solve(rhs);
  Vec w = sol.head(nf);
  Vec lambda = sol.tail(m);

  Vec res1 = problem_.A * w + problem_.C.transpose() * lambda - r;
  if (res1.norm() > tol_.corrector_rel * rnorm)
    throw std::runtime_error("corrector: stationarity residual too large for element " +
                             std::to_string(problem_.element) + " (patch of " +
                             std::to_string(problem_.patch_nodes.size()) + " nodes)");
  Vec res2 = problem_.C * w;
  double cscale = std::max(rnorm, problem_.C.norm() * w.norm());
  if (res2.norm() > tol_.corrector_rel * cscale)
    throw std::runtime_error("corrector: constraint residual too large for element " +
                             std::to_string(problem_.element) + " (patch of " +
                             std::to_string(problem_.patch_nodes.size()) + " nodes)");

  return extend_from(problem_.free_nodes, w, static_cast<int>(rhs_full.size()));
}

Vec solve_corrector(const CorrectorProblem& problem, const Vec& rhs_full, SolveTolerances tol) {
  return CorrectorSolver(problem, tol).solve(rhs_full);
}

namespace {

// Nodes of T plus their direct neighbors: the region where an input must be
// nonzero for the node-sum localization K_T to see it.
NodeSet one_ring(const SpatialNetwork& net, const NodeSet& T) {
  std::vector<int> ids(T.begin(), T.end());
  for (int x : T)
    for (int y : net.neighbors(x)) ids.push_back(y);
  return NodeSet::of(std::move(ids));
}

struct Contribution {
  int column;
  Vec values; // on the free patch nodes of the providing element
};

struct ProviderResult {
  std::vector<int> free_ids;
  std::vector<Contribution> contribs;
};

} // namespace

MultiscaleBasis build_basis(const SpatialNetwork& net, const SparseSymOperator& K,
                            const CoarseSpace& cs, BasisVariant variant, int ell,
                            SolveTolerances tol, int workers) {
  const int n = net.num_nodes();
  const int n_elem = cs.num_elements();
  if (variant == BasisVariant::Stabilized && !cs.pu)
    throw std::logic_error("build_basis: stabilized variant requires a partition of unity");
  if (variant != BasisVariant::Ideal && ell != kGlobalPatch && ell < 1)
    throw std::invalid_argument("build_basis: localized variants need ell >= 1");
  const int eff_ell = (variant == BasisVariant::Ideal) ? kGlobalPatch : ell;

  // Per-column inputs and their supports. P_H images are computed once.
  std::vector<Vec> inputs(n_elem);
  std::vector<NodeSet> input_support(n_elem);
  for (int t = 0; t < n_elem; ++t) {
    Vec b = cs.bubbles[t].to_dense(n);
    inputs[t] = (variant == BasisVariant::Stabilized) ? p_H(cs, b) : std::move(b);
    std::vector<int> sup;
    for (int x = 0; x < n; ++x)
      if (inputs[t][x] != 0.0) sup.push_back(x);
    input_support[t] = NodeSet::from_sorted(std::move(sup));
  }

  std::vector<NodeSet> rings(n_elem);
  for (int t = 0; t < n_elem; ++t) rings[t] = one_ring(net, cs.partition.elements[t]);

  // Columns affected by each providing element: those whose input is visible
  // to the node-sum localization on that element.
  std::vector<std::vector<int>> affected(n_elem);
  for (int prov = 0; prov < n_elem; ++prov)
    for (int t = 0; t < n_elem; ++t)
      if (input_support[t].intersects(rings[prov])) affected[prov].push_back(t);

  std::vector<int> all_elems(n_elem);
  for (int t = 0; t < n_elem; ++t) all_elems[t] = t;

  std::vector<ProviderResult> results(n_elem);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  auto worker = [&]() {
    // One-slot cache: consecutive providers with the same patch (e.g. all of
    // them once patches saturate) share a factorization.
    std::optional<CorrectorSolver> cached;
    while (!failed.load(std::memory_order_relaxed)) {
      int prov = next.fetch_add(1);
      if (prov >= n_elem) break;
      if (affected[prov].empty()) continue;
      try {
        std::vector<int> patch = (eff_ell == kGlobalPatch)
                                     ? all_elems
                                     : patch_elements(cs.partition, {prov}, eff_ell);
        if (!cached || cached->problem().patch_elems != patch)
          cached.emplace(make_corrector_problem(net, K, cs, prov, eff_ell), tol);
        const NodeSet& F = cached->problem().free_nodes;
        results[prov].free_ids = F.ids();
        for (int t : affected[prov]) {
          Vec r = corrector_rhs(K, cs.partition.elements[prov], inputs[t]);
          Vec w = cached->solve(r);
          results[prov].contribs.push_back({t, restrict_to(F, w)});
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        failed.store(true);
        if (error_message.empty()) error_message = e.what();
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error(error_message);

  // Deterministic reduction in provider order, independent of scheduling.
  std::vector<Vec> columns(n_elem);
  for (int t = 0; t < n_elem; ++t) columns[t] = inputs[t];
  long total_solves = 0;
  for (int prov = 0; prov < n_elem; ++prov) {
    total_solves += static_cast<long>(results[prov].contribs.size());
    const auto& ids = results[prov].free_ids;
    for (const auto& contrib : results[prov].contribs)
      for (std::size_t i = 0; i < ids.size(); ++i)
        columns[contrib.column][ids[i]] -= contrib.values[i];
  }

  MultiscaleBasis basis;
  basis.variant = variant;
  basis.ell = eff_ell;
  basis.corrector_solves = total_solves;
  basis.support_size.resize(n_elem);
  std::vector<Triplet> trips;
  for (int t = 0; t < n_elem; ++t) {
    int count = 0;
    for (int x = 0; x < n; ++x)
      if (columns[t][x] != 0.0) {
        trips.emplace_back(x, t, columns[t][x]);
        ++count;
      }
    basis.support_size[t] = count;
  }
  basis.phi.resize(n, n_elem);
  basis.phi.setFromTriplets(trips.begin(), trips.end());
  return basis;
}

void dump_basis(const MultiscaleBasis& basis, const std::string& dir) {
  std::filesystem::create_directories(dir);
  char name[64], buf[48];
  for (int t = 0; t < basis.phi.cols(); ++t) {
    std::snprintf(name, sizeof(name), "%s/basis_%03d.txt", dir.c_str(), t);
    std::ofstream out(name);
    if (!out) throw std::runtime_error(std::string("cannot open for writing: ") + name);
    for (SpMat::InnerIterator it(basis.phi, t); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%ld %.17g\n", static_cast<long>(it.row()), it.value());
      out << buf;
    }
  }
  std::ofstream man(dir + "/manifest.txt");
  man << "variant " << variant_name(basis.variant) << "\nell " << basis.ell << "\ncolumns "
      << basis.phi.cols() << "\ncorrector_solves " << basis.corrector_solves
      << "\nsupport_sizes";
  for (int s : basis.support_size) man << ' ' << s;
  man << '\n';
}

std::vector<double> decay_profile(const SpatialNetwork& net, const CoarseSpace& cs,
                                  const SparseSymOperator& K, int element, const Vec& v,
                                  SolveTolerances tol) {
  CorrectorProblem p = make_corrector_problem(net, K, cs, element, kGlobalPatch);
  Vec phi = solve_corrector(p, corrector_rhs(K, cs.partition.elements[element], v), tol);

  SparseSymOperator L = assemble_stiffness(net, K.alpha());
  NodeSet all = net.all_nodes();
  std::vector<double> profile;
  for (int ell = 0;; ++ell) {
    auto patch = patch_elements(cs.partition, {element}, ell);
    NodeSet exterior = all.set_difference(patch_node_set(cs.partition, patch));
    if (exterior.empty()) {
      profile.push_back(0.0);
      break;
    }
    profile.push_back(seminorm(localize(L, exterior, LocalizeMode::NodeSum), phi));
  }
  return profile;
}

} // namespace netlod
