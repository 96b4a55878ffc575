#include "netlod/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace netlod {

namespace {

// Deterministic COO -> sparse compression: stable sort by (col, row), then
// sequential accumulation of duplicates in list order. Explicit zeros are
// kept so that assembled patterns are structural, not value-dependent.
SpMat compress_coo(int n, std::vector<Triplet>& trips) {
  std::stable_sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
    if (a.col() != b.col()) return a.col() < b.col();
    return a.row() < b.row();
  });
  std::vector<Triplet> merged;
  merged.reserve(trips.size());
  for (const auto& t : trips) {
    if (!merged.empty() && merged.back().col() == t.col() && merged.back().row() == t.row())
      merged.back() = Triplet(t.row(), t.col(), merged.back().value() + t.value());
    else
      merged.push_back(t);
  }
  SpMat mat(n, n);
  mat.setFromTriplets(merged.begin(), merged.end());
  return mat;
}

} // namespace

SparseSymOperator::SparseSymOperator(OperatorKind kind, double alpha, SpMat mat)
    : kind_(kind), alpha_(alpha), mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols()) throw std::invalid_argument("operator: non-square matrix");
  if (alpha_ < 0.0 || alpha_ > 2.0) throw std::invalid_argument("operator: alpha outside [0,2]");
}

SparseSymOperator assemble_mass(const SpatialNetwork& net, double alpha) {
  const int n = net.num_nodes();
  std::vector<Triplet> trips;
  trips.reserve(2 * net.num_edges());
  for (const auto& e : net.edges()) {
    double half = 0.5 * std::pow(e.length, 2.0 - alpha);
    trips.emplace_back(e.u, e.u, half);
    trips.emplace_back(e.v, e.v, half);
  }
  SpMat mat = compress_coo(n, trips);
  for (int x = 0; x < n; ++x)
    if (net.degree(x) == 0 || mat.coeff(x, x) <= 0.0)
      throw std::invalid_argument("assemble_mass: node with zero mass (isolated node)");
  return SparseSymOperator(OperatorKind::Mass, alpha, std::move(mat));
}

namespace {

SparseSymOperator assemble_laplacian_kind(const SpatialNetwork& net, double alpha,
                                          std::span<const double> weights, OperatorKind kind) {
  const int n = net.num_nodes();
  std::vector<Triplet> trips;
  trips.reserve(4 * net.num_edges());
  for (int ei = 0; ei < net.num_edges(); ++ei) {
    const auto& e = net.edges()[ei];
    double w = weights.empty() ? 1.0 : weights[ei];
    if (!(w > 0.0)) throw std::invalid_argument("weighted laplacian: nonpositive edge weight");
    double c = w / std::pow(e.length, alpha);
    trips.emplace_back(e.u, e.u, c);
    trips.emplace_back(e.v, e.v, c);
    trips.emplace_back(e.u, e.v, -c);
    trips.emplace_back(e.v, e.u, -c);
  }
  return SparseSymOperator(kind, alpha, compress_coo(n, trips));
}

} // namespace

SparseSymOperator assemble_stiffness(const SpatialNetwork& net, double alpha) {
  return assemble_laplacian_kind(net, alpha, {}, OperatorKind::Stiffness);
}

SparseSymOperator assemble_weighted_laplacian(const SpatialNetwork& net, double alpha,
                                              std::span<const double> weights) {
  if (static_cast<int>(weights.size()) != net.num_edges())
    throw std::invalid_argument("weighted laplacian: weight count mismatch");
  return assemble_laplacian_kind(net, alpha, weights, OperatorKind::WeightedLaplacian);
}

SparseSymOperator assemble_weighted_laplacian(const SpatialNetwork& net, double alpha) {
  std::vector<double> w(net.num_edges());
  for (int ei = 0; ei < net.num_edges(); ++ei) w[ei] = net.edges()[ei].weight;
  return assemble_weighted_laplacian(net, alpha, w);
}

LocalizedOperator::LocalizedOperator(OperatorKind parent_kind, NodeSet S, LocalizeMode mode,
                                     SpMat mat)
    : parent_kind_(parent_kind), S_(std::move(S)), mode_(mode), mat_(std::move(mat)) {}

double LocalizedOperator::quad(const Vec& full) const {
  if (mode_ == LocalizeMode::NodeSum) return full.dot(mat_ * full);
  Vec local = restrict_to(S_, full);
  return local.dot(mat_ * local);
}

Vec LocalizedOperator::apply(const Vec& full) const {
  if (mode_ == LocalizeMode::NodeSum) return mat_ * full;
  Vec local = restrict_to(S_, full);
  return extend_from(S_, mat_ * local, static_cast<int>(full.size()));
}

LocalizedOperator localize(const SparseSymOperator& op, const NodeSet& S, LocalizeMode mode) {
  if (S.empty()) throw std::invalid_argument("localize: empty node set");
  const SpMat& A = op.matrix();
  const int n = op.dim();

  if (mode == LocalizeMode::PrincipalSubmatrix) {
    std::vector<int> pos(n, -1);
    for (int i = 0; i < S.size(); ++i) pos[S[i]] = i;
    std::vector<Triplet> trips;
    for (int col = 0; col < A.outerSize(); ++col) {
      if (pos[col] < 0) continue;
      for (SpMat::InnerIterator it(A, col); it; ++it)
        if (pos[it.row()] >= 0) trips.emplace_back(pos[it.row()], pos[col], it.value());
    }
    return LocalizedOperator(op.kind(), S, mode, compress_coo(S.size(), trips));
  }

  // Node-sum: each off-diagonal entry (x,y) is read as an edge with
  // conductance c = -A(x,y), split half/half between K_x and K_y; the
  // diagonal remainder (row sum) stays with its own node. For mass this
  // reduces to the diagonal restricted to S. Pure Laplacian kinds have
  // zero row sums by construction; recomputing them in floating point
  // would only inject round-off, so they are skipped outright.
  std::vector<std::uint8_t> in(n, 0);
  for (int x : S) in[x] = 1;
  std::vector<Triplet> trips;
  Vec rowsum;
  if (op.kind() == OperatorKind::Stiffness || op.kind() == OperatorKind::WeightedLaplacian)
    rowsum = Vec::Zero(n);
  else
    rowsum = A * Vec::Ones(n);
  for (int col = 0; col < A.outerSize(); ++col) {
    for (SpMat::InnerIterator it(A, col); it; ++it) {
      int x = static_cast<int>(it.row()), y = col;
      if (x >= y) continue; // strict upper part, each edge once
      double f = 0.5 * (in[x] + in[y]);
      if (f == 0.0) continue;
      double c = -it.value();
      trips.emplace_back(x, x, f * c);
      trips.emplace_back(y, y, f * c);
      trips.emplace_back(x, y, -f * c);
      trips.emplace_back(y, x, -f * c);
    }
  }
  for (int x : S)
    if (rowsum[x] != 0.0) trips.emplace_back(x, x, rowsum[x]);
  return LocalizedOperator(op.kind(), S, mode, compress_coo(n, trips));
}

namespace {

double clamped_sqrt(double q, const Vec& v, double clamp_tol) {
  if (q < 0.0) {
    double scale = v.squaredNorm();
    if (q < -clamp_tol * scale)
      throw std::runtime_error("seminorm: quadratic form negative beyond round-off");
    q = 0.0;
  }
  return std::sqrt(q);
}

} // namespace

double seminorm(const SparseSymOperator& op, const Vec& v, double clamp_tol) {
  if (v.size() != op.dim()) throw std::invalid_argument("seminorm: dimension mismatch");
  return clamped_sqrt(op.quad(v), v, clamp_tol);
}

double seminorm(const LocalizedOperator& op, const Vec& v, double clamp_tol) {
  return clamped_sqrt(op.quad(v), v, clamp_tol);
}

double dual_norm_rhs(const SparseSymOperator& mass, const Vec& f) {
  Vec d = mass.diagonal();
  double s = 0.0;
  for (int i = 0; i < f.size(); ++i) s += f[i] * f[i] / d[i];
  return std::sqrt(s);
}

Vec mass_solve(const SparseSymOperator& mass, const Vec& f) {
  return f.cwiseQuotient(mass.diagonal());
}

void export_matrix(const SpMat& mat, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  long nnz = 0;
  for (int col = 0; col < mat.outerSize(); ++col)
    for (SpMat::InnerIterator it(mat, col); it; ++it)
      if (it.row() <= col) ++nnz;
  out << mat.rows() << ' ' << nnz << " symmetric\n";
  char buf[48];
  for (int col = 0; col < mat.outerSize(); ++col)
    for (SpMat::InnerIterator it(mat, col); it; ++it)
      if (it.row() <= col) {
        std::snprintf(buf, sizeof(buf), "%.17g", it.value());
        out << it.row() << ' ' << col << ' ' << buf << '\n';
      }
  if (!out) throw std::runtime_error("write failed: " + path);
}

SpMat import_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  long n = 0, nnz = 0;
  std::string tag;
  if (!(in >> n >> nnz >> tag) || tag != "symmetric")
    throw std::runtime_error("bad matrix header: " + path);
  std::vector<Triplet> trips;
  trips.reserve(2 * nnz);
  for (long k = 0; k < nnz; ++k) {
    int i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw std::runtime_error("bad matrix entry: " + path);
    trips.emplace_back(i, j, v);
    if (i != j) trips.emplace_back(j, i, v);
  }
  return compress_coo(static_cast<int>(n), trips);
}

Vec restrict_to(const NodeSet& S, const Vec& full) {
  Vec out(S.size());
  for (int i = 0; i < S.size(); ++i) out[i] = full[S[i]];
  return out;
}

Vec extend_from(const NodeSet& S, const Vec& local, int n) {
  Vec out = Vec::Zero(n);
  for (int i = 0; i < S.size(); ++i) out[S[i]] = local[i];
  return out;
}

} // namespace netlod
