#include "doctest.h"

#include <filesystem>

#include "netlod/generators.hpp"
#include "netlod/operators.hpp"
#include "support/testnets.hpp"

using namespace netlod;
using namespace netlod::testing;

namespace {

Eigen::MatrixXd dense(const SpMat& m) { return Eigen::MatrixXd(m); }

} // namespace

TEST_CASE("mass assembly") {
  SpatialNetwork net = path_network({0.0, 1.0, 3.0});
  Vec d1 = assemble_mass(net, 1.0).diagonal();
  CHECK(d1[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d1[1] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(d1[2] == doctest::Approx(1.0).epsilon(1e-15));

  Vec d2 = assemble_mass(net, 2.0).diagonal(); // |x-y|^0 = 1: deg/2
  CHECK(d2[0] == 0.5);
  CHECK(d2[1] == 1.0);
  CHECK(d2[2] == 0.5);

  Vec d3 = assemble_mass(unit_path(3), 0.7).diagonal();
  CHECK(d3[0] == 0.5);
  CHECK(d3[1] == 1.0);
  CHECK(d3[2] == 0.5);

  // single node, no edges: zero mass is rejected
  SpatialNetwork lonely(2, {0.0, 0.0}, {}, {1}, {0});
  CHECK_THROWS(assemble_mass(lonely, 1.0));
}

TEST_CASE("stiffness assembly") {
  SpatialNetwork net = path_network({0.0, 1.0, 3.0});
  Eigen::MatrixXd L = dense(assemble_stiffness(net, 1.0).matrix());
  Eigen::MatrixXd expect(3, 3);
  expect << 1, -1, 0, -1, 1.5, -0.5, 0, -0.5, 0.5;
  CHECK((L - expect).cwiseAbs().maxCoeff() == 0.0);

  Vec ones = Vec::Ones(3);
  CHECK(assemble_stiffness(net, 1.0).quad(ones) == 0.0);

  Eigen::MatrixXd Lu = dense(assemble_stiffness(unit_path(3), 1.0).matrix());
  Eigen::MatrixXd expect_u(3, 3);
  expect_u << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((Lu - expect_u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weighted laplacian") {
  SpatialNetwork net = random_connected(12, 8, 5);
  std::vector<double> unit(net.num_edges(), 1.0);
  CHECK((dense(assemble_weighted_laplacian(net, 1.0, unit).matrix()) -
         dense(assemble_stiffness(net, 1.0).matrix()))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  SpatialNetwork pair(2, {0, 0, 1, 0}, {{0, 1, 1.0, 0.0}}, {1, 0}, {0, 0});
  Eigen::MatrixXd W = dense(assemble_weighted_laplacian(pair, 1.0, {{0.1}}).matrix());
  CHECK(W(0, 0) == 0.1);
  CHECK(W(0, 1) == -0.1);

  std::vector<double> w(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) w[e] = 0.3 + 0.05 * e;
  std::vector<double> w2 = w;
  for (auto& x : w2) x *= 2.0;
  CHECK((2.0 * dense(assemble_weighted_laplacian(net, 1.0, w).matrix()) -
         dense(assemble_weighted_laplacian(net, 1.0, w2).matrix()))
            .cwiseAbs()
            .maxCoeff() < 1e-15);

  std::vector<double> bad(net.num_edges(), 1.0);
  bad[0] = 0.0;
  CHECK_THROWS(assemble_weighted_laplacian(net, 1.0, bad));
}

TEST_CASE("node-sum and principal localization") {
  SpatialNetwork p3 = unit_path(3);
  SparseSymOperator L = assemble_stiffness(p3, 1.0);

  SUBCASE("S = N reproduces the operator") {
    LocalizedOperator all = localize(L, p3.all_nodes(), LocalizeMode::NodeSum);
    CHECK((dense(all.matrix()) - dense(L.matrix())).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single-node node-sum carries half edges") {
    LocalizedOperator loc = localize(L, NodeSet::of({0}), LocalizeMode::NodeSum);
    Eigen::MatrixXd expect(3, 3);
    expect << 0.5, -0.5, 0, -0.5, 0.5, 0, 0, 0, 0;
    CHECK((dense(loc.matrix()) - expect).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("principal submatrix") {
    LocalizedOperator loc = localize(L, NodeSet::of({0, 1}), LocalizeMode::PrincipalSubmatrix);
    Eigen::MatrixXd expect(2, 2);
    expect << 1, -1, -1, 2;
    CHECK((dense(loc.matrix()) - expect).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("mass node-sum is the diagonal on S") {
    SparseSymOperator M = assemble_mass(p3, 1.0);
    LocalizedOperator loc = localize(M, NodeSet::of({1}), LocalizeMode::NodeSum);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(3, 3);
    expect(1, 1) = 1.0;
    CHECK((dense(loc.matrix()) - expect).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("node-sum localizations over a partition sum to the global operator") {
  SUBCASE("bit-level on an integer-length net") {
    SpatialNetwork net = grid_network(4);
    SparseSymOperator L = assemble_stiffness(net, 0.0); // conductances exactly 1
    std::vector<NodeSet> parts;
    for (int r = 0; r < 4; ++r) {
      std::vector<int> ids;
      for (int x = 0; x < net.num_nodes(); ++x)
        if (x % 4 == r) ids.push_back(x);
      parts.push_back(NodeSet::from_sorted(ids));
    }
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(net.num_nodes(), net.num_nodes());
    for (const auto& S : parts) sum += dense(localize(L, S, LocalizeMode::NodeSum).matrix());
    CHECK((sum - dense(L.matrix())).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("to round-off on a random net") {
    SpatialNetwork net = random_connected(20, 15, 11);
    SparseSymOperator L = assemble_stiffness(net, 1.0);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(20, 20);
    for (int x = 0; x < 20; ++x)
      sum += dense(localize(L, NodeSet::of({x}), LocalizeMode::NodeSum).matrix());
    CHECK((sum - dense(L.matrix())).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("seminorms") {
  SpatialNetwork p3 = unit_path(3);
  SparseSymOperator L = assemble_stiffness(p3, 1.0);
  CHECK(seminorm(L, Vec::Ones(3)) == 0.0);

  Vec v(3);
  v << 1, 0, 0;
  CHECK(seminorm(L, v) == doctest::Approx(1.0).epsilon(1e-15)); // one unit jump

  SparseSymOperator M = assemble_mass(p3, 1.0);
  LocalizedOperator MT = localize(M, NodeSet::of({0}), LocalizeMode::NodeSum);
  Vec w(3);
  w << 2, 7, -3; // only node 0 matters
  CHECK(MT.quad(w) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(seminorm(MT, w) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("laplacian quadratic form matches the edge sum") {
  SpatialNetwork net = random_connected(25, 18, 21);
  std::vector<double> w(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) w[e] = 0.1 + 0.9 * ((e * 7919) % 100) / 100.0;
  SparseSymOperator K = assemble_weighted_laplacian(net, 1.0, w);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Vec v = random_vector(net.num_nodes(), seed);
    double by_edges = 0.0;
    for (int e = 0; e < net.num_edges(); ++e) {
      const auto& ed = net.edges()[e];
      double diff = v[ed.u] - v[ed.v];
      by_edges += w[e] / ed.length * diff * diff;
    }
    CHECK(K.quad(v) == doctest::Approx(by_edges).epsilon(1e-12));
  }
}

TEST_CASE("spectral bounds of the weighted laplacian") {
  SpatialNetwork net = random_connected(30, 25, 31);
  std::vector<double> w = random_edge_weights(net, 0.1, 1.0, 17);
  double wmin = *std::min_element(w.begin(), w.end());
  double wmax = *std::max_element(w.begin(), w.end());
  SparseSymOperator K = assemble_weighted_laplacian(net, 1.0, w);
  SparseSymOperator L = assemble_stiffness(net, 1.0);
  for (int i = 0; i < 100; ++i) {
    Vec v = random_free_vector(net, 1000 + i);
    double lq = L.quad(v), kq = K.quad(v);
    CHECK(kq >= wmin * lq - 1e-12);
    CHECK(kq <= wmax * lq + 1e-12);
  }
}

TEST_CASE("sparsity pattern of K matches L") {
  SpatialNetwork net = random_connected(18, 14, 41);
  std::vector<double> w = random_edge_weights(net, 0.1, 1.0, 5);
  SparseSymOperator K = assemble_weighted_laplacian(net, 1.0, w);
  SparseSymOperator L = assemble_stiffness(net, 1.0);
  auto pattern = [](const SpMat& m) {
    std::vector<std::pair<int, int>> p;
    for (int col = 0; col < m.outerSize(); ++col)
      for (SpMat::InnerIterator it(m, col); it; ++it) p.push_back({it.row(), col});
    return p;
  };
  CHECK(pattern(K.matrix()) == pattern(L.matrix()));
}

TEST_CASE("dual norm of a right-hand side") {
  SpatialNetwork p3 = path_network({0.0, 1.0, 3.0});
  SparseSymOperator M = assemble_mass(p3, 1.0);

  Vec ones = Vec::Ones(3);
  Vec f = M.apply(ones);
  CHECK(dual_norm_rhs(M, f) == doctest::Approx(seminorm(M, ones)).epsilon(1e-14));
  CHECK(dual_norm_rhs(M, Vec::Zero(3)) == 0.0);

  SpMat d(1, 1);
  d.insert(0, 0) = 4.0;
  SparseSymOperator m4(OperatorKind::Mass, 1.0, d);
  Vec f2(1);
  f2 << 2.0;
  CHECK(dual_norm_rhs(m4, f2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mass_solve(m4, f2)[0] == 0.5);
}

TEST_CASE("matrix coordinate export round-trip") {
  SpatialNetwork net = random_connected(10, 6, 77);
  SparseSymOperator L = assemble_stiffness(net, 1.0);
  auto path = std::filesystem::temp_directory_path() / "netlod_matrix.txt";
  export_matrix(L.matrix(), path.string());
  SpMat back = import_matrix(path.string());
  std::filesystem::remove(path);
  CHECK((dense(back) - dense(L.matrix())).cwiseAbs().maxCoeff() == 0.0);
}
