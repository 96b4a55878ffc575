#include "doctest.h"

#include "netlod/partition.hpp"
#include "support/oracles.hpp"
#include "support/testnets.hpp"

using namespace netlod;
using namespace netlod::testing;

TEST_CASE("gonzalez centers on the unit path") {
  SpatialNetwork p5 = unit_path(5);
  CHECK(gonzalez_centers(p5, 2, 0) == std::vector<int>{0, 4});
  CHECK(gonzalez_centers(p5, 1, 2) == std::vector<int>{2});
  auto all = gonzalez_centers(p5, 5, 0);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<int>{0, 1, 2, 3, 4});
  CHECK_THROWS(gonzalez_centers(p5, 6, 0));
}

TEST_CASE("nearest-center assignment with deterministic ties") {
  SpatialNetwork p5 = unit_path(5);
  Partition p = assign_to_centers(p5, {0, 4}, 2);
  // node 2 is equidistant; the earlier center wins
  CHECK(p.elements[0] == NodeSet::of({0, 1, 2}));
  CHECK(p.elements[1] == NodeSet::of({3, 4}));

  Partition one = assign_to_centers(p5, {3}, 2);
  CHECK(one.elements[0] == p5.all_nodes());

  Partition fine = assign_to_centers(p5, {0, 1, 2, 3, 4}, 2);
  for (int t = 0; t < 5; ++t) CHECK(fine.elements[t].size() == 1);

  CHECK_THROWS(assign_to_centers(p5, {0, 0}, 2));
}

TEST_CASE("partition validity on random nets") {
  for (std::uint64_t seed : {2ULL, 12ULL, 22ULL}) {
    SpatialNetwork net = random_connected(40, 30, seed);
    Partition p = assign_to_centers(net, gonzalez_centers(net, 6, default_gonzalez_start(net)), 2);
    // disjoint cover
    int total = 0;
    for (const auto& T : p.elements) total += T.size();
    CHECK(total == net.num_nodes());
    for (int x = 0; x < net.num_nodes(); ++x)
      CHECK(p.elements[p.elem_of[x]].contains(x));
    // connected elements with their center inside
    for (int t = 0; t < p.num_elements(); ++t) {
      CHECK(p.elements[t].contains(p.centers[t]));
      auto d = dist_to_set(net, p.elements[t], NodeSet::of({p.centers[t]}));
      for (int x : p.elements[t]) CHECK(d[x] < kInfiniteDistance);
    }
  }
}

TEST_CASE("measured diameters") {
  SpatialNetwork p5 = unit_path(5);
  Partition p = assign_to_centers(p5, {0, 4}, 2);
  measure_H(p5, p);
  CHECK(p.H_T[0] == doctest::Approx(2.0));
  CHECK(p.H_T[1] == doctest::Approx(1.0));
  CHECK(p.H == doctest::Approx(2.0));

  Partition fine = assign_to_centers(p5, {0, 1, 2, 3, 4}, 2);
  measure_H(p5, fine);
  CHECK(fine.H == 0.0);

  Partition one = assign_to_centers(p5, {2}, 2);
  measure_H(p5, one);
  CHECK(one.H == doctest::Approx(4.0));
}

TEST_CASE("poincare constant of a single-edge element") {
  // two nodes, unit edge, alpha = 1: M = diag(1/2, 1/2), mean-zero v = (1,-1)
  // gives |v|_M^2 = 1, |v|_L^2 = 4, so C_po = 1/2
  SpatialNetwork p2 = unit_path(2);
  Partition p = assign_to_centers(p2, {0}, 2);
  auto diag = diagnostics(p2, p, assemble_mass(p2, 1.0), assemble_stiffness(p2, 1.0));
  REQUIRE(diag.C_po_ok[0] == 1);
  CHECK(diag.C_po[0] == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("diagnostics on a structured grid") {
  SpatialNetwork grid = grid_network(6);
  // 4 equal quadrants by construction
  std::vector<int> centers;
  for (int j : {1, 4})
    for (int i : {1, 4}) centers.push_back(j * 6 + i);
  Partition p = assign_to_centers(grid, centers, 2);
  measure_H(grid, p);
  auto diag = diagnostics(grid, p, assemble_mass(grid, 1.0), assemble_stiffness(grid, 1.0));
  CHECK(diag.sigma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(diag.max_edge_length == doctest::Approx(1.0));
  for (int t = 0; t < 4; ++t) {
    CHECK(diag.element_mass[t] == doctest::Approx(diag.element_mass[0]).epsilon(1e-12));
    CHECK(diag.vol[t] == doctest::Approx(diag.vol[0]));
    REQUIRE(diag.C_po_ok[t] == 1);
    CHECK(diag.C_po[t] == doctest::Approx(diag.C_po[0]).epsilon(1e-6));
  }

  SUBCASE("singleton elements have C_po = 0") {
    std::vector<int> all_nodes(grid.num_nodes());
    for (int i = 0; i < grid.num_nodes(); ++i) all_nodes[i] = i;
    Partition fine = assign_to_centers(grid, all_nodes, 2);
    auto d2 = diagnostics(grid, fine, assemble_mass(grid, 1.0), assemble_stiffness(grid, 1.0));
    for (double c : d2.C_po) CHECK(c == 0.0);
  }

  SUBCASE("refined elements have smaller Poincare constants than one global element") {
    Partition global = assign_to_centers(grid, {2 * 6 + 2}, 2);
    auto dg = diagnostics(grid, global, assemble_mass(grid, 1.0), assemble_stiffness(grid, 1.0));
    REQUIRE(dg.C_po_ok[0] == 1);
    for (int t = 0; t < 4; ++t) CHECK(diag.C_po[t] <= dg.C_po[0] + 1e-10);
  }
}

TEST_CASE("hierarchy with nominal mesh sizes") {
  SpatialNetwork net = random_connected(60, 45, 8);
  PartitionHierarchy h = build_hierarchy(net, {25, 50}, 2, 0);
  REQUIRE(h.levels.size() == 2);
  CHECK(h.levels[0].H_nominal == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(h.levels[0].H > 0.0);
  CHECK(h.levels[1].H_nominal == doctest::Approx(std::pow(50.0, -0.5)).epsilon(1e-15));
  CHECK_THROWS(build_hierarchy(net, {50, 25}, 2, 0));
  CHECK_THROWS(build_hierarchy(net, {}, 2, 0));

  // the nominal values quoted for the usual ladder
  std::vector<int> ladder{25, 50, 100, 200, 400};
  std::vector<double> expect{0.2, 0.1414213562373095, 0.1, 0.07071067811865475, 0.05};
  for (std::size_t i = 0; i < ladder.size(); ++i)
    CHECK(std::pow(static_cast<double>(ladder[i]), -0.5) ==
          doctest::Approx(expect[i]).epsilon(1e-14));
}

TEST_CASE("determinism of the full partition pipeline") {
  SpatialNetwork net = random_connected(50, 35, 13);
  PartitionHierarchy a = build_hierarchy(net, {4, 8}, 2, 7);
  PartitionHierarchy b = build_hierarchy(net, {4, 8}, 2, 7);
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    CHECK(a.levels[l].centers == b.levels[l].centers);
    CHECK(a.levels[l].elem_of == b.levels[l].elem_of);
  }
}

TEST_CASE("gonzalez is a 2-approximation on a small corpus") {
  std::vector<SpatialNetwork> corpus;
  corpus.push_back(unit_path(7));
  corpus.push_back(grid_network(3));
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL})
    corpus.push_back(random_connected(8 + static_cast<int>(seed), 5, seed));
  for (const auto& net : corpus) {
    REQUIRE(net.num_nodes() <= 12);
    for (int k : {2, 3}) {
      double opt = brute_force_center_radius(net, k);
      double greedy = covering_radius(net, gonzalez_centers(net, k, 0));
      CHECK(greedy <= 2.0 * opt + 1e-12);
    }
  }
}
