#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "netlod/network.hpp"
#include "netlod/partition.hpp"
#include "support/testnets.hpp"

using namespace netlod;
using namespace netlod::testing;

TEST_CASE("NodeSet basics") {
  NodeSet s = NodeSet::of({3, 1, 2, 1});
  CHECK(s.size() == 3);
  CHECK(s.contains(2));
  CHECK(!s.contains(0));
  CHECK(s.subset_of(NodeSet::range(4)));
  CHECK(!NodeSet::range(4).subset_of(s));
  CHECK(s.set_union(NodeSet::of({0})) == NodeSet::range(4));
  CHECK(s.set_difference(NodeSet::of({1, 2})) == NodeSet::of({3}));
  CHECK(s.intersects(NodeSet::of({2, 9})));
  CHECK(!s.intersects(NodeSet::of({0, 9})));
  CHECK_THROWS(NodeSet::from_sorted({2, 1}));
}

TEST_CASE("network invariants enforced at construction") {
  std::vector<double> coords{0, 0, 1, 0};
  std::vector<std::uint8_t> d{1, 0}, b{0, 0};
  CHECK_THROWS(SpatialNetwork(2, coords, {{0, 0, 1.0, 0.0}}, d, b));                   // self-loop
  CHECK_THROWS(SpatialNetwork(2, coords, {{0, 1, 1.0, 0.0}, {1, 0, 1.0, 0.0}}, d, b)); // duplicate
  CHECK_THROWS(SpatialNetwork(2, coords, {{0, 1, -1.0, 0.0}}, d, b));                  // bad weight
  CHECK_THROWS(SpatialNetwork(2, coords, {{0, 1, 1.0, 0.0}}, {0, 0}, b));              // no Dirichlet
  CHECK_THROWS(SpatialNetwork(2, {0, 0, 1, 0, 2, 0}, {{0, 1, 1.0, 0.0}}, {1, 0, 0},
                              {0, 0, 0}));                                             // disconnected
  CHECK_THROWS(SpatialNetwork(2, {0, 0, 0, 0}, {{0, 1, 1.0, 0.0}}, d, b));             // zero length
}

TEST_CASE("graph_distance on the 0-1-3 path") {
  SpatialNetwork net = path_network({0.0, 1.0, 3.0});
  NodeSet all = net.all_nodes();
  CHECK(graph_distance(net, all, 0, 2) == doctest::Approx(3.0));
  CHECK(graph_distance(net, all, 1, 1) == 0.0);
  NodeSet split = NodeSet::of({0, 2});
  CHECK(graph_distance(net, split, 0, 2) == kInfiniteDistance);
  CHECK_THROWS(graph_distance(net, split, 0, 1)); // node outside S
}

TEST_CASE("graph_distance symmetry and triangle inequality") {
  SpatialNetwork net = random_connected(14, 10, 7);
  NodeSet all = net.all_nodes();
  for (auto [x, y, z] : {std::tuple{0, 5, 9}, {1, 7, 13}, {3, 4, 11}}) {
    double dxy = graph_distance(net, all, x, y);
    CHECK(graph_distance(net, all, y, x) == doctest::Approx(dxy));
    double dyz = graph_distance(net, all, y, z);
    double dxz = graph_distance(net, all, x, z);
    CHECK(dxz <= dxy + dyz + 1e-12);
  }
}

TEST_CASE("dist_to_set") {
  SpatialNetwork net = path_network({0.0, 1.0, 3.0});
  NodeSet all = net.all_nodes();
  auto d = dist_to_set(net, all, NodeSet::of({0}));
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(1.0));
  CHECK(d[2] == doctest::Approx(3.0));

  auto zeros = dist_to_set(net, all, all);
  for (int i = 0; i < 3; ++i) CHECK(zeros[i] == 0.0);

  NodeSet split = NodeSet::of({0, 2});
  auto dd = dist_to_set(net, split, NodeSet::of({0}));
  CHECK(dd[2] == kInfiniteDistance);

  CHECK_THROWS(dist_to_set(net, all, NodeSet{}));
  CHECK_THROWS(dist_to_set(net, split, NodeSet::of({1}))); // R not inside S
}

TEST_CASE("boundary_nodes") {
  SpatialNetwork net = unit_path(5);
  NodeSet all = net.all_nodes();
  CHECK(boundary_nodes(net, NodeSet::of({0, 1, 2}), all) == NodeSet::of({2}));
  CHECK(boundary_nodes(net, all, all).empty());
  CHECK(boundary_nodes(net, NodeSet::of({2}), all) == NodeSet::of({2}));

  SUBCASE("boundary nodes separate R from the rest") {
    SpatialNetwork rnd = random_connected(20, 15, 9);
    NodeSet S = rnd.all_nodes();
    NodeSet R = NodeSet::of({0, 2, 4, 6, 8, 10, 12});
    NodeSet bnd = boundary_nodes(rnd, R, S);
    CHECK(bnd.subset_of(R));
    // every edge leaving R starts at a boundary node
    for (const auto& e : rnd.edges()) {
      bool u_in = R.contains(e.u), v_in = R.contains(e.v);
      if (u_in != v_in) CHECK(bnd.contains(u_in ? e.u : e.v));
    }
  }
}

TEST_CASE("element_boundary uses stored domain flags") {
  // 0-1-3 path with node 0 on the domain boundary
  SpatialNetwork net = path_network({0.0, 1.0, 3.0}, {1, 0, 0}, {1, 0, 0});
  CHECK(element_boundary(net, net.all_nodes()) == NodeSet::of({0}));

  SpatialNetwork p5 = unit_path(5); // no domain-boundary flags
  CHECK(element_boundary(p5, p5.all_nodes()).empty());
  CHECK(element_boundary(p5, NodeSet::of({1, 2, 3})) == NodeSet::of({1, 3}));
}

TEST_CASE("patches over a partition") {
  SpatialNetwork net = unit_path(5);
  Partition p = assign_to_centers(net, {0, 4}, 2);
  REQUIRE(p.elements[0] == NodeSet::of({0, 1, 2}));
  REQUIRE(p.elements[1] == NodeSet::of({3, 4}));

  CHECK(patch_elements(p, {1}, 0) == std::vector<int>{1});
  CHECK(patch_elements(p, {1}, 1) == std::vector<int>{0, 1});
  CHECK(patch_elements(p, {0}, 5) == std::vector<int>{0, 1}); // saturation

  SUBCASE("monotonicity") {
    SpatialNetwork rnd = random_connected(30, 20, 3);
    Partition rp = assign_to_centers(rnd, gonzalez_centers(rnd, 5, 0), 2);
    for (int t = 0; t < 5; ++t) {
      auto prev = patch_elements(rp, {t}, 0);
      for (int ell = 1; ell <= 4; ++ell) {
        auto cur = patch_elements(rp, {t}, ell);
        CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
        prev = cur;
      }
    }
  }
}

TEST_CASE("network file round-trip is bit-faithful") {
  SpatialNetwork net = random_connected(17, 12, 99);
  std::vector<double> weights(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) weights[e] = 0.1 + 0.7919 * (e + 1) / 3.0;
  SpatialNetwork weighted = net.with_weights(weights);

  auto path = std::filesystem::temp_directory_path() / "netlod_roundtrip.net";
  weighted.save(path.string());
  SpatialNetwork loaded = SpatialNetwork::load(path.string());
  std::filesystem::remove(path);

  REQUIRE(loaded.num_nodes() == weighted.num_nodes());
  REQUIRE(loaded.num_edges() == weighted.num_edges());
  REQUIRE(loaded.dim() == weighted.dim());
  for (int i = 0; i < loaded.num_nodes(); ++i) {
    CHECK(loaded.coord(i, 0) == weighted.coord(i, 0));
    CHECK(loaded.coord(i, 1) == weighted.coord(i, 1));
    CHECK(loaded.is_dirichlet(i) == weighted.is_dirichlet(i));
    CHECK(loaded.on_domain_boundary(i) == weighted.on_domain_boundary(i));
  }
  for (int e = 0; e < loaded.num_edges(); ++e) {
    CHECK(loaded.edges()[e].u == weighted.edges()[e].u);
    CHECK(loaded.edges()[e].v == weighted.edges()[e].v);
    CHECK(loaded.edges()[e].weight == weighted.edges()[e].weight);
    CHECK(loaded.edges()[e].length == weighted.edges()[e].length);
  }
}
