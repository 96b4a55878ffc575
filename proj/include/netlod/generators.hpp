#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "netlod/network.hpp"
#include "netlod/operators.hpp"

namespace netlod {

struct FiberConfig {
  int n_lines = 4000;
  double line_length = 0.1;
  std::array<double, 2> midpoint_min{-0.05, -0.05};
  std::array<double, 2> midpoint_max{1.05, 1.05};
  std::uint64_t seed = 0;
  /// When positive, edges longer than this are split into equal pieces by
  /// inserting nodes. Enforces the locality bound (max edge length below the
  /// coarse scale) on sparse networks whose boundary stubs would otherwise
  /// be longer than fine-level elements.
  double subdivide_max_len = 0.0;
  bool brute_force_pairs = false; // audit knob: skip the grid acceleration
};

struct CardboardConfig {
  FiberConfig layer;             // per-layer planar parameters
  double delta = 1e-6;           // z offset of the flat layers beyond 1/8
  double connect_radius = 1e-4;  // max distance for inter-layer edges
};

struct FemGridConfig {
  int m = 64;                    // cells per side of the unit square
  std::uint64_t seed = 0;
  double coeff_min = 0.1;
  double coeff_max = 1.0;
  bool unit_coefficient = false; // a == 1 instead of random draws
};

struct GeneratorStats {
  std::string kind;
  std::uint64_t seed = 0;
  int nodes = 0;
  int edges = 0;
  int iso_dim = 2;
  int dropped_lines = 0;   // clipped away entirely
  int resampled_lines = 0; // collinear-overlap rejections
  std::string rng_id;
};

struct FiberResult {
  SpatialNetwork net;
  GeneratorStats stats;
};

/// Random line segments clipped to the unit square; nodes at endpoints and
/// pairwise intersections, edges between consecutive points along each
/// segment. Keeps the largest connected component and prunes interior
/// degree-one nodes to a fixed point. Boundary nodes (exactly on the unit
/// square's edge) are Dirichlet.
FiberResult gen_fiber_network(const FiberConfig& cfg);

/// Three-layer corrugated sheet: two flat copies of the planar network at
/// z = +-(1/8 + delta) and an oscillating middle layer z = cos(12 pi x)/8,
/// joined by nearest-node edges within connect_radius. Dirichlet nodes are
/// those whose (x, y) lies on the unit-square boundary.
FiberResult gen_cardboard(const CardboardConfig& cfg);

struct FemGridResult {
  SpatialNetwork net;
  SparseSymOperator K; // P1 stiffness of -div(a grad u), alpha = 0
  GeneratorStats stats;
};

/// Structured right-triangle mesh on the unit square with a piecewise
/// constant coefficient per triangle; the network is the mesh edge graph.
FemGridResult gen_fem_grid(const FemGridConfig& cfg);

enum class SourceTerm { G1, G2 }; // g1(x,y) = sin(x)sin(y), g2 == 1

SourceTerm source_from_name(const std::string& name);
const char* source_name(SourceTerm s);

/// f(x) = M(x,x) * g(coords(x)); z is ignored for 3D networks.
Vec source_vector(const SpatialNetwork& net, const SparseSymOperator& mass, SourceTerm g);

/// Random edge weights, uniform in [wmin, wmax], one portable draw per edge
/// in edge order.
std::vector<double> random_edge_weights(const SpatialNetwork& net, double wmin, double wmax,
                                        std::uint64_t seed);

} // namespace netlod
