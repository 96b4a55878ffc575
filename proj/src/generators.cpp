#include "netlod/generators.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "netlod/rng.hpp"

namespace netlod {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMergeTol = 1e-12;     // duplicate-point merge distance
constexpr double kCollinearTol = 1e-12; // orientation predicate tolerance

struct Segment {
  double x0, y0, x1, y1;
};

// Liang-Barsky clip to the closed unit square. Clipped coordinates are
// snapped exactly onto the boundary value so that the on-boundary test
// downstream is an exact comparison.
bool clip_to_unit_square(Segment& s) {
  double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
  double t0 = 0.0, t1 = 1.0;
  int axis0 = -1, axis1 = -1; // 0:x=0, 1:x=1, 2:y=0, 3:y=1
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {s.x0, 1.0 - s.x0, s.y0, 1.0 - s.y0};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return false;
      continue;
    }
    double r = q[k] / p[k];
    if (p[k] < 0.0) {
      if (r > t1) return false;
      if (r > t0) {
        t0 = r;
        axis0 = k;
      }
    } else {
      if (r < t0) return false;
      if (r < t1) {
        t1 = r;
        axis1 = k;
      }
    }
  }
  double nx0 = s.x0 + t0 * dx, ny0 = s.y0 + t0 * dy;
  double nx1 = s.x0 + t1 * dx, ny1 = s.y0 + t1 * dy;
  auto snap = [](int axis, double& x, double& y) {
    if (axis == 0) x = 0.0;
    if (axis == 1) x = 1.0;
    if (axis == 2) y = 0.0;
    if (axis == 3) y = 1.0;
  };
  if (axis0 >= 0) snap(axis0, nx0, ny0);
  if (axis1 >= 0) snap(axis1, nx1, ny1);
  s = {nx0, ny0, nx1, ny1};
  return (s.x0 != s.x1) || (s.y0 != s.y1);
}

bool on_unit_square_boundary(double x, double y) {
  return x == 0.0 || x == 1.0 || y == 0.0 || y == 1.0;
}

// Merging point store: points closer than kMergeTol reuse the first node id.
class PointMap {
public:
  int add_or_get(double x, double y) {
    auto [cx, cy] = cell_of(x, y);
    for (long long ix = cx - 1; ix <= cx + 1; ++ix)
      for (long long iy = cy - 1; iy <= cy + 1; ++iy) {
        auto it = grid_.find(key(ix, iy));
        if (it == grid_.end()) continue;
        for (int id : it->second) {
          double ddx = xs_[id] - x, ddy = ys_[id] - y;
          if (ddx * ddx + ddy * ddy <= kMergeTol * kMergeTol) return id;
        }
      }
    int id = static_cast<int>(xs_.size());
    xs_.push_back(x);
    ys_.push_back(y);
    grid_[key(cx, cy)].push_back(id);
    return id;
  }

  int size() const { return static_cast<int>(xs_.size()); }
  double x(int id) const { return xs_[id]; }
  double y(int id) const { return ys_[id]; }

private:
  static std::pair<long long, long long> cell_of(double x, double y) {
    const double cell = 1e-9;
    return {static_cast<long long>(std::floor(x / cell)),
            static_cast<long long>(std::floor(y / cell))};
  }
  static long long key(long long ix, long long iy) { return (ix << 32) ^ (iy & 0xffffffffLL); }

  std::unordered_map<long long, std::vector<int>> grid_;
  std::vector<double> xs_, ys_;
};

std::vector<std::pair<int, int>> candidate_pairs(const std::vector<Segment>& segs,
                                                 double cell_size, bool brute_force) {
  if (brute_force) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < static_cast<int>(segs.size()); ++i)
      for (int j = i + 1; j < static_cast<int>(segs.size()); ++j) pairs.push_back({i, j});
    return pairs;
  }
  std::unordered_map<long long, std::vector<int>> grid;
  auto key = [](long long ix, long long iy) { return (ix << 32) ^ (iy & 0xffffffffLL); };
  for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
    const auto& s = segs[i];
    long long x0 = static_cast<long long>(std::floor(std::min(s.x0, s.x1) / cell_size));
    long long x1 = static_cast<long long>(std::floor(std::max(s.x0, s.x1) / cell_size));
    long long y0 = static_cast<long long>(std::floor(std::min(s.y0, s.y1) / cell_size));
    long long y1 = static_cast<long long>(std::floor(std::max(s.y0, s.y1) / cell_size));
    for (long long ix = x0; ix <= x1; ++ix)
      for (long long iy = y0; iy <= y1; ++iy) grid[key(ix, iy)].push_back(i);
  }
  std::set<std::pair<int, int>> pairs;
  for (const auto& [k, v] : grid)
    for (std::size_t a = 0; a < v.size(); ++a)
      for (std::size_t b = a + 1; b < v.size(); ++b)
        pairs.insert({std::min(v[a], v[b]), std::max(v[a], v[b])});
  return {pairs.begin(), pairs.end()};
}

// Positive-length overlap of two collinear segments.
bool collinear_overlap(const Segment& a, const Segment& b) {
  double dax = a.x1 - a.x0, day = a.y1 - a.y0;
  double cross1 = dax * (b.y0 - a.y0) - day * (b.x0 - a.x0);
  double cross2 = dax * (b.y1 - a.y0) - day * (b.x1 - a.x0);
  if (std::abs(cross1) > kCollinearTol || std::abs(cross2) > kCollinearTol) return false;
  double len2 = dax * dax + day * day;
  double s0 = (dax * (b.x0 - a.x0) + day * (b.y0 - a.y0)) / len2;
  double s1 = (dax * (b.x1 - a.x0) + day * (b.y1 - a.y0)) / len2;
  if (s0 > s1) std::swap(s0, s1);
  return std::min(1.0, s1) - std::max(0.0, s0) > 0.0;
}

struct RawGraph {
  PointMap points;
  std::vector<std::pair<int, int>> edges;
};

RawGraph intersect_segments(const std::vector<Segment>& segs, double cell_size,
                            bool brute_force) {
  RawGraph g;
  std::vector<std::array<int, 2>> seg_ends(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    seg_ends[i][0] = g.points.add_or_get(segs[i].x0, segs[i].y0);
    seg_ends[i][1] = g.points.add_or_get(segs[i].x1, segs[i].y1);
  }
  std::vector<std::vector<std::pair<double, int>>> along(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    along[i].push_back({0.0, seg_ends[i][0]});
    along[i].push_back({1.0, seg_ends[i][1]});
  }
  for (auto [i, j] : candidate_pairs(segs, cell_size, brute_force)) {
    const auto& a = segs[i];
    const auto& b = segs[j];
    double d1x = a.x1 - a.x0, d1y = a.y1 - a.y0;
    double d2x = b.x1 - b.x0, d2y = b.y1 - b.y0;
    double cross = d1x * d2y - d1y * d2x;
    if (std::abs(cross) <= kCollinearTol) continue; // parallel; overlaps handled upstream
    double rx = b.x0 - a.x0, ry = b.y0 - a.y0;
    double t = (rx * d2y - ry * d2x) / cross;
    double s = (rx * d1y - ry * d1x) / cross;
    if (t < 0.0 || t > 1.0 || s < 0.0 || s > 1.0) continue;
    int id = g.points.add_or_get(a.x0 + t * d1x, a.y0 + t * d1y);
    along[i].push_back({t, id});
    along[j].push_back({s, id});
  }
  std::set<std::pair<int, int>> edge_set;
  for (auto& list : along) {
    std::sort(list.begin(), list.end());
    for (std::size_t k = 1; k < list.size(); ++k) {
      int u = list[k - 1].second, v = list[k].second;
      if (u == v) continue;
      edge_set.insert({std::min(u, v), std::max(u, v)});
    }
  }
  g.edges.assign(edge_set.begin(), edge_set.end());
  return g;
}

// Largest connected component, then iterative removal of interior
// degree-one nodes. Returns the surviving node ids (sorted) and edges.
void prune_graph(const std::vector<std::uint8_t>& boundary_flag, int n,
                 std::vector<std::pair<int, int>>& edges, std::vector<int>& kept) {
  std::vector<std::vector<int>> adj(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e].first].push_back(static_cast<int>(e));
    adj[edges[e].second].push_back(static_cast<int>(e));
  }
  // largest component (lowest root wins ties)
  std::vector<int> comp(n, -1);
  int best_comp = -1, best_size = 0;
  for (int start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    int size = 0;
    std::queue<int> q;
    q.push(start);
    comp[start] = start;
    while (!q.empty()) {
      int x = q.front();
      q.pop();
      ++size;
      for (int e : adj[x]) {
        int y = edges[e].first == x ? edges[e].second : edges[e].first;
        if (comp[y] < 0) {
          comp[y] = start;
          q.push(y);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best_comp = start;
    }
  }
  std::vector<std::uint8_t> alive(n, 0);
  for (int x = 0; x < n; ++x) alive[x] = (comp[x] == best_comp);
  std::vector<std::uint8_t> edge_alive(edges.size(), 0);
  std::vector<int> degree(n, 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (alive[edges[e].first] && alive[edges[e].second]) {
      edge_alive[e] = 1;
      ++degree[edges[e].first];
      ++degree[edges[e].second];
    }
  }
  // interior hanging nodes, iterated to a fixed point
  std::queue<int> q;
  for (int x = 0; x < n; ++x)
    if (alive[x] && degree[x] == 1 && !boundary_flag[x]) q.push(x);
  while (!q.empty()) {
    int x = q.front();
    q.pop();
    if (!alive[x] || degree[x] != 1 || boundary_flag[x]) continue;
    alive[x] = 0;
    for (int e : adj[x]) {
      if (!edge_alive[e]) continue;
      edge_alive[e] = 0;
      int y = edges[e].first == x ? edges[e].second : edges[e].first;
      --degree[x];
      --degree[y];
      if (alive[y] && degree[y] == 1 && !boundary_flag[y]) q.push(y);
    }
  }
  for (int x = 0; x < n; ++x)
    if (alive[x] && degree[x] == 0) alive[x] = 0;

  kept.clear();
  for (int x = 0; x < n; ++x)
    if (alive[x]) kept.push_back(x);
  std::vector<std::pair<int, int>> kept_edges;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edge_alive[e]) kept_edges.push_back(edges[e]);
  edges = std::move(kept_edges);
}

std::vector<Segment> sample_segments(const FiberConfig& cfg, int& dropped, int& resampled) {
  Rng base(cfg.seed);
  auto draw_line = [&](Rng& rng) {
    double mx = rng.uniform(cfg.midpoint_min[0], cfg.midpoint_max[0]);
    double my = rng.uniform(cfg.midpoint_min[1], cfg.midpoint_max[1]);
    double theta = rng.uniform(0.0, kPi);
    double hx = 0.5 * cfg.line_length * std::cos(theta);
    double hy = 0.5 * cfg.line_length * std::sin(theta);
    return Segment{mx - hx, my - hy, mx + hx, my + hy};
  };

  std::vector<Segment> segs;
  dropped = 0;
  for (int i = 0; i < cfg.n_lines; ++i) {
    Rng stream = base.substream(static_cast<std::uint64_t>(i));
    Segment s = draw_line(stream);
    if (clip_to_unit_square(s))
      segs.push_back(s);
    else
      ++dropped;
  }

  // Collinear overlapping pairs are degenerate for the node construction;
  // the offending (later) line is redrawn from a dedicated stream.
  resampled = 0;
  Rng redraw = base.substream(0x636f6c6cULL); // "coll"
  for (int attempt = 0; attempt < 100; ++attempt) {
    bool clean = true;
    for (auto [i, j] : candidate_pairs(segs, cfg.line_length, cfg.brute_force_pairs)) {
      if (collinear_overlap(segs[i], segs[j])) {
        Segment s = draw_line(redraw);
        while (!clip_to_unit_square(s)) s = draw_line(redraw);
        segs[j] = s;
        ++resampled;
        clean = false;
        break;
      }
    }
    if (clean) return segs;
  }
  throw std::runtime_error("gen_fiber_network: could not resolve collinear overlaps");
}

// Split edges longer than max_len into equal pieces; inserted nodes carry
// flags from the exact boundary test like every other node.
void subdivide_long_edges(std::vector<double>& coords, std::vector<std::pair<int, int>>& edges,
                          std::vector<std::uint8_t>& dirichlet,
                          std::vector<std::uint8_t>& boundary, double max_len) {
  std::vector<std::pair<int, int>> out;
  out.reserve(edges.size());
  for (auto [u, v] : edges) {
    double ux = coords[2 * u], uy = coords[2 * u + 1];
    double vx = coords[2 * v], vy = coords[2 * v + 1];
    double len = std::hypot(vx - ux, vy - uy);
    int pieces = std::max(1, static_cast<int>(std::ceil(len / max_len)));
    int prev = u;
    for (int k = 1; k < pieces; ++k) {
      double s = static_cast<double>(k) / pieces;
      double x = ux + s * (vx - ux), y = uy + s * (vy - uy);
      int id = static_cast<int>(coords.size() / 2);
      coords.push_back(x);
      coords.push_back(y);
      bool bd = on_unit_square_boundary(x, y);
      dirichlet.push_back(bd);
      boundary.push_back(bd);
      out.push_back({prev, id});
      prev = id;
    }
    out.push_back({prev, v});
  }
  edges = std::move(out);
}

FiberResult build_planar(const FiberConfig& cfg) {
  int dropped = 0, resampled = 0;
  std::vector<Segment> segs = sample_segments(cfg, dropped, resampled);
  if (segs.empty()) throw std::runtime_error("gen_fiber_network: all lines clipped away");

  RawGraph g = intersect_segments(segs, cfg.line_length, cfg.brute_force_pairs);
  const int n_raw = g.points.size();
  std::vector<std::uint8_t> bflag(n_raw, 0);
  for (int i = 0; i < n_raw; ++i)
    bflag[i] = on_unit_square_boundary(g.points.x(i), g.points.y(i));

  std::vector<int> kept;
  prune_graph(bflag, n_raw, g.edges, kept);
  if (static_cast<int>(kept.size()) < 2)
    throw std::runtime_error("gen_fiber_network: network degenerates to fewer than 2 nodes");

  std::vector<int> remap(n_raw, -1);
  for (std::size_t i = 0; i < kept.size(); ++i) remap[kept[i]] = static_cast<int>(i);
  std::vector<double> coords;
  coords.reserve(kept.size() * 2);
  std::vector<std::uint8_t> dirichlet(kept.size()), boundary(kept.size());
  bool any_dirichlet = false;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    coords.push_back(g.points.x(kept[i]));
    coords.push_back(g.points.y(kept[i]));
    boundary[i] = bflag[kept[i]];
    dirichlet[i] = bflag[kept[i]];
    any_dirichlet |= (dirichlet[i] != 0);
  }
  if (!any_dirichlet)
    throw std::runtime_error("gen_fiber_network: no Dirichlet node in the largest component");
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(g.edges.size());
  for (auto [u, v] : g.edges) pairs.push_back({remap[u], remap[v]});
  if (cfg.subdivide_max_len > 0.0)
    subdivide_long_edges(coords, pairs, dirichlet, boundary, cfg.subdivide_max_len);
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [u, v] : pairs) edges.push_back({u, v, 1.0, 0.0});

  FiberResult out{SpatialNetwork(2, std::move(coords), std::move(edges), std::move(dirichlet),
                                 std::move(boundary)),
                  {}};
  out.stats.kind = "fiber";
  out.stats.seed = cfg.seed;
  out.stats.nodes = out.net.num_nodes();
  out.stats.edges = out.net.num_edges();
  out.stats.iso_dim = 2;
  out.stats.dropped_lines = dropped;
  out.stats.resampled_lines = resampled;
  out.stats.rng_id = Rng::kGeneratorId;
  return out;
}

} // namespace

FiberResult gen_fiber_network(const FiberConfig& cfg) {
  if (cfg.n_lines < 1) throw std::invalid_argument("gen_fiber_network: n_lines must be >= 1");
  if (!(cfg.line_length > 0.0))
    throw std::invalid_argument("gen_fiber_network: line_length must be positive");
  return build_planar(cfg);
}

FiberResult gen_cardboard(const CardboardConfig& cfg) {
  if (!(cfg.delta > 0.0)) throw std::invalid_argument("gen_cardboard: delta must be positive");
  if (!(cfg.connect_radius > 0.0))
    throw std::invalid_argument("gen_cardboard: connect_radius must be positive");

  FiberConfig layer_cfg = cfg.layer;
  std::array<FiberResult, 3> layers = {
      [&] { layer_cfg.seed = Rng::splitmix64(cfg.layer.seed + 1); return gen_fiber_network(layer_cfg); }(),
      [&] { layer_cfg.seed = Rng::splitmix64(cfg.layer.seed + 2); return gen_fiber_network(layer_cfg); }(),
      [&] { layer_cfg.seed = Rng::splitmix64(cfg.layer.seed + 3); return gen_fiber_network(layer_cfg); }()};
  const SpatialNetwork& top = layers[0].net;
  const SpatialNetwork& mid = layers[1].net;
  const SpatialNetwork& bot = layers[2].net;

  const double z_top = 0.125 + cfg.delta;
  const int n_top = top.num_nodes(), n_mid = mid.num_nodes(), n_bot = bot.num_nodes();
  const int n = n_top + n_mid + n_bot;
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(n) * 3);
  auto push_layer = [&](const SpatialNetwork& lay, auto zfun) {
    for (int i = 0; i < lay.num_nodes(); ++i) {
      double x = lay.coord(i, 0), y = lay.coord(i, 1);
      coords.push_back(x);
      coords.push_back(y);
      coords.push_back(zfun(x, y));
    }
  };
  push_layer(top, [&](double, double) { return z_top; });
  push_layer(mid, [&](double x, double) { return 0.125 * std::cos(12.0 * kPi * x); });
  push_layer(bot, [&](double, double) { return -z_top; });

  std::vector<std::pair<int, int>> epairs;
  auto add_layer_edges = [&](const SpatialNetwork& lay, int offset) {
    for (const auto& e : lay.edges()) epairs.push_back({e.u + offset, e.v + offset});
  };
  add_layer_edges(top, 0);
  add_layer_edges(mid, n_top);
  add_layer_edges(bot, n_top + n_mid);

  // nearest middle-layer node within connect_radius, via a 3D hash grid
  const double cell = cfg.connect_radius;
  std::unordered_map<long long, std::vector<int>> grid;
  auto cell_key = [&](double x, double y, double z) {
    long long ix = static_cast<long long>(std::floor(x / cell));
    long long iy = static_cast<long long>(std::floor(y / cell));
    long long iz = static_cast<long long>(std::floor(z / cell));
    return ((ix * 73856093LL) ^ (iy * 19349663LL) ^ (iz * 83492791LL));
  };
  for (int i = 0; i < n_mid; ++i) {
    int g = n_top + i;
    grid[cell_key(coords[3 * g], coords[3 * g + 1], coords[3 * g + 2])].push_back(i);
  }
  auto nearest_mid = [&](double x, double y, double z) {
    int best = -1;
    double best_d2 = cfg.connect_radius * cfg.connect_radius;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = grid.find(cell_key(x + dx * cell, y + dy * cell, z + dz * cell));
          if (it == grid.end()) continue;
          for (int i : it->second) {
            int g = n_top + i;
            double ddx = coords[3 * g] - x, ddy = coords[3 * g + 1] - y,
                   ddz = coords[3 * g + 2] - z;
            double d2 = ddx * ddx + ddy * ddy + ddz * ddz;
            if (d2 < best_d2 || (d2 == best_d2 && best >= 0 && i < best)) {
              best_d2 = d2;
              best = i;
            }
          }
        }
    return best;
  };
  bool top_linked = false, bot_linked = false;
  for (int i = 0; i < n_top; ++i) {
    int j = nearest_mid(coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]);
    if (j >= 0) {
      epairs.push_back({i, n_top + j});
      top_linked = true;
    }
  }
  for (int i = 0; i < n_bot; ++i) {
    int g = n_top + n_mid + i;
    int j = nearest_mid(coords[3 * g], coords[3 * g + 1], coords[3 * g + 2]);
    if (j >= 0) {
      epairs.push_back({g, n_top + j});
      bot_linked = true;
    }
  }
  if (!top_linked)
    throw std::runtime_error("gen_cardboard: top layer not connected to the oscillating layer");
  if (!bot_linked)
    throw std::runtime_error("gen_cardboard: bottom layer not connected to the oscillating layer");

  // largest connected component (no hanging-node pass: the layers are
  // already pruned and inter-layer edges only raise degrees)
  std::vector<std::uint8_t> bflag(n, 1); // keep every node through pruning
  std::vector<int> kept;
  prune_graph(bflag, n, epairs, kept);

  std::vector<int> remap(n, -1);
  for (std::size_t i = 0; i < kept.size(); ++i) remap[kept[i]] = static_cast<int>(i);
  std::vector<double> final_coords;
  final_coords.reserve(kept.size() * 3);
  std::vector<std::uint8_t> dirichlet(kept.size()), boundary(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    double x = coords[3 * kept[i]], y = coords[3 * kept[i] + 1], z = coords[3 * kept[i] + 2];
    final_coords.push_back(x);
    final_coords.push_back(y);
    final_coords.push_back(z);
    bool bd = on_unit_square_boundary(x, y);
    dirichlet[i] = bd;
    boundary[i] = bd;
  }
  std::vector<Edge> edges;
  edges.reserve(epairs.size());
  for (auto [u, v] : epairs) edges.push_back({remap[u], remap[v], 1.0, 0.0});

  FiberResult out{SpatialNetwork(3, std::move(final_coords), std::move(edges),
                                 std::move(dirichlet), std::move(boundary)),
                  {}};
  out.stats.kind = "cardboard";
  out.stats.seed = cfg.layer.seed;
  out.stats.nodes = out.net.num_nodes();
  out.stats.edges = out.net.num_edges();
  out.stats.iso_dim = 2; // sheet-like: effective dimension stays planar
  out.stats.dropped_lines = layers[0].stats.dropped_lines + layers[1].stats.dropped_lines +
                            layers[2].stats.dropped_lines;
  out.stats.resampled_lines = layers[0].stats.resampled_lines +
                              layers[1].stats.resampled_lines + layers[2].stats.resampled_lines;
  out.stats.rng_id = Rng::kGeneratorId;
  return out;
}

FemGridResult gen_fem_grid(const FemGridConfig& cfg) {
  if (cfg.m < 2) throw std::invalid_argument("gen_fem_grid: m must be >= 2");
  const int m = cfg.m;
  const int side = m + 1;
  const int n = side * side;
  auto node_id = [side](int i, int j) { return j * side + i; };

  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(n) * 2);
  std::vector<std::uint8_t> dirichlet(n), boundary(n);
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      coords.push_back(static_cast<double>(i) / m);
      coords.push_back(static_cast<double>(j) / m);
      bool bd = (i == 0 || i == m || j == 0 || j == m);
      dirichlet[node_id(i, j)] = bd;
      boundary[node_id(i, j)] = bd;
    }

  std::vector<Edge> edges;
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      if (i < m) edges.push_back({node_id(i, j), node_id(i + 1, j), 1.0, 0.0});
      if (j < m) edges.push_back({node_id(i, j), node_id(i, j + 1), 1.0, 0.0});
      if (i < m && j < m) edges.push_back({node_id(i, j), node_id(i + 1, j + 1), 1.0, 0.0});
    }

  // P1 stiffness of -div(a grad u); every triangle entry is emitted
  // (including exact zeros) so the assembled pattern is the mesh edge graph.
  Rng rng(cfg.seed);
  std::vector<Triplet> trips;
  auto add_triangle = [&](int v0, int v1, int v2, double a) {
    const int vs[3] = {v0, v1, v2};
    double xs[3], ys[3];
    for (int k = 0; k < 3; ++k) {
      xs[k] = coords[2 * vs[k]];
      ys[k] = coords[2 * vs[k] + 1];
    }
    double bb[3] = {ys[1] - ys[2], ys[2] - ys[0], ys[0] - ys[1]};
    double cc[3] = {xs[2] - xs[1], xs[0] - xs[2], xs[1] - xs[0]};
    double area2 = bb[0] * cc[1] - bb[1] * cc[0]; // 2*area (positive orientation)
    double coef = a / (2.0 * area2);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        trips.emplace_back(vs[r], vs[c], coef * (bb[r] * bb[c] + cc[r] * cc[c]));
  };
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      double a_low = cfg.unit_coefficient ? 1.0 : rng.uniform(cfg.coeff_min, cfg.coeff_max);
      double a_up = cfg.unit_coefficient ? 1.0 : rng.uniform(cfg.coeff_min, cfg.coeff_max);
      add_triangle(node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), a_low);
      add_triangle(node_id(i, j), node_id(i + 1, j + 1), node_id(i, j + 1), a_up);
    }
  SpMat K(n, n);
  K.setFromTriplets(trips.begin(), trips.end());

  FemGridResult out{
      SpatialNetwork(2, std::move(coords), std::move(edges), std::move(dirichlet),
                     std::move(boundary)),
      SparseSymOperator(OperatorKind::FemAssembled, 0.0, std::move(K)),
      {}};
  out.stats.kind = "femgrid";
  out.stats.seed = cfg.seed;
  out.stats.nodes = out.net.num_nodes();
  out.stats.edges = out.net.num_edges();
  out.stats.iso_dim = 2;
  out.stats.rng_id = Rng::kGeneratorId;
  return out;
}

SourceTerm source_from_name(const std::string& name) {
  if (name == "g1") return SourceTerm::G1;
  if (name == "g2") return SourceTerm::G2;
  throw std::invalid_argument("unknown source term: " + name);
}

const char* source_name(SourceTerm s) { return s == SourceTerm::G1 ? "g1" : "g2"; }

Vec source_vector(const SpatialNetwork& net, const SparseSymOperator& mass, SourceTerm g) {
  Vec d = mass.diagonal();
  Vec f(net.num_nodes());
  for (int x = 0; x < net.num_nodes(); ++x) {
    double gx = (g == SourceTerm::G2)
                    ? 1.0
                    : std::sin(net.coord(x, 0)) * std::sin(net.coord(x, 1));
    f[x] = d[x] * gx;
  }
  return f;
}

std::vector<double> random_edge_weights(const SpatialNetwork& net, double wmin, double wmax,
                                        std::uint64_t seed) {
  if (!(wmin > 0.0) || wmax < wmin)
    throw std::invalid_argument("random_edge_weights: need 0 < wmin <= wmax");
  Rng rng(seed);
  std::vector<double> w(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) w[e] = rng.uniform(wmin, wmax);
  return w;
}

} // namespace netlod
