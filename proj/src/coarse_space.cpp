#include "netlod/coarse_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <stdexcept>
#include <string>

namespace netlod {

Vec LocalVector::to_dense(int n) const {
  Vec out = Vec::Zero(n);
  for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = val[i];
  return out;
}

void LocalVector::add_to(Vec& dense, double scale) const {
  for (std::size_t i = 0; i < idx.size(); ++i) dense[idx[i]] += scale * val[i];
}

double element_average(const SparseSymOperator& mass, const NodeSet& T, const Vec& v) {
  if (T.empty()) throw std::invalid_argument("element_average: empty element");
  Vec d = mass.diagonal();
  double num = 0.0, den = 0.0;
  for (int x : T) {
    num += d[x] * v[x];
    den += d[x];
  }
  return num / den;
}

namespace {

double q_T(const CoarseSpace& cs, int t, const Vec& v) {
  double num = 0.0;
  for (int x : cs.partition.elements[t]) num += cs.mass_diag[x] * v[x];
  return num / cs.element_mass[t];
}

// Multi-source Dijkstra over the full graph; stops once every target node is
// finalized (or the optional radius is exceeded).
std::vector<double> dijkstra_full(const SpatialNetwork& net, const std::vector<int>& sources,
                                  double max_dist = kInfiniteDistance,
                                  const NodeSet* targets = nullptr) {
  std::vector<double> dist(net.num_nodes(), kInfiniteDistance);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (int s : sources) {
    dist[s] = 0.0;
    heap.push({0.0, s});
  }
  int remaining = targets ? targets->size() : -1;
  while (!heap.empty()) {
    auto [d, x] = heap.top();
    heap.pop();
    if (d > dist[x]) continue;
    if (targets && targets->contains(x) && --remaining == 0) return dist;
    if (d > max_dist) break;
    auto nbrs = net.neighbors(x);
    auto eids = net.incident_edges(x);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      int y = nbrs[k];
      double nd = d + net.edges()[eids[k]].length;
      if (nd < dist[y]) {
        dist[y] = nd;
        heap.push({nd, y});
      }
    }
  }
  return dist;
}

LocalVector make_bubble(const SpatialNetwork& net, const Partition& partition, const Vec& mdiag,
                        double element_mass, int t, double guard) {
  const NodeSet& T = partition.elements[t];
  NodeSet bnd = element_boundary(net, T);
  if (bnd.empty())
    throw std::runtime_error("bubble: element " + std::to_string(t) +
                             " has empty boundary (single global element without "
                             "domain-boundary nodes)");
  std::vector<double> d = dist_to_set(net, T, bnd);
  double q_num = 0.0;
  for (int x : T) {
    if (!(d[x] < kInfiniteDistance))
      throw std::runtime_error("bubble: element " + std::to_string(t) + " not connected");
    q_num += mdiag[x] * d[x];
  }
  double q = q_num / element_mass;
  if (q < guard * partition.H_nominal)
    throw std::runtime_error("bubble: degenerate element " + std::to_string(t) +
                             " (every node lies on the element boundary)");
  LocalVector b;
  b.idx.assign(T.begin(), T.end());
  b.val.resize(T.size());
  for (int i = 0; i < T.size(); ++i) b.val[i] = d[T[i]] / q;
  return b;
}

} // namespace

Vec pi_H(const CoarseSpace& cs, const Vec& v) {
  Vec out(v.size());
  for (int t = 0; t < cs.num_elements(); ++t) {
    double q = q_T(cs, t, v);
    for (int x : cs.partition.elements[t]) out[x] = q;
  }
  return out;
}

const LocalVector& bubble(const CoarseSpace& cs, int element) {
  return cs.bubbles.at(element);
}

Vec bubble_op(const CoarseSpace& cs, const Vec& v) {
  Vec out = Vec::Zero(v.size());
  for (int t = 0; t < cs.num_elements(); ++t) cs.bubbles[t].add_to(out, q_T(cs, t, v));
  return out;
}

PartitionOfUnity build_pu(const SpatialNetwork& net, const Partition& partition, double radius) {
  const int n = net.num_nodes();
  const int n_elem = partition.num_elements();
  PartitionOfUnity pu;
  pu.radius = radius;
  pu.supports.resize(n_elem);
  pu.lambda.resize(n_elem);

  Vec denom = Vec::Zero(n);
  std::vector<std::vector<double>> tilde(n_elem);
  for (int t = 0; t < n_elem; ++t) {
    const NodeSet& T = partition.elements[t];
    std::vector<double> dT = dijkstra_full(net, T.ids(), radius);
    std::vector<int> unodes;
    for (int x = 0; x < n; ++x)
      if (dT[x] <= radius) unodes.push_back(x);
    NodeSet U = NodeSet::from_sorted(std::move(unodes));

    // patch boundary: domain-boundary nodes of U and nodes with an exterior
    // neighbor, minus the element's own domain-boundary nodes
    std::vector<int> bnd_ids;
    for (int x : U) {
      bool own_boundary = net.on_domain_boundary(x) && T.contains(x);
      if (own_boundary) continue;
      bool is_bnd = net.on_domain_boundary(x);
      if (!is_bnd)
        for (int y : net.neighbors(x))
          if (!U.contains(y)) {
            is_bnd = true;
            break;
          }
      if (is_bnd) bnd_ids.push_back(x);
    }
    if (bnd_ids.empty())
      throw std::runtime_error("build_pu: patch of element " + std::to_string(t) +
                               " has empty boundary; the network has no usable "
                               "domain-boundary information");
    std::vector<double> dB = dijkstra_full(net, bnd_ids, kInfiniteDistance, &U);
    tilde[t].resize(U.size());
    for (int i = 0; i < U.size(); ++i) {
      double v = dB[U[i]];
      if (!(v < kInfiniteDistance))
        throw std::runtime_error("build_pu: node unreachable from patch boundary");
      tilde[t][i] = v;
      denom[U[i]] += v;
    }
    pu.supports[t] = std::move(U);
  }

  for (int x = 0; x < n; ++x)
    if (!(denom[x] > 0.0))
      throw std::runtime_error(
          "build_pu: partition-of-unity denominator vanishes at node " + std::to_string(x) +
          "; increase the overlap radius");

  for (int t = 0; t < n_elem; ++t) {
    const NodeSet& U = pu.supports[t];
    LocalVector lam;
    lam.idx.assign(U.begin(), U.end());
    lam.val.resize(U.size());
    for (int i = 0; i < U.size(); ++i) lam.val[i] = tilde[t][i] / denom[U[i]];
    pu.lambda[t] = std::move(lam);
  }
  return pu;
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> conforming_sets(
    const SpatialNetwork& net, const Partition& partition, const PartitionOfUnity& pu) {
  const int n_elem = partition.num_elements();
  std::vector<std::uint8_t> k_h(n_elem, 1), g_h(n_elem, 1);
  for (int t = 0; t < n_elem; ++t) {
    const LocalVector& lam = pu.lambda[t];
    for (std::size_t i = 0; i < lam.idx.size(); ++i)
      if (net.is_dirichlet(lam.idx[i]) && lam.val[i] != 0.0) {
        k_h[t] = 0;
        break;
      }
  }
  for (int k = 0; k < n_elem; ++k) {
    if (k_h[k]) continue;
    for (int t = 0; t < n_elem; ++t)
      if (g_h[t] && partition.elements[t].intersects(pu.supports[k])) g_h[t] = 0;
  }
  return {std::move(k_h), std::move(g_h)};
}

Vec i_H(const CoarseSpace& cs, const Vec& v) {
  if (!cs.pu) throw std::logic_error("i_H: partition of unity not built");
  Vec out = Vec::Zero(v.size());
  for (int t = 0; t < cs.num_elements(); ++t)
    if (cs.in_K_H[t]) cs.pu->lambda[t].add_to(out, q_T(cs, t, v));
  return out;
}

Vec p_H(const CoarseSpace& cs, const Vec& v) {
  Vec ih = i_H(cs, v);
  return ih + bubble_op(cs, v - ih);
}

int pu_overlap_order(const CoarseSpace& cs) {
  if (!cs.pu) throw std::logic_error("pu_overlap_order: partition of unity not built");
  int worst = 0;
  for (int t = 0; t < cs.num_elements(); ++t) {
    const NodeSet& U = cs.pu->supports[t];
    std::vector<int> elems{t};
    int k = 0;
    while (true) {
      NodeSet covered = patch_node_set(cs.partition, elems);
      if (U.subset_of(covered)) break;
      auto grown = patch_elements(cs.partition, elems, 1);
      if (grown.size() == elems.size())
        throw std::logic_error("pu_overlap_order: support not covered by saturated patch");
      elems = std::move(grown);
      ++k;
    }
    worst = std::max(worst, k);
  }
  return worst;
}

void dump_local_vector(const LocalVector& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char buf[48];
  for (std::size_t i = 0; i < v.idx.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d %.17g\n", v.idx[i], v.val[i]);
    out << buf;
  }
}

CoarseSpace build_coarse_space(const SpatialNetwork& net, const Partition& partition,
                               const SparseSymOperator& mass, const CoarseSpaceOptions& opts) {
  CoarseSpace cs;
  cs.partition = partition;
  cs.mass_diag = mass.diagonal();
  cs.element_mass.resize(partition.num_elements());
  for (int t = 0; t < partition.num_elements(); ++t) {
    double m = 0.0;
    for (int x : partition.elements[t]) m += cs.mass_diag[x];
    cs.element_mass[t] = m;
  }
  cs.bubbles.reserve(partition.num_elements());
  for (int t = 0; t < partition.num_elements(); ++t)
    cs.bubbles.push_back(
        make_bubble(net, partition, cs.mass_diag, cs.element_mass[t], t, opts.bubble_guard));

  if (opts.with_pu) {
    double radius = opts.pu_radius;
    if (std::isnan(radius)) {
      double max_edge = 0.0;
      for (const auto& e : net.edges()) max_edge = std::max(max_edge, e.length);
      radius = std::max(partition.H_nominal / 2.0, (1.0 + 1e-9) * max_edge);
    }
    cs.pu = build_pu(net, partition, radius);
    auto [k_h, g_h] = conforming_sets(net, partition, *cs.pu);
    cs.in_K_H = std::move(k_h);
    cs.in_G_H = std::move(g_h);
  }
  return cs;
}

} // namespace netlod
