#include "netlod/partition.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace netlod {

std::vector<int> gonzalez_centers(const SpatialNetwork& net, int count, int start) {
  const int n = net.num_nodes();
  if (count < 1 || count > n) throw std::invalid_argument("gonzalez_centers: bad count");
  if (start < 0 || start >= n) throw std::invalid_argument("gonzalez_centers: bad start");

  std::vector<int> centers{start};
  NodeSet all = net.all_nodes();
  std::vector<double> dist = dist_to_set(net, all, NodeSet::of({start}));
  while (static_cast<int>(centers.size()) < count) {
    int best = -1;
    double best_d = -1.0;
    for (int x = 0; x < n; ++x)
      if (dist[x] > best_d) {
        best_d = dist[x];
        best = x;
      }
    centers.push_back(best);
    std::vector<double> dnew = dist_to_set(net, all, NodeSet::of({best}));
    for (int x = 0; x < n; ++x) dist[x] = std::min(dist[x], dnew[x]);
  }
  return centers;
}

int default_gonzalez_start(const SpatialNetwork& net) {
  NodeSet gamma = net.dirichlet_nodes();
  std::vector<double> dist = dist_to_set(net, net.all_nodes(), gamma);
  int best = 0;
  double best_d = dist[0];
  for (int x = 1; x < net.num_nodes(); ++x)
    if (dist[x] > best_d) {
      best_d = dist[x];
      best = x;
    }
  return best;
}

namespace {

// Connected components of the subgraph induced by the element's nodes.
std::vector<std::vector<int>> element_components(const SpatialNetwork& net,
                                                 const std::vector<int>& nodes,
                                                 const std::vector<int>& elem_of, int elem) {
  std::vector<std::vector<int>> comps;
  std::vector<std::uint8_t> seen(nodes.size(), 0);
  std::vector<int> pos(net.num_nodes(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) pos[nodes[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (seen[i]) continue;
    std::vector<int> comp;
    std::queue<int> q;
    q.push(nodes[i]);
    seen[i] = 1;
    while (!q.empty()) {
      int x = q.front();
      q.pop();
      comp.push_back(x);
      for (int y : net.neighbors(x)) {
        if (elem_of[y] != elem) continue;
        int p = pos[y];
        if (!seen[p]) {
          seen[p] = 1;
          q.push(y);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

void build_elements_from_assignment(const SpatialNetwork& net, Partition& p) {
  const int n_elem = static_cast<int>(p.centers.size());
  std::vector<std::vector<int>> buckets(n_elem);
  for (int x = 0; x < net.num_nodes(); ++x) buckets[p.elem_of[x]].push_back(x);
  p.elements.clear();
  p.elements.reserve(n_elem);
  for (auto& b : buckets) p.elements.push_back(NodeSet::from_sorted(std::move(b)));

  p.element_adjacency.assign(n_elem, {});
  for (const auto& e : net.edges()) {
    int a = p.elem_of[e.u], b = p.elem_of[e.v];
    if (a != b) {
      p.element_adjacency[a].push_back(b);
      p.element_adjacency[b].push_back(a);
    }
  }
  for (auto& adj : p.element_adjacency) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
}

} // namespace

Partition assign_to_centers(const SpatialNetwork& net, const std::vector<int>& centers,
                            int iso_dim) {
  const int n = net.num_nodes();
  const int n_elem = static_cast<int>(centers.size());
  if (n_elem == 0) throw std::invalid_argument("assign_to_centers: no centers");
  {
    std::vector<int> sorted = centers;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("assign_to_centers: duplicate centers");
  }

  // Lexicographic multi-source Dijkstra on (distance, center rank): equal
  // distances resolve toward the center listed first.
  std::vector<double> dist(n, kInfiniteDistance);
  std::vector<int> rank(n, n_elem);
  using Item = std::tuple<double, int, int>; // (dist, rank, node)
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (int r = 0; r < n_elem; ++r) {
    int c = centers[r];
    if (dist[c] == 0.0) continue;
    dist[c] = 0.0;
    rank[c] = r;
    heap.push({0.0, r, c});
  }
  while (!heap.empty()) {
    auto [d, r, x] = heap.top();
    heap.pop();
    if (d > dist[x] || (d == dist[x] && r > rank[x])) continue;
    auto nbrs = net.neighbors(x);
    auto eids = net.incident_edges(x);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      int y = nbrs[k];
      double nd = d + net.edges()[eids[k]].length;
      if (nd < dist[y] || (nd == dist[y] && r < rank[y])) {
        dist[y] = nd;
        rank[y] = r;
        heap.push({nd, r, y});
      }
    }
  }
  for (int x = 0; x < n; ++x)
    if (!(dist[x] < kInfiniteDistance))
      throw std::runtime_error("assign_to_centers: unreachable node");

  Partition p;
  p.centers = centers;
  p.iso_dim = iso_dim;
  p.H_nominal = std::pow(static_cast<double>(n_elem), -1.0 / iso_dim);
  p.elem_of.assign(rank.begin(), rank.end());
  build_elements_from_assignment(net, p);

  // Repair pass: a nearest-center assignment can leave an element with a
  // component not containing its center. Reassign each stray component to
  // the neighboring element sharing the most edges (ties: lowest element id)
  // and rebuild, up to a fixed pass budget.
  for (int pass = 0;; ++pass) {
    bool dirty = false;
    for (int t = 0; t < n_elem; ++t) {
      auto comps = element_components(net, p.elements[t].ids(), p.elem_of, t);
      if (comps.size() <= 1) continue;
      for (const auto& comp : comps) {
        if (std::binary_search(comp.begin(), comp.end(), p.centers[t])) continue;
        std::vector<int> edge_count(n_elem, 0);
        for (int x : comp)
          for (int y : net.neighbors(x)) {
            int e = p.elem_of[y];
            if (e != t) ++edge_count[e];
          }
        int target = -1, best = 0;
        for (int e = 0; e < n_elem; ++e)
          if (edge_count[e] > best) {
            best = edge_count[e];
            target = e;
          }
        if (target < 0) throw std::runtime_error("assign_to_centers: isolated stray component");
        for (int x : comp) p.elem_of[x] = target;
        dirty = true;
      }
    }
    if (!dirty) break;
    if (pass > 100) throw std::runtime_error("assign_to_centers: connectivity repair diverged");
    build_elements_from_assignment(net, p);
  }

  for (int t = 0; t < n_elem; ++t)
    if (!p.elements[t].contains(p.centers[t]))
      throw std::runtime_error("assign_to_centers: center left its element");
  return p;
}

void measure_H(const SpatialNetwork& net, Partition& partition) {
  partition.H_T.assign(partition.num_elements(), 0.0);
  double global = 0.0;
  for (int t = 0; t < partition.num_elements(); ++t) {
    const NodeSet& T = partition.elements[t];
    double diam = 0.0;
    for (int x : T) {
      std::vector<double> d = dist_to_set(net, T, NodeSet::of({x}));
      for (int y : T) {
        if (!(d[y] < kInfiniteDistance))
          throw std::runtime_error("measure_H: element not connected");
        diam = std::max(diam, d[y]);
      }
    }
    partition.H_T[t] = diam;
    global = std::max(global, diam);
  }
  partition.H = global;
}

std::vector<int> patch_elements(const Partition& partition, const std::vector<int>& seed_elems,
                                int ell) {
  if (ell < 0) throw std::invalid_argument("patch_elements: negative order");
  std::vector<int> current = seed_elems;
  std::sort(current.begin(), current.end());
  current.erase(std::unique(current.begin(), current.end()), current.end());
  for (int step = 0; step < ell; ++step) {
    std::vector<std::uint8_t> in(partition.num_elements(), 0);
    for (int t : current) in[t] = 1;
    std::vector<int> next = current;
    for (int t : current)
      for (int nb : partition.element_adjacency[t])
        if (!in[nb]) {
          in[nb] = 1;
          next.push_back(nb);
        }
    if (next.size() == current.size()) break; // saturated
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return current;
}

NodeSet patch_node_set(const Partition& partition, const std::vector<int>& patch_elems) {
  std::vector<int> nodes;
  for (int t : patch_elems)
    nodes.insert(nodes.end(), partition.elements[t].begin(), partition.elements[t].end());
  return NodeSet::of(std::move(nodes));
}

int saturation_order(const Partition& partition) {
  const int n_elem = partition.num_elements();
  int worst = 0;
  for (int t = 0; t < n_elem; ++t) {
    // BFS eccentricity in the element graph
    std::vector<int> depth(n_elem, -1);
    std::queue<int> q;
    q.push(t);
    depth[t] = 0;
    int ecc = 0;
    while (!q.empty()) {
      int a = q.front();
      q.pop();
      for (int b : partition.element_adjacency[a])
        if (depth[b] < 0) {
          depth[b] = depth[a] + 1;
          ecc = std::max(ecc, depth[b]);
          q.push(b);
        }
    }
    worst = std::max(worst, ecc);
  }
  return worst;
}

namespace {

// Smallest eigenvalue of A v = lambda M v on the M-mean-zero subspace by
// inverse iteration on the bordered system [A, M1; (M1)^T, 0].
bool poincare_eig(const SpMat& A, const Vec& mdiag, const PoincareOptions& opts,
                  double& lambda_out) {
  const int n = static_cast<int>(A.rows());
  std::vector<Triplet> trips;
  for (int col = 0; col < A.outerSize(); ++col)
    for (SpMat::InnerIterator it(A, col); it; ++it)
      trips.emplace_back(it.row(), col, it.value());
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, n, mdiag[i]);
    trips.emplace_back(n, i, mdiag[i]);
  }
  SpMat kkt(n + 1, n + 1);
  kkt.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(kkt);
  if (lu.info() != Eigen::Success) return false;

  double msum = mdiag.sum();
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = std::sin(1.0 + i); // fixed deterministic start
  double mean = x.dot(mdiag) / msum;
  x.array() -= mean;
  double lambda = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    Vec rhs(n + 1);
    rhs.head(n) = mdiag.cwiseProduct(x);
    rhs[n] = 0.0;
    Vec sol = lu.solve(rhs);
    Vec y = sol.head(n);
    double mean_y = y.dot(mdiag) / msum;
    y.array() -= mean_y;
    double mnorm = std::sqrt(y.dot(mdiag.cwiseProduct(y)));
    if (!(mnorm > 0.0)) return false;
    y /= mnorm;
    double lambda_new = y.dot(A * y) / y.dot(mdiag.cwiseProduct(y));
    x = y;
    if (it > 0 && std::abs(lambda_new - lambda) <= opts.eig_rel_tol * std::abs(lambda_new)) {
      lambda_out = lambda_new;
      return true;
    }
    lambda = lambda_new;
  }
  return false;
}

} // namespace

PartitionDiagnostics diagnostics(const SpatialNetwork& net, const Partition& partition,
                                 const SparseSymOperator& mass, const SparseSymOperator& stiff,
                                 const PoincareOptions& opts) {
  PartitionDiagnostics d;
  const int n_elem = partition.num_elements();
  Vec mdiag = mass.diagonal();

  d.element_mass.resize(n_elem);
  d.vol.resize(n_elem);
  d.C_po.assign(n_elem, 0.0);
  d.C_po_ok.assign(n_elem, 1);
  for (int t = 0; t < n_elem; ++t) {
    const NodeSet& T = partition.elements[t];
    double m = 0.0;
    for (int x : T) m += mdiag[x];
    d.element_mass[t] = m;
    double vol = 0.0;
    for (int x : T)
      for (int y : net.neighbors(x))
        if (T.contains(y)) vol += 1.0;
    d.vol[t] = vol;

    if (T.size() == 1) {
      d.C_po[t] = 0.0; // mean-zero space is trivial
      continue;
    }
    // principal restriction of the node-sum stiffness to T
    LocalizedOperator lt = localize(stiff, T, LocalizeMode::NodeSum);
    const SpMat& full = lt.matrix();
    std::vector<int> pos(net.num_nodes(), -1);
    for (int i = 0; i < T.size(); ++i) pos[T[i]] = i;
    std::vector<Triplet> trips;
    for (int col = 0; col < full.outerSize(); ++col) {
      if (pos[col] < 0) continue;
      for (SpMat::InnerIterator it(full, col); it; ++it)
        if (pos[it.row()] >= 0) trips.emplace_back(pos[it.row()], pos[col], it.value());
    }
    SpMat A(T.size(), T.size());
    A.setFromTriplets(trips.begin(), trips.end());
    Vec mloc = restrict_to(T, mdiag);
    double lambda = 0.0;
    if (poincare_eig(A, mloc, opts, lambda) && lambda > 0.0) {
      d.C_po[t] = 1.0 / std::sqrt(lambda);
    } else {
      d.C_po[t] = std::numeric_limits<double>::quiet_NaN();
      d.C_po_ok[t] = 0;
    }
  }

  double mmax = *std::max_element(d.element_mass.begin(), d.element_mass.end());
  double mmin = *std::min_element(d.element_mass.begin(), d.element_mass.end());
  d.sigma = mmax / mmin;
  for (const auto& e : net.edges()) d.max_edge_length = std::max(d.max_edge_length, e.length);
  d.H_measured = partition.H;
  return d;
}

PartitionHierarchy build_hierarchy(const SpatialNetwork& net, const std::vector<int>& counts,
                                   int iso_dim, std::uint64_t seed,
                                   std::optional<int> start_override) {
  if (counts.empty()) throw std::invalid_argument("build_hierarchy: empty counts");
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] <= counts[i - 1])
      throw std::invalid_argument("build_hierarchy: counts must be strictly increasing");

  int start = start_override ? *start_override : default_gonzalez_start(net);
  PartitionHierarchy h;
  h.seed = seed;
  for (int count : counts) {
    auto centers = gonzalez_centers(net, count, start);
    Partition p = assign_to_centers(net, centers, iso_dim);
    measure_H(net, p);
    h.levels.push_back(std::move(p));
  }
  return h;
}

} // namespace netlod
