#include "netlod/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace netlod {

NodeSet NodeSet::of(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (!ids.empty() && ids.front() < 0)
    throw std::invalid_argument("NodeSet: negative node index");
  NodeSet s;
  s.ids_ = std::move(ids);
  return s;
}

NodeSet NodeSet::from_sorted(std::vector<int> ids) {
  for (std::size_t i = 1; i < ids.size(); ++i)
    if (ids[i - 1] >= ids[i])
      throw std::invalid_argument("NodeSet: indices not sorted/unique");
  if (!ids.empty() && ids.front() < 0)
    throw std::invalid_argument("NodeSet: negative node index");
  NodeSet s;
  s.ids_ = std::move(ids);
  return s;
}

NodeSet NodeSet::range(int n) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ids[i] = i;
  NodeSet s;
  s.ids_ = std::move(ids);
  return s;
}

bool NodeSet::contains(int x) const {
  return std::binary_search(ids_.begin(), ids_.end(), x);
}

bool NodeSet::subset_of(const NodeSet& other) const {
  return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
}

NodeSet NodeSet::set_union(const NodeSet& other) const {
  std::vector<int> out;
  out.reserve(ids_.size() + other.ids_.size());
  std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                 std::back_inserter(out));
  NodeSet s;
  s.ids_ = std::move(out);
  return s;
}

NodeSet NodeSet::set_difference(const NodeSet& other) const {
  std::vector<int> out;
  std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                      std::back_inserter(out));
  NodeSet s;
  s.ids_ = std::move(out);
  return s;
}

bool NodeSet::intersects(const NodeSet& other) const {
  auto a = ids_.begin();
  auto b = other.ids_.begin();
  while (a != ids_.end() && b != other.ids_.end()) {
    if (*a < *b) ++a;
    else if (*b < *a) ++b;
    else return true;
  }
  return false;
}

SpatialNetwork::SpatialNetwork(int dim, std::vector<double> coords, std::vector<Edge> edges,
                               std::vector<std::uint8_t> dirichlet,
                               std::vector<std::uint8_t> domain_boundary)
    : dim_(dim),
      coords_(std::move(coords)),
      edges_(std::move(edges)),
      dirichlet_(std::move(dirichlet)),
      domain_boundary_(std::move(domain_boundary)) {
  if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("network: dim must be 2 or 3");
  if (coords_.size() % dim_ != 0) throw std::invalid_argument("network: coords size mismatch");
  num_nodes_ = static_cast<int>(coords_.size()) / dim_;
  if (num_nodes_ == 0) throw std::invalid_argument("network: empty node set");
  if (static_cast<int>(dirichlet_.size()) != num_nodes_ ||
      static_cast<int>(domain_boundary_.size()) != num_nodes_)
    throw std::invalid_argument("network: flag array size mismatch");

  std::set<std::pair<int, int>> seen;
  for (auto& e : edges_) {
    if (e.u < 0 || e.u >= num_nodes_ || e.v < 0 || e.v >= num_nodes_)
      throw std::invalid_argument("network: edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("network: self-loop");
    if (e.u > e.v) std::swap(e.u, e.v);
    if (!seen.insert({e.u, e.v}).second)
      throw std::invalid_argument("network: duplicate edge");
    if (!(e.weight > 0.0)) throw std::invalid_argument("network: nonpositive edge weight");
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) {
      double d = coord(e.u, a) - coord(e.v, a);
      s += d * d;
    }
    e.length = std::sqrt(s);
    if (!(e.length > 0.0)) throw std::invalid_argument("network: zero-length edge");
  }

  adj_ptr_.assign(num_nodes_ + 1, 0);
  for (const auto& e : edges_) {
    ++adj_ptr_[e.u + 1];
    ++adj_ptr_[e.v + 1];
  }
  for (int i = 0; i < num_nodes_; ++i) adj_ptr_[i + 1] += adj_ptr_[i];
  adj_node_.resize(adj_ptr_.back());
  adj_edge_.resize(adj_ptr_.back());
  std::vector<int> fill(adj_ptr_.begin(), adj_ptr_.end() - 1);
  for (int ei = 0; ei < num_edges(); ++ei) {
    const auto& e = edges_[ei];
    adj_node_[fill[e.u]] = e.v;
    adj_edge_[fill[e.u]++] = ei;
    adj_node_[fill[e.v]] = e.u;
    adj_edge_[fill[e.v]++] = ei;
  }

  // connectivity (BFS from node 0)
  std::vector<std::uint8_t> visited(num_nodes_, 0);
  std::queue<int> q;
  q.push(0);
  visited[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int x = q.front();
    q.pop();
    for (int y : neighbors(x))
      if (!visited[y]) {
        visited[y] = 1;
        ++count;
        q.push(y);
      }
  }
  if (count != num_nodes_) throw std::invalid_argument("network: graph not connected");

  bool any_dirichlet = false;
  for (auto f : dirichlet_) any_dirichlet |= (f != 0);
  if (!any_dirichlet) throw std::invalid_argument("network: no Dirichlet node");
}

std::span<const int> SpatialNetwork::neighbors(int node) const {
  return {adj_node_.data() + adj_ptr_[node],
          static_cast<std::size_t>(adj_ptr_[node + 1] - adj_ptr_[node])};
}

std::span<const int> SpatialNetwork::incident_edges(int node) const {
  return {adj_edge_.data() + adj_ptr_[node],
          static_cast<std::size_t>(adj_ptr_[node + 1] - adj_ptr_[node])};
}

NodeSet SpatialNetwork::dirichlet_nodes() const {
  std::vector<int> ids;
  for (int i = 0; i < num_nodes_; ++i)
    if (dirichlet_[i]) ids.push_back(i);
  return NodeSet::from_sorted(std::move(ids));
}

NodeSet SpatialNetwork::free_nodes() const {
  std::vector<int> ids;
  for (int i = 0; i < num_nodes_; ++i)
    if (!dirichlet_[i]) ids.push_back(i);
  return NodeSet::from_sorted(std::move(ids));
}

NodeSet SpatialNetwork::domain_boundary_nodes() const {
  std::vector<int> ids;
  for (int i = 0; i < num_nodes_; ++i)
    if (domain_boundary_[i]) ids.push_back(i);
  return NodeSet::from_sorted(std::move(ids));
}

SpatialNetwork SpatialNetwork::with_weights(std::vector<double> weights) const {
  if (weights.size() != edges_.size())
    throw std::invalid_argument("with_weights: size mismatch");
  std::vector<Edge> edges = edges_;
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i].weight = weights[i];
  return SpatialNetwork(dim_, coords_, std::move(edges), dirichlet_, domain_boundary_);
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

} // namespace

void SpatialNetwork::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << num_nodes_ << ' ' << num_edges() << ' ' << dim_ << '\n';
  for (int i = 0; i < num_nodes_; ++i) {
    out << i;
    for (int a = 0; a < dim_; ++a) out << ' ' << fmt17(coord(i, a));
    out << ' ' << int(dirichlet_[i]) << ' ' << int(domain_boundary_[i]) << '\n';
  }
  for (const auto& e : edges_) out << e.u << ' ' << e.v << ' ' << fmt17(e.weight) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

SpatialNetwork SpatialNetwork::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  int n = 0, m = 0, dim = 0;
  if (!(in >> n >> m >> dim)) throw std::runtime_error("bad header: " + path);
  std::vector<double> coords(static_cast<std::size_t>(n) * dim);
  std::vector<std::uint8_t> dirichlet(n), boundary(n);
  for (int i = 0; i < n; ++i) {
    int id = 0, dflag = 0, bflag = 0;
    if (!(in >> id)) throw std::runtime_error("bad node line: " + path);
    if (id != i) throw std::runtime_error("node ids must be dense 0-based: " + path);
    for (int a = 0; a < dim; ++a)
      if (!(in >> coords[static_cast<std::size_t>(i) * dim + a]))
        throw std::runtime_error("bad node coords: " + path);
    if (!(in >> dflag >> bflag)) throw std::runtime_error("bad node flags: " + path);
    dirichlet[i] = static_cast<std::uint8_t>(dflag != 0);
    boundary[i] = static_cast<std::uint8_t>(bflag != 0);
  }
  std::vector<Edge> edges(m);
  for (int e = 0; e < m; ++e)
    if (!(in >> edges[e].u >> edges[e].v >> edges[e].weight))
      throw std::runtime_error("bad edge line: " + path);
  return SpatialNetwork(dim, std::move(coords), std::move(edges), std::move(dirichlet),
                        std::move(boundary));
}

namespace {

// Multi-source Dijkstra restricted to nodes with mask != 0. dist has one
// entry per node, preset to kInfiniteDistance; sources must carry dist 0.
void dijkstra_masked(const SpatialNetwork& net, const std::vector<std::uint8_t>& mask,
                     const std::vector<int>& sources, std::vector<double>& dist,
                     int stop_node = -1) {
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (int s : sources) {
    dist[s] = 0.0;
    heap.push({0.0, s});
  }
  while (!heap.empty()) {
    auto [d, x] = heap.top();
    heap.pop();
    if (d > dist[x]) continue;
    if (x == stop_node) return;
    auto nbrs = net.neighbors(x);
    auto eids = net.incident_edges(x);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      int y = nbrs[k];
      if (!mask[y]) continue;
      double nd = d + net.edges()[eids[k]].length;
      if (nd < dist[y]) {
        dist[y] = nd;
        heap.push({nd, y});
      }
    }
  }
}

std::vector<std::uint8_t> make_mask(int n, const NodeSet& S) {
  std::vector<std::uint8_t> mask(n, 0);
  for (int x : S) mask[x] = 1;
  return mask;
}

} // namespace

double graph_distance(const SpatialNetwork& net, const NodeSet& S, int x, int y) {
  if (!S.contains(x) || !S.contains(y))
    throw std::invalid_argument("graph_distance: node outside S");
  if (x == y) return 0.0;
  auto mask = make_mask(net.num_nodes(), S);
  std::vector<double> dist(net.num_nodes(), kInfiniteDistance);
  dijkstra_masked(net, mask, {x}, dist, y);
  return dist[y];
}

std::vector<double> dist_to_set(const SpatialNetwork& net, const NodeSet& S, const NodeSet& R) {
  if (R.empty()) throw std::invalid_argument("dist_to_set: empty source set");
  if (!R.subset_of(S)) throw std::invalid_argument("dist_to_set: R not a subset of S");
  auto mask = make_mask(net.num_nodes(), S);
  std::vector<double> dist(net.num_nodes(), kInfiniteDistance);
  dijkstra_masked(net, mask, R.ids(), dist);
  return dist;
}

NodeSet boundary_nodes(const SpatialNetwork& net, const NodeSet& R, const NodeSet& S) {
  if (!R.subset_of(S)) throw std::invalid_argument("boundary_nodes: R not a subset of S");
  std::vector<int> out;
  for (int x : R) {
    for (int y : net.neighbors(x)) {
      if (S.contains(y) && !R.contains(y)) {
        out.push_back(x);
        break;
      }
    }
  }
  return NodeSet::from_sorted(std::move(out));
}

NodeSet element_boundary(const SpatialNetwork& net, const NodeSet& T) {
  std::vector<int> out;
  for (int x : T) {
    bool is_bnd = net.on_domain_boundary(x);
    if (!is_bnd)
      for (int y : net.neighbors(x))
        if (!T.contains(y)) {
          is_bnd = true;
          break;
        }
    if (is_bnd) out.push_back(x);
  }
  return NodeSet::from_sorted(std::move(out));
}

} // namespace netlod
