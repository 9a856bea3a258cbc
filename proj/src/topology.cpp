#include "davrg/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "davrg/errors.hpp"
#include "davrg/rng.hpp"

namespace davrg {

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(node_count);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

bool Graph::is_connected() const {
  if (node_count <= 1) return node_count == 1;
  auto adj = adjacency();
  std::vector<char> seen(node_count, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == node_count;
}

TopologyKind topology_kind_from_string(const std::string& s) {
  if (s == "line") return TopologyKind::line;
  if (s == "cycle") return TopologyKind::cycle;
  if (s == "complete") return TopologyKind::complete;
  if (s == "random") return TopologyKind::random_p;
  if (s == "explicit") return TopologyKind::explicit_edges;
  throw std::invalid_argument("unknown topology kind: " + s);
}

namespace {

void validate_edges(int k, const std::vector<std::pair<int, int>>& edges) {
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : edges) {
    if (u == v) throw std::invalid_argument("self-loop in edge list");
    if (u < 0 || v < 0 || u >= k || v >= k)
      throw std::invalid_argument("edge endpoint out of range");
    auto key = std::minmax(u, v);
    if (!seen.insert(key).second)
      throw std::invalid_argument("duplicate edge in edge list");
  }
}

// Link the components of g into one by drawing random representative pairs;
// a random tree over components, deterministic given the stream.
void connect_components(Graph& g, RngStream& rng) {
  auto adj = g.adjacency();
  std::vector<int> comp(g.node_count, -1);
  int ncomp = 0;
  for (int s = 0; s < g.node_count; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{s};
    comp[s] = ncomp;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[u])
        if (comp[v] < 0) {
          comp[v] = ncomp;
          stack.push_back(v);
        }
    }
    ++ncomp;
  }
  if (ncomp == 1) return;

  std::vector<std::vector<int>> members(ncomp);
  for (int u = 0; u < g.node_count; ++u) members[comp[u]].push_back(u);

  std::vector<int> order(ncomp);
  for (int c = 0; c < ncomp; ++c) order[c] = c;
  shuffle(order, rng);
  for (int idx = 1; idx < ncomp; ++idx) {
    // attach component order[idx] to a random earlier component
    int prev = order[static_cast<int>(rng.next_below(idx))];
    int cur = order[idx];
    const auto& a = members[prev];
    const auto& b = members[cur];
    int u = a[rng.next_below(a.size())];
    int v = b[rng.next_below(b.size())];
    g.edges.emplace_back(std::min(u, v), std::max(u, v));
  }
}

}  // namespace

Graph build_topology(TopologyKind kind, int node_count, std::uint64_t seed,
                     double edge_probability,
                     const std::vector<std::pair<int, int>>& edges) {
  if (node_count < 1) throw std::invalid_argument("node_count must be >= 1");
  Graph g;
  g.node_count = node_count;
  switch (kind) {
    case TopologyKind::line:
      for (int i = 0; i + 1 < node_count; ++i) g.edges.emplace_back(i, i + 1);
      break;
    case TopologyKind::cycle:
      for (int i = 0; i + 1 < node_count; ++i) g.edges.emplace_back(i, i + 1);
      if (node_count > 2) g.edges.emplace_back(0, node_count - 1);
      break;
    case TopologyKind::complete:
      for (int u = 0; u < node_count; ++u)
        for (int v = u + 1; v < node_count; ++v) g.edges.emplace_back(u, v);
      break;
    case TopologyKind::random_p: {
      if (!(edge_probability > 0.0 && edge_probability <= 1.0))
        throw std::invalid_argument("edge probability must be in (0, 1]");
      RngStream rng = make_stream(seed, 0, 0, /*tag=*/0x746F706FULL);
      for (int u = 0; u < node_count; ++u)
        for (int v = u + 1; v < node_count; ++v)
          if (rng.next_double() < edge_probability) g.edges.emplace_back(u, v);
      connect_components(g, rng);
      break;
    }
    case TopologyKind::explicit_edges:
      validate_edges(node_count, edges);
      g.edges = edges;
      for (auto& e : g.edges)
        if (e.first > e.second) std::swap(e.first, e.second);
      if (!g.is_connected())
        throw std::invalid_argument("explicit edge list is not connected");
      break;
  }
  return g;
}

CombinationMatrix metropolis_weights(const Graph& g) {
  if (!g.is_connected())
    throw std::invalid_argument("metropolis_weights requires a connected graph");
  const int k = g.node_count;
  auto adj = g.adjacency();
  std::vector<int> nsize(k);  // |N_k| including the node itself
  for (int u = 0; u < k; ++u) nsize[u] = static_cast<int>(adj[u].size()) + 1;

  CombinationMatrix cm;
  cm.a = Eigen::MatrixXd::Zero(k, k);
  for (int u = 0; u < k; ++u)
    for (int v : adj[u])
      cm.a(u, v) = 1.0 / std::max(nsize[u], nsize[v]);
  for (int u = 0; u < k; ++u) {
    double off = 0.0;
    for (int v : adj[u]) off += cm.a(v, u);
    cm.a(u, u) = 1.0 - off;
  }
  cm.lambda2 = second_largest_eigenvalue(cm.a);
  return cm;
}

double second_largest_eigenvalue(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix not square");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("matrix not symmetric");
  if (a.rows() == 1) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw convergence_failure(0.0, "eigensolver failed");
  const auto& ev = es.eigenvalues();  // ascending
  return ev(ev.size() - 2);
}

CombinationMatrix half_lifted(const CombinationMatrix& a) {
  CombinationMatrix out;
  const int k = a.size();
  out.a = 0.5 * (Eigen::MatrixXd::Identity(k, k) + a.a);
  out.lambda2 = 0.5 * (1.0 + a.lambda2);
  return out;
}

void write_edge_list(std::ostream& os, const Graph& g) {
  for (auto [u, v] : g.edges) os << u << ' ' << v << '\n';
}

Graph read_edge_list(std::istream& is) {
  Graph g;
  std::string line;
  long lineno = 0;
  int max_node = -1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int u, v;
    if (!(ls >> u >> v)) throw parse_error(lineno, "expected \"u v\" pair");
    if (u < 0 || v < 0) throw parse_error(lineno, "negative node index");
    g.edges.emplace_back(std::min(u, v), std::max(u, v));
    max_node = std::max({max_node, u, v});
  }
  g.node_count = max_node + 1;
  validate_edges(g.node_count, g.edges);
  return g;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& a) {
  const Eigen::IOFormat csv(Eigen::FullPrecision, Eigen::DontAlignCols, ",",
                            "\n");
  os << a.format(csv) << '\n';
}

}  // namespace davrg
