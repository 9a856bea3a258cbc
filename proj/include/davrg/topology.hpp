#ifndef DAVRG_TOPOLOGY_HPP
#define DAVRG_TOPOLOGY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace davrg {

// Undirected connected graph; self-loops are implicit, never stored.
struct Graph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;  // u < v, unique

  std::vector<std::vector<int>> adjacency() const;
  bool is_connected() const;
};

enum class TopologyKind { line, cycle, complete, random_p, explicit_edges };

TopologyKind topology_kind_from_string(const std::string& s);

Graph build_topology(TopologyKind kind, int node_count, std::uint64_t seed,
                     double edge_probability = 0.0,
                     const std::vector<std::pair<int, int>>& edges = {});

// Symmetric doubly-stochastic gossip weights with their spectral summary.
struct CombinationMatrix {
  Eigen::MatrixXd a;
  double lambda2 = 0.0;  // largest eigenvalue below the single Perron value 1

  int size() const { return static_cast<int>(a.rows()); }
};

// Metropolis rule with neighborhood sizes counting the node itself:
// a(l,k) = 1 / max(|N_l|, |N_k|) for neighbors, diagonal absorbs the rest.
CombinationMatrix metropolis_weights(const Graph& g);

// Largest eigenvalue strictly below the Perron eigenvalue 1. Requires a
// symmetric input; returns 0 for a 1x1 matrix.
double second_largest_eigenvalue(const Eigen::MatrixXd& a);

// (I + A) / 2; eigenvalues map affinely so lambda2 needs no new solve.
CombinationMatrix half_lifted(const CombinationMatrix& a);

// Edge-list text, one "u v" pair per line, 0-indexed.
void write_edge_list(std::ostream& os, const Graph& g);
Graph read_edge_list(std::istream& is);

// K x K reals, comma separated.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& a);

}  // namespace davrg

#endif
