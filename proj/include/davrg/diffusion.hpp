#ifndef DAVRG_DIFFUSION_HPP
#define DAVRG_DIFFUSION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "davrg/data.hpp"
#include "davrg/estimators.hpp"
#include "davrg/objective.hpp"
#include "davrg/topology.hpp"

namespace davrg {

enum class Variant {
  exact_diffusion,
  stochastic_diffusion,
  diffusion_avrg,
  diffusion_avrg_unbalanced,
  diffusion_svrg,
  diffusion_avrg_minibatch,
  prox_exact_diffusion,
  prox_diffusion_avrg,
};

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

bool variant_is_prox(Variant v);
bool variant_is_stochastic(Variant v);
// Variants whose epochs are global (all shards equal) rather than node-local.
bool variant_needs_balanced(Variant v);

struct AlgorithmSpec {
  Variant variant = Variant::exact_diffusion;
  double step_size = 0.0;  // mu
  Regularizer regularizer;
  bool use_weights = true;  // scale adaptation by q_k
  int batch_size = 1;       // mini-batch variant only

  // Defaults use_weights by variant: the deterministic and unbalanced
  // variants scale by q_k, the balanced stochastic ones do not.
  static AlgorithmSpec make(Variant v, double step_size);
};

struct NodeState {
  Vector w;
  Vector psi;
  Vector z;  // prox variants only
  std::optional<AvrgState> avrg;
  std::optional<SvrgState> svrg;
};

struct NetworkState {
  std::vector<NodeState> nodes;
  CombinationMatrix comb;
  Eigen::MatrixXd a_bar;                    // (I + A) / 2
  std::vector<std::vector<int>> neighbors;  // sorted, self included
  int dimension = 0;
  long iteration = 0;
  std::uint64_t seed = 0;
  std::vector<long> node_epoch;

  // instrumented cost counters, cumulative per node
  std::vector<long> grad_evals;
  std::vector<long> comm_rounds;

  // scratch reused across steps, not part of the logical state
  std::vector<Vector> phi_scratch;
  std::vector<Vector> psi_scratch;

  int node_count() const { return static_cast<int>(nodes.size()); }
  long total_grad_evals() const;
  long total_comm_rounds() const;
  Vector mean_iterate() const;
  double consensus_spread() const;  // max_k ||w_k - mean||
};

NetworkState make_network(const CombinationMatrix& comb,
                          const AlgorithmSpec& spec, const LossModel& model,
                          const PartitionedDataset& part, std::uint64_t seed,
                          const Vector& w0 = Vector());

// Same, with one starting point per node (psi starts equal to w everywhere).
NetworkState make_network(const CombinationMatrix& comb,
                          const AlgorithmSpec& spec, const LossModel& model,
                          const PartitionedDataset& part, std::uint64_t seed,
                          const std::vector<Vector>& w0_per_node);

// One synchronous global iteration: phase 1 (adaptation + correction,
// node-local) and phase 2 (combination, reads every node's phi). Both
// phases may run the nodes in parallel; results are bitwise independent
// of the schedule because each node sums its neighbors in fixed order.
// iter_charges, when given, receives this iteration's per-node gradient
// evaluation counts. Throws divergence_error on a non-finite iterate.
void step(NetworkState& net, const AlgorithmSpec& spec, const LossModel& model,
          const PartitionedDataset& part, bool parallel = false,
          std::vector<long>* iter_charges = nullptr);

// Spec'd variant entry points; each validates the variant and delegates.
void step_exact_diffusion(NetworkState& net, const AlgorithmSpec& spec,
                          const LossModel& model,
                          const PartitionedDataset& part);
void step_stochastic_diffusion(NetworkState& net, const AlgorithmSpec& spec,
                               const LossModel& model,
                               const PartitionedDataset& part);
void step_diffusion_avrg(NetworkState& net, const AlgorithmSpec& spec,
                         const LossModel& model,
                         const PartitionedDataset& part);
void step_diffusion_avrg_unbalanced(NetworkState& net,
                                    const AlgorithmSpec& spec,
                                    const LossModel& model,
                                    const PartitionedDataset& part);
void step_diffusion_svrg(NetworkState& net, const AlgorithmSpec& spec,
                         const LossModel& model,
                         const PartitionedDataset& part);
void step_prox_diffusion(NetworkState& net, const AlgorithmSpec& spec,
                         const LossModel& model,
                         const PartitionedDataset& part);

// Iterations that make up one trace row for this variant.
long epoch_length(Variant v, const PartitionedDataset& part, int batch_size);

// Resumable-run snapshot: iterates, estimator cursors and cost counters.
// RNG streams are counter-keyed by (seed, node, epoch), so the seed and
// epoch indices are all that is needed to reproduce them.
std::string save_checkpoint(const NetworkState& net);
NetworkState load_checkpoint(const std::string& json_text,
                             const CombinationMatrix& comb);

}  // namespace davrg

#endif
