#ifndef DAVRG_HARNESS_HPP
#define DAVRG_HARNESS_HPP

#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "davrg/data.hpp"
#include "davrg/diagnostics.hpp"
#include "davrg/diffusion.hpp"
#include "davrg/objective.hpp"
#include "davrg/topology.hpp"

namespace davrg {

// ---- reference solutions ----------------------------------------------

struct ReferenceSolution {
  Vector w_star;
  double residual_norm = 0.0;
  std::string method;
};

// Gradient / loss of the global risk J(w) = (1/N) sum_n Q(w; x_n).
Vector global_gradient(const LossModel& model, const Dataset& d,
                       ConstVectorRef w);
double global_loss(const LossModel& model, const Dataset& d, ConstVectorRef w);

// || r || with r the minimal-norm element of grad J(w) + d R(w).
double subgradient_residual(const LossModel& model, const Dataset& d,
                            const Regularizer& reg, ConstVectorRef w);

// Normal equations for plain least squares, damped Newton for logistic,
// FISTA with restart when an l1 term is present. Deterministic; residual
// target 1e-12 * max(1, ||grad J(0)||).
ReferenceSolution reference_solution(const LossModel& model, const Dataset& d,
                                     const Regularizer& reg);

// Averaged relative square-error (1/K) sum_k ||w_k - w*||^2 / ||w*||^2.
double relative_error(const NetworkState& net, const ReferenceSolution& ref);

// ---- cost model and traces ---------------------------------------------

struct CostModel {
  double t_comp = 1.0;  // time units per single-sample gradient
  double t_comm = 1.0;  // time units per communication round
};

double running_time(long n_g, long n_c, const CostModel& cost);

struct RunTrace {
  // one row per epoch (balanced) or per max_k N_k iterations (unbalanced)
  std::vector<double> rel_error;
  std::vector<long> n_g;  // cumulative gradient evaluations, network total
  std::vector<long> n_c;  // cumulative communication rounds, network total
  std::vector<double> time_model;
  std::vector<long> row_iteration;
  long iterations_per_row = 1;
  bool has_reference = false;

  // optional probe: per-iteration per-node gradient charges
  std::vector<std::vector<long>> iter_charges;

  double rate = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();

  long rows() const { return static_cast<long>(rel_error.size()); }
};

struct RunOptions {
  long max_epochs = 0;
  double target_error = -1.0;  // stop early when reached (needs a reference)
  bool probe_charges = false;
  bool parallel = false;
};

// Advances the network one trace row at a time. Throws divergence_error on
// a non-finite iterate; rows recorded so far stay in `trace`.
void run_into(RunTrace& trace, NetworkState& net, const AlgorithmSpec& spec,
              const LossModel& model, const PartitionedDataset& part,
              const RunOptions& opt, const ReferenceSolution* ref = nullptr,
              const CostModel& cost = {});

RunTrace run(NetworkState& net, const AlgorithmSpec& spec,
             const LossModel& model, const PartitionedDataset& part,
             const RunOptions& opt, const ReferenceSolution* ref = nullptr,
             const CostModel& cost = {});

// ---- cost accounting ----------------------------------------------------

// Rule-based per-iteration charge for one node. epoch_len is the node's
// local epoch length (N_k, or L for mini-batch).
long expected_iteration_charge(Variant v, long epoch, int inner,
                               int shard_size, int batch_size);

// Rule-based charges for `iterations` global iterations: [iteration][node].
std::vector<std::vector<long>> charge_costs(Variant v,
                                            const PartitionedDataset& part,
                                            int batch_size, long iterations);

struct IdleProfile {
  std::vector<double> variance;        // per node, over post-warmup charges
  std::vector<std::vector<long>> charges;  // per node, post-warmup sequence
};

// Per-node compute-charge balance, skipping each node's first local epoch
// (the zero-initialized snapshot makes that epoch one evaluation cheaper).
IdleProfile idle_profile(const RunTrace& trace, const PartitionedDataset& part,
                         Variant v, int batch_size);

// ---- experiment configuration -------------------------------------------

struct ExperimentConfig {
  std::uint64_t seed = 1;

  std::string data_kind = "synthetic-least-squares";
  int n = 0;
  int m = 0;
  double condition = 1.0;
  double noise_std = 0.0;
  std::string data_path;
  bool normalize = false;
  std::string partition_mode = "balanced";
  std::vector<int> partition_sizes;

  std::string topology = "complete";
  int nodes = 1;
  double edge_probability = 0.0;
  std::string edges_path;

  std::string variant = "diffusion-avrg";
  double step_size = 0.1;
  long epochs = 10;
  int batch_size = 1;
  std::string loss = "least-squares";
  double rho = 0.0;
  double eta = 0.0;
  std::optional<bool> use_weights;
  double target_error = -1.0;
  bool parallel = false;
  std::vector<double> mu_grid;
  std::vector<int> batch_grid;

  CostModel costs;

  std::string trace_csv;
  std::string svg;
  std::string summary_csv;
  std::string checkpoint;
};

// Parses the JSON document; unknown keys are rejected with their path.
ExperimentConfig parse_config(const std::string& json_text);

// Everything a run needs, built from a config. The dataset is heap-held so
// the partition's back-pointer stays valid.
struct Experiment {
  ExperimentConfig cfg;
  std::unique_ptr<Dataset> dataset;
  PartitionedDataset part;
  Graph graph;
  CombinationMatrix comb;
  LossModel model;
  Regularizer regularizer;
  AlgorithmSpec spec;
};

Experiment build_experiment(const ExperimentConfig& cfg);

// ---- sweeps ---------------------------------------------------------------

std::vector<double> log_grid(double lo, double hi, int points_per_decade);

struct SweepEntry {
  double mu = 0.0;
  int batch_size = 1;
};

struct SweepOutcome {
  SweepEntry entry;
  bool diverged = false;
  double final_error = std::numeric_limits<double>::quiet_NaN();
  long epochs_run = 0;
  long epochs_to_target = -1;
  long n_g = 0;  // at target when reached, else at the end
  long n_c = 0;
  double time_model = 0.0;
  double rate = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
};

// Runs every entry from a fresh network; isolated and seed-deterministic,
// so entries may execute in parallel.
std::vector<SweepOutcome> run_sweep(const Experiment& ex,
                                    const std::vector<SweepEntry>& entries,
                                    const RunOptions& opt,
                                    const ReferenceSolution* ref,
                                    const CostModel& cost = {},
                                    bool parallel_entries = false);

// ---- emission ---------------------------------------------------------------

void write_trace_csv(std::ostream& os, const RunTrace& trace);
RunTrace read_trace_csv(std::istream& is);
void write_sweep_csv(std::ostream& os, const std::vector<SweepOutcome>& rows);

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained log-y line chart.
void write_svg_logy(std::ostream& os, const std::vector<SvgSeries>& series,
                    const std::string& x_label, const std::string& y_label);

}  // namespace davrg

#endif
