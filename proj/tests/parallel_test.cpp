// The OpenMP schedule must not change any result: phase 1 touches only
// node-local state and phase 2 sums neighbors in a fixed order, so the
// parallel runs have to match the serial reference bitwise.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "davrg/harness.hpp"

using namespace davrg;

namespace {

struct Problem {
  std::unique_ptr<Dataset> data;
  PartitionedDataset part;
  CombinationMatrix comb;
  LossModel model;
};

Problem make_problem(int k_nodes, int n_total, std::uint64_t seed,
                     PartitionMode mode) {
  Problem pr;
  pr.data = std::make_unique<Dataset>(
      generate_least_squares(n_total, 6, 10.0, 0.5, seed));
  pr.part = partition(*pr.data, k_nodes, mode, seed);
  pr.comb = metropolis_weights(
      build_topology(TopologyKind::random_p, k_nodes, seed, 0.2));
  pr.model = LossModel{LossKind::least_squares, 0.0, 6};
  return pr;
}

void compare_serial_parallel(const Problem& pr, AlgorithmSpec spec,
                             long iterations) {
  NetworkState serial = make_network(pr.comb, spec, pr.model, pr.part, 99);
  NetworkState parallel = make_network(pr.comb, spec, pr.model, pr.part, 99);
  for (long i = 0; i < iterations; ++i) {
    step(serial, spec, pr.model, pr.part, /*parallel=*/false);
    step(parallel, spec, pr.model, pr.part, /*parallel=*/true);
  }
  for (int k = 0; k < serial.node_count(); ++k) {
    REQUIRE((serial.nodes[k].w.array() == parallel.nodes[k].w.array()).all());
    REQUIRE(
        (serial.nodes[k].psi.array() == parallel.nodes[k].psi.array()).all());
  }
  REQUIRE(serial.total_grad_evals() == parallel.total_grad_evals());
}

}  // namespace

TEST_CASE("exact diffusion: serial and openmp trajectories are bitwise equal") {
  Problem pr = make_problem(24, 24 * 16, 71, PartitionMode::balanced);
  compare_serial_parallel(
      pr, AlgorithmSpec::make(Variant::exact_diffusion, 0.05), 50);
}

TEST_CASE("diffusion-avrg: serial and openmp trajectories are bitwise equal") {
  Problem pr = make_problem(24, 24 * 16, 72, PartitionMode::balanced);
  compare_serial_parallel(pr, AlgorithmSpec::make(Variant::diffusion_avrg, 0.2),
                          16 * 6);
}

TEST_CASE("diffusion-svrg (unbalanced): bitwise schedule independence") {
  Problem pr = make_problem(16, 400, 73, PartitionMode::unbalanced);
  compare_serial_parallel(pr, AlgorithmSpec::make(Variant::diffusion_svrg, 0.4),
                          120);
}

TEST_CASE("prox-diffusion-avrg: bitwise schedule independence") {
  Problem pr = make_problem(12, 12 * 10, 74, PartitionMode::balanced);
  AlgorithmSpec spec = AlgorithmSpec::make(Variant::prox_diffusion_avrg, 0.3);
  spec.regularizer = {Regularizer::Kind::l1, 0.01};
  compare_serial_parallel(pr, spec, 10 * 5);
}
