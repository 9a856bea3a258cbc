// Benchmark: serial vs OpenMP execution of the two-phase iteration, for the
// full-gradient and the variance-reduced variants. The parallel schedule is
// required to be bitwise-neutral, so the final iterates are compared too.

#include <cstdio>
#include <cstring>

#include <omp.h>

#include "davrg/harness.hpp"

using namespace davrg;

namespace {

struct BenchCase {
  const char* name;
  Variant variant;
  long iterations;
};

double time_run(NetworkState& net, const AlgorithmSpec& spec,
                const LossModel& model, const PartitionedDataset& part,
                long iterations, bool parallel) {
  double t0 = omp_get_wtime();
  for (long i = 0; i < iterations; ++i) step(net, spec, model, part, parallel);
  return omp_get_wtime() - t0;
}

bool same_iterates(const NetworkState& a, const NetworkState& b) {
  for (int k = 0; k < a.node_count(); ++k)
    if (std::memcmp(a.nodes[k].w.data(), b.nodes[k].w.data(),
                    sizeof(double) * a.dimension) != 0)
      return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int k_nodes = 192;
  int m = 64;
  int per_node = 64;
  if (argc > 1) k_nodes = std::atoi(argv[1]);
  if (argc > 2) m = std::atoi(argv[2]);
  if (argc > 3) per_node = std::atoi(argv[3]);

  Dataset data = generate_least_squares(k_nodes * per_node, m, 20.0, 1.0, 11);
  PartitionedDataset part =
      partition(data, k_nodes, PartitionMode::balanced, 11);
  Graph g = build_topology(TopologyKind::random_p, k_nodes, 11, 0.05);
  CombinationMatrix comb = metropolis_weights(g);
  LossModel model{LossKind::least_squares, 0.0, m};

  const BenchCase cases[] = {
      {"exact-diffusion", Variant::exact_diffusion, 40},
      {"diffusion-avrg", Variant::diffusion_avrg, 40 * per_node},
  };

  std::printf("K=%d M=%d N_k=%d threads=%d\n", k_nodes, m, per_node,
              omp_get_max_threads());
  std::printf("%-18s %12s %12s %9s %8s\n", "variant", "serial s", "openmp s",
              "speedup", "bitwise");

  for (const auto& c : cases) {
    AlgorithmSpec spec = AlgorithmSpec::make(c.variant, 0.05);
    NetworkState serial = make_network(comb, spec, model, part, 11);
    NetworkState parallel = make_network(comb, spec, model, part, 11);

    // warm-up pass so page faults and lazy allocations are off the clock
    NetworkState warm = make_network(comb, spec, model, part, 11);
    time_run(warm, spec, model, part, c.iterations / 4 + 1, true);

    double ts = time_run(serial, spec, model, part, c.iterations, false);
    double tp = time_run(parallel, spec, model, part, c.iterations, true);
    bool bitwise = same_iterates(serial, parallel);
    std::printf("%-18s %12.4f %12.4f %8.2fx %8s\n", c.name, ts, tp, ts / tp,
                bitwise ? "yes" : "NO");
    if (!bitwise) return 1;
  }
  return 0;
}
