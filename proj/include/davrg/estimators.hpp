#ifndef DAVRG_ESTIMATORS_HPP
#define DAVRG_ESTIMATORS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "davrg/data.hpp"
#include "davrg/objective.hpp"
#include "davrg/rng.hpp"

namespace davrg {

// One epoch's worth of sampling without replacement.
struct ReshuffleSchedule {
  std::vector<int> perm;
  int cursor = 0;
  long epoch = 0;
};

ReshuffleSchedule fresh_permutation(int n, RngStream& rng);

// Amortized variance-reduced gradient state. g_current holds the running
// average finished last epoch; g_accum builds next epoch's. In epoch 0 the
// snapshot gradient is literally zero (never evaluated), so the estimate is
// a plain reshuffled stochastic gradient there.
struct AvrgState {
  Vector snapshot;   // iterate frozen at the last epoch boundary
  Vector g_current;  // g^t
  Vector g_accum;    // g^{t+1} under construction
  ReshuffleSchedule schedule;
  bool epoch_zero = true;

  static AvrgState create(int dim, int schedule_len, std::uint64_t seed,
                          int node, ConstVectorRef w0);
};

// Returns the variance-reduced estimate at w and advances the schedule.
// evals, when given, is bumped by the number of per-sample gradients
// actually computed (1 in epoch 0, 2 afterwards).
Vector avrg_gradient(AvrgState& st, const LossModel& model,
                     const ShardView& shard, ConstVectorRef w,
                     long* evals = nullptr);

// Allocation-free form for the engine's hot loop; tmp must match the
// model dimension. Produces the same values as avrg_gradient.
void avrg_gradient_into(AvrgState& st, const LossModel& model,
                        const ShardView& shard, ConstVectorRef w, Vector& out,
                        Vector& tmp, long* evals = nullptr);

// Promote the accumulator, freeze the snapshot at w_end, draw next epoch's
// permutation. Requires the full epoch to have been consumed.
void epoch_rollover(AvrgState& st, ConstVectorRef w_end, std::uint64_t seed,
                    int node);

// SVRG state: a full local gradient is recomputed at every epoch start.
struct SvrgState {
  Vector snapshot;  // theta^t
  Vector g_full;    // true local gradient at the snapshot
  ReshuffleSchedule schedule;
  bool started = false;

  static SvrgState create(int dim, int shard_size);
};

// Epoch start: new permutation, snapshot = w, full local gradient
// (charges shard.size() evaluations).
void svrg_epoch_begin(SvrgState& st, const LossModel& model,
                      const ShardView& shard, ConstVectorRef w, long epoch,
                      std::uint64_t seed, int node, long* evals = nullptr);

Vector svrg_gradient(SvrgState& st, const LossModel& model,
                     const ShardView& shard, ConstVectorRef w,
                     long* evals = nullptr);

void svrg_gradient_into(SvrgState& st, const LossModel& model,
                        const ShardView& shard, ConstVectorRef w, Vector& out,
                        Vector& tmp, long* evals = nullptr);

// Map a global iteration index to the node-local (epoch, inner index).
inline std::pair<long, int> unbalanced_index(long i, int shard_size) {
  return {i / shard_size, static_cast<int>(i % shard_size)};
}

// Contiguous equal batches of the shard in its stored order; the per-epoch
// permutation acts on batch indices.
struct BatchPartition {
  int batch_size = 1;   // B
  int batch_count = 1;  // L = N / B

  static BatchPartition create(int shard_size, int batch_size);
};

Vector minibatch_avrg_gradient(AvrgState& st, const BatchPartition& bp,
                               const LossModel& model, const ShardView& shard,
                               ConstVectorRef w, long* evals = nullptr);

void minibatch_avrg_gradient_into(AvrgState& st, const BatchPartition& bp,
                                  const LossModel& model,
                                  const ShardView& shard, ConstVectorRef w,
                                  Vector& out, Vector& tmp_batch,
                                  Vector& tmp_sample, long* evals = nullptr);

}  // namespace davrg

#endif
