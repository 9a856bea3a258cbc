#include "davrg/estimators.hpp"

#include <numeric>
#include <stdexcept>

#include "davrg/errors.hpp"

namespace davrg {

ReshuffleSchedule fresh_permutation(int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("permutation length must be >= 1");
  ReshuffleSchedule s;
  s.perm.resize(n);
  std::iota(s.perm.begin(), s.perm.end(), 0);
  shuffle(s.perm, rng);
  return s;
}

AvrgState AvrgState::create(int dim, int schedule_len, std::uint64_t seed,
                            int node, ConstVectorRef w0) {
  AvrgState st;
  st.snapshot = w0;
  st.g_current = Vector::Zero(dim);
  st.g_accum = Vector::Zero(dim);
  RngStream rng = make_stream(seed, node, /*epoch=*/0, /*tag=*/0x7065726DULL);
  st.schedule = fresh_permutation(schedule_len, rng);
  st.schedule.epoch = 0;
  st.epoch_zero = true;
  return st;
}

void avrg_gradient_into(AvrgState& st, const LossModel& model,
                        const ShardView& shard, ConstVectorRef w, Vector& out,
                        Vector& tmp, long* evals) {
  const int len = static_cast<int>(st.schedule.perm.size());
  if (st.schedule.cursor >= len)
    throw invalid_state("avrg_gradient: epoch consumed but not rolled over");
  const int n = st.schedule.perm[st.schedule.cursor];

  sample_gradient(model, w, shard.feature(n), shard.label(n), out);
  if (evals) ++*evals;
  st.g_accum += out / len;
  if (!st.epoch_zero) {
    sample_gradient(model, st.snapshot, shard.feature(n), shard.label(n), tmp);
    out = out - tmp + st.g_current;
    if (evals) ++*evals;
  }
  ++st.schedule.cursor;
}

Vector avrg_gradient(AvrgState& st, const LossModel& model,
                     const ShardView& shard, ConstVectorRef w, long* evals) {
  Vector out(w.size()), tmp(w.size());
  avrg_gradient_into(st, model, shard, w, out, tmp, evals);
  return out;
}

void epoch_rollover(AvrgState& st, ConstVectorRef w_end, std::uint64_t seed,
                    int node) {
  const int len = static_cast<int>(st.schedule.perm.size());
  if (st.schedule.cursor != len)
    throw invalid_state("epoch_rollover: epoch not fully consumed");
  st.g_current = st.g_accum;
  st.g_accum.setZero();
  st.snapshot = w_end;
  const long next = st.schedule.epoch + 1;
  RngStream rng = make_stream(seed, node, next, /*tag=*/0x7065726DULL);
  st.schedule = fresh_permutation(len, rng);
  st.schedule.epoch = next;
  st.epoch_zero = false;
}

SvrgState SvrgState::create(int dim, int shard_size) {
  SvrgState st;
  st.snapshot = Vector::Zero(dim);
  st.g_full = Vector::Zero(dim);
  st.schedule.perm.resize(shard_size);
  std::iota(st.schedule.perm.begin(), st.schedule.perm.end(), 0);
  st.schedule.cursor = shard_size;  // forces an epoch_begin before use
  return st;
}

void svrg_epoch_begin(SvrgState& st, const LossModel& model,
                      const ShardView& shard, ConstVectorRef w, long epoch,
                      std::uint64_t seed, int node, long* evals) {
  RngStream rng = make_stream(seed, node, epoch, /*tag=*/0x7065726DULL);
  st.schedule = fresh_permutation(shard.size(), rng);
  st.schedule.epoch = epoch;
  st.snapshot = w;
  st.g_full = local_full_gradient(model, st.snapshot, shard);
  if (evals) *evals += shard.size();
  st.started = true;
}

void svrg_gradient_into(SvrgState& st, const LossModel& model,
                        const ShardView& shard, ConstVectorRef w, Vector& out,
                        Vector& tmp, long* evals) {
  if (!st.started || st.schedule.cursor >= static_cast<int>(st.schedule.perm.size()))
    throw invalid_state("svrg_gradient: epoch not begun");
  const int n = st.schedule.perm[st.schedule.cursor];
  sample_gradient(model, w, shard.feature(n), shard.label(n), out);
  sample_gradient(model, st.snapshot, shard.feature(n), shard.label(n), tmp);
  out = out - tmp + st.g_full;
  if (evals) *evals += 2;
  ++st.schedule.cursor;
}

Vector svrg_gradient(SvrgState& st, const LossModel& model,
                     const ShardView& shard, ConstVectorRef w, long* evals) {
  Vector out(w.size()), tmp(w.size());
  svrg_gradient_into(st, model, shard, w, out, tmp, evals);
  return out;
}

BatchPartition BatchPartition::create(int shard_size, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (shard_size % batch_size != 0)
    throw std::invalid_argument("batch size must divide the shard size");
  return BatchPartition{batch_size, shard_size / batch_size};
}

namespace {

void batch_gradient(const LossModel& model, ConstVectorRef w,
                    const ShardView& shard, int batch, int batch_size,
                    Vector& out, Vector& scratch) {
  out.setZero();
  const int begin = batch * batch_size;
  for (int n = begin; n < begin + batch_size; ++n) {
    sample_gradient(model, w, shard.feature(n), shard.label(n), scratch);
    out += scratch;
  }
  out *= 1.0 / batch_size;
}

}  // namespace

Vector minibatch_avrg_gradient(AvrgState& st, const BatchPartition& bp,
                               const LossModel& model, const ShardView& shard,
                               ConstVectorRef w, long* evals) {
  if (static_cast<int>(st.schedule.perm.size()) != bp.batch_count)
    throw invalid_state("minibatch state: schedule length != batch count");
  if (st.schedule.cursor >= bp.batch_count)
    throw invalid_state("minibatch_avrg_gradient: epoch consumed but not rolled over");
  const int batch = st.schedule.perm[st.schedule.cursor];

  Vector g_w(w.size()), scratch(w.size());
  batch_gradient(model, w, shard, batch, bp.batch_size, g_w, scratch);
  if (evals) *evals += bp.batch_size;
  Vector est;
  if (st.epoch_zero) {
    est = g_w;
  } else {
    Vector g_snap(w.size());
    batch_gradient(model, st.snapshot, shard, batch, bp.batch_size, g_snap,
                   scratch);
    if (evals) *evals += bp.batch_size;
    est = g_w - g_snap + st.g_current;
  }
  st.g_accum += g_w / bp.batch_count;
  ++st.schedule.cursor;
  return est;
}

}  // namespace davrg
