#include "davrg/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "davrg/errors.hpp"
#include "davrg/rng.hpp"

namespace davrg {

namespace {
constexpr std::uint64_t kSampleTag = 0x73616D70ULL;  // baseline's uniform draw
}

Variant variant_from_string(const std::string& s) {
  if (s == "exact-diffusion") return Variant::exact_diffusion;
  if (s == "stochastic-diffusion") return Variant::stochastic_diffusion;
  if (s == "diffusion-avrg") return Variant::diffusion_avrg;
  if (s == "diffusion-avrg-unbalanced") return Variant::diffusion_avrg_unbalanced;
  if (s == "diffusion-svrg") return Variant::diffusion_svrg;
  if (s == "diffusion-avrg-minibatch") return Variant::diffusion_avrg_minibatch;
  if (s == "prox-exact-diffusion") return Variant::prox_exact_diffusion;
  if (s == "prox-diffusion-avrg") return Variant::prox_diffusion_avrg;
  throw std::invalid_argument("unknown variant: " + s);
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::exact_diffusion: return "exact-diffusion";
    case Variant::stochastic_diffusion: return "stochastic-diffusion";
    case Variant::diffusion_avrg: return "diffusion-avrg";
    case Variant::diffusion_avrg_unbalanced: return "diffusion-avrg-unbalanced";
    case Variant::diffusion_svrg: return "diffusion-svrg";
    case Variant::diffusion_avrg_minibatch: return "diffusion-avrg-minibatch";
    case Variant::prox_exact_diffusion: return "prox-exact-diffusion";
    case Variant::prox_diffusion_avrg: return "prox-diffusion-avrg";
  }
  return "?";
}

bool variant_is_prox(Variant v) {
  return v == Variant::prox_exact_diffusion || v == Variant::prox_diffusion_avrg;
}

bool variant_is_stochastic(Variant v) {
  return v != Variant::exact_diffusion && v != Variant::prox_exact_diffusion;
}

bool variant_needs_balanced(Variant v) {
  switch (v) {
    case Variant::diffusion_avrg:
    case Variant::diffusion_avrg_minibatch:
    case Variant::prox_diffusion_avrg:
      return true;
    default:
      return false;
  }
}

AlgorithmSpec AlgorithmSpec::make(Variant v, double step_size) {
  AlgorithmSpec s;
  s.variant = v;
  s.step_size = step_size;
  switch (v) {
    case Variant::exact_diffusion:
    case Variant::stochastic_diffusion:
    case Variant::diffusion_avrg_unbalanced:
    case Variant::diffusion_svrg:
      s.use_weights = true;
      break;
    default:
      s.use_weights = false;  // balanced listings drop the equal q_k
      break;
  }
  return s;
}

long NetworkState::total_grad_evals() const {
  return std::accumulate(grad_evals.begin(), grad_evals.end(), 0L);
}

long NetworkState::total_comm_rounds() const {
  return std::accumulate(comm_rounds.begin(), comm_rounds.end(), 0L);
}

Vector NetworkState::mean_iterate() const {
  Vector m = Vector::Zero(dimension);
  for (const auto& nd : nodes) m += nd.w;
  return m / node_count();
}

double NetworkState::consensus_spread() const {
  Vector m = mean_iterate();
  double worst = 0.0;
  for (const auto& nd : nodes) worst = std::max(worst, (nd.w - m).norm());
  return worst;
}

NetworkState make_network(const CombinationMatrix& comb,
                          const AlgorithmSpec& spec, const LossModel& model,
                          const PartitionedDataset& part, std::uint64_t seed,
                          const std::vector<Vector>& w0_per_node) {
  if (static_cast<int>(w0_per_node.size()) != comb.size())
    throw std::invalid_argument("need one starting point per node");
  NetworkState net =
      make_network(comb, spec, model, part, seed, w0_per_node[0]);
  for (int k = 0; k < net.node_count(); ++k) {
    NodeState& nd = net.nodes[k];
    if (w0_per_node[k].size() != net.dimension)
      throw std::invalid_argument("starting point dimension mismatch");
    nd.w = w0_per_node[k];
    nd.psi = nd.w;
    if (nd.z.size() > 0) nd.z = nd.w;
    if (nd.avrg) nd.avrg->snapshot = nd.w;  // unused until epoch 1
  }
  return net;
}

NetworkState make_network(const CombinationMatrix& comb,
                          const AlgorithmSpec& spec, const LossModel& model,
                          const PartitionedDataset& part, std::uint64_t seed,
                          const Vector& w0) {
  (void)model;
  const int k_nodes = comb.size();
  if (part.node_count() != k_nodes)
    throw std::invalid_argument("partition/topology node count mismatch");
  if (spec.step_size <= 0.0)
    throw std::invalid_argument("step size must be > 0");
  if (variant_needs_balanced(spec.variant) && !part.balanced())
    throw std::invalid_argument(
        to_string(spec.variant) +
        " requires balanced shards; use diffusion-avrg-unbalanced");
  if (variant_is_prox(spec.variant) &&
      spec.regularizer.kind == Regularizer::Kind::none &&
      spec.regularizer.eta != 0.0)
    throw std::invalid_argument("prox variant with inconsistent regularizer");

  Vector start = (w0.size() > 0) ? w0 : Vector::Zero(model.dimension);
  if (start.size() == 0)
    throw std::invalid_argument("make_network needs a model dimension");

  NetworkState net;
  net.comb = comb;
  net.a_bar = half_lifted(comb).a;
  net.dimension = static_cast<int>(start.size());
  net.seed = seed;
  net.nodes.resize(k_nodes);
  net.node_epoch.assign(k_nodes, 0);
  net.grad_evals.assign(k_nodes, 0);
  net.comm_rounds.assign(k_nodes, 0);
  net.phi_scratch.assign(k_nodes, Vector::Zero(net.dimension));
  net.psi_scratch.assign(k_nodes, Vector::Zero(net.dimension));

  net.neighbors.assign(k_nodes, {});
  for (int k = 0; k < k_nodes; ++k) {
    for (int l = 0; l < k_nodes; ++l)
      if (net.a_bar(l, k) != 0.0) net.neighbors[k].push_back(l);
  }

  const bool prox = variant_is_prox(spec.variant);
  for (int k = 0; k < k_nodes; ++k) {
    NodeState& nd = net.nodes[k];
    nd.w = start;
    nd.psi = start;
    if (prox) nd.z = start;
    switch (spec.variant) {
      case Variant::diffusion_avrg:
      case Variant::diffusion_avrg_unbalanced:
      case Variant::prox_diffusion_avrg:
        nd.avrg = AvrgState::create(net.dimension, part.sizes[k], seed, k, start);
        break;
      case Variant::diffusion_avrg_minibatch: {
        auto bp = BatchPartition::create(part.sizes[k], spec.batch_size);
        nd.avrg = AvrgState::create(net.dimension, bp.batch_count, seed, k, start);
        break;
      }
      case Variant::diffusion_svrg:
        nd.svrg = SvrgState::create(net.dimension, part.sizes[k]);
        break;
      default:
        break;
    }
  }
  return net;
}

namespace {

// Per-variant gradient estimate for node k at its current iterate. Handles
// the node-local epoch bookkeeping (rollover / SVRG full-gradient pause).
Vector gradient_estimate(NetworkState& net, const AlgorithmSpec& spec,
                         const LossModel& model, const PartitionedDataset& part,
                         int k, long* evals) {
  NodeState& nd = net.nodes[k];
  ShardView shard = part.shard(k);
  switch (spec.variant) {
    case Variant::exact_diffusion:
    case Variant::prox_exact_diffusion: {
      if (evals) *evals += shard.size();
      return local_full_gradient(model, nd.w, shard);
    }
    case Variant::stochastic_diffusion: {
      RngStream rng = make_stream(net.seed, k, net.iteration, kSampleTag);
      int n = static_cast<int>(rng.next_below(shard.size()));
      if (evals) ++*evals;
      return sample_gradient(model, nd.w, shard.feature(n), shard.label(n));
    }
    case Variant::diffusion_avrg:
    case Variant::diffusion_avrg_unbalanced:
    case Variant::prox_diffusion_avrg: {
      AvrgState& st = *nd.avrg;
      if (st.schedule.cursor == static_cast<int>(st.schedule.perm.size())) {
        epoch_rollover(st, nd.w, net.seed, k);
        net.node_epoch[k] = st.schedule.epoch;
      }
      return avrg_gradient(st, model, shard, nd.w, evals);
    }
    case Variant::diffusion_avrg_minibatch: {
      AvrgState& st = *nd.avrg;
      auto bp = BatchPartition::create(shard.size(), spec.batch_size);
      if (st.schedule.cursor == bp.batch_count) {
        epoch_rollover(st, nd.w, net.seed, k);
        net.node_epoch[k] = st.schedule.epoch;
      }
      return minibatch_avrg_gradient(st, bp, model, shard, nd.w, evals);
    }
    case Variant::diffusion_svrg: {
      SvrgState& st = *nd.svrg;
      if (!st.started ||
          st.schedule.cursor == static_cast<int>(st.schedule.perm.size())) {
        long epoch = st.started ? st.schedule.epoch + 1 : 0;
        svrg_epoch_begin(st, model, shard, nd.w, epoch, net.seed, k, evals);
        net.node_epoch[k] = epoch;
      }
      return svrg_gradient(st, model, shard, nd.w, evals);
    }
  }
  throw std::logic_error("unreachable");
}

void check_finite(const NetworkState& net) {
  for (const auto& nd : net.nodes)
    if (!nd.w.allFinite())
      throw divergence_error(
          net.iteration, "non-finite iterate at iteration " +
                             std::to_string(net.iteration) +
                             " (step size too large?)");
}

}  // namespace

void step(NetworkState& net, const AlgorithmSpec& spec, const LossModel& model,
          const PartitionedDataset& part, bool parallel,
          std::vector<long>* iter_charges) {
  const int k_nodes = net.node_count();
  const bool prox = variant_is_prox(spec.variant);
  const bool correction = spec.variant != Variant::stochastic_diffusion;
  const double threshold = spec.step_size * spec.regularizer.eta;
  if (iter_charges) iter_charges->assign(k_nodes, 0);

  // phase 1: adaptation + correction, node-local reads only
#pragma omp parallel for schedule(static) if (parallel)
  for (int k = 0; k < k_nodes; ++k) {
    NodeState& nd = net.nodes[k];
    long evals = 0;
    Vector ghat = gradient_estimate(net, spec, model, part, k, &evals);
    net.grad_evals[k] += evals;
    if (iter_charges) (*iter_charges)[k] = evals;

    const double step_k =
        spec.use_weights ? spec.step_size * part.weights[k] : spec.step_size;
    net.psi_scratch[k] = nd.w - step_k * ghat;
    if (correction) {
      const Vector& base = prox ? nd.z : nd.w;
      net.phi_scratch[k] = net.psi_scratch[k] + base - nd.psi;
    } else {
      net.phi_scratch[k] = net.psi_scratch[k];  // adapt-then-combine baseline
    }
    nd.psi = net.psi_scratch[k];
  }

  // phase 2: combination; each node sums its neighbors in fixed order
#pragma omp parallel for schedule(static) if (parallel)
  for (int k = 0; k < k_nodes; ++k) {
    NodeState& nd = net.nodes[k];
    Vector comb = Vector::Zero(net.dimension);
    for (int l : net.neighbors[k]) comb += net.a_bar(l, k) * net.phi_scratch[l];
    if (prox) {
      nd.z = comb;
      nd.w = prox_l1(comb, threshold);
    } else {
      nd.w = comb;
    }
    net.comm_rounds[k] += 1;
  }

  ++net.iteration;
  check_finite(net);
}

namespace {
void require_variant(const AlgorithmSpec& spec, Variant v) {
  if (spec.variant != v)
    throw std::invalid_argument("spec variant is " + to_string(spec.variant) +
                                ", expected " + to_string(v));
}
}  // namespace

void step_exact_diffusion(NetworkState& net, const AlgorithmSpec& spec,
                          const LossModel& model,
                          const PartitionedDataset& part) {
  require_variant(spec, Variant::exact_diffusion);
  step(net, spec, model, part);
}

void step_stochastic_diffusion(NetworkState& net, const AlgorithmSpec& spec,
                               const LossModel& model,
                               const PartitionedDataset& part) {
  require_variant(spec, Variant::stochastic_diffusion);
  step(net, spec, model, part);
}

void step_diffusion_avrg(NetworkState& net, const AlgorithmSpec& spec,
                         const LossModel& model,
                         const PartitionedDataset& part) {
  require_variant(spec, Variant::diffusion_avrg);
  if (!part.balanced())
    throw std::invalid_argument(
        "diffusion-avrg requires balanced shards; use "
        "diffusion-avrg-unbalanced");
  step(net, spec, model, part);
}

void step_diffusion_avrg_unbalanced(NetworkState& net,
                                    const AlgorithmSpec& spec,
                                    const LossModel& model,
                                    const PartitionedDataset& part) {
  require_variant(spec, Variant::diffusion_avrg_unbalanced);
  step(net, spec, model, part);
}

void step_diffusion_svrg(NetworkState& net, const AlgorithmSpec& spec,
                         const LossModel& model,
                         const PartitionedDataset& part) {
  require_variant(spec, Variant::diffusion_svrg);
  step(net, spec, model, part);
}

void step_prox_diffusion(NetworkState& net, const AlgorithmSpec& spec,
                         const LossModel& model,
                         const PartitionedDataset& part) {
  if (!variant_is_prox(spec.variant))
    throw std::invalid_argument("spec variant is not a prox variant");
  step(net, spec, model, part);
}

long epoch_length(Variant v, const PartitionedDataset& part, int batch_size) {
  switch (v) {
    case Variant::exact_diffusion:
    case Variant::prox_exact_diffusion:
      return 1;  // one full-gradient pass per iteration
    case Variant::diffusion_avrg_minibatch:
      return part.sizes[0] / batch_size;
    case Variant::diffusion_avrg:
    case Variant::prox_diffusion_avrg:
    case Variant::stochastic_diffusion:
      return part.sizes[0];
    case Variant::diffusion_avrg_unbalanced:
    case Variant::diffusion_svrg:
      return part.max_shard_size();  // epochs are node-local; row per block
  }
  return 1;
}

namespace {

nlohmann::json vec_json(const Vector& v) {
  return std::vector<double>(v.begin(), v.end());
}

Vector vec_from(const nlohmann::json& j) {
  auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(vals.data(), static_cast<long>(vals.size()));
}

}  // namespace

std::string save_checkpoint(const NetworkState& net) {
  nlohmann::json j;
  j["iteration"] = net.iteration;
  j["seed"] = net.seed;
  j["dimension"] = net.dimension;
  j["node_epoch"] = net.node_epoch;
  j["grad_evals"] = net.grad_evals;
  j["comm_rounds"] = net.comm_rounds;
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& nd : net.nodes) {
    nlohmann::json n;
    n["w"] = vec_json(nd.w);
    n["psi"] = vec_json(nd.psi);
    if (nd.z.size() > 0) n["z"] = vec_json(nd.z);
    if (nd.avrg) {
      const auto& a = *nd.avrg;
      n["avrg"] = {{"snapshot", vec_json(a.snapshot)},
                   {"g_current", vec_json(a.g_current)},
                   {"g_accum", vec_json(a.g_accum)},
                   {"perm", a.schedule.perm},
                   {"cursor", a.schedule.cursor},
                   {"epoch", a.schedule.epoch},
                   {"epoch_zero", a.epoch_zero}};
    }
    if (nd.svrg) {
      const auto& s = *nd.svrg;
      n["svrg"] = {{"snapshot", vec_json(s.snapshot)},
                   {"g_full", vec_json(s.g_full)},
                   {"perm", s.schedule.perm},
                   {"cursor", s.schedule.cursor},
                   {"epoch", s.schedule.epoch},
                   {"started", s.started}};
    }
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  return j.dump();
}

NetworkState load_checkpoint(const std::string& json_text,
                             const CombinationMatrix& comb) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  NetworkState net;
  net.comb = comb;
  net.a_bar = half_lifted(comb).a;
  net.iteration = j.at("iteration").get<long>();
  net.seed = j.at("seed").get<std::uint64_t>();
  net.dimension = j.at("dimension").get<int>();
  net.node_epoch = j.at("node_epoch").get<std::vector<long>>();
  net.grad_evals = j.at("grad_evals").get<std::vector<long>>();
  net.comm_rounds = j.at("comm_rounds").get<std::vector<long>>();

  const auto& nodes = j.at("nodes");
  const int k_nodes = static_cast<int>(nodes.size());
  if (k_nodes != comb.size())
    throw std::invalid_argument("checkpoint/topology node count mismatch");
  net.nodes.resize(k_nodes);
  net.phi_scratch.assign(k_nodes, Vector::Zero(net.dimension));
  net.psi_scratch.assign(k_nodes, Vector::Zero(net.dimension));
  net.neighbors.assign(k_nodes, {});
  for (int k = 0; k < k_nodes; ++k)
    for (int l = 0; l < k_nodes; ++l)
      if (net.a_bar(l, k) != 0.0) net.neighbors[k].push_back(l);

  for (int k = 0; k < k_nodes; ++k) {
    const auto& n = nodes[k];
    NodeState& nd = net.nodes[k];
    nd.w = vec_from(n.at("w"));
    nd.psi = vec_from(n.at("psi"));
    if (n.contains("z")) nd.z = vec_from(n.at("z"));
    if (n.contains("avrg")) {
      const auto& a = n.at("avrg");
      AvrgState st;
      st.snapshot = vec_from(a.at("snapshot"));
      st.g_current = vec_from(a.at("g_current"));
      st.g_accum = vec_from(a.at("g_accum"));
      st.schedule.perm = a.at("perm").get<std::vector<int>>();
      st.schedule.cursor = a.at("cursor").get<int>();
      st.schedule.epoch = a.at("epoch").get<long>();
      st.epoch_zero = a.at("epoch_zero").get<bool>();
      nd.avrg = std::move(st);
    }
    if (n.contains("svrg")) {
      const auto& s = n.at("svrg");
      SvrgState st;
      st.snapshot = vec_from(s.at("snapshot"));
      st.g_full = vec_from(s.at("g_full"));
      st.schedule.perm = s.at("perm").get<std::vector<int>>();
      st.schedule.cursor = s.at("cursor").get<int>();
      st.schedule.epoch = s.at("epoch").get<long>();
      st.started = s.at("started").get<bool>();
      nd.svrg = std::move(st);
    }
  }
  return net;
}

}  // namespace davrg
