#include "davrg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "davrg/errors.hpp"

namespace davrg {

// ---- global objective -----------------------------------------------------

Vector global_gradient(const LossModel& model, const Dataset& d,
                       ConstVectorRef w) {
  const int n = d.size();
  const double rho = model.l2_coefficient;
  Eigen::VectorXd t = d.features * w;
  Eigen::VectorXd c(n);
  switch (model.kind) {
    case LossKind::least_squares:
      c = t - d.labels;
      break;
    case LossKind::logistic_l2:
      for (int i = 0; i < n; ++i) {
        double z = d.labels(i) * t(i);
        double s = (z >= 0.0) ? std::exp(-z) / (1.0 + std::exp(-z))
                              : 1.0 / (1.0 + std::exp(z));
        c(i) = -d.labels(i) * s;
      }
      break;
  }
  Vector g = (d.features.transpose() * c) / n;
  if (rho != 0.0) g += rho * w;
  return g;
}

double global_loss(const LossModel& model, const Dataset& d, ConstVectorRef w) {
  const int n = d.size();
  const double rho = model.l2_coefficient;
  Eigen::VectorXd t = d.features * w;
  double acc = 0.0;
  switch (model.kind) {
    case LossKind::least_squares:
      acc = 0.5 * (t - d.labels).squaredNorm();
      break;
    case LossKind::logistic_l2:
      for (int i = 0; i < n; ++i) {
        double z = d.labels(i) * t(i);
        acc += (z >= 0.0) ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
      }
      break;
  }
  return acc / n + 0.5 * rho * w.squaredNorm();
}

double subgradient_residual(const LossModel& model, const Dataset& d,
                            const Regularizer& reg, ConstVectorRef w) {
  Vector g = global_gradient(model, d, w);
  if (reg.kind == Regularizer::Kind::none || reg.eta == 0.0) return g.norm();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    double r;
    if (w(j) != 0.0)
      r = g(j) + reg.eta * (w(j) > 0.0 ? 1.0 : -1.0);
    else
      r = std::max(std::abs(g(j)) - reg.eta, 0.0);
    acc += r * r;
  }
  return std::sqrt(acc);
}

// ---- reference solvers ------------------------------------------------------

namespace {

double hessian_bound(const LossModel& model, const Dataset& d) {
  Eigen::MatrixXd cov = (d.features.transpose() * d.features) / d.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  double lmax = es.eigenvalues().maxCoeff();
  if (model.kind == LossKind::logistic_l2) lmax *= 0.25;
  return lmax + model.l2_coefficient;
}

ReferenceSolution solve_normal_equations(const LossModel& model,
                                         const Dataset& d, double tol) {
  const int m = d.dimension();
  Eigen::MatrixXd lhs = (d.features.transpose() * d.features) / d.size();
  lhs.diagonal().array() += model.l2_coefficient;
  Vector rhs = (d.features.transpose() * d.labels) / d.size();
  ReferenceSolution ref;
  ref.method = "normal-equations";
  ref.w_star = lhs.ldlt().solve(rhs);
  ref.residual_norm = global_gradient(model, d, ref.w_star).norm();
  if (!(ref.residual_norm <= tol) || !ref.w_star.allFinite())
    throw convergence_failure(ref.residual_norm,
                              "normal equations: residual above tolerance "
                              "(rank-deficient problem?)");
  (void)m;
  return ref;
}

ReferenceSolution solve_newton(const LossModel& model, const Dataset& d,
                               double tol) {
  const int n = d.size();
  const int m = d.dimension();
  Vector w = Vector::Zero(m);
  double loss = global_loss(model, d, w);
  for (int it = 0; it < 200; ++it) {
    Vector g = global_gradient(model, d, w);
    double res = g.norm();
    if (res <= tol) {
      return ReferenceSolution{w, res, "newton"};
    }
    Eigen::VectorXd t = d.features * w;
    Eigen::VectorXd diag(n);
    for (int i = 0; i < n; ++i) {
      double z = d.labels(i) * t(i);
      double s = (z >= 0.0) ? std::exp(-z) / (1.0 + std::exp(-z))
                            : 1.0 / (1.0 + std::exp(z));
      diag(i) = s * (1.0 - s);
    }
    Eigen::MatrixXd hess =
        (d.features.transpose() * diag.asDiagonal() * d.features) / n;
    hess.diagonal().array() += model.l2_coefficient;
    Vector dir = hess.ldlt().solve(-g);
    double step = 1.0;
    double gd = g.dot(dir);
    for (int bt = 0; bt < 60; ++bt) {
      double cand = global_loss(model, d, w + step * dir);
      if (cand <= loss + 1e-4 * step * gd) break;
      step *= 0.5;
    }
    w += step * dir;
    loss = global_loss(model, d, w);
  }
  double res = global_gradient(model, d, w).norm();
  throw convergence_failure(res, "newton: iteration cap reached");
}

ReferenceSolution solve_fista(const LossModel& model, const Dataset& d,
                              const Regularizer& reg, double tol) {
  const int m = d.dimension();
  const double lips = hessian_bound(model, d);
  const double step = 1.0 / lips;
  Vector w = Vector::Zero(m);
  Vector y = w;
  double theta = 1.0;
  double res = subgradient_residual(model, d, reg, w);
  const long cap = 2000000;
  for (long it = 0; it < cap; ++it) {
    if (res <= tol) return ReferenceSolution{w, res, "fista"};
    Vector w_next = prox_l1(y - step * global_gradient(model, d, y),
                            step * reg.eta);
    double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    Vector y_next = w_next + ((theta - 1.0) / theta_next) * (w_next - w);
    if ((y - w_next).dot(w_next - w) > 0.0) {  // adaptive restart
      theta_next = 1.0;
      y_next = w_next;
    }
    w = w_next;
    y = y_next;
    theta = theta_next;
    if (it % 16 == 0) res = subgradient_residual(model, d, reg, w);
  }
  res = subgradient_residual(model, d, reg, w);
  throw convergence_failure(res, "fista: iteration cap reached");
}

}  // namespace

ReferenceSolution reference_solution(const LossModel& model, const Dataset& d,
                                     const Regularizer& reg) {
  const Vector zero = Vector::Zero(d.dimension());
  const double tol =
      1e-12 * std::max(1.0, global_gradient(model, d, zero).norm());
  const bool has_l1 = reg.kind == Regularizer::Kind::l1 && reg.eta > 0.0;
  if (!has_l1) {
    if (model.kind == LossKind::least_squares)
      return solve_normal_equations(model, d, tol);
    return solve_newton(model, d, tol);
  }
  return solve_fista(model, d, reg, tol);
}

double relative_error(const NetworkState& net, const ReferenceSolution& ref) {
  const double denom = ref.w_star.squaredNorm();
  if (denom == 0.0)
    throw std::invalid_argument(
        "relative_error: ||w*|| is zero, use an absolute metric");
  double acc = 0.0;
  for (const auto& nd : net.nodes) acc += (nd.w - ref.w_star).squaredNorm();
  return acc / net.node_count() / denom;
}

// ---- run driver -------------------------------------------------------------

double running_time(long n_g, long n_c, const CostModel& cost) {
  return cost.t_comp * static_cast<double>(n_g) +
         cost.t_comm * static_cast<double>(n_c);
}

void run_into(RunTrace& trace, NetworkState& net, const AlgorithmSpec& spec,
              const LossModel& model, const PartitionedDataset& part,
              const RunOptions& opt, const ReferenceSolution* ref,
              const CostModel& cost) {
  trace.iterations_per_row = epoch_length(spec.variant, part, spec.batch_size);
  trace.has_reference = (ref != nullptr);

  auto record = [&] {
    trace.row_iteration.push_back(net.iteration);
    trace.n_g.push_back(net.total_grad_evals());
    trace.n_c.push_back(net.total_comm_rounds());
    trace.time_model.push_back(
        running_time(trace.n_g.back(), trace.n_c.back(), cost));
    trace.rel_error.push_back(
        ref ? relative_error(net, *ref)
            : std::numeric_limits<double>::quiet_NaN());
  };
  record();  // initial point

  std::vector<long> charges;
  for (long e = 1; e <= opt.max_epochs; ++e) {
    for (long i = 0; i < trace.iterations_per_row; ++i) {
      step(net, spec, model, part, opt.parallel,
           opt.probe_charges ? &charges : nullptr);
      if (opt.probe_charges) trace.iter_charges.push_back(charges);
    }
    record();
    if (ref && opt.target_error > 0.0 &&
        trace.rel_error.back() <= opt.target_error)
      break;
  }

  if (ref) {
    try {
      RateFit fit = fit_linear_rate(trace.rel_error);
      trace.rate = fit.rate;
      trace.r_squared = fit.r_squared;
    } catch (const insufficient_data&) {
    }
  }
}

RunTrace run(NetworkState& net, const AlgorithmSpec& spec,
             const LossModel& model, const PartitionedDataset& part,
             const RunOptions& opt, const ReferenceSolution* ref,
             const CostModel& cost) {
  RunTrace trace;
  run_into(trace, net, spec, model, part, opt, ref, cost);
  return trace;
}

// ---- cost accounting ---------------------------------------------------------

long expected_iteration_charge(Variant v, long epoch, int inner,
                               int shard_size, int batch_size) {
  switch (v) {
    case Variant::exact_diffusion:
    case Variant::prox_exact_diffusion:
      return shard_size;
    case Variant::stochastic_diffusion:
      return 1;
    case Variant::diffusion_avrg:
    case Variant::diffusion_avrg_unbalanced:
    case Variant::prox_diffusion_avrg:
      return epoch == 0 ? 1 : 2;  // epoch-0 snapshot gradients are zero
    case Variant::diffusion_avrg_minibatch:
      return epoch == 0 ? batch_size : 2 * batch_size;
    case Variant::diffusion_svrg:
      return 2 + (inner == 0 ? shard_size : 0);
  }
  return 0;
}

std::vector<std::vector<long>> charge_costs(Variant v,
                                            const PartitionedDataset& part,
                                            int batch_size, long iterations) {
  const int k_nodes = part.node_count();
  std::vector<std::vector<long>> out(iterations, std::vector<long>(k_nodes));
  for (long i = 0; i < iterations; ++i) {
    for (int k = 0; k < k_nodes; ++k) {
      int len = part.sizes[k];
      if (v == Variant::diffusion_avrg_minibatch) len /= batch_size;
      auto [t, s] = unbalanced_index(i, len);
      out[i][k] = expected_iteration_charge(v, t, s, part.sizes[k], batch_size);
    }
  }
  return out;
}

IdleProfile idle_profile(const RunTrace& trace, const PartitionedDataset& part,
                         Variant v, int batch_size) {
  if (trace.iter_charges.empty())
    throw invalid_state("idle_profile: per-iteration probe was not enabled");
  const int k_nodes = part.node_count();
  IdleProfile prof;
  prof.variance.resize(k_nodes);
  prof.charges.resize(k_nodes);
  for (int k = 0; k < k_nodes; ++k) {
    long warmup = part.sizes[k];  // the node's first local epoch
    if (v == Variant::diffusion_avrg_minibatch) warmup /= batch_size;
    for (long i = warmup; i < static_cast<long>(trace.iter_charges.size()); ++i)
      prof.charges[k].push_back(trace.iter_charges[i][k]);
    const auto& seq = prof.charges[k];
    if (seq.empty()) {
      prof.variance[k] = 0.0;
      continue;
    }
    double mean = 0.0;
    for (long c : seq) mean += static_cast<double>(c);
    mean /= static_cast<double>(seq.size());
    double var = 0.0;
    for (long c : seq) {
      double dev = static_cast<double>(c) - mean;
      var += dev * dev;
    }
    prof.variance[k] = var / static_cast<double>(seq.size());
  }
  return prof;
}

// ---- configuration ------------------------------------------------------------

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("config error at " + section + "." +
                                  it.key() + ": unknown key");
  }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config error: ") + e.what());
  }
  check_keys(j, "<root>", {"seed", "data", "topology", "algorithm", "costs",
                           "output"});
  ExperimentConfig cfg;
  try {
    read_if(j, "seed", cfg.seed);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      check_keys(d, "data",
                 {"kind", "n", "m", "condition", "noise_std", "path",
                  "normalize", "partition", "sizes"});
      read_if(d, "kind", cfg.data_kind);
      read_if(d, "n", cfg.n);
      read_if(d, "m", cfg.m);
      read_if(d, "condition", cfg.condition);
      read_if(d, "noise_std", cfg.noise_std);
      read_if(d, "path", cfg.data_path);
      read_if(d, "normalize", cfg.normalize);
      read_if(d, "partition", cfg.partition_mode);
      read_if(d, "sizes", cfg.partition_sizes);
    }
    if (j.contains("topology")) {
      const auto& t = j.at("topology");
      check_keys(t, "topology", {"kind", "nodes", "p", "edges_path"});
      read_if(t, "kind", cfg.topology);
      read_if(t, "nodes", cfg.nodes);
      read_if(t, "p", cfg.edge_probability);
      read_if(t, "edges_path", cfg.edges_path);
    }
    if (j.contains("algorithm")) {
      const auto& a = j.at("algorithm");
      check_keys(a, "algorithm",
                 {"variant", "step_size", "epochs", "batch_size", "loss",
                  "rho", "eta", "use_weights", "target_error", "parallel",
                  "mu_grid", "batch_grid"});
      read_if(a, "variant", cfg.variant);
      read_if(a, "step_size", cfg.step_size);
      read_if(a, "epochs", cfg.epochs);
      read_if(a, "batch_size", cfg.batch_size);
      read_if(a, "loss", cfg.loss);
      read_if(a, "rho", cfg.rho);
      read_if(a, "eta", cfg.eta);
      if (a.contains("use_weights"))
        cfg.use_weights = a.at("use_weights").get<bool>();
      read_if(a, "target_error", cfg.target_error);
      read_if(a, "parallel", cfg.parallel);
      read_if(a, "mu_grid", cfg.mu_grid);
      read_if(a, "batch_grid", cfg.batch_grid);
    }
    if (j.contains("costs")) {
      const auto& c = j.at("costs");
      check_keys(c, "costs", {"t_comp", "t_comm"});
      read_if(c, "t_comp", cfg.costs.t_comp);
      read_if(c, "t_comm", cfg.costs.t_comm);
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      check_keys(o, "output", {"trace_csv", "svg", "summary_csv", "checkpoint"});
      read_if(o, "trace_csv", cfg.trace_csv);
      read_if(o, "svg", cfg.svg);
      read_if(o, "summary_csv", cfg.summary_csv);
      read_if(o, "checkpoint", cfg.checkpoint);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config error: ") + e.what());
  }
  return cfg;
}

Experiment build_experiment(const ExperimentConfig& cfg) {
  Experiment ex;
  ex.cfg = cfg;

  if (cfg.data_kind == "synthetic-least-squares") {
    ex.dataset = std::make_unique<Dataset>(generate_least_squares(
        cfg.n, cfg.m, cfg.condition, cfg.noise_std, cfg.seed));
  } else if (cfg.data_kind == "libsvm") {
    ex.dataset = std::make_unique<Dataset>(load_libsvm(cfg.data_path));
  } else {
    throw std::invalid_argument("config error at data.kind: " + cfg.data_kind);
  }
  if (cfg.normalize) *ex.dataset = normalize_unit(*ex.dataset);

  PartitionMode mode;
  if (cfg.partition_mode == "balanced")
    mode = PartitionMode::balanced;
  else if (cfg.partition_mode == "unbalanced")
    mode = PartitionMode::unbalanced;
  else if (cfg.partition_mode == "explicit")
    mode = PartitionMode::explicit_sizes;
  else
    throw std::invalid_argument("config error at data.partition: " +
                                cfg.partition_mode);
  ex.part =
      partition(*ex.dataset, cfg.nodes, mode, cfg.seed, cfg.partition_sizes);

  TopologyKind kind = topology_kind_from_string(cfg.topology);
  if (kind == TopologyKind::explicit_edges) {
    std::ifstream in(cfg.edges_path);
    if (!in)
      throw std::invalid_argument("config error at topology.edges_path: "
                                  "cannot open " +
                                  cfg.edges_path);
    ex.graph = read_edge_list(in);
    if (ex.graph.node_count != cfg.nodes)
      throw std::invalid_argument(
          "config error at topology.nodes: edge list disagrees");
  } else {
    ex.graph = build_topology(kind, cfg.nodes, cfg.seed, cfg.edge_probability);
  }
  ex.comb = metropolis_weights(ex.graph);

  ex.model.kind = loss_kind_from_string(cfg.loss);
  ex.model.l2_coefficient = cfg.rho;
  ex.model.dimension = ex.dataset->dimension();

  ex.regularizer.kind =
      cfg.eta > 0.0 ? Regularizer::Kind::l1 : Regularizer::Kind::none;
  ex.regularizer.eta = cfg.eta;

  ex.spec = AlgorithmSpec::make(variant_from_string(cfg.variant), cfg.step_size);
  ex.spec.regularizer = ex.regularizer;
  ex.spec.batch_size = cfg.batch_size;
  if (cfg.use_weights) ex.spec.use_weights = *cfg.use_weights;
  return ex;
}

// ---- sweeps ----------------------------------------------------------------

std::vector<double> log_grid(double lo, double hi, int points_per_decade) {
  if (!(lo > 0.0) || !(hi > lo) || points_per_decade < 1)
    throw std::invalid_argument("log_grid: need 0 < lo < hi and points >= 1");
  std::vector<double> out;
  const double step = 1.0 / points_per_decade;
  for (double e = std::log10(lo); e <= std::log10(hi) + 1e-12; e += step)
    out.push_back(std::pow(10.0, e));
  return out;
}

std::vector<SweepOutcome> run_sweep(const Experiment& ex,
                                    const std::vector<SweepEntry>& entries,
                                    const RunOptions& opt,
                                    const ReferenceSolution* ref,
                                    const CostModel& cost,
                                    bool parallel_entries) {
  std::vector<SweepOutcome> out(entries.size());
#pragma omp parallel for schedule(dynamic) if (parallel_entries)
  for (long idx = 0; idx < static_cast<long>(entries.size()); ++idx) {
    const SweepEntry& entry = entries[idx];
    SweepOutcome& res = out[idx];
    res.entry = entry;
    AlgorithmSpec spec = ex.spec;
    spec.step_size = entry.mu;
    spec.batch_size = entry.batch_size;
    RunTrace trace;
    try {
      NetworkState net =
          make_network(ex.comb, spec, ex.model, ex.part, ex.cfg.seed);
      run_into(trace, net, spec, ex.model, ex.part, opt, ref, cost);
    } catch (const divergence_error&) {
      res.diverged = true;
    }
    res.epochs_run = trace.rows() > 0 ? trace.rows() - 1 : 0;
    if (trace.rows() > 0) res.final_error = trace.rel_error.back();
    res.rate = trace.rate;
    res.r_squared = trace.r_squared;
    if (trace.rows() > 0) {
      long hit = -1;
      if (ref && opt.target_error > 0.0) {
        for (long r = 0; r < trace.rows(); ++r)
          if (trace.rel_error[r] <= opt.target_error) {
            hit = r;
            break;
          }
      }
      res.epochs_to_target = hit;
      long at = (hit >= 0) ? hit : trace.rows() - 1;
      res.n_g = trace.n_g[at];
      res.n_c = trace.n_c[at];
      res.time_model = trace.time_model[at];
    }
  }
  return out;
}

// ---- emission --------------------------------------------------------------

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << "# one row per " << trace.iterations_per_row
     << " iteration(s); n_g and n_c are cumulative network totals\n";
  os << "epoch,rel_error,n_g,n_c,time_model,rate_fit\n";
  os << std::setprecision(17);
  for (long r = 0; r < trace.rows(); ++r) {
    os << r << ',' << trace.rel_error[r] << ',' << trace.n_g[r] << ','
       << trace.n_c[r] << ',' << trace.time_model[r] << ',';
    if (r == trace.rows() - 1 && std::isfinite(trace.rate)) os << trace.rate;
    os << '\n';
  }
}

RunTrace read_trace_csv(std::istream& is) {
  RunTrace trace;
  std::string line;
  long lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() < 5) throw parse_error(lineno, "short CSV row");
    try {
      trace.rel_error.push_back(std::stod(fields[1]));
      trace.n_g.push_back(std::stol(fields[2]));
      trace.n_c.push_back(std::stol(fields[3]));
      trace.time_model.push_back(std::stod(fields[4]));
      trace.row_iteration.push_back(std::stol(fields[0]));
      if (fields.size() >= 6 && !fields[5].empty())
        trace.rate = std::stod(fields[5]);
    } catch (const std::exception&) {
      throw parse_error(lineno, "bad CSV field");
    }
  }
  trace.has_reference = true;
  return trace;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepOutcome>& rows) {
  os << "mu,batch_size,diverged,final_error,epochs_run,epochs_to_target,"
        "n_g,n_c,time_model,rate_fit,r_squared\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.entry.mu << ',' << r.entry.batch_size << ',' << (r.diverged ? 1 : 0)
       << ',' << r.final_error << ',' << r.epochs_run << ','
       << r.epochs_to_target << ',' << r.n_g << ',' << r.n_c << ','
       << r.time_model << ',' << r.rate << ',' << r.r_squared << '\n';
  }
}

namespace {

std::string svg_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  return palette[i % 6];
}

}  // namespace

void write_svg_logy(std::ostream& os, const std::vector<SvgSeries>& series,
                    const std::string& x_label, const std::string& y_label) {
  const double width = 640, height = 420;
  const double ml = 70, mr = 20, mt = 20, mb = 50;

  double xmin = 0, xmax = 1, lymin = 0, lymax = 1;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      double ly = std::log10(s.y[i]);
      if (first) {
        xmin = xmax = s.x[i];
        lymin = lymax = ly;
        first = false;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        lymin = std::min(lymin, ly);
        lymax = std::max(lymax, ly);
      }
    }
  }
  lymin = std::floor(lymin);
  lymax = std::ceil(lymax);
  if (lymax == lymin) lymax = lymin + 1;
  if (xmax == xmin) xmax = xmin + 1;

  auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr);
  };
  auto py = [&](double y) {
    double ly = std::log10(y);
    return height - mb - (ly - lymin) / (lymax - lymin) * (height - mt - mb);
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int d = static_cast<int>(lymin); d <= static_cast<int>(lymax); ++d) {
    double y = py(std::pow(10.0, d));
    os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << width - mr
       << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\" font-size=\"11\">1e" << d << "</text>\n";
  }
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
     << width - mr << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    double x = xmin + (xmax - xmin) * t / 4.0;
    os << "<text x=\"" << px(x) << "\" y=\"" << height - mb + 16
       << "\" text-anchor=\"middle\" font-size=\"11\">" << x << "</text>\n";
  }
  os << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << (mt + height - mb) / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    os << "<polyline fill=\"none\" stroke=\"" << svg_color(si)
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << width - mr - 6 << "\" y=\"" << mt + 16 * (si + 1)
       << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << svg_color(si)
       << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace davrg
