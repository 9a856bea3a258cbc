// Command-line front end: run / sweep / topo / refsolve / plot.
// Exit codes: 0 ok, 2 bad config, 3 divergence, 4 reference solve failure.

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "davrg/errors.hpp"
#include "davrg/harness.hpp"

namespace {

using namespace davrg;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << text;
}

std::vector<double> default_mu_grid(const Experiment& ex) {
  // log grid, 20 points per decade across 3 decades, anchored at the
  // full-gradient stability edge 2/delta of the global risk
  CurvatureBounds cb = curvature_bounds(ex.model, *ex.dataset);
  double hi = 2.0 / std::max(cb.delta, 1e-12);
  return log_grid(hi * 1e-3, hi, 20);
}

int cmd_run(const std::string& config_path, bool sweep_mode) {
  ExperimentConfig cfg = parse_config(slurp(config_path));
  Experiment ex = build_experiment(cfg);

  ReferenceSolution ref = reference_solution(ex.model, *ex.dataset,
                                             ex.regularizer);
  std::cerr << "reference (" << ref.method << "): residual "
            << ref.residual_norm << "\n";

  RunOptions opt;
  opt.max_epochs = cfg.epochs;
  opt.target_error = cfg.target_error;
  opt.parallel = cfg.parallel;

  if (sweep_mode) {
    std::vector<double> mus =
        cfg.mu_grid.empty() ? default_mu_grid(ex) : cfg.mu_grid;
    std::vector<int> batches =
        cfg.batch_grid.empty() ? std::vector<int>{cfg.batch_size}
                               : cfg.batch_grid;
    std::vector<SweepEntry> entries;
    for (int b : batches)
      for (double mu : mus) entries.push_back({mu, b});
    auto rows = run_sweep(ex, entries, opt, &ref, cfg.costs, true);
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    if (!cfg.summary_csv.empty())
      write_file(cfg.summary_csv, csv.str());
    else
      std::cout << csv.str();
    return 0;
  }

  NetworkState net = make_network(ex.comb, ex.spec, ex.model, ex.part, cfg.seed);
  RunTrace trace;
  int rc = 0;
  try {
    run_into(trace, net, ex.spec, ex.model, ex.part, opt, &ref, cfg.costs);
  } catch (const divergence_error& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    rc = 3;  // partial trace still flushed below
  }

  std::ostringstream csv;
  write_trace_csv(csv, trace);
  if (!cfg.trace_csv.empty())
    write_file(cfg.trace_csv, csv.str());
  else
    std::cout << csv.str();

  if (!cfg.svg.empty() && trace.rows() > 0) {
    SvgSeries s;
    s.label = to_string(ex.spec.variant);
    for (long r = 0; r < trace.rows(); ++r) {
      s.x.push_back(static_cast<double>(r));
      s.y.push_back(trace.rel_error[r]);
    }
    std::ostringstream svg;
    write_svg_logy(svg, {s}, "epoch", "relative error");
    write_file(cfg.svg, svg.str());
  }
  if (!cfg.checkpoint.empty() && rc == 0)
    write_file(cfg.checkpoint, save_checkpoint(net));

  if (rc == 0 && trace.rows() > 0) {
    std::cerr << "final error " << trace.rel_error.back() << " after "
              << trace.rows() - 1 << " rows; n_g " << trace.n_g.back()
              << ", n_c " << trace.n_c.back() << "\n";
  }
  return rc;
}

int cmd_topo(const std::string& kind, int nodes, double p, std::uint64_t seed,
             const std::string& edges_in, const std::string& edges_out,
             const std::string& matrix_csv) {
  Graph g;
  if (!edges_in.empty()) {
    std::ifstream in(edges_in);
    if (!in) throw std::invalid_argument("cannot open " + edges_in);
    g = read_edge_list(in);
  } else {
    g = build_topology(topology_kind_from_string(kind), nodes, seed, p);
  }
  CombinationMatrix cm = metropolis_weights(g);
  std::cout << "nodes " << g.node_count << ", edges " << g.edges.size()
            << ", lambda2 " << cm.lambda2 << "\n";
  if (!edges_out.empty()) {
    std::ofstream out(edges_out);
    write_edge_list(out, g);
  }
  if (!matrix_csv.empty()) {
    std::ofstream out(matrix_csv);
    write_matrix_csv(out, cm.a);
  }
  return 0;
}

int cmd_refsolve(const std::string& config_path, const std::string& out_path) {
  ExperimentConfig cfg = parse_config(slurp(config_path));
  Experiment ex = build_experiment(cfg);
  ReferenceSolution ref =
      reference_solution(ex.model, *ex.dataset, ex.regularizer);
  nlohmann::json j;
  j["method"] = ref.method;
  j["residual_norm"] = ref.residual_norm;
  j["w_star"] = std::vector<double>(ref.w_star.begin(), ref.w_star.end());
  if (out_path.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_file(out_path, j.dump(2));
  return 0;
}

int cmd_plot(const std::string& trace_path, const std::string& out_path) {
  std::ifstream in(trace_path);
  if (!in) throw std::invalid_argument("cannot open " + trace_path);
  RunTrace trace = read_trace_csv(in);
  SvgSeries s;
  s.label = trace_path;
  for (long r = 0; r < trace.rows(); ++r) {
    s.x.push_back(static_cast<double>(trace.row_iteration[r]));
    s.y.push_back(trace.rel_error[r]);
  }
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot write " + out_path);
  write_svg_logy(out, {s}, "epoch", "relative error");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized variance-reduced diffusion experiments"};
  app.require_subcommand(1);

  std::string config_path, edges_in, edges_out, matrix_csv, out_path;
  std::string kind = "complete", trace_path;
  int nodes = 1;
  double p = 0.0;
  std::uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "run one experiment from a config");
  run->add_option("--config", config_path, "JSON config")->required();

  auto* sweep = app.add_subcommand("sweep", "grid sweep over mu and/or B");
  sweep->add_option("--config", config_path, "JSON config")->required();

  auto* topo = app.add_subcommand("topo", "emit combination matrix + lambda2");
  topo->add_option("--kind", kind, "line|cycle|complete|random|explicit");
  topo->add_option("--nodes", nodes, "node count");
  topo->add_option("--p", p, "edge probability for random");
  topo->add_option("--seed", seed, "seed for random");
  topo->add_option("--edges-in", edges_in, "read explicit edge list");
  topo->add_option("--edges-out", edges_out, "write edge list");
  topo->add_option("--matrix-csv", matrix_csv, "write K x K weights CSV");

  auto* refsolve = app.add_subcommand("refsolve", "emit the reference w*");
  refsolve->add_option("--config", config_path, "JSON config")->required();
  refsolve->add_option("--out", out_path, "output JSON path");

  auto* plot = app.add_subcommand("plot", "trace CSV -> SVG log-error chart");
  plot->add_option("--trace", trace_path, "trace CSV")->required();
  plot->add_option("--out", out_path, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, false);
    if (sweep->parsed()) return cmd_run(config_path, true);
    if (topo->parsed())
      return cmd_topo(kind, nodes, p, seed, edges_in, edges_out, matrix_csv);
    if (refsolve->parsed()) return cmd_refsolve(config_path, out_path);
    if (plot->parsed()) return cmd_plot(trace_path, out_path);
  } catch (const davrg::divergence_error& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const davrg::convergence_failure& e) {
    std::cerr << "reference solve failed: " << e.what() << " (residual "
              << e.residual() << ")\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
