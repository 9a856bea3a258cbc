#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "davrg/errors.hpp"
#include "davrg/harness.hpp"

using namespace davrg;

namespace {

struct Problem {
  std::unique_ptr<Dataset> data;
  PartitionedDataset part;
  CombinationMatrix comb;
  LossModel model;
};

Problem make_problem(int k_nodes, int per_node, std::uint64_t seed) {
  Problem pr;
  pr.data = std::make_unique<Dataset>(
      generate_least_squares(k_nodes * per_node, 4, 5.0, 0.5, seed));
  pr.part = partition(*pr.data, k_nodes, PartitionMode::balanced, seed);
  pr.comb = metropolis_weights(
      build_topology(TopologyKind::random_p, k_nodes, seed, 0.4));
  pr.model = LossModel{LossKind::least_squares, 0.0, 4};
  return pr;
}

}  // namespace

TEST_CASE("reference solution recovers a noiseless planted model") {
  Dataset d = generate_least_squares(400, 6, 10.0, 0.0, 81);
  LossModel model{LossKind::least_squares, 0.0, 6};
  Regularizer none;
  ReferenceSolution ref = reference_solution(model, d, none);
  CHECK(ref.method == "normal-equations");
  CHECK((ref.w_star - d.w_true).norm() < 1e-8);
}

TEST_CASE("logistic reference on separable points meets the residual bound") {
  Dataset d;
  d.features.resize(4, 2);
  d.features << 1, 1, 1, -1, -1, 1, -1, -1;
  d.labels.resize(4);
  d.labels << 1, 1, -1, -1;
  LossModel model{LossKind::logistic_l2, 1.0 / 4, 2};
  Regularizer none;
  ReferenceSolution ref = reference_solution(model, d, none);
  CHECK(ref.method == "newton");
  CHECK(ref.w_star.allFinite());
  double tol = 1e-12 * std::max(1.0, global_gradient(model, d,
                                                     Vector::Zero(2)).norm());
  CHECK(ref.residual_norm <= tol);
}

TEST_CASE("an overwhelming l1 penalty pushes the reference to zero") {
  Dataset d = generate_least_squares(50, 3, 2.0, 0.1, 82);
  LossModel model{LossKind::least_squares, 0.0, 3};
  Regularizer l1{Regularizer::Kind::l1, 1e4};
  ReferenceSolution ref = reference_solution(model, d, l1);
  CHECK(ref.method == "fista");
  CHECK(ref.w_star.norm() == 0.0);
}

TEST_CASE("relative error arithmetic") {
  Problem pr = make_problem(2, 4, 83);
  ReferenceSolution ref;
  ref.w_star = Vector::Constant(4, 2.0);
  AlgorithmSpec spec = AlgorithmSpec::make(Variant::exact_diffusion, 0.1);
  NetworkState net = make_network(pr.comb, spec, pr.model, pr.part, 83);

  for (auto& nd : net.nodes) nd.w = ref.w_star;
  CHECK(relative_error(net, ref) == 0.0);

  for (auto& nd : net.nodes) nd.w.setZero();
  CHECK(relative_error(net, ref) == doctest::Approx(1.0));

  net.nodes[0].w = ref.w_star;
  net.nodes[1].w = 2.0 * ref.w_star;
  CHECK(relative_error(net, ref) == doctest::Approx(0.5));

  ReferenceSolution zero;
  zero.w_star = Vector::Zero(4);
  CHECK_THROWS_AS(relative_error(net, zero), std::invalid_argument);
}

TEST_CASE("running time model") {
  CHECK(running_time(100, 10, CostModel{1.0, 100.0}) == 1100.0);
  CHECK(running_time(100, 10, CostModel{1.0, 0.0}) == 100.0);
}

TEST_CASE("rule-based charges match the instrumented engine counts") {
  Dataset d = generate_least_squares(60, 3, 5.0, 0.5, 84);
  PartitionedDataset part =
      partition(d, 4, PartitionMode::explicit_sizes, 84, {12, 24, 12, 12});
  CombinationMatrix comb = metropolis_weights(
      build_topology(TopologyKind::random_p, 4, 84, 0.6));
  LossModel model{LossKind::least_squares, 0.0, 3};

  struct Case {
    Variant v;
    int batch;
  };
  for (auto c : {Case{Variant::exact_diffusion, 1},
                 Case{Variant::stochastic_diffusion, 1},
                 Case{Variant::diffusion_avrg_unbalanced, 1},
                 Case{Variant::diffusion_svrg, 1}}) {
    AlgorithmSpec spec = AlgorithmSpec::make(c.v, 0.05);
    spec.batch_size = c.batch;
    NetworkState net = make_network(comb, spec, model, part, 84);
    const long iters = 60;
    auto rule = charge_costs(c.v, part, c.batch, iters);
    std::vector<long> charges;
    for (long i = 0; i < iters; ++i) {
      step(net, spec, model, part, false, &charges);
      REQUIRE(charges == rule[i]);
    }
  }

  // balanced mini-batch: 2B per iteration after the first epoch, B during it
  Dataset bd = generate_least_squares(48, 3, 5.0, 0.5, 85);
  PartitionedDataset bpart = partition(bd, 4, PartitionMode::balanced, 85);
  AlgorithmSpec mb = AlgorithmSpec::make(Variant::diffusion_avrg_minibatch, 0.05);
  mb.batch_size = 4;  // N_k = 12, L = 3
  NetworkState net = make_network(comb, mb, model, bpart, 85);
  auto rule = charge_costs(mb.variant, bpart, 4, 9);
  std::vector<long> charges;
  for (long i = 0; i < 9; ++i) {
    step(net, mb, model, bpart, false, &charges);
    REQUIRE(charges == rule[i]);
  }
  // one epoch (L iterations) costs 2 N_k evaluations per node after warmup:
  long epoch1 = 0;
  for (long i = 3; i < 6; ++i) epoch1 += rule[i][0];
  CHECK(epoch1 == 2 * 12);
}

TEST_CASE("avrg charges 2 per iteration per node from epoch 1 on") {
  Problem pr = make_problem(3, 10, 86);
  AlgorithmSpec spec = AlgorithmSpec::make(Variant::diffusion_avrg, 0.2);
  NetworkState net = make_network(pr.comb, spec, pr.model, pr.part, 86);
  RunOptions opt;
  opt.max_epochs = 3;
  opt.probe_charges = true;
  RunTrace t = run(net, spec, pr.model, pr.part, opt);
  long epoch1_node0 = 0;
  for (long i = 10; i < 20; ++i) epoch1_node0 += t.iter_charges[i][0];
  CHECK(epoch1_node0 == 2 * 10);  // 2 N-bar per epoch per node
  // exact diffusion: N_k per iteration
  AlgorithmSpec ed = AlgorithmSpec::make(Variant::exact_diffusion, 0.05);
  NetworkState ned = make_network(pr.comb, ed, pr.model, pr.part, 86);
  std::vector<long> charges;
  step(ned, ed, pr.model, pr.part, false, &charges);
  CHECK(charges == std::vector<long>(3, 10));
}

TEST_CASE("idle profile separates the balanced and the pausing estimators") {
  Dataset d = generate_least_squares(9, 2, 3.0, 0.5, 87);
  PartitionedDataset part = partition(d, 3, PartitionMode::balanced, 87);
  REQUIRE(part.sizes == std::vector<int>{3, 3, 3});

  CombinationMatrix comb =
      metropolis_weights(build_topology(TopologyKind::cycle, 3, 0));
  LossModel model{LossKind::least_squares, 0.0, 2};

  RunOptions opt;
  opt.max_epochs = 6;
  opt.probe_charges = true;

  AlgorithmSpec avrg = AlgorithmSpec::make(Variant::diffusion_avrg_unbalanced, 0.05);
  NetworkState na = make_network(comb, avrg, model, part, 87);
  RunTrace ta = run(na, avrg, model, part, opt);
  IdleProfile pa = idle_profile(ta, part, avrg.variant, 1);
  for (int k = 0; k < 3; ++k) {
    CHECK(pa.variance[k] == 0.0);  // exactly balanced
    for (long c : pa.charges[k]) CHECK(c == 2);
  }

  AlgorithmSpec svrg = AlgorithmSpec::make(Variant::diffusion_svrg, 0.05);
  NetworkState ns = make_network(comb, svrg, model, part, 87);
  RunTrace ts = run(ns, svrg, model, part, opt);
  IdleProfile ps = idle_profile(ts, part, svrg.variant, 1);
  for (int k = 0; k < 3; ++k) CHECK(ps.variance[k] > 0.0);
  // N_k = 3 gives the (5, 2, 2) pattern
  CHECK(ps.charges[0][0] == 5);
  CHECK(ps.charges[0][1] == 2);
  CHECK(ps.charges[0][2] == 2);
  CHECK(ps.charges[0][3] == 5);

  RunTrace no_probe;
  CHECK_THROWS_AS(idle_profile(no_probe, part, svrg.variant, 1), invalid_state);
}

TEST_CASE("svrg on a single-sample shard charges a flat 3 per iteration") {
  Dataset d = generate_least_squares(3, 2, 2.0, 0.5, 88);
  PartitionedDataset part =
      partition(d, 3, PartitionMode::balanced, 88);
  CombinationMatrix comb =
      metropolis_weights(build_topology(TopologyKind::complete, 3, 0));
  LossModel model{LossKind::least_squares, 0.0, 2};
  AlgorithmSpec svrg = AlgorithmSpec::make(Variant::diffusion_svrg, 0.05);
  NetworkState net = make_network(comb, svrg, model, part, 88);
  RunOptions opt;
  opt.max_epochs = 8;
  opt.probe_charges = true;
  RunTrace t = run(net, svrg, model, part, opt);
  IdleProfile p = idle_profile(t, part, svrg.variant, 1);
  for (int k = 0; k < 3; ++k) {
    CHECK(p.variance[k] == 0.0);  // degenerate: every iteration pays 1 + 2
    for (long c : p.charges[k]) CHECK(c == 3);
  }
}

TEST_CASE("config parsing rejects unknown keys with their path") {
  const char* good = R"({
    "seed": 3,
    "data": {"kind": "synthetic-least-squares", "n": 40, "m": 4,
             "condition": 5.0, "noise_std": 0.5, "partition": "balanced"},
    "topology": {"kind": "cycle", "nodes": 4},
    "algorithm": {"variant": "diffusion-avrg", "step_size": 0.2, "epochs": 3,
                  "loss": "least-squares"},
    "costs": {"t_comp": 1.0, "t_comm": 10.0},
    "output": {}
  })";
  ExperimentConfig cfg = parse_config(good);
  CHECK(cfg.nodes == 4);
  CHECK(cfg.costs.t_comm == 10.0);
  Experiment ex = build_experiment(cfg);
  CHECK(ex.part.balanced());
  CHECK(ex.comb.size() == 4);

  try {
    parse_config(R"({"data": {"kin": "x"}})");
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("data.kin") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), std::invalid_argument);
}

TEST_CASE("traces are bit-identical across repeated runs of one config") {
  Problem pr = make_problem(4, 8, 89);
  Regularizer none;
  ReferenceSolution ref = reference_solution(pr.model, *pr.data, none);
  AlgorithmSpec spec = AlgorithmSpec::make(Variant::diffusion_avrg, 0.3);
  RunOptions opt;
  opt.max_epochs = 12;

  std::string first;
  for (int rep = 0; rep < 2; ++rep) {
    NetworkState net = make_network(pr.comb, spec, pr.model, pr.part, 89);
    RunTrace t = run(net, spec, pr.model, pr.part, opt, &ref);
    std::ostringstream csv;
    write_trace_csv(csv, t);
    if (rep == 0)
      first = csv.str();
    else
      CHECK(first == csv.str());
  }
}

TEST_CASE("trace CSV round-trips through the reader") {
  Problem pr = make_problem(3, 6, 90);
  Regularizer none;
  ReferenceSolution ref = reference_solution(pr.model, *pr.data, none);
  AlgorithmSpec spec = AlgorithmSpec::make(Variant::diffusion_avrg, 0.2);
  NetworkState net = make_network(pr.comb, spec, pr.model, pr.part, 90);
  RunOptions opt;
  opt.max_epochs = 8;
  RunTrace t = run(net, spec, pr.model, pr.part, opt, &ref);

  std::stringstream ss;
  write_trace_csv(ss, t);
  RunTrace back = read_trace_csv(ss);
  REQUIRE(back.rows() == t.rows());
  for (long r = 0; r < t.rows(); ++r) {
    CHECK(back.rel_error[r] == t.rel_error[r]);
    CHECK(back.n_g[r] == t.n_g[r]);
  }
}

TEST_CASE("sweep produces one summary row per grid point") {
  Problem pr = make_problem(4, 10, 91);
  Regularizer none;
  ReferenceSolution ref = reference_solution(pr.model, *pr.data, none);

  Experiment ex;
  ex.cfg.seed = 91;
  ex.dataset = std::move(pr.data);
  ex.part = partition(*ex.dataset, 4, PartitionMode::balanced, 91);
  ex.comb = pr.comb;
  ex.model = pr.model;
  ex.spec = AlgorithmSpec::make(Variant::diffusion_avrg, 0.1);

  std::vector<SweepEntry> entries;
  for (double mu : {0.05, 0.2, 0.5, 5.0}) entries.push_back({mu, 1});
  RunOptions opt;
  opt.max_epochs = 40;
  opt.target_error = 1e-10;
  auto rows = run_sweep(ex, entries, opt, &ref, CostModel{}, true);
  REQUIRE(rows.size() == 4);
  bool some_reached = false;
  for (const auto& r : rows) some_reached |= (r.epochs_to_target > 0);
  CHECK(some_reached);

  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("svg emitter produces a standalone chart") {
  SvgSeries s;
  s.label = "test";
  for (int i = 0; i <= 10; ++i) {
    s.x.push_back(i);
    s.y.push_back(std::pow(10.0, -i));
  }
  std::ostringstream svg;
  write_svg_logy(svg, {s}, "epoch", "error");
  std::string text = svg.str();
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("polyline") != std::string::npos);
  CHECK(text.find("</svg>") != std::string::npos);
}

TEST_CASE("log grid construction") {
  auto g = log_grid(0.001, 1.0, 20);
  CHECK(g.size() == 61);  // 3 decades at 20 points per decade
  CHECK(g.front() == doctest::Approx(0.001));
  CHECK(g.back() == doctest::Approx(1.0));
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 20), std::invalid_argument);
}
