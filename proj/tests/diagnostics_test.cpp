#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

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

Problem make_problem(int k_nodes, int per_node, TopologyKind topo,
                     std::uint64_t seed) {
  Problem pr;
  pr.data = std::make_unique<Dataset>(
      generate_least_squares(k_nodes * per_node, 4, 5.0, 0.5, seed));
  pr.part = partition(*pr.data, k_nodes, PartitionMode::balanced, seed);
  pr.comb = metropolis_weights(build_topology(topo, k_nodes, seed, 0.4));
  pr.model = LossModel{LossKind::least_squares, 0.0, 4};
  return pr;
}

Eigen::MatrixXd stack_iterates(const NetworkState& net) {
  Eigen::MatrixXd w(net.node_count(), net.dimension);
  for (int k = 0; k < net.node_count(); ++k)
    w.row(k) = net.nodes[k].w.transpose();
  return w;
}

}  // namespace

TEST_CASE("incidence factor closed forms") {
  CombinationMatrix eye;
  eye.a = Eigen::MatrixXd::Identity(3, 3);
  eye.lambda2 = 1.0;
  CHECK(incidence_factor(eye).v.norm() == doctest::Approx(0.0));

  CombinationMatrix two;
  two.a.resize(2, 2);
  two.a << 0.5, 0.5, 0.5, 0.5;
  two.lambda2 = 0.0;
  IncidenceFactor f = incidence_factor(two);
  // (I - A)/4 has eigenvalues {0, 1/4}; V gets {0, 1/2}
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.v);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == doctest::Approx(0.5));
}

TEST_CASE("V squares back to (I - A)/2K and annihilates the ones vector") {
  for (auto topo : {TopologyKind::line, TopologyKind::cycle,
                    TopologyKind::random_p}) {
    CombinationMatrix cm =
        metropolis_weights(build_topology(topo, 5, 3, 0.5));
    IncidenceFactor f = incidence_factor(cm);
    const int k = cm.size();
    Eigen::MatrixXd target = (Eigen::MatrixXd::Identity(k, k) - cm.a) / (2.0 * k);
    CHECK((f.v * f.v - target).norm() < 1e-10);
    CHECK((f.v * Eigen::VectorXd::Ones(k)).norm() < 1e-10);
  }
}

TEST_CASE("a matrix that is not an averaging operator is rejected") {
  CombinationMatrix bad;
  bad.a = 2.0 * Eigen::MatrixXd::Identity(3, 3);  // (I - A)/2K negative definite
  bad.lambda2 = 0.0;
  CHECK_THROWS_AS(incidence_factor(bad), convergence_failure);
}

TEST_CASE("primal-dual form reproduces exact diffusion iterate by iterate") {
  Problem pr = make_problem(5, 4, TopologyKind::cycle, 61);
  const double mu = 0.3;
  AlgorithmSpec spec = AlgorithmSpec::make(Variant::exact_diffusion, mu);

  NetworkState net = make_network(pr.comb, spec, pr.model, pr.part, 61);
  IncidenceFactor vf = incidence_factor(pr.comb);
  GradientMap grad = make_gradient_map(pr.model, pr.part, spec.use_weights);
  Eigen::MatrixXd w_stack = stack_iterates(net);
  DualState dual;

  for (int i = 0; i < 20; ++i) {
    step_exact_diffusion(net, spec, pr.model, pr.part);
    step_primal_dual(w_stack, dual, vf, net.a_bar, mu, grad);
    CHECK((w_stack - stack_iterates(net)).cwiseAbs().maxCoeff() < 1e-10);
  }

  // dual iterates stay in range(V): project onto the null space and check
  Eigen::MatrixXd null_proj = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i)
    if (vf.sigma(i) == 0.0)
      null_proj += vf.u.col(i) * vf.u.col(i).transpose();
  CHECK((null_proj * dual.y).norm() < 1e-9);
}

TEST_CASE("identity topology turns the primal-dual form into plain descent") {
  Problem pr = make_problem(3, 4, TopologyKind::complete, 62);
  CombinationMatrix eye;
  eye.a = Eigen::MatrixXd::Identity(3, 3);
  eye.lambda2 = 0.0;
  IncidenceFactor vf = incidence_factor(eye);
  GradientMap grad = make_gradient_map(pr.model, pr.part, false);

  Eigen::MatrixXd w_stack = Eigen::MatrixXd::Zero(3, 4);
  Eigen::MatrixXd manual = w_stack;
  DualState dual;
  const double mu = 0.2;
  for (int i = 0; i < 10; ++i) {
    step_primal_dual(w_stack, dual, vf, eye.a, mu, grad);
    manual -= mu * grad(manual);
    CHECK((w_stack - manual).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("optimality residuals certify a converged run and flag perturbations") {
  Problem pr = make_problem(4, 6, TopologyKind::random_p, 63);
  const double mu = 0.3;
  AlgorithmSpec spec = AlgorithmSpec::make(Variant::exact_diffusion, mu);
  IncidenceFactor vf = incidence_factor(pr.comb);
  GradientMap grad = make_gradient_map(pr.model, pr.part, spec.use_weights);
  Eigen::MatrixXd abar = half_lifted(pr.comb).a;

  Eigen::MatrixXd w_stack = Eigen::MatrixXd::Zero(4, 4);
  DualState dual;
  for (int i = 0; i < 6000; ++i)
    step_primal_dual(w_stack, dual, vf, abar, mu, grad);

  auto [r1, r2] = optimality_residuals(w_stack, dual.y, grad, vf, abar, mu);
  CHECK(r1 < 1e-8);
  CHECK(r2 < 1e-8);

  // consensus stack: r2 vanishes because V 1 = 0
  Eigen::MatrixXd consensus = Eigen::MatrixXd::Ones(4, 1) * w_stack.row(0);
  auto [c1, c2] =
      optimality_residuals(consensus, dual.y, grad, vf, abar, mu);
  (void)c1;
  CHECK(c2 < 1e-12);

  Eigen::MatrixXd bumped = consensus;
  bumped(2, 0) += 1e-3;
  auto [p1, p2] = optimality_residuals(bumped, dual.y, grad, vf, abar, mu);
  (void)p1;
  CHECK(p2 >= 1e-4);  // detects the consensus violation
}

TEST_CASE("rate fit on synthetic traces") {
  std::vector<double> geometric;
  for (int t = 0; t <= 20; ++t) geometric.push_back(std::pow(0.5, t));
  RateFit f = fit_linear_rate(geometric);
  CHECK(f.rate == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));

  std::vector<double> flat(12, 0.25);
  RateFit c = fit_linear_rate(flat);
  CHECK(c.rate == doctest::Approx(1.0));

  std::vector<double> tiny{1.0, 0.5, 0.25, 0.125};
  CHECK_THROWS_AS(fit_linear_rate(tiny), insufficient_data);

  // trailing floor region is excluded from the window
  std::vector<double> floored;
  for (int t = 0; t <= 10; ++t) floored.push_back(std::pow(0.1, t));
  for (int t = 0; t < 5; ++t) floored.push_back(1e-15);
  RateFit g = fit_linear_rate(floored);
  CHECK(g.rate == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("fitted rate on an actual run is geometric with a good fit") {
  Problem pr = make_problem(5, 10, TopologyKind::random_p, 64);
  Regularizer none;
  ReferenceSolution ref = reference_solution(pr.model, *pr.data, none);
  AlgorithmSpec spec = AlgorithmSpec::make(Variant::diffusion_avrg, 0.4);
  NetworkState net = make_network(pr.comb, spec, pr.model, pr.part, 64);
  RunOptions opt;
  opt.max_epochs = 60;
  RunTrace t = run(net, spec, pr.model, pr.part, opt, &ref);
  RateFit f = fit_linear_rate(t.rel_error);
  CHECK(f.rate < 1.0);
  CHECK(f.r_squared >= 0.95);
}
