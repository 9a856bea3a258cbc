#ifndef DAVRG_DIAGNOSTICS_HPP
#define DAVRG_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "davrg/data.hpp"
#include "davrg/objective.hpp"
#include "davrg/topology.hpp"

namespace davrg {

// Symmetric PSD square root V of (I - A)/(2K): null(V) = span(1), so ||V W||
// measures how far the stacked iterates are from consensus.
struct IncidenceFactor {
  Eigen::MatrixXd v;
  Eigen::MatrixXd u;       // eigenbasis of (I - A)/(2K)
  Eigen::VectorXd sigma;   // its eigenvalues, ascending, clamped at 0
};

IncidenceFactor incidence_factor(const CombinationMatrix& a);

// Stacked per-node gradients: rows of the input/output are node iterates.
using GradientMap = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

GradientMap make_gradient_map(const LossModel& model,
                              const PartitionedDataset& part,
                              bool use_weights);

struct DualState {
  Eigen::MatrixXd y;  // K x M, starts at zero
};

// Primal-dual form of exact diffusion:
//   W <- Abar (W - mu G(W)) - K V Y,   Y <- Y + V W_new.
// With Y0 = 0 this reproduces the adapt-correct-combine iterates.
void step_primal_dual(Eigen::MatrixXd& w_stack, DualState& dual,
                      const IncidenceFactor& vf, const Eigen::MatrixXd& a_bar,
                      double mu, const GradientMap& grad);

// r1 = ||mu Abar G(W) + K V Y||_F and r2 = ||V W||_F; both near zero
// certify a limit point of the diffusion recursion.
std::pair<double, double> optimality_residuals(const Eigen::MatrixXd& w_stack,
                                               const Eigen::MatrixXd& y_stack,
                                               const GradientMap& grad,
                                               const IncidenceFactor& vf,
                                               const Eigen::MatrixXd& a_bar,
                                               double mu);

struct RateFit {
  double rate = 1.0;  // per-epoch geometric factor
  double r_squared = 0.0;
};

// Least-squares fit of log(error) against the epoch index over the
// post-transient window: epochs >= 2, stopping before the numerical floor
// (1e-13). Needs at least 5 usable points.
RateFit fit_linear_rate(const std::vector<double>& per_epoch_error);

}  // namespace davrg

#endif
