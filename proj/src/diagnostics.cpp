#include "davrg/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "davrg/errors.hpp"

namespace davrg {

IncidenceFactor incidence_factor(const CombinationMatrix& a) {
  const int k = a.size();
  Eigen::MatrixXd half =
      (Eigen::MatrixXd::Identity(k, k) - a.a) / (2.0 * k);
  if ((half - half.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("combination matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(half);
  if (es.info() != Eigen::Success)
    throw convergence_failure(0.0, "eigensolver failed on (I-A)/2K");

  IncidenceFactor f;
  f.u = es.eigenvectors();
  f.sigma = es.eigenvalues();
  for (int i = 0; i < k; ++i) {
    if (f.sigma(i) < -1e-12)
      throw convergence_failure(
          f.sigma(i), "(I-A)/2K has a negative eigenvalue; A is not doubly "
                      "stochastic within tolerance");
    // clamp roundoff around the analytic null eigenvalue: a stray +1e-17
    // would square-root to 3e-9 and leak into V * ones
    if (std::abs(f.sigma(i)) < 1e-12) f.sigma(i) = 0.0;
  }
  f.v = f.u * f.sigma.cwiseSqrt().asDiagonal() * f.u.transpose();
  return f;
}

GradientMap make_gradient_map(const LossModel& model,
                              const PartitionedDataset& part,
                              bool use_weights) {
  return [&model, &part, use_weights](const Eigen::MatrixXd& w_stack) {
    Eigen::MatrixXd g(w_stack.rows(), w_stack.cols());
    for (int k = 0; k < part.node_count(); ++k) {
      Vector wk = w_stack.row(k).transpose();
      Vector gk = local_full_gradient(model, wk, part.shard(k));
      if (use_weights) gk *= part.weights[k];
      g.row(k) = gk.transpose();
    }
    return g;
  };
}

void step_primal_dual(Eigen::MatrixXd& w_stack, DualState& dual,
                      const IncidenceFactor& vf, const Eigen::MatrixXd& a_bar,
                      double mu, const GradientMap& grad) {
  const double k = static_cast<double>(w_stack.rows());
  if (dual.y.size() == 0)
    dual.y = Eigen::MatrixXd::Zero(w_stack.rows(), w_stack.cols());
  w_stack = a_bar * (w_stack - mu * grad(w_stack)) - k * (vf.v * dual.y);
  dual.y += vf.v * w_stack;
}

std::pair<double, double> optimality_residuals(const Eigen::MatrixXd& w_stack,
                                               const Eigen::MatrixXd& y_stack,
                                               const GradientMap& grad,
                                               const IncidenceFactor& vf,
                                               const Eigen::MatrixXd& a_bar,
                                               double mu) {
  if (w_stack.rows() != y_stack.rows() || w_stack.cols() != y_stack.cols())
    throw std::invalid_argument("optimality_residuals: shape mismatch");
  const double k = static_cast<double>(w_stack.rows());
  double r1 = (mu * (a_bar * grad(w_stack)) + k * (vf.v * y_stack)).norm();
  double r2 = (vf.v * w_stack).norm();
  return {r1, r2};
}

RateFit fit_linear_rate(const std::vector<double>& per_epoch_error) {
  constexpr double kFloor = 1e-13;
  std::vector<double> xs, ys;
  for (std::size_t e = 2; e < per_epoch_error.size(); ++e) {
    double err = per_epoch_error[e];
    if (!(err > kFloor)) break;  // stop at the numerical floor
    xs.push_back(static_cast<double>(e));
    ys.push_back(std::log(err));
  }
  if (xs.size() < 5)
    throw insufficient_data("fit_linear_rate: fewer than 5 usable epochs");

  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;

  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double fit = intercept + slope * xs[i];
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  RateFit out;
  out.rate = std::exp(slope);
  out.r_squared = (ss_tot < 1e-30) ? 1.0 : 1.0 - ss_res / ss_tot;
  return out;
}

}  // namespace davrg
