#ifndef DAVRG_OBJECTIVE_HPP
#define DAVRG_OBJECTIVE_HPP

#include <Eigen/Dense>
#include <string>

#include "davrg/data.hpp"

namespace davrg {

using Vector = Eigen::VectorXd;
using ConstVectorRef = Eigen::Ref<const Eigen::VectorXd>;

enum class LossKind { logistic_l2, least_squares };

LossKind loss_kind_from_string(const std::string& s);

// Per-sample loss Q(w; x) with an optional ridge term rho/2 ||w||^2.
struct LossModel {
  LossKind kind = LossKind::least_squares;
  double l2_coefficient = 0.0;  // rho
  int dimension = 0;            // M
};

struct Regularizer {
  enum class Kind { none, l1 };
  Kind kind = Kind::none;
  double eta = 0.0;
};

// delta: per-sample gradient Lipschitz bound; nu: strong-convexity bound.
struct CurvatureBounds {
  double delta = 0.0;
  double nu = 0.0;
};

double sample_loss(const LossModel& model, ConstVectorRef w, ConstVectorRef h,
                   double label);

void sample_gradient(const LossModel& model, ConstVectorRef w, ConstVectorRef h,
                     double label, Eigen::Ref<Vector> out);

Vector sample_gradient(const LossModel& model, ConstVectorRef w,
                       ConstVectorRef h, double label);

// Componentwise soft-threshold, the closed-form prox of t*||.||_1.
Vector prox_l1(ConstVectorRef v, double threshold);

// Gradient of the local empirical risk: mean of per-sample gradients.
Vector local_full_gradient(const LossModel& model, ConstVectorRef w,
                           const ShardView& shard);

double local_loss(const LossModel& model, ConstVectorRef w,
                  const ShardView& shard);

CurvatureBounds curvature_bounds(const LossModel& model, const Dataset& d);

}  // namespace davrg

#endif
