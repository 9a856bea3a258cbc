#include "davrg/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace davrg {

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "logistic-l2") return LossKind::logistic_l2;
  if (s == "least-squares") return LossKind::least_squares;
  throw std::invalid_argument("unknown loss kind: " + s);
}

namespace {

// sigmoid(-z) = exp(-z)/(1+exp(-z)), with the exp argument kept non-positive.
double sigmoid_neg(double z) {
  if (z >= 0.0) {
    double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

// ln(1 + exp(-z)) without overflow for large |z|.
double log1p_exp_neg(double z) {
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

}  // namespace

double sample_loss(const LossModel& model, ConstVectorRef w, ConstVectorRef h,
                   double label) {
  if (w.size() != h.size())
    throw std::invalid_argument("sample_loss: dimension mismatch");
  const double rho = model.l2_coefficient;
  switch (model.kind) {
    case LossKind::logistic_l2:
      return 0.5 * rho * w.squaredNorm() + log1p_exp_neg(label * h.dot(w));
    case LossKind::least_squares: {
      double r = h.dot(w) - label;
      return 0.5 * r * r + 0.5 * rho * w.squaredNorm();
    }
  }
  return 0.0;
}

void sample_gradient(const LossModel& model, ConstVectorRef w, ConstVectorRef h,
                     double label, Eigen::Ref<Vector> out) {
  if (w.size() != h.size() || out.size() != w.size())
    throw std::invalid_argument("sample_gradient: dimension mismatch");
  const double rho = model.l2_coefficient;
  switch (model.kind) {
    case LossKind::logistic_l2: {
      double s = sigmoid_neg(label * h.dot(w));
      out = rho * w - (label * s) * h;
      break;
    }
    case LossKind::least_squares: {
      double r = h.dot(w) - label;
      if (rho != 0.0)
        out = r * h + rho * w;
      else
        out = r * h;
      break;
    }
  }
}

Vector sample_gradient(const LossModel& model, ConstVectorRef w,
                       ConstVectorRef h, double label) {
  Vector out(w.size());
  sample_gradient(model, w, h, label, out);
  return out;
}

Vector prox_l1(ConstVectorRef v, double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("prox_l1: negative threshold");
  if (threshold == 0.0) return v;
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    double x = v(j);
    if (x > threshold)
      out(j) = x - threshold;
    else if (x < -threshold)
      out(j) = x + threshold;
    else
      out(j) = 0.0;
  }
  return out;
}

Vector local_full_gradient(const LossModel& model, ConstVectorRef w,
                           const ShardView& shard) {
  if (shard.size() == 0)
    throw std::invalid_argument("local_full_gradient: empty shard");
  Vector acc = Vector::Zero(w.size());
  Vector g(w.size());
  for (int n = 0; n < shard.size(); ++n) {
    sample_gradient(model, w, shard.feature(n), shard.label(n), g);
    acc += g;
  }
  return acc / shard.size();
}

double local_loss(const LossModel& model, ConstVectorRef w,
                  const ShardView& shard) {
  if (shard.size() == 0)
    throw std::invalid_argument("local_loss: empty shard");
  double acc = 0.0;
  for (int n = 0; n < shard.size(); ++n)
    acc += sample_loss(model, w, shard.feature(n), shard.label(n));
  return acc / shard.size();
}

CurvatureBounds curvature_bounds(const LossModel& model, const Dataset& d) {
  if (d.size() == 0) throw std::invalid_argument("curvature_bounds: empty dataset");
  const double rho = model.l2_coefficient;
  double max_sq = 0.0;
  for (int i = 0; i < d.size(); ++i)
    max_sq = std::max(max_sq, d.features.row(i).squaredNorm());

  CurvatureBounds cb;
  switch (model.kind) {
    case LossKind::logistic_l2:
      cb.delta = rho + 0.25 * max_sq;
      cb.nu = rho;
      break;
    case LossKind::least_squares: {
      cb.delta = max_sq + rho;
      Eigen::MatrixXd hess =
          (d.features.transpose() * d.features) / d.size();
      hess.diagonal().array() += rho;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
      cb.nu = std::max(0.0, es.eigenvalues().minCoeff());
      break;
    }
  }
  return cb;
}

}  // namespace davrg
