#pragma once

#include <array>
#include <functional>

#include "rbp/projection.hpp"

namespace rbp {

struct LossWeights {
  double lambda0 = 0.01;  // residual regularizer inside the SPRV loss
  double lambda1 = 8.0;   // pose
  double lambda2 = 10.0;  // shape
  double lambda3 = 3.0;   // SPRV
  double lambda4 = 1.0;   // consistency
};

enum class Reduction { Mean, Sum };

/// One Laplacian scale per box face, shared by all points.
using FaceSigmas = std::array<double, kFaceCount>;

inline FaceSigmas uniform_sigmas(double s) {
  FaceSigmas out;
  out.fill(s);
  return out;
}

/// Laplacian-uncertainty residual loss, data + lambda0 * reg, where per valid entry
///   data = sqrt(2) / sigma_j * |pred - gt|_1 + ln sigma_j
///   reg  = sqrt(2) / sigma'_j * |pred|_1     + ln sigma'_j.
/// Mean divides by the number of valid point-face entries.
/// Throws NonPositiveSigma, MaskMismatch, ShapeMismatch.
double sprv_loss(const ProjectionField& pred, const ProjectionField& gt, const FaceSigmas& sigma_data,
                 const FaceSigmas& sigma_reg, double lambda0, Reduction reduction = Reduction::Mean);
double sprv_loss(const SprvField& pred, const SprvField& gt, const FaceSigmas& sigma_data,
                 const FaceSigmas& sigma_reg, double lambda0, Reduction reduction = Reduction::Mean);

struct SprvLossGradient {
  ProjectionField::Storage d_pred;
  FaceSigmas d_sigma_data{};
  FaceSigmas d_sigma_reg{};
};

/// Analytic gradient of sprv_loss (subgradient 0 at exact kinks).
SprvLossGradient sprv_loss_gradient(const ProjectionField& pred, const ProjectionField& gt,
                                    const FaceSigmas& sigma_data, const FaceSigmas& sigma_reg, double lambda0,
                                    Reduction reduction = Reduction::Mean);

/// Sum (or mean) of l1 distances between the pose-implied and residual-implied fields.
double consistency_loss(const ProjectionField& from_pose, const ProjectionField& from_sprv,
                        Reduction reduction = Reduction::Mean);

/// Gradient of consistency_loss with respect to `from_sprv`.
ProjectionField::Storage consistency_loss_gradient(const ProjectionField& from_pose, const ProjectionField& from_sprv,
                                                   Reduction reduction = Reduction::Mean);

struct LossComponents {
  double pose = 0.0;
  double shape = 0.0;
  double sprv = 0.0;
  double consistency = 0.0;
};

/// lambda1 pose + lambda2 shape + lambda3 sprv + lambda4 consistency. Throws NonFinite.
double total_loss(const LossComponents& c, const LossWeights& w);

/// max_i |analytic_i - numeric_i| / max(|analytic_i|, |numeric_i|, 1e-6) using central differences.
double max_relative_error(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& analytic, double eps);

/// Finite-difference check of sprv_loss over predictions and both sigma sets.
/// Throws KinkProximity if any |pred - gt| or |pred| component is within 10 eps of zero.
double check_sprv_gradient(const ProjectionField& pred, const ProjectionField& gt, const FaceSigmas& sigma_data,
                           const FaceSigmas& sigma_reg, double lambda0, double eps,
                           Reduction reduction = Reduction::Mean);

/// Finite-difference check of consistency_loss over `from_sprv`.
double check_consistency_gradient(const ProjectionField& from_pose, const ProjectionField& from_sprv, double eps,
                                  Reduction reduction = Reduction::Mean);

}  // namespace rbp
