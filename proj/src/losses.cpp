#include "rbp/losses.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rbp/error.hpp"

namespace rbp {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

void require_compatible(const ProjectionField& a, const ProjectionField& b) {
  if (a.mask != b.mask) throw Error(ErrorKind::MaskMismatch, "fields have different face masks");
  if (a.size() != b.size()) throw Error(ErrorKind::ShapeMismatch, "fields have different point counts");
}

void require_positive(const FaceSigmas& sigmas, const FaceMask& mask) {
  for (int f = 0; f < kFaceCount; ++f)
    if (mask[f] && !(sigmas[f] > 0.0)) throw Error(ErrorKind::NonPositiveSigma, "sigma must be positive");
}

double valid_entries(const ProjectionField& f) {
  return static_cast<double>(f.size()) * static_cast<double>(f.mask.count());
}

double scale_for(Reduction r, const ProjectionField& f) {
  const double n = valid_entries(f);
  return (r == Reduction::Mean && n > 0.0) ? 1.0 / n : 1.0;
}

// Flattened view of the valid entries of a field (the free variables of a gradient check).
std::vector<Eigen::Index> valid_columns(const FaceMask& mask) {
  std::vector<Eigen::Index> cols;
  for (int f = 0; f < kFaceCount; ++f)
    if (mask[f])
      for (int k = 0; k < 3; ++k) cols.push_back(3 * f + k);
  return cols;
}

Eigen::VectorXd flatten(const ProjectionField::Storage& m, const std::vector<Eigen::Index>& cols) {
  Eigen::VectorXd out(m.rows() * static_cast<Eigen::Index>(cols.size()));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c : cols) out(k++) = m(i, c);
  return out;
}

void unflatten(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& cols, ProjectionField::Storage& m) {
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c : cols) m(i, c) = v(k++);
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double sprv_loss(const ProjectionField& pred, const ProjectionField& gt, const FaceSigmas& sigma_data,
                 const FaceSigmas& sigma_reg, double lambda0, Reduction reduction) {
  require_compatible(pred, gt);
  require_positive(sigma_data, pred.mask);
  if (lambda0 != 0.0) require_positive(sigma_reg, pred.mask);

  double data = 0.0;
  double reg = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    for (int f = 0; f < kFaceCount; ++f) {
      if (!pred.mask[f]) continue;
      const Vec3 p = pred.at(i, f);
      data += kSqrt2 / sigma_data[f] * (p - gt.at(i, f)).lpNorm<1>() + std::log(sigma_data[f]);
      if (lambda0 != 0.0) reg += kSqrt2 / sigma_reg[f] * p.lpNorm<1>() + std::log(sigma_reg[f]);
    }
  }
  return (data + lambda0 * reg) * scale_for(reduction, pred);
}

double sprv_loss(const SprvField& pred, const SprvField& gt, const FaceSigmas& sigma_data,
                 const FaceSigmas& sigma_reg, double lambda0, Reduction reduction) {
  return sprv_loss(pred.residual, gt.residual, sigma_data, sigma_reg, lambda0, reduction);
}

SprvLossGradient sprv_loss_gradient(const ProjectionField& pred, const ProjectionField& gt,
                                    const FaceSigmas& sigma_data, const FaceSigmas& sigma_reg, double lambda0,
                                    Reduction reduction) {
  require_compatible(pred, gt);
  require_positive(sigma_data, pred.mask);
  if (lambda0 != 0.0) require_positive(sigma_reg, pred.mask);
  const double scale = scale_for(reduction, pred);

  SprvLossGradient g;
  g.d_pred = ProjectionField::Storage::Zero(pred.size(), 3 * kFaceCount);
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    for (int f = 0; f < kFaceCount; ++f) {
      if (!pred.mask[f]) continue;
      const Vec3 p = pred.at(i, f);
      const Vec3 d = p - gt.at(i, f);
      for (int k = 0; k < 3; ++k) {
        double v = kSqrt2 / sigma_data[f] * sign(d(k));
        if (lambda0 != 0.0) v += lambda0 * kSqrt2 / sigma_reg[f] * sign(p(k));
        g.d_pred(i, 3 * f + k) = scale * v;
      }
      const double sd = sigma_data[f];
      g.d_sigma_data[f] += scale * (-kSqrt2 * d.lpNorm<1>() / (sd * sd) + 1.0 / sd);
      if (lambda0 != 0.0) {
        const double sr = sigma_reg[f];
        g.d_sigma_reg[f] += scale * lambda0 * (-kSqrt2 * p.lpNorm<1>() / (sr * sr) + 1.0 / sr);
      }
    }
  }
  return g;
}

double consistency_loss(const ProjectionField& from_pose, const ProjectionField& from_sprv, Reduction reduction) {
  require_compatible(from_pose, from_sprv);
  double total = 0.0;
  for (Eigen::Index i = 0; i < from_pose.size(); ++i)
    for (int f = 0; f < kFaceCount; ++f)
      if (from_pose.mask[f]) total += (from_pose.at(i, f) - from_sprv.at(i, f)).lpNorm<1>();
  return total * scale_for(reduction, from_pose);
}

ProjectionField::Storage consistency_loss_gradient(const ProjectionField& from_pose, const ProjectionField& from_sprv,
                                                   Reduction reduction) {
  require_compatible(from_pose, from_sprv);
  const double scale = scale_for(reduction, from_pose);
  ProjectionField::Storage g = ProjectionField::Storage::Zero(from_pose.size(), 3 * kFaceCount);
  for (Eigen::Index i = 0; i < from_pose.size(); ++i)
    for (int f = 0; f < kFaceCount; ++f)
      if (from_pose.mask[f])
        for (int k = 0; k < 3; ++k)
          g(i, 3 * f + k) = -scale * sign(from_pose.vectors(i, 3 * f + k) - from_sprv.vectors(i, 3 * f + k));
  return g;
}

double total_loss(const LossComponents& c, const LossWeights& w) {
  for (double v : {c.pose, c.shape, c.sprv, c.consistency, w.lambda1, w.lambda2, w.lambda3, w.lambda4})
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "loss component or weight is not finite");
  return w.lambda1 * c.pose + w.lambda2 * c.shape + w.lambda3 * c.sprv + w.lambda4 * c.consistency;
}

double max_relative_error(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& analytic, double eps) {
  if (x.size() != analytic.size()) throw Error(ErrorKind::ShapeMismatch, "gradient size mismatch");
  double worst = 0.0;
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + eps;
    const double up = f(probe);
    probe(i) = x(i) - eps;
    const double down = f(probe);
    probe(i) = x(i);
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic(i)), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic(i) - numeric) / denom);
  }
  return worst;
}

double check_sprv_gradient(const ProjectionField& pred, const ProjectionField& gt, const FaceSigmas& sigma_data,
                           const FaceSigmas& sigma_reg, double lambda0, double eps, Reduction reduction) {
  require_compatible(pred, gt);
  const auto cols = valid_columns(pred.mask);
  const Eigen::VectorXd p = flatten(pred.vectors, cols);
  const Eigen::VectorXd d = p - flatten(gt.vectors, cols);
  const double kink = 10.0 * eps;
  if (d.size() > 0 && d.cwiseAbs().minCoeff() <= kink)
    throw Error(ErrorKind::KinkProximity, "a residual component is within 10 eps of zero");
  if (lambda0 != 0.0 && p.size() > 0 && p.cwiseAbs().minCoeff() <= kink)
    throw Error(ErrorKind::KinkProximity, "a prediction component is within 10 eps of zero");

  const Eigen::Index np = p.size();
  Eigen::VectorXd x(np + 2 * kFaceCount);
  x.head(np) = p;
  for (int f = 0; f < kFaceCount; ++f) {
    x(np + f) = sigma_data[f];
    x(np + kFaceCount + f) = sigma_reg[f];
  }

  const SprvLossGradient g = sprv_loss_gradient(pred, gt, sigma_data, sigma_reg, lambda0, reduction);
  Eigen::VectorXd analytic(x.size());
  analytic.head(np) = flatten(g.d_pred, cols);
  for (int f = 0; f < kFaceCount; ++f) {
    analytic(np + f) = g.d_sigma_data[f];
    analytic(np + kFaceCount + f) = g.d_sigma_reg[f];
  }

  ProjectionField probe = pred;
  auto loss = [&](const Eigen::VectorXd& v) {
    unflatten(v.head(np), cols, probe.vectors);
    FaceSigmas sd, sr;
    for (int f = 0; f < kFaceCount; ++f) {
      sd[f] = v(np + f);
      sr[f] = v(np + kFaceCount + f);
    }
    return sprv_loss(probe, gt, sd, sr, lambda0, reduction);
  };
  return max_relative_error(loss, x, analytic, eps);
}

double check_consistency_gradient(const ProjectionField& from_pose, const ProjectionField& from_sprv, double eps,
                                  Reduction reduction) {
  require_compatible(from_pose, from_sprv);
  const auto cols = valid_columns(from_sprv.mask);
  const Eigen::VectorXd x = flatten(from_sprv.vectors, cols);
  const Eigen::VectorXd d = flatten(from_pose.vectors, cols) - x;
  if (d.size() > 0 && d.cwiseAbs().minCoeff() <= 10.0 * eps)
    throw Error(ErrorKind::KinkProximity, "a consistency residual is within 10 eps of zero");

  const Eigen::VectorXd analytic = flatten(consistency_loss_gradient(from_pose, from_sprv, reduction), cols);
  ProjectionField probe = from_sprv;
  auto loss = [&](const Eigen::VectorXd& v) {
    unflatten(v, cols, probe.vectors);
    return consistency_loss(from_pose, probe, reduction);
  };
  return max_relative_error(loss, x, analytic, eps);
}

}  // namespace rbp
