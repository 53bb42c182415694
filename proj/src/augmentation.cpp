#include "rbp/augmentation.hpp"

#include <cmath>

#include "rbp/error.hpp"

namespace rbp {

namespace {

double draw(Rng& rng, const Interval& range) {
  if (range.lo == range.hi) return range.lo;
  return std::uniform_real_distribution<double>(range.lo, range.hi)(rng);
}

}  // namespace

AugmentParams sample_augment_params(const AugmentRanges& ranges, int axis, std::uint64_t seed) {
  if (axis < 0 || axis > 2) throw Error(ErrorKind::DegenerateInput, "augmentation axis must be 0, 1 or 2");
  Rng rng(seed);
  AugmentParams p;
  p.gamma_max = draw(rng, ranges.gamma_max);
  p.gamma_min = draw(rng, ranges.gamma_min);
  p.gamma = draw(rng, ranges.gamma);
  p.hinge_angle = draw(rng, ranges.hinge_angle);
  p.axis = axis;
  p.seed = seed;
  return p;
}

double scale_profile(double p_star, const AugmentParams& params) {
  return params.gamma_min + 4.0 * (params.gamma_max - params.gamma_min) * p_star * p_star;
}

Points augment_a1(const Points& points, const AugmentParams& params, double axis_extent) {
  if (params.axis < 0 || params.axis > 2) throw Error(ErrorKind::DegenerateInput, "augmentation axis out of range");
  if (!(axis_extent > 0.0)) throw Error(ErrorKind::DegenerateInput, "axis extent must be positive");
  Points out(points.rows(), 3);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double c = points(i, a);
      out(i, a) = a == params.axis ? scale_profile(c / axis_extent, params) * c : params.gamma * c;
    }
  }
  return out;
}

Points augment_a2(const Points& points, const PartLabels& labels, const Hinge& hinge, double angle,
                  const Vec3& scales) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows())
    throw Error(ErrorKind::UnlabeledPoints, "hinge augmentation needs an upper/lower label per point");
  const Mat3 r = axis_angle(hinge.direction, angle);
  Points out(points.rows(), 3);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Vec3 p = points.row(i).transpose();
    if (labels[static_cast<std::size_t>(i)]) p = r * (p - hinge.point) + hinge.point;
    out.row(i) = p.cwiseProduct(scales).transpose();
  }
  return out;
}

Points augment_linear(const Points& points, const Vec3& scales) { return points * scales.asDiagonal(); }

Observation perturb_observation(const Points& points, const Pose9D& pose, const Perturbation& perturbation,
                                std::uint64_t seed) {
  if (!(perturbation.noise_sigma >= 0.0) || !(perturbation.rot_jitter >= 0.0) || !(perturbation.trans_jitter >= 0.0))
    throw Error(ErrorKind::DegenerateInput, "perturbation magnitudes must be non-negative");
  Rng rng(seed);
  Observation out{points, pose};

  if (perturbation.rot_jitter > 0.0 || perturbation.trans_jitter > 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Vec3 axis(gauss(rng), gauss(rng), gauss(rng));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double angle = perturbation.rot_jitter * unit(rng);
    const Vec3 shift = perturbation.trans_jitter * Vec3(unit(rng), unit(rng), unit(rng));
    const Mat3 dr = axis.norm() > 0.0 ? axis_angle(axis, angle) : Mat3::Identity();

    out.points = transform_points(points.rowwise() - pose.translation.transpose(), dr, pose.translation + shift);
    out.pose.rotation = dr * pose.rotation;
    out.pose.translation = pose.translation + shift;
  }

  if (perturbation.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, perturbation.noise_sigma);
    for (Eigen::Index i = 0; i < out.points.rows(); ++i)
      for (int a = 0; a < 3; ++a) out.points(i, a) += noise(rng);
  }
  return out;
}

}  // namespace rbp
