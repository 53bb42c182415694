#pragma once

#include <cstdint>
#include <vector>

#include "rbp/geometry.hpp"

namespace rbp {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Sampling ranges for the shape augmentations.
struct AugmentRanges {
  Interval gamma_max{1.0, 1.3};
  Interval gamma_min{0.7, 1.0};
  Interval gamma{0.8, 1.2};
  Interval hinge_angle{deg2rad(-30.0), deg2rad(30.0)};
};

struct AugmentParams {
  double gamma_max = 1.0;
  double gamma_min = 1.0;
  double gamma = 1.0;
  int axis = 1;              // 0 = x, 1 = y
  double hinge_angle = 0.0;  // rad, hinge augmentation only
  std::uint64_t seed = 0;
};

/// Draws every parameter uniformly from `ranges` using a generator seeded with `seed`.
AugmentParams sample_augment_params(const AugmentRanges& ranges, int axis, std::uint64_t seed);

/// gamma_min + 4 (gamma_max - gamma_min) p^2: gamma_min at the center, gamma_max at +-0.5.
double scale_profile(double p_star, const AugmentParams& params);

/// Parabolic axis scaling in the canonical frame. The selected axis coordinate
/// c is multiplied by scale_profile(c / axis_extent); the other two by gamma.
/// Points must be centered on the box so that c / axis_extent is in [-0.5, 0.5].
Points augment_a1(const Points& points, const AugmentParams& params, double axis_extent = 1.0);

/// A line about which the upper part of an articulated object rotates.
struct Hinge {
  Vec3 point = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
};

/// Part labels for the hinge augmentation: 1 = moving (upper) part, 0 = static.
using PartLabels = std::vector<std::uint8_t>;

/// Rotates the labelled upper part by `angle` about `hinge`, leaves the lower
/// part in place, then scales all points per axis by `scales`.
/// Throws UnlabeledPoints if `labels` does not cover every point.
Points augment_a2(const Points& points, const PartLabels& labels, const Hinge& hinge, double angle,
                  const Vec3& scales);

/// Per-axis stretch of the bounding box (the linear baseline).
Points augment_linear(const Points& points, const Vec3& scales);

struct Perturbation {
  double noise_sigma = 0.0;   // m, isotropic Gaussian per coordinate
  double rot_jitter = 0.0;    // rad, max angle about a random axis
  double trans_jitter = 0.0;  // m, max offset per axis
};

struct Observation {
  Points points;
  Pose9D pose;
};

/// Rigidly jitters the object about its center (updating the pose label so it
/// stays exact), then adds Gaussian noise to the points. Deterministic in `seed`.
Observation perturb_observation(const Points& points, const Pose9D& pose, const Perturbation& perturbation,
                                std::uint64_t seed);

}  // namespace rbp
