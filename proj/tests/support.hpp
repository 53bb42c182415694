#pragma once

#include <random>

#include "rbp/geometry.hpp"
#include "rbp/projection.hpp"

namespace rbp::test {

inline Points random_points(int n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Points p(n, 3);
  for (int i = 0; i < n; ++i) p.row(i) << u(rng), u(rng), u(rng);
  return p;
}

inline Pose9D random_pose(Rng& rng) {
  std::uniform_real_distribution<double> t(-0.5, 0.5), s(0.05, 0.4);
  Pose9D p;
  p.rotation = random_rotation(rng);
  p.translation = Vec3(t(rng), t(rng), 1.0 + t(rng));
  p.size = Vec3(s(rng), s(rng), s(rng));
  return p;
}

/// Uniform points strictly inside the box of `pose`.
inline Points interior_points(const Pose9D& pose, int n, Rng& rng) {
  std::uniform_real_distribution<double> u(-0.49, 0.49);
  Points canonical(n, 3);
  for (int i = 0; i < n; ++i)
    canonical.row(i) = Vec3(u(rng), u(rng), u(rng)).cwiseProduct(pose.size).transpose();
  return transform_points(canonical, pose.rotation, pose.translation);
}

inline double max_abs(const auto& m) { return m.cwiseAbs().maxCoeff(); }

inline const SymmetryTag kNone{"box", SymmetryType::None};
inline const SymmetryTag kAxial{"can", SymmetryType::AxialY};

}  // namespace rbp::test
