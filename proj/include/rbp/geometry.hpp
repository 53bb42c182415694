#pragma once

#include <array>
#include <cstdint>
#include <random>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rbp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// N x 3 point set, one point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

using Rng = std::mt19937_64;

/// Rotation, translation (m) and full box size (m) of an object instance.
struct Pose9D {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Vec3 size = Vec3::Ones();

  /// Box diagonal sqrt(sx^2 + sy^2 + sz^2); the NOCS scale factor.
  double diagonal() const { return size.norm(); }

  /// Orthonormality, det = +1 and positive size, all within `tol`.
  bool is_valid(double tol = 1e-9) const;
};

/// Box view of a pose. `extents` are full edge lengths.
struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 extents = Vec3::Ones();

  static OrientedBox from_pose(const Pose9D& pose) { return {pose.translation, pose.rotation, pose.size}; }
  Pose9D to_pose() const { return {rotation, center, extents}; }

  bool contains(const Vec3& p) const;
  std::array<Vec3, 8> corners() const;
  double volume() const { return extents.prod(); }
};

/// A point in normalized object space (diagonal-normalized, box centered at origin).
struct NocsCoord {
  Vec3 value = Vec3::Zero();
};

/// Two predicted plane normals with their uncertainties.
struct RotationEstimate {
  Vec3 rx = Vec3::UnitX();
  Vec3 ry = Vec3::UnitY();
  double ux = 1.0;
  double uy = 1.0;
};

/// y = scale * rotation * x + translation
struct Similarity {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return scale * (rotation * x) + translation; }
};

/// Least-squares similarity transform mapping `source` onto `target`.
///
/// Closed-form solution with determinant correction: when det(U V^T) < 0 the
/// singular direction with the smallest singular value is flipped so that the
/// returned rotation is proper. Throws DegenerateInput for fewer than three
/// points, mismatched sizes, or a centered source of rank below two.
Similarity umeyama(const Points& source, const Points& target);

/// Orthogonalizes (rx, ry) inside their common plane. The correction angle is
/// split ux : uy, so the less certain column moves more; the third column is
/// rx' x ry'. Throws DegenerateInput if rx and ry are parallel.
Mat3 calibrate_rotation(const RotationEstimate& est);

/// Nearest rotation in Frobenius norm (SVD with det correction).
Mat3 closest_rotation(const Mat3& m);

NocsCoord camera_to_nocs(const Vec3& p, const Pose9D& pose);
Vec3 nocs_to_camera(const NocsCoord& c, const Pose9D& pose);
Points camera_to_nocs(const Points& pts, const Pose9D& pose);
Points nocs_to_camera(const Points& coords, const Pose9D& pose);

/// Row-wise R * p + t.
Points transform_points(const Points& pts, const Mat3& rotation, const Vec3& translation);

Mat3 axis_angle(const Vec3& axis, double angle_rad);
Mat3 rot_x(double angle_rad);
Mat3 rot_y(double angle_rad);
Mat3 rot_z(double angle_rad);

/// Uniformly distributed rotation (Shoemake's quaternion method).
Mat3 random_rotation(Rng& rng);

/// Geodesic angle between two rotations in radians, robust near 0 and pi.
double rotation_angle(const Mat3& a, const Mat3& b);

/// Angle between two vectors in radians via atan2(|a x b|, a . b).
double vector_angle(const Vec3& a, const Vec3& b);

constexpr double deg2rad(double deg) { return deg * 3.14159265358979323846 / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / 3.14159265358979323846; }

}  // namespace rbp
