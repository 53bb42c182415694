#include "rbp/geometry.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "rbp/error.hpp"

namespace rbp {

bool Pose9D::is_valid(double tol) const {
  if (!((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol)) return false;
  if (!(std::abs(rotation.determinant() - 1.0) <= tol)) return false;
  return (size.array() > 0.0).all() && translation.allFinite();
}

bool OrientedBox::contains(const Vec3& p) const {
  const Vec3 local = rotation.transpose() * (p - center);
  return (local.cwiseAbs().array() <= 0.5 * extents.array()).all();
}

std::array<Vec3, 8> OrientedBox::corners() const {
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Vec3 sign((i & 1) ? 0.5 : -0.5, (i & 2) ? 0.5 : -0.5, (i & 4) ? 0.5 : -0.5);
    out[i] = center + rotation * sign.cwiseProduct(extents);
  }
  return out;
}

Similarity umeyama(const Points& source, const Points& target) {
  const Eigen::Index n = source.rows();
  if (n != target.rows()) throw Error(ErrorKind::DegenerateInput, "source and target sizes differ");
  if (n < 3) throw Error(ErrorKind::DegenerateInput, "umeyama needs at least 3 points");

  const Eigen::RowVector3d mu_src = source.colwise().mean();
  const Eigen::RowVector3d mu_dst = target.colwise().mean();
  const Points src = source.rowwise() - mu_src;
  const Points dst = target.rowwise() - mu_dst;

  const Mat3 src_cov = src.transpose() * src;
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(src_cov);
  const Vec3 lambda = eig.eigenvalues().cwiseMax(0.0);  // ascending
  if (!(lambda(2) > 0.0) || std::sqrt(lambda(1)) <= 1e-12 * std::sqrt(lambda(2)))
    throw Error(ErrorKind::DegenerateInput, "source points are collinear or coincident");

  const double inv_n = 1.0 / static_cast<double>(n);
  const double src_var = src.squaredNorm() * inv_n;
  const Mat3 cross_cov = dst.transpose() * src * inv_n;

  const Eigen::JacobiSVD<Mat3> svd(cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 s = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2) = -1.0;

  Similarity out;
  out.rotation = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  out.scale = svd.singularValues().dot(s) / src_var;
  out.translation = mu_dst.transpose() - out.scale * (out.rotation * mu_src.transpose());
  return out;
}

Mat3 calibrate_rotation(const RotationEstimate& est) {
  if (!(est.ux >= 0.0) || !(est.uy >= 0.0))
    throw Error(ErrorKind::DegenerateInput, "rotation uncertainties must be non-negative");
  const double nx = est.rx.norm();
  const double ny = est.ry.norm();
  if (!(nx > 0.0) || !(ny > 0.0)) throw Error(ErrorKind::DegenerateInput, "zero-length rotation column");
  const Vec3 e1 = est.rx / nx;
  const Vec3 ry = est.ry / ny;
  if (std::abs(e1.dot(ry)) >= 1.0 - 1e-9) throw Error(ErrorKind::DegenerateInput, "rx and ry are parallel");

  const Vec3 e2 = (ry - ry.dot(e1) * e1).normalized();
  const double phi = std::atan2(ry.dot(e2), ry.dot(e1));  // in (0, pi)
  const double correction = 0.5 * M_PI - phi;

  const double total = est.ux + est.uy;
  const double wx = total > 0.0 ? est.ux / total : 0.5;

  const double ax = -correction * wx;
  const double ay = ax + 0.5 * M_PI;
  Mat3 r;
  r.col(0) = std::cos(ax) * e1 + std::sin(ax) * e2;
  r.col(1) = std::cos(ay) * e1 + std::sin(ay) * e2;
  r.col(2) = r.col(0).cross(r.col(1));
  return r;
}

Mat3 closest_rotation(const Mat3& m) {
  const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!m.allFinite() || !(sv(0) > 0.0) || sv(2) <= 1e-12 * sv(0))
    throw Error(ErrorKind::DegenerateInput, "matrix is singular");
  Vec3 s = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2) = -1.0;
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

NocsCoord camera_to_nocs(const Vec3& p, const Pose9D& pose) {
  return {pose.rotation.transpose() * (p - pose.translation) / pose.diagonal()};
}

Vec3 nocs_to_camera(const NocsCoord& c, const Pose9D& pose) {
  return pose.rotation * (pose.diagonal() * c.value) + pose.translation;
}

Points camera_to_nocs(const Points& pts, const Pose9D& pose) {
  const double inv_l = 1.0 / pose.diagonal();
  Points out = (pts.rowwise() - pose.translation.transpose()) * pose.rotation;
  return out * inv_l;
}

Points nocs_to_camera(const Points& coords, const Pose9D& pose) {
  return transform_points(coords * pose.diagonal(), pose.rotation, pose.translation);
}

Points transform_points(const Points& pts, const Mat3& rotation, const Vec3& translation) {
  Points out = pts * rotation.transpose();
  out.rowwise() += translation.transpose();
  return out;
}

Mat3 axis_angle(const Vec3& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

Mat3 rot_x(double a) {
  Mat3 r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}

Mat3 rot_y(double a) {
  Mat3 r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}

Mat3 rot_z(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

Mat3 random_rotation(Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u1 = uni(rng), u2 = uni(rng), u3 = uni(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const Eigen::Quaterniond q(b * std::cos(2 * M_PI * u3), a * std::sin(2 * M_PI * u2),
                             a * std::cos(2 * M_PI * u2), b * std::sin(2 * M_PI * u3));
  return q.normalized().toRotationMatrix();
}

double rotation_angle(const Mat3& a, const Mat3& b) {
  const Mat3 q = a.transpose() * b;
  const double c = 0.5 * (q.trace() - 1.0);
  const Vec3 axis(q(2, 1) - q(1, 2), q(0, 2) - q(2, 0), q(1, 0) - q(0, 1));
  return std::atan2(0.5 * axis.norm(), c);
}

double vector_angle(const Vec3& a, const Vec3& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

}  // namespace rbp
