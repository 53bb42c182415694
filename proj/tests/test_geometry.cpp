#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>

#include "rbp/error.hpp"
#include "rbp/geometry.hpp"
#include "support.hpp"

using namespace rbp;
using namespace rbp::test;

namespace {

double residual(const Points& src, const Points& dst, double s, const Mat3& r, const Vec3& t) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < src.rows(); ++i) {
    const Vec3 x = src.row(i).transpose();
    sum += (s * (r * x) + t - dst.row(i).transpose()).squaredNorm();
  }
  return sum;
}

}  // namespace

TEST_CASE("umeyama recovers the identity") {
  Points p(4, 3);
  p << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  const Similarity s = umeyama(p, p);
  CHECK(s.scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_abs(s.rotation - Mat3::Identity()) < 1e-12);
  CHECK(s.translation.norm() < 1e-12);
}

TEST_CASE("umeyama recovers a known similarity") {
  Rng rng(11);
  const Points src = random_points(50, rng);
  const Mat3 r = rot_z(deg2rad(30.0));
  const Vec3 t(1, 2, 3);
  const Points dst = transform_points(src * 2.0, r, t);
  const Similarity s = umeyama(src, dst);
  CHECK(std::abs(s.scale - 2.0) < 1e-9);
  CHECK(max_abs(s.rotation - r) < 1e-9);
  CHECK((s.translation - t).norm() < 1e-9);
  CHECK(residual(src, dst, s.scale, s.rotation, s.translation) < 1e-9);
}

TEST_CASE("umeyama agrees with Eigen's implementation on noisy data") {
  Rng rng(12);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int trial = 0; trial < 20; ++trial) {
    const Points src = random_points(30, rng);
    Points dst = transform_points(src * 1.7, random_rotation(rng), Vec3(0.3, -1, 2));
    for (Eigen::Index i = 0; i < dst.size(); ++i) dst.data()[i] += noise(rng);
    const Similarity s = umeyama(src, dst);
    const Eigen::Matrix4d ref = Eigen::umeyama(Eigen::MatrixXd(src.transpose()), Eigen::MatrixXd(dst.transpose()), true);
    const Mat3 sr = ref.topLeftCorner<3, 3>();
    const double ref_scale = std::cbrt(sr.determinant());
    CHECK(std::abs(s.scale - ref_scale) < 1e-9);
    CHECK(max_abs(s.rotation - sr / ref_scale) < 1e-9);
    CHECK((s.translation - ref.topRightCorner<3, 1>()).norm() < 1e-9);
  }
}

TEST_CASE("umeyama corrects reflections") {
  Rng rng(13);
  const Points src = random_points(20, rng);
  Mat3 mirror = Mat3::Identity();
  mirror(2, 2) = -1.0;
  const Points dst = transform_points(src, mirror, Vec3::Zero());
  const Similarity s = umeyama(src, dst);
  CHECK(s.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_abs(s.rotation.transpose() * s.rotation - Mat3::Identity()) < 1e-12);
}

TEST_CASE("umeyama is a local minimum of the squared residual") {
  Rng rng(14);
  std::normal_distribution<double> noise(0.0, 0.05), delta(0.0, 1e-3);
  const Points src = random_points(40, rng);
  Points dst = transform_points(src * 0.8, random_rotation(rng), Vec3(1, 0, -1));
  for (Eigen::Index i = 0; i < dst.size(); ++i) dst.data()[i] += noise(rng);
  const Similarity s = umeyama(src, dst);
  const double best = residual(src, dst, s.scale, s.rotation, s.translation);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat3 dr = axis_angle(Vec3(delta(rng), delta(rng), delta(rng)), 1e-3);
    const double e = residual(src, dst, s.scale + delta(rng), dr * s.rotation,
                              s.translation + Vec3(delta(rng), delta(rng), delta(rng)));
    CHECK(e >= best);
  }
}

TEST_CASE("umeyama rejects degenerate input") {
  Points collinear(3, 3);
  collinear << 0, 0, 0, 1, 0, 0, 2, 0, 0;
  CHECK_THROWS_AS(umeyama(collinear, collinear), Error);
  try {
    umeyama(collinear, collinear);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateInput);
  }
  Points two(2, 3);
  two << 0, 0, 0, 1, 1, 1;
  CHECK_THROWS_AS(umeyama(two, two), Error);
  Points other(4, 3);
  other.setRandom();
  Points fewer(3, 3);
  fewer.setRandom();
  CHECK_THROWS_AS(umeyama(other, fewer), Error);
}

TEST_CASE("calibrate_rotation keeps orthogonal columns") {
  const Mat3 r = calibrate_rotation({Vec3::UnitX(), Vec3::UnitY(), 0.3, 2.0});
  CHECK(max_abs(r - Mat3::Identity()) < 1e-12);
}

TEST_CASE("calibrate_rotation splits the correction by uncertainty") {
  const double ten = deg2rad(10.0), five = deg2rad(5.0);
  const Vec3 ry(std::sin(ten), std::cos(ten), 0.0);

  SUBCASE("equal uncertainties move both columns 5 degrees") {
    const Mat3 r = calibrate_rotation({Vec3::UnitX(), ry, 1.0, 1.0});
    CHECK((r.col(0) - Vec3(std::cos(five), -std::sin(five), 0)).norm() < 1e-12);
    CHECK((r.col(1) - Vec3(std::sin(five), std::cos(five), 0)).norm() < 1e-12);
    CHECK(std::abs(r.col(0).dot(r.col(1))) < 1e-9);
    CHECK(std::abs(vector_angle(r.col(0), Vec3::UnitX()) - vector_angle(r.col(1), ry)) < 1e-9);
  }
  SUBCASE("a certain x axis stays put") {
    const Mat3 r = calibrate_rotation({Vec3::UnitX(), ry, 0.0, 1.0});
    CHECK((r.col(0) - Vec3::UnitX()).norm() < 1e-12);
    CHECK((r.col(1) - Vec3::UnitY()).norm() < 1e-12);
  }
  SUBCASE("split follows ux : (ux + uy)") {
    const Mat3 r = calibrate_rotation({Vec3::UnitX(), ry, 3.0, 1.0});
    CHECK(vector_angle(r.col(0), Vec3::UnitX()) == doctest::Approx(deg2rad(7.5)).epsilon(1e-12));
    CHECK(vector_angle(r.col(1), ry) == doctest::Approx(deg2rad(2.5)).epsilon(1e-12));
  }
}

TEST_CASE("calibrate_rotation output is a rotation in the input plane") {
  Rng rng(15);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat3 base = random_rotation(rng);
    const Vec3 rx = (base.col(0) + 0.2 * Vec3::Random()).normalized();
    const Vec3 ry = (base.col(1) + 0.2 * Vec3::Random()).normalized();
    const double ux = u(rng), uy = u(rng);
    const Mat3 r = calibrate_rotation({rx, ry, ux, uy});
    CHECK(max_abs(r.transpose() * r - Mat3::Identity()) < 1e-9);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    const Vec3 n = rx.cross(ry).normalized();
    CHECK(std::abs(r.col(0).dot(n)) < 1e-9);
    CHECK(std::abs(r.col(1).dot(n)) < 1e-9);
  }
}

TEST_CASE("calibrate_rotation rejects parallel columns") {
  CHECK_THROWS_AS(calibrate_rotation({Vec3::UnitX(), Vec3::UnitX(), 1, 1}), Error);
  CHECK_THROWS_AS(calibrate_rotation({Vec3::UnitX(), -Vec3::UnitX(), 1, 1}), Error);
}

TEST_CASE("camera_to_nocs") {
  Rng rng(16);
  const Pose9D pose = random_pose(rng);
  CHECK(camera_to_nocs(pose.translation, pose).value.norm() < 1e-15);

  const Pose9D unit;
  const NocsCoord c = camera_to_nocs(Vec3(0.5, 0, 0), unit);
  CHECK(c.value(0) == doctest::Approx(0.5 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(c.value(1) == 0.0);
  CHECK(c.value(2) == 0.0);

  for (int i = 0; i < 100; ++i) {
    const Vec3 p = Vec3::Random();
    CHECK((nocs_to_camera(camera_to_nocs(p, pose), pose) - p).norm() < 1e-12);
  }
  const Points pts = random_points(100, rng);
  CHECK(max_abs(nocs_to_camera(camera_to_nocs(pts, pose), pose) - pts) < 1e-12);
}

TEST_CASE("box interior maps inside the NOCS ball") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Pose9D pose = random_pose(rng);
    const Points nocs = camera_to_nocs(interior_points(pose, 200, rng), pose);
    CHECK(nocs.rowwise().norm().maxCoeff() <= 0.5 * std::sqrt(3.0));
    CHECK(nocs.cwiseAbs().maxCoeff() <= 0.5);
  }
}

TEST_CASE("closest_rotation") {
  Rng rng(18);
  const Mat3 r = random_rotation(rng);
  CHECK(max_abs(closest_rotation(r) - r) < 1e-12);
  CHECK(max_abs(closest_rotation(1.5 * rot_y(deg2rad(20.0))) - rot_y(deg2rad(20.0))) < 1e-12);

  std::normal_distribution<double> noise(0.0, 1e-3);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat3 base = random_rotation(rng);
    Mat3 m = base;
    for (int k = 0; k < 9; ++k) m.data()[k] += noise(rng);
    const Mat3 q = closest_rotation(m);
    CHECK(max_abs(q.transpose() * q - Mat3::Identity()) < 1e-12);
    CHECK(q.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rotation_angle(q, base) < 1e-2);
  }
  Mat3 singular = Mat3::Identity();
  singular(2, 2) = 0.0;
  CHECK_THROWS_AS(closest_rotation(singular), Error);
}

TEST_CASE("rotation helpers") {
  CHECK(rotation_angle(rot_x(0.3), Mat3::Identity()) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(rotation_angle(rot_z(M_PI), Mat3::Identity()) == doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(rotation_angle(rot_y(1e-9), Mat3::Identity()) == doctest::Approx(1e-9).epsilon(1e-6));
  CHECK(max_abs(axis_angle(Vec3::UnitZ(), 0.4) - rot_z(0.4)) < 1e-15);
  Rng rng(19);
  for (int i = 0; i < 20; ++i) {
    const Mat3 r = random_rotation(rng);
    CHECK(max_abs(r.transpose() * r - Mat3::Identity()) < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(vector_angle(Vec3::UnitX(), Vec3::UnitY()) == doctest::Approx(M_PI / 2));
  CHECK(vector_angle(Vec3::UnitX(), 3.0 * Vec3::UnitX()) == 0.0);
}

TEST_CASE("Pose9D and OrientedBox") {
  Pose9D p;
  CHECK(p.is_valid());
  p.size(1) = 0.0;
  CHECK_FALSE(p.is_valid());
  p.size(1) = 1.0;
  p.rotation(0, 1) = 0.1;
  CHECK_FALSE(p.is_valid());

  Rng rng(20);
  const Pose9D pose = random_pose(rng);
  const OrientedBox box = OrientedBox::from_pose(pose);
  const Pose9D back = box.to_pose();
  CHECK(back.translation == pose.translation);
  CHECK(back.size == pose.size);
  CHECK(box.contains(pose.translation));
  CHECK(box.volume() == doctest::Approx(pose.size.prod()));
  for (const Vec3& c : box.corners()) {
    const Vec3 local = pose.rotation.transpose() * (c - pose.translation);
    CHECK((local.cwiseAbs() - 0.5 * pose.size).norm() < 1e-12);
  }
}
