#include <doctest.h>

#include <cmath>

#include "rbp/error.hpp"
#include "rbp/metrics.hpp"
#include "support.hpp"

using namespace rbp;
using namespace rbp::test;

namespace {

OrientedBox unit_cube(const Vec3& c = Vec3::Zero()) { return {c, Mat3::Identity(), Vec3::Ones()}; }

// Two boxes sharing a random frame, so the closed form applies in that frame.
std::pair<OrientedBox, OrientedBox> random_overlapping_pair(Rng& rng, bool world_aligned = false) {
  std::uniform_real_distribution<double> s(0.05, 0.4), u(-1.0, 1.0);
  for (;;) {
    const Mat3 r = world_aligned ? Mat3::Identity() : random_rotation(rng);
    const OrientedBox a{Vec3(u(rng), u(rng), 1.0 + u(rng)), r, Vec3(s(rng), s(rng), s(rng))};
    const Vec3 off = 0.5 * Vec3(u(rng), u(rng), u(rng)).cwiseProduct(a.extents);
    const OrientedBox b{a.center + r * off, r, Vec3(s(rng), s(rng), s(rng))};
    if (aligned_box_iou(a, b) > 0.0) return {a, b};
  }
}

OrientedBox moved(const OrientedBox& b, const Mat3& r, const Vec3& t) {
  return {r * b.center + t, r * b.rotation, b.extents};
}

Vec3 jitter(Rng& rng, double r) {
  std::uniform_real_distribution<double> u(-r, r);
  return Vec3(u(rng), u(rng), u(rng));
}

PoseError err(double rot, double trans, double iou = 1.0, std::string cat = "x") {
  return {std::move(cat), rot, trans, iou};
}

}  // namespace

TEST_CASE("aligned_box_iou") {
  CHECK(aligned_box_iou(unit_cube(), unit_cube()) == 1.0);
  CHECK(aligned_box_iou(unit_cube(), unit_cube(Vec3(10, 0, 0))) == 0.0);
  CHECK(aligned_box_iou(unit_cube(), unit_cube(Vec3(0.5, 0, 0))) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // Nested: the small box's volume over the large one's.
  const OrientedBox small{Vec3(0.1, 0, 0), Mat3::Identity(), Vec3(0.5, 0.5, 0.5)};
  CHECK(aligned_box_iou(unit_cube(), small) == doctest::Approx(0.125).epsilon(1e-15));
  // The shared frame need not be the world frame.
  const Mat3 r = rot_y(0.7) * rot_x(-0.3);
  CHECK(aligned_box_iou({Vec3::Zero(), r, Vec3::Ones()}, {r * Vec3(0.5, 0, 0), r, Vec3::Ones()}) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(aligned_box_iou(unit_cube(), {Vec3::Zero(), rot_z(0.1), Vec3::Ones()}), Error);
}

TEST_CASE("box_iou_3d_sampled") {
  CHECK(box_iou_3d_sampled(unit_cube(), unit_cube()) == 1.0);
  CHECK(box_iou_3d_sampled(unit_cube(), unit_cube(Vec3(10, 0, 0))) == 0.0);
  CHECK(std::abs(box_iou_3d_sampled(unit_cube(), unit_cube(Vec3(0.5, 0, 0))) - 1.0 / 3.0) < 0.01);

  Rng rng(61);
  SUBCASE("matches the closed form on oriented pairs") {
    for (int i = 0; i < 100; ++i) {
      const auto [a, b] = random_overlapping_pair(rng);
      CHECK(std::abs(box_iou_3d_sampled(a, b) - aligned_box_iou(a, b)) < 0.01);
    }
  }
  SUBCASE("matches the closed form on world-aligned pairs") {
    for (int i = 0; i < 100; ++i) {
      const auto [a, b] = random_overlapping_pair(rng, true);
      CHECK(std::abs(box_iou_3d_sampled(a, b) - aligned_box_iou(a, b)) < 0.01);
    }
  }
  SUBCASE("symmetric, bounded, and reflexive") {
    for (int i = 0; i < 50; ++i) {
      const OrientedBox a = OrientedBox::from_pose(random_pose(rng));
      OrientedBox b = OrientedBox::from_pose(random_pose(rng));
      b.center = a.center + jitter(rng, 0.1);
      const double ab = box_iou_3d_sampled(a, b);
      CHECK(ab == box_iou_3d_sampled(b, a));
      CHECK(ab >= 0.0);
      CHECK(ab <= 1.0);
      CHECK(box_iou_3d_sampled(a, a) == 1.0);
    }
  }
  SUBCASE("invariant to a common rigid motion") {
    for (int i = 0; i < 30; ++i) {
      const OrientedBox a = OrientedBox::from_pose(random_pose(rng));
      OrientedBox b = OrientedBox::from_pose(random_pose(rng));
      b.center = a.center + jitter(rng, 0.05);
      const Mat3 r = random_rotation(rng);
      const Vec3 t = jitter(rng, 1.0);
      CHECK(std::abs(box_iou_3d_sampled(a, b) - box_iou_3d_sampled(moved(a, r, t), moved(b, r, t))) < 0.01);
    }
  }
  SUBCASE("parallel and serial lattices agree exactly") {
    for (int i = 0; i < 20; ++i) {
      const OrientedBox a = OrientedBox::from_pose(random_pose(rng));
      OrientedBox b = OrientedBox::from_pose(random_pose(rng));
      b.center = a.center + jitter(rng, 0.1);
      CHECK(box_iou_3d_sampled(a, b, 37) == serial::box_iou_3d_sampled(a, b, 37));
    }
  }
  CHECK_THROWS_AS(box_iou_3d_sampled(unit_cube(), unit_cube(), 0), Error);
  CHECK_THROWS_AS(box_iou_3d_sampled(unit_cube(), {Vec3::Zero(), Mat3::Identity(), Vec3(1, 0, 1)}), Error);
}

TEST_CASE("box_iou_3d dispatch") {
  const OrientedBox a = unit_cube(), b = unit_cube(Vec3(0.5, 0, 0));
  CHECK(box_iou_3d(a, b) == aligned_box_iou(a, b));
  const OrientedBox c{Vec3(0.2, 0, 0), rot_z(0.4), Vec3::Ones()};
  CHECK(box_iou_3d(a, c) == box_iou_3d_sampled(a, c));
}

TEST_CASE("rotation_error") {
  Rng rng(62);
  const Mat3 ra = random_rotation(rng);
  CHECK(rotation_error(ra, ra, kNone) == doctest::Approx(0.0).epsilon(1e-12));
  for (int k = 0; k < 36; ++k) {
    const Mat3 rb = ra * rot_y(deg2rad(10.0 * k));
    CHECK(rotation_error(ra, rb, kAxial) < 1e-9);
  }
  CHECK(rotation_error(ra, ra * rot_y(deg2rad(77.0)), kAxial) < 1e-9);
  CHECK(std::abs(rotation_error(ra, ra * rot_x(deg2rad(10.0)), kNone) - 10.0) < 1e-9);
  CHECK(std::abs(rotation_error(ra, ra * rot_x(deg2rad(10.0)), kAxial) - 10.0) < 1e-9);
  CHECK(rotation_error(ra, ra * rot_z(M_PI), kNone) == doctest::Approx(180.0));

  SUBCASE("triangle inequality and symmetry") {
    for (int i = 0; i < 200; ++i) {
      const Mat3 a = random_rotation(rng), b = random_rotation(rng), c = random_rotation(rng);
      for (const SymmetryTag& s : {kNone, kAxial}) {
        const double ab = rotation_error(a, b, s), bc = rotation_error(b, c, s), ac = rotation_error(a, c, s);
        CHECK(ac <= ab + bc + 1e-6);
        CHECK(ab == doctest::Approx(rotation_error(b, a, s)).epsilon(1e-9));
        CHECK(ab >= 0.0);
        CHECK(ab <= 180.0);
      }
    }
  }
}

TEST_CASE("pose_error") {
  Pose9D gt;
  gt.translation = Vec3(0.1, 0.0, 1.0);
  gt.size = Vec3(0.2, 0.3, 0.2);
  Pose9D pred = gt;
  pred.translation += Vec3(0.03, 0.0, 0.04);
  pred.rotation = rot_x(deg2rad(4.0));
  const PoseError e = pose_error(pred, gt, kAxial);
  CHECK(e.category == "can");
  CHECK(e.translation_cm == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(e.rotation_deg == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(e.iou > 0.0);
  CHECK(e.iou < 1.0);
  CHECK(pose_error(gt, gt, kNone).iou == 1.0);
}

TEST_CASE("threshold_metric") {
  const std::vector<PoseError> zeros(5, err(0.0, 0.0));
  CHECK(threshold_metric(zeros, 5, 2) == 1.0);
  CHECK(threshold_metric(zeros, 0.1, 0.1) == 1.0);
  const std::vector<PoseError> two{err(4, 1), err(6, 1)};
  CHECK(threshold_metric(two, 5, 2) == 0.5);
  CHECK(threshold_metric(std::vector<PoseError>{err(5, 1)}, 5, 2) == 0.0);  // strict
  CHECK_THROWS_AS(threshold_metric(std::vector<PoseError>{}, 5, 2), Error);
  CHECK_THROWS_AS(threshold_metric(two, 0, 2), Error);

  Rng rng(63);
  std::uniform_real_distribution<double> u(0.0, 12.0);
  std::vector<PoseError> errs;
  for (int i = 0; i < 500; ++i) errs.push_back(err(u(rng), u(rng)));
  for (double r = 1; r <= 10; r += 1)
    for (double t = 1; t <= 10; t += 1) {
      CHECK(threshold_metric(errs, r + 1, t) >= threshold_metric(errs, r, t));
      CHECK(threshold_metric(errs, r, t + 1) >= threshold_metric(errs, r, t));
    }

  const std::vector<PoseError> ious{err(0, 0, 0.5), err(0, 0, 0.8), err(0, 0, 0.3)};
  CHECK(iou_metric(ious, 0.5) == doctest::Approx(1.0 / 3.0));
  CHECK(iou_metric(ious, 0.25) == 1.0);
}

TEST_CASE("map_sweep") {
  const std::vector<double> grid_r = default_grid(SweepAxis::Rotation);
  const std::vector<PoseError> perfect{err(0, 0, 1.0)};
  for (SweepAxis axis : {SweepAxis::Iou, SweepAxis::Rotation, SweepAxis::Translation}) {
    const auto grid = default_grid(axis);
    for (const CurvePoint& p : map_sweep(perfect, axis, grid)) CHECK(p.precision == 1.0);
  }

  SUBCASE("uniform rotation errors give one half at 5 degrees") {
    Rng rng(64);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<PoseError> errs;
    for (int i = 0; i < 10000; ++i) errs.push_back(err(u(rng), 0.0));
    const std::vector<double> five{5.0};
    // Binomial sd is 0.005; allow four of them.
    CHECK(std::abs(map_sweep(errs, SweepAxis::Rotation, five)[0].precision - 0.5) < 0.02);
  }
  SUBCASE("every curve is non-decreasing") {
    Rng rng(65);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<PoseError> errs;
      for (int i = 0; i < 100; ++i) errs.push_back(err(60.0 * u(rng), 10.0 * u(rng), u(rng)));
      for (SweepAxis axis : {SweepAxis::Iou, SweepAxis::Rotation, SweepAxis::Translation}) {
        const auto curve = map_sweep(errs, axis, default_grid(axis));
        for (std::size_t i = 1; i < curve.size(); ++i) {
          CHECK(curve[i].precision >= curve[i - 1].precision);
          CHECK(curve[i].precision <= 1.0);
        }
      }
    }
  }
  SUBCASE("the iou curve runs from strict to loose") {
    const std::vector<double> grid{0.25, 0.5, 0.75};
    const std::vector<PoseError> errs{err(0, 0, 0.6), err(0, 0, 0.3)};
    const auto curve = map_sweep(errs, SweepAxis::Iou, grid);
    CHECK(curve[0].threshold == 0.75);
    CHECK(curve[0].precision == 0.0);
    CHECK(curve[1].precision == 0.5);
    CHECK(curve[2].precision == 1.0);
  }
  const std::vector<double> empty, unsorted{2.0, 1.0};
  CHECK_THROWS_AS(map_sweep(perfect, SweepAxis::Rotation, empty), Error);
  CHECK_THROWS_AS(map_sweep(perfect, SweepAxis::Rotation, unsorted), Error);
  CHECK_THROWS_AS(map_sweep(std::vector<PoseError>{}, SweepAxis::Rotation, grid_r), Error);
}

TEST_CASE("median") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({4.0, 1.0, 3.0}) == 3.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK_THROWS_AS(median({}), Error);
}

TEST_CASE("build_report") {
  std::vector<PoseError> errs{err(1, 1, 0.9, "mug"), err(7, 1, 0.6, "mug"), err(1, 3, 0.8, "can"),
                              err(20, 20, 0.1, "can")};
  const MetricReport r = build_report(errs);
  REQUIRE(r.categories.size() == 2);
  CHECK(r.categories[0].category == "can");
  CHECK(r.categories[1].category == "mug");
  CHECK(r.categories[1].deg5_cm2 == 0.5);
  CHECK(r.categories[1].deg10_cm2 == 1.0);
  CHECK(r.categories[0].deg5_cm5 == 0.5);
  CHECK(r.categories[0].iou50 == 0.5);
  CHECK(r.mean.count == 4);
  CHECK(r.mean.deg5_cm2 == doctest::Approx(0.25));
  CHECK(r.mean.iou75 == doctest::Approx(0.5));
  CHECK(r.mean.median_rotation_deg == 4.0);
  CHECK(r.categories[1].median_iou == doctest::Approx(0.75));
  REQUIRE(r.curves.count("mean"));
  for (const auto& [cat, axes] : r.curves) {
    CHECK(axes.size() == 3);
    for (const auto& [axis, curve] : axes)
      for (const CurvePoint& p : curve) {
        CHECK(p.precision >= 0.0);
        CHECK(p.precision <= 1.0);
      }
  }
  CHECK_THROWS_AS(build_report(std::vector<PoseError>{}), Error);
}
