#include <doctest.h>

#include <cmath>

#include "rbp/error.hpp"
#include "rbp/shape_prior.hpp"
#include "support.hpp"

using namespace rbp;
using namespace rbp::test;

namespace {

Points cube_corners() {
  Points p(8, 3);
  for (int i = 0; i < 8; ++i) p.row(i) << (i & 1 ? 0.5 : -0.5), (i & 2 ? 0.5 : -0.5), (i & 4 ? 0.5 : -0.5);
  return p;
}

AssignmentMatrix random_assignment(Eigen::Index n, Eigen::Index m, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AssignmentMatrix a(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = u(rng);
    a.row(i) /= a.row(i).sum();
  }
  return a;
}

// Symmetric Chamfer distance by brute force: mean nearest-neighbour distance both ways.
double chamfer(const Points& a, const Points& b) {
  auto one_way = [](const Points& p, const Points& q) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      double best = INFINITY;
      for (Eigen::Index j = 0; j < q.rows(); ++j) best = std::min(best, (p.row(i) - q.row(j)).norm());
      total += best;
    }
    return total / static_cast<double>(p.rows());
  };
  return 0.5 * (one_way(a, b) + one_way(b, a));
}

// A point is outside the convex hull of `hull` if some direction separates it.
bool inside_hull_by_support(const Vec3& p, const Points& hull, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Vec3 d(g(rng), g(rng), g(rng));
    if (d.dot(p) > (hull * d).maxCoeff() + 1e-12) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("reconstruct_model") {
  Rng rng(31);
  const Points prior = random_points(64, rng, -0.4, 0.4);
  CHECK(reconstruct_model(prior, Points::Zero(64, 3)) == prior);

  const Points corners = cube_corners();
  Points d = Points::Zero(8, 3);
  d(3, 0) = 0.1;
  const Points m = reconstruct_model(corners, d);
  CHECK(m(3, 0) == doctest::Approx(corners(3, 0) + 0.1));
  CHECK(m.bottomRows(4) == corners.bottomRows(4));

  CHECK_THROWS_AS(reconstruct_model(prior, Points::Zero(63, 3)), Error);

  SUBCASE("small deformations move the shape by at most their norm") {
    for (int trial = 0; trial < 5; ++trial) {
      const Points raw = random_points(64, rng, -1.0, 1.0);
      const Points capped = cap_deformation(raw, 0.05);
      CHECK(capped.rowwise().norm().maxCoeff() <= 0.05 + 1e-15);
      CHECK(chamfer(reconstruct_model(prior, capped), prior) <= 0.05);
    }
  }
}

TEST_CASE("assign_coords") {
  Rng rng(32);
  const Points model = random_points(50, rng, -0.5, 0.5);

  SUBCASE("one-hot rows select points") {
    AssignmentMatrix a = AssignmentMatrix::Zero(3, 50);
    a(0, 7) = a(1, 0) = a(2, 49) = 1.0;
    const Points c = assign_coords(a, model);
    CHECK(c.row(0) == model.row(7));
    CHECK(c.row(1) == model.row(0));
    CHECK(c.row(2) == model.row(49));
  }
  SUBCASE("uniform rows give the centroid") {
    const AssignmentMatrix a = AssignmentMatrix::Constant(2, 50, 1.0 / 50.0);
    const Points c = assign_coords(a, model);
    CHECK((c.row(0) - model.colwise().mean()).norm() < 1e-15);
  }
  SUBCASE("random rows stay inside the hull") {
    const AssignmentMatrix a = random_assignment(100, 50, rng);
    const Points c = assign_coords(a, model);
    for (Eigen::Index i = 0; i < c.rows(); ++i) CHECK(inside_hull_by_support(c.row(i).transpose(), model, rng));
  }
  SUBCASE("linear in the model") {
    const AssignmentMatrix a = random_assignment(20, 50, rng);
    const Points other = random_points(50, rng);
    CHECK(max_abs(assign_coords(a, model + other) - assign_coords(a, model) - assign_coords(a, other)) < 1e-12);
  }
  SUBCASE("rejects rows that are not distributions") {
    AssignmentMatrix a = random_assignment(4, 50, rng);
    a(2, 3) += 1e-5;
    try {
      assign_coords(a, model);
      FAIL("expected RowNotNormalized");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::RowNotNormalized);
    }
    AssignmentMatrix neg = AssignmentMatrix::Zero(1, 50);
    neg(0, 0) = 1.5;
    neg(0, 1) = -0.5;
    CHECK_THROWS_AS(assign_coords(neg, model), Error);
    CHECK_THROWS_AS(assign_coords(AssignmentMatrix::Constant(1, 49, 1.0 / 49), model), Error);
  }
}

TEST_CASE("canonical_bbox") {
  const Points corners = cube_corners();
  const CanonicalBox b = canonical_bbox(corners);
  CHECK(b.size == Vec3::Ones());
  CHECK(b.center == Vec3::Zero());

  Points squeezed = corners;
  squeezed.col(0) *= 0.6;
  CHECK((canonical_bbox(squeezed).size - Vec3(0.6, 1, 1)).norm() < 1e-15);

  Rng rng(33);
  const Points model = reconstruct_model(random_points(200, rng, -0.4, 0.4), 0.05 * random_points(200, rng));
  Vec3 lo = Vec3::Constant(INFINITY), hi = Vec3::Constant(-INFINITY);
  for (Eigen::Index i = 0; i < model.rows(); ++i)
    for (int a = 0; a < 3; ++a) {
      lo(a) = std::min(lo(a), model(i, a));
      hi(a) = std::max(hi(a), model(i, a));
    }
  const CanonicalBox m = canonical_bbox(model);
  CHECK(m.size == hi - lo);
  CHECK(m.center == 0.5 * (lo + hi));
  CHECK(max_abs(canonical_bbox(2.5 * model).size - 2.5 * m.size) < 1e-15);

  Points flat = corners;
  flat.col(2).setZero();
  CHECK_THROWS_AS(canonical_bbox(flat), Error);
  CHECK_THROWS_AS(canonical_bbox(corners.topRows(1)), Error);
}

TEST_CASE("shared_bbox_check") {
  const Points corners = cube_corners();
  SUBCASE("one-hot rows over the extreme points reproduce the box") {
    const AssignmentMatrix a = AssignmentMatrix::Identity(8, 8);
    const SharedBoxReport r = shared_bbox_check(corners, assign_coords(a, corners), a);
    CHECK(r.contained);
    CHECK(r.lower_slack.norm() == 0.0);
    CHECK(r.upper_slack.norm() == 0.0);
  }
  SUBCASE("uniform rows shrink the box strictly") {
    const AssignmentMatrix a = AssignmentMatrix::Constant(3, 8, 1.0 / 8.0);
    const SharedBoxReport r = shared_bbox_check(corners, assign_coords(a, corners), a);
    CHECK(r.contained);
    CHECK(r.lower_slack.minCoeff() > 0.0);
    CHECK(r.upper_slack.minCoeff() > 0.0);
  }
  SUBCASE("random assignments are always contained") {
    Rng rng(34);
    for (int trial = 0; trial < 50; ++trial) {
      const Points model = random_points(40, rng, -0.5, 0.5);
      const AssignmentMatrix a = random_assignment(30, 40, rng);
      CHECK(shared_bbox_check(model, assign_coords(a, model), a).contained);
    }
  }
  SUBCASE("coords outside the model box are reported") {
    const AssignmentMatrix a = AssignmentMatrix::Identity(8, 8);
    Points coords = corners;
    coords(0, 0) = -0.6;
    CHECK_FALSE(shared_bbox_check(corners, coords, a).contained);
  }
}

TEST_CASE("nearest and soft assignment") {
  Rng rng(35);
  const Points model = random_points(100, rng, -0.5, 0.5);
  const Points queries = model.topRows(10);
  const AssignmentMatrix near = nearest_assignment(queries, model);
  CHECK(assign_coords(near, model) == queries);

  const AssignmentMatrix soft = soft_assignment(random_points(20, rng, -0.5, 0.5), model, 8, 0.05);
  for (Eigen::Index i = 0; i < soft.rows(); ++i) {
    CHECK(soft.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((soft.row(i).array() > 0.0).count() <= 8);
    CHECK(soft.row(i).minCoeff() >= 0.0);
  }
  // A tiny bandwidth collapses onto the nearest point.
  const AssignmentMatrix sharp = soft_assignment(queries, model, 4, 1e-9);
  CHECK(max_abs(sharp - near) < 1e-12);
  CHECK_THROWS_AS(soft_assignment(queries, model, 0, 0.1), Error);
}

TEST_CASE("ShapePriorModel") {
  Rng rng(36);
  ShapePriorModel m{random_points(30, rng), 0.01 * random_points(30, rng), random_assignment(5, 30, rng)};
  CHECK(m.model() == m.prior + m.deformation);
  CHECK(max_abs(m.coords() - m.assignment * m.model()) < 1e-15);
}
