#include "rbp/shape_prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rbp/error.hpp"
#include "rbp/parallel.hpp"

namespace rbp {

Points ShapePriorModel::model() const { return reconstruct_model(prior, deformation); }

Points ShapePriorModel::coords() const { return assign_coords(assignment, model()); }

Points reconstruct_model(const Points& prior, const Points& deformation) {
  if (prior.rows() != deformation.rows())
    throw Error(ErrorKind::ShapeMismatch, "prior and deformation have different point counts");
  return prior + deformation;
}

Points assign_coords(const AssignmentMatrix& assignment, const Points& model) {
  if (assignment.cols() != model.rows())
    throw Error(ErrorKind::ShapeMismatch, "assignment columns must match model points");
  for (Eigen::Index i = 0; i < assignment.rows(); ++i) {
    const double sum = assignment.row(i).sum();
    if (!(std::abs(sum - 1.0) <= 1e-6) || assignment.row(i).minCoeff() < 0.0)
      throw Error(ErrorKind::RowNotNormalized, "assignment row " + std::to_string(i) + " is not a distribution");
  }
  return assignment * model;
}

CanonicalBox canonical_bbox(const Points& model) {
  if (model.rows() < 2) throw Error(ErrorKind::DegenerateModel, "model needs at least 2 points");
  const Vec3 lo = model.colwise().minCoeff().transpose();
  const Vec3 hi = model.colwise().maxCoeff().transpose();
  const Vec3 size = hi - lo;
  if (!(size.minCoeff() >= 1e-9)) throw Error(ErrorKind::DegenerateModel, "model is flat along an axis");
  return {size, 0.5 * (lo + hi)};
}

SharedBoxReport shared_bbox_check(const Points& model, const Points& coords, const AssignmentMatrix& assignment) {
  if (coords.rows() != assignment.rows() || assignment.cols() != model.rows())
    throw Error(ErrorKind::ShapeMismatch, "coords, assignment and model do not line up");
  SharedBoxReport out;
  if (coords.rows() == 0 || model.rows() == 0) return out;
  out.lower_slack = (coords.colwise().minCoeff() - model.colwise().minCoeff()).transpose();
  out.upper_slack = (model.colwise().maxCoeff() - coords.colwise().maxCoeff()).transpose();
  // Rounding in the matrix product can push a one-hot row a few ulps out.
  const double tol = 1e-12 * std::max(1.0, model.cwiseAbs().maxCoeff());
  out.contained = (out.lower_slack.array() >= -tol).all() && (out.upper_slack.array() >= -tol).all();
  return out;
}

AssignmentMatrix nearest_assignment(const Points& queries, const Points& model) {
  if (model.rows() == 0) throw Error(ErrorKind::DegenerateModel, "empty model");
  AssignmentMatrix out = AssignmentMatrix::Zero(queries.rows(), model.rows());
  const Eigen::Index n = queries.rows();
  RBP_OMP(parallel for schedule(static))
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    (model.rowwise() - queries.row(i)).rowwise().squaredNorm().minCoeff(&best);
    out(i, best) = 1.0;
  }
  return out;
}

AssignmentMatrix soft_assignment(const Points& queries, const Points& model, int k, double bandwidth) {
  if (model.rows() == 0) throw Error(ErrorKind::DegenerateModel, "empty model");
  if (k < 1 || !(bandwidth > 0.0)) throw Error(ErrorKind::DegenerateInput, "k and bandwidth must be positive");
  const Eigen::Index kk = std::min<Eigen::Index>(k, model.rows());
  AssignmentMatrix out = AssignmentMatrix::Zero(queries.rows(), model.rows());
  const Eigen::Index n = queries.rows();
  RBP_OMP(parallel for schedule(static))
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd d2 = (model.rowwise() - queries.row(i)).rowwise().squaredNorm();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(model.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::partial_sort(idx.begin(), idx.begin() + kk, idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      return d2(a) < d2(b) || (d2(a) == d2(b) && a < b);
    });
    const double nearest = d2(idx[0]);
    double total = 0.0;
    for (Eigen::Index j = 0; j < kk; ++j) {
      const double w = std::exp(-(d2(idx[j]) - nearest) / (bandwidth * bandwidth));
      out(i, idx[j]) = w;
      total += w;
    }
    out.row(i) /= total;
  }
  return out;
}

Points cap_deformation(const Points& deformation, double max_norm) {
  Points out = deformation;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > max_norm) out.row(i) *= max_norm / norm;
  }
  return out;
}

}  // namespace rbp
