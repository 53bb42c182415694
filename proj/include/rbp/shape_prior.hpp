#pragma once

#include "rbp/geometry.hpp"

namespace rbp {

/// Row-normalized non-negative N x M weights.
using AssignmentMatrix = Eigen::MatrixXd;

/// Category mean shape, its deformation and the observed-to-model assignment.
struct ShapePriorModel {
  Points prior;                // M x 3, NOCS
  Points deformation;          // M x 3, NOCS displacements
  AssignmentMatrix assignment; // N x M

  Points model() const;   // prior + deformation
  Points coords() const;  // assignment * model()
};

/// M_r = P_r + D_r. Throws ShapeMismatch.
Points reconstruct_model(const Points& prior, const Points& deformation);

/// C_o = A_r M_r. Throws RowNotNormalized if any row sum is off by more than
/// 1e-6 or any weight is negative, ShapeMismatch on dimension mismatch.
Points assign_coords(const AssignmentMatrix& assignment, const Points& model);

struct CanonicalBox {
  Vec3 size;
  Vec3 center;
};

/// Extent and midpoint of the outermost points along x, y and z.
/// Throws DegenerateModel if any axis extent is below 1e-9.
CanonicalBox canonical_bbox(const Points& model);

struct SharedBoxReport {
  bool contained = false;
  Vec3 lower_slack = Vec3::Zero();  // min(coords) - min(model), per axis
  Vec3 upper_slack = Vec3::Zero();  // max(model) - max(coords), per axis
};

/// Checks that the box of the assigned coordinates lies inside the model box.
/// Convex combinations can only shrink the box, so the slacks are >= 0 and are
/// zero only on axes where an extreme model point gets full weight.
SharedBoxReport shared_bbox_check(const Points& model, const Points& coords, const AssignmentMatrix& assignment);

/// One-hot rows selecting the nearest model point for each query point.
AssignmentMatrix nearest_assignment(const Points& queries, const Points& model);

/// Gaussian-weighted soft assignment over the k nearest model points.
AssignmentMatrix soft_assignment(const Points& queries, const Points& model, int k, double bandwidth);

/// Scales each deformation row down to at most `max_norm`.
Points cap_deformation(const Points& deformation, double max_norm);

}  // namespace rbp
