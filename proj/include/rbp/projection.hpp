#pragma once

#include <array>
#include <bitset>
#include <string>
#include <string_view>
#include <vector>

#include "rbp/geometry.hpp"

namespace rbp {

// Bounding-box projection fields.
//
// For an observed point P and a box face (axis a, sign s), the displacement
// to the face plane along the directed normal s * r_a is
//
//   m = size_a / 2 - s * <r_a, P - t>,     D = m * (s * r_a).
//
// Points outside the box give negative m; nothing is clamped, so the two
// faces of an axis always satisfy m+ + m- = size_a.

inline constexpr int kFaceCount = 6;

/// One of the six faces x+, x-, y+, y-, z+, z-. Index = 2 * axis + (sign < 0).
struct FaceId {
  int axis = 0;
  int sign = 1;

  constexpr int index() const { return 2 * axis + (sign < 0 ? 1 : 0); }
  static constexpr FaceId from_index(int i) { return {i / 2, (i % 2) ? -1 : 1}; }
  std::string name() const;
  static FaceId parse(std::string_view name);
  friend constexpr bool operator==(FaceId a, FaceId b) { return a.axis == b.axis && a.sign == b.sign; }
};

using FaceMask = std::bitset<kFaceCount>;

enum class SymmetryType { None, AxialY };

struct SymmetryTag {
  std::string category;
  SymmetryType type = SymmetryType::None;
};

std::string_view to_string(SymmetryType type);
SymmetryType parse_symmetry(std::string_view name);

/// Faces whose projection is unambiguous under the symmetry: all six, or
/// only y+ / y- for objects symmetric about their y axis.
FaceMask valid_faces(const SymmetryTag& sym);
std::vector<FaceId> faces_of(const FaceMask& mask);

/// Per-point, per-face displacement vectors (camera frame, meters). Row i holds
/// the six faces of point i as consecutive xyz triples; masked faces are zero.
struct ProjectionField {
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, 3 * kFaceCount, Eigen::RowMajor>;

  FaceMask mask;
  Storage vectors;

  ProjectionField() = default;
  ProjectionField(Eigen::Index count, FaceMask m) : mask(m), vectors(Storage::Zero(count, 3 * kFaceCount)) {}

  Eigen::Index size() const { return vectors.rows(); }
  Vec3 at(Eigen::Index i, int face) const { return vectors.row(i).segment<3>(3 * face).transpose(); }
  void set(Eigen::Index i, int face, const Vec3& v) { vectors.row(i).segment<3>(3 * face) = v.transpose(); }
};

/// Per-point signed face scalars, columns in face-index order.
using FaceScalars = Eigen::Matrix<double, Eigen::Dynamic, kFaceCount, Eigen::RowMajor>;

struct FaceScalarField {
  FaceMask mask;
  FaceScalars values;
};

/// Residual field R = D_gt - D_hyp together with the hypothesis it corrects.
struct SprvField {
  ProjectionField residual;
  ProjectionField hypothesis;

  /// hypothesis + residual, i.e. the displacement field the residual implies.
  ProjectionField corrected() const;
};

/// Ground-truth displacement field of camera-frame points under `pose`.
/// Per-point work runs in parallel; output is identical to serial::encode_dvpb.
ProjectionField encode_dvpb(const Points& points, const Pose9D& pose, const SymmetryTag& sym);

/// Scalars m_{a,s} = model_size_a / 2 - s * c_a for coordinates in NOCS.
std::array<double, kFaceCount> encode_dvpb_nocs(const NocsCoord& coord, const Vec3& model_size,
                                                const SymmetryTag& sym);
FaceScalarField encode_dvpb_nocs(const Points& coords, const Vec3& model_size, const SymmetryTag& sym);

/// Lifts NOCS scalars to camera-frame hypotheses L * m * (s * r_a).
ProjectionField hypothesize_dvpb(const FaceScalarField& nocs, double diagonal, const Mat3& rotation);

/// Entrywise gt - hyp. Throws MaskMismatch / ShapeMismatch.
SprvField compute_sprv(const ProjectionField& gt, const ProjectionField& hyp);

/// a + b on valid entries (e.g. hypothesis + predicted residual).
ProjectionField add_fields(const ProjectionField& a, const ProjectionField& b);

/// Signed magnitudes <v, s * r_a> of every entry with respect to `rotation`.
FaceScalarField face_scalars(const ProjectionField& field, const Mat3& rotation);

/// Recovers the 9DoF pose from a complete six-face field.
///
/// The direction of axis a is the sum over points of (v_a+ - v_a-), which
/// equals N * size_a * r_a on an exact field. The stacked sums are projected
/// onto SO(3) (so longer axes carry more weight); sizes and translation follow from the per-point face
/// pairs by least squares (u = (m- - m+) / 2 = <r_a, P - t>).
/// Throws SymmetryUnsupported for symmetric tags or partial masks and
/// DegenerateField for fewer than three points or a vanishing axis.
Pose9D decode_pose(const ProjectionField& field, const Points& points, const SymmetryTag& sym);

/// Mean Euclidean length over valid entries.
double mean_vector_norm(const ProjectionField& field);

namespace serial {

/// Single-threaded reference for the parallel encoder.
ProjectionField encode_dvpb(const Points& points, const Pose9D& pose, const SymmetryTag& sym);

}  // namespace serial

}  // namespace rbp
