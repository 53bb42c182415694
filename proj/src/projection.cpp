#include "rbp/projection.hpp"

#include <cmath>

#include "rbp/error.hpp"
#include "rbp/parallel.hpp"

namespace rbp {

namespace {

constexpr const char* kFaceNames[kFaceCount] = {"x+", "x-", "y+", "y-", "z+", "z-"};

inline void encode_point(const Points& points, Eigen::Index i, const Pose9D& pose, const FaceMask& mask,
                         ProjectionField& out) {
  const Vec3 rel = points.row(i).transpose() - pose.translation;
  for (int f = 0; f < kFaceCount; ++f) {
    if (!mask[f]) continue;
    const FaceId face = FaceId::from_index(f);
    const Vec3 normal = face.sign * pose.rotation.col(face.axis);
    const double m = 0.5 * pose.size(face.axis) - normal.dot(rel);
    out.set(i, f, m * normal);
  }
}

void require_compatible(const ProjectionField& a, const ProjectionField& b) {
  if (a.mask != b.mask) throw Error(ErrorKind::MaskMismatch, "fields have different face masks");
  if (a.size() != b.size()) throw Error(ErrorKind::ShapeMismatch, "fields have different point counts");
}

}  // namespace

std::string FaceId::name() const { return kFaceNames[index()]; }

FaceId FaceId::parse(std::string_view name) {
  for (int f = 0; f < kFaceCount; ++f)
    if (name == kFaceNames[f]) return from_index(f);
  throw Error(ErrorKind::DegenerateInput, "unknown face '" + std::string(name) + "'");
}

std::string_view to_string(SymmetryType type) { return type == SymmetryType::AxialY ? "axial-y" : "none"; }

SymmetryType parse_symmetry(std::string_view name) {
  if (name == "none") return SymmetryType::None;
  if (name == "axial-y") return SymmetryType::AxialY;
  throw Error(ErrorKind::DegenerateInput, "unknown symmetry '" + std::string(name) + "'");
}

FaceMask valid_faces(const SymmetryTag& sym) {
  if (sym.type == SymmetryType::AxialY) {
    FaceMask m;
    m.set(FaceId{1, 1}.index());
    m.set(FaceId{1, -1}.index());
    return m;
  }
  return FaceMask().set();
}

std::vector<FaceId> faces_of(const FaceMask& mask) {
  std::vector<FaceId> out;
  for (int f = 0; f < kFaceCount; ++f)
    if (mask[f]) out.push_back(FaceId::from_index(f));
  return out;
}

ProjectionField SprvField::corrected() const { return add_fields(hypothesis, residual); }

ProjectionField encode_dvpb(const Points& points, const Pose9D& pose, const SymmetryTag& sym) {
  ProjectionField out(points.rows(), valid_faces(sym));
  const Eigen::Index n = points.rows();
  RBP_OMP(parallel for schedule(static))
  for (Eigen::Index i = 0; i < n; ++i) encode_point(points, i, pose, out.mask, out);
  return out;
}

namespace serial {

ProjectionField encode_dvpb(const Points& points, const Pose9D& pose, const SymmetryTag& sym) {
  ProjectionField out(points.rows(), valid_faces(sym));
  for (Eigen::Index i = 0; i < points.rows(); ++i) encode_point(points, i, pose, out.mask, out);
  return out;
}

}  // namespace serial

std::array<double, kFaceCount> encode_dvpb_nocs(const NocsCoord& coord, const Vec3& model_size,
                                                const SymmetryTag& sym) {
  const FaceMask mask = valid_faces(sym);
  std::array<double, kFaceCount> out{};
  for (int f = 0; f < kFaceCount; ++f) {
    if (!mask[f]) continue;
    const FaceId face = FaceId::from_index(f);
    out[f] = 0.5 * model_size(face.axis) - face.sign * coord.value(face.axis);
  }
  return out;
}

FaceScalarField encode_dvpb_nocs(const Points& coords, const Vec3& model_size, const SymmetryTag& sym) {
  FaceScalarField out{valid_faces(sym), FaceScalars::Zero(coords.rows(), kFaceCount)};
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    const auto row = encode_dvpb_nocs(NocsCoord{coords.row(i).transpose()}, model_size, sym);
    for (int f = 0; f < kFaceCount; ++f) out.values(i, f) = row[f];
  }
  return out;
}

ProjectionField hypothesize_dvpb(const FaceScalarField& nocs, double diagonal, const Mat3& rotation) {
  if (!(diagonal > 0.0)) throw Error(ErrorKind::DegenerateInput, "diagonal length must be positive");
  ProjectionField out(nocs.values.rows(), nocs.mask);
  for (Eigen::Index i = 0; i < nocs.values.rows(); ++i) {
    for (int f = 0; f < kFaceCount; ++f) {
      if (!nocs.mask[f]) continue;
      const FaceId face = FaceId::from_index(f);
      out.set(i, f, (diagonal * nocs.values(i, f)) * (face.sign * rotation.col(face.axis)));
    }
  }
  return out;
}

SprvField compute_sprv(const ProjectionField& gt, const ProjectionField& hyp) {
  require_compatible(gt, hyp);
  SprvField out{ProjectionField(gt.size(), gt.mask), hyp};
  out.residual.vectors = gt.vectors - hyp.vectors;
  return out;
}

ProjectionField add_fields(const ProjectionField& a, const ProjectionField& b) {
  require_compatible(a, b);
  ProjectionField out(a.size(), a.mask);
  out.vectors = a.vectors + b.vectors;
  return out;
}

FaceScalarField face_scalars(const ProjectionField& field, const Mat3& rotation) {
  FaceScalarField out{field.mask, FaceScalars::Zero(field.size(), kFaceCount)};
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    for (int f = 0; f < kFaceCount; ++f) {
      if (!field.mask[f]) continue;
      const FaceId face = FaceId::from_index(f);
      out.values(i, f) = field.at(i, f).dot(face.sign * rotation.col(face.axis));
    }
  }
  return out;
}

Pose9D decode_pose(const ProjectionField& field, const Points& points, const SymmetryTag& sym) {
  if (sym.type != SymmetryType::None || !field.mask.all())
    throw Error(ErrorKind::SymmetryUnsupported, "decoding needs all six faces");
  if (field.size() != points.rows()) throw Error(ErrorKind::ShapeMismatch, "field and points differ in size");
  const Eigen::Index n = field.size();
  if (n < 3) throw Error(ErrorKind::DegenerateField, "decoding needs at least 3 points");
  if (!field.vectors.allFinite()) throw Error(ErrorKind::DegenerateField, "field has non-finite entries");

  Mat3 directions;
  for (int a = 0; a < 3; ++a) {
    const int plus = FaceId{a, 1}.index();
    const int minus = FaceId{a, -1}.index();
    Vec3 sum = Vec3::Zero();
    double magnitude = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      sum += field.at(i, plus) - field.at(i, minus);
      magnitude += field.at(i, plus).norm() + field.at(i, minus).norm();
    }
    if (!(magnitude > 0.0) || sum.norm() <= 1e-12 * magnitude)
      throw Error(ErrorKind::DegenerateField, "axis direction is unrecoverable");
    // Unnormalized: the sum has length N * size_a, so longer (better
    // determined) axes weigh more in the projection onto SO(3).
    directions.col(a) = sum;
  }

  Pose9D pose;
  try {
    pose.rotation = closest_rotation(directions);
  } catch (const Error&) {
    throw Error(ErrorKind::DegenerateField, "axis directions are linearly dependent");
  }

  Vec3 offsets;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int a = 0; a < 3; ++a) {
    const Vec3 r = pose.rotation.col(a);
    const int plus = FaceId{a, 1}.index();
    const int minus = FaceId{a, -1}.index();
    double size_sum = 0.0;
    double offset_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mp = field.at(i, plus).dot(r);
      const double mm = -field.at(i, minus).dot(r);
      size_sum += mp + mm;
      offset_sum += r.dot(points.row(i).transpose()) - 0.5 * (mm - mp);
    }
    pose.size(a) = size_sum * inv_n;
    offsets(a) = offset_sum * inv_n;
  }
  if (!((pose.size.array() > 0.0).all())) throw Error(ErrorKind::DegenerateField, "decoded size is not positive");
  pose.translation = pose.rotation * offsets;
  return pose;
}

double mean_vector_norm(const ProjectionField& field) {
  double total = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    for (int f = 0; f < kFaceCount; ++f) {
      if (!field.mask[f]) continue;
      total += field.at(i, f).norm();
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

}  // namespace rbp
