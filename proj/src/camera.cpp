#include "rbp/camera.hpp"

#include "rbp/error.hpp"

namespace rbp {

Points backproject(const DepthImage& depth, const MaskImage& mask, const CameraIntrinsics& k) {
  if (depth.rows() != mask.rows() || depth.cols() != mask.cols())
    throw Error(ErrorKind::ShapeMismatch, "depth and mask sizes differ");
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) throw Error(ErrorKind::DegenerateInput, "focal lengths must be positive");
  const Eigen::Index count = mask.count();
  if (count == 0) throw Error(ErrorKind::EmptyMask, "mask selects no pixels");

  Points out(count, 3);
  Eigen::Index n = 0;
  for (Eigen::Index v = 0; v < depth.rows(); ++v) {
    for (Eigen::Index u = 0; u < depth.cols(); ++u) {
      if (!mask(v, u)) continue;
      const double d = depth(v, u) * k.depth_scale;
      if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDepth, "masked pixel has non-positive depth");
      out.row(n++) << (static_cast<double>(u) - k.cx) * d / k.fx, (static_cast<double>(v) - k.cy) * d / k.fy, d;
    }
  }
  return out;
}

Points project(const Points& points, const CameraIntrinsics& k) {
  Points out(points.rows(), 3);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double z = points(i, 2);
    out.row(i) << k.fx * points(i, 0) / z + k.cx, k.fy * points(i, 1) / z + k.cy, z;
  }
  return out;
}

}  // namespace rbp
