#pragma once

#include <Eigen/Core>

#include "rbp/geometry.hpp"

namespace rbp {

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double depth_scale = 1.0;  // meters per raw depth unit
};

/// Depth image indexed (row v, column u).
using DepthImage = Eigen::ArrayXXd;
using MaskImage = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Masked pixels to camera-frame points ((u - cx) d / fx, (v - cy) d / fy, d),
/// with d = raw * depth_scale, in row-major pixel order.
/// Throws EmptyMask, NonPositiveDepth, ShapeMismatch.
Points backproject(const DepthImage& depth, const MaskImage& mask, const CameraIntrinsics& k);

/// Pinhole projection to continuous pixel coordinates (u, v) and depth.
Points project(const Points& points, const CameraIntrinsics& k);

}  // namespace rbp
