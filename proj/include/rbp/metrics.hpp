#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rbp/geometry.hpp"
#include "rbp/projection.hpp"

namespace rbp {

inline constexpr int kDefaultIouResolution = 50;

struct PoseError {
  std::string category;
  double rotation_deg = 0.0;
  double translation_cm = 0.0;
  double iou = 0.0;
};

/// Closed-form IoU of two boxes with the same orientation.
/// Throws DegenerateInput if the rotations differ by more than 1e-12.
double aligned_box_iou(const OrientedBox& a, const OrientedBox& b);

/// Lattice estimate of IoU: res^3 cell centers over the AABB of both boxes, taken
/// in a fixed frame that is oblique to the world axes.
/// Symmetric in (a, b) by construction. Cells are counted in parallel.
double box_iou_3d_sampled(const OrientedBox& a, const OrientedBox& b, int resolution = kDefaultIouResolution);

/// Closed form when both boxes share a frame, lattice estimate otherwise.
double box_iou_3d(const OrientedBox& a, const OrientedBox& b, int resolution = kDefaultIouResolution);

/// Rotation error in degrees. Axial-y symmetric objects only compare their y axes.
double rotation_error(const Mat3& a, const Mat3& b, const SymmetryTag& sym);

PoseError pose_error(const Pose9D& pred, const Pose9D& gt, const SymmetryTag& sym,
                     int iou_resolution = kDefaultIouResolution);

/// Fraction with rotation < rot_thresh_deg and translation < trans_thresh_cm. Throws EmptyInput.
double threshold_metric(std::span<const PoseError> errors, double rot_thresh_deg, double trans_thresh_cm);

/// Fraction with IoU > iou_thresh. Throws EmptyInput.
double iou_metric(std::span<const PoseError> errors, double iou_thresh);

enum class SweepAxis { Iou, Rotation, Translation };

std::string_view to_string(SweepAxis axis);

struct CurvePoint {
  double threshold = 0.0;
  double precision = 0.0;
};

/// Precision at each grid threshold (grid ascending). Rotation/translation
/// count errors <= tau; IoU counts iou >= tau and is returned with tau
/// descending, so every curve is non-decreasing along its points.
std::vector<CurvePoint> map_sweep(std::span<const PoseError> errors, SweepAxis axis, std::span<const double> grid);

std::vector<double> default_grid(SweepAxis axis);

struct MetricRow {
  std::string category;
  std::size_t count = 0;
  double iou50 = 0.0;
  double iou75 = 0.0;
  double deg5_cm2 = 0.0;
  double deg5_cm5 = 0.0;
  double deg10_cm2 = 0.0;
  double deg10_cm5 = 0.0;
  double median_rotation_deg = 0.0;
  double median_translation_cm = 0.0;
  double median_iou = 0.0;
};

struct MetricReport {
  std::vector<MetricRow> categories;  // sorted by name
  MetricRow mean;                     // unweighted mean over categories
  std::map<std::string, std::map<std::string, std::vector<CurvePoint>>> curves;  // category -> axis -> curve
};

/// Median of a sample (mean of the two middle values for even sizes). Throws EmptyInput.
double median(std::vector<double> values);

/// Per-category precisions, their mean, and sweep curves ("mean" curve averages categories).
MetricReport build_report(std::span<const PoseError> errors);

namespace serial {

double box_iou_3d_sampled(const OrientedBox& a, const OrientedBox& b, int resolution = kDefaultIouResolution);

}  // namespace serial

}  // namespace rbp
