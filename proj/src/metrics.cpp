#include "rbp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "rbp/error.hpp"
#include "rbp/parallel.hpp"

namespace rbp {

namespace {

struct Lattice {
  Vec3 lo;
  Vec3 step;
  int res;

  Vec3 cell(int i, int j, int k) const {
    return lo + Vec3((i + 0.5) * step(0), (j + 0.5) * step(1), (k + 0.5) * step(2));
  }
};

struct CellCounts {
  std::int64_t in_a = 0;
  std::int64_t in_b = 0;
  std::int64_t in_both = 0;
};

// Fixed frame the lattice is laid out in. Boxes aligned with the world axes
// are common inputs; a lattice aligned with their faces quantizes every face
// the same way and biases the count. Any generic rotation breaks that.
const Mat3& lattice_frame() {
  static const Mat3 q = rot_z(0.6154797087) * rot_y(0.4636476090) * rot_x(0.2914567945);
  return q;
}

OrientedBox to_lattice_frame(const OrientedBox& box) {
  const Mat3& q = lattice_frame();
  return {q.transpose() * box.center, q.transpose() * box.rotation, box.extents};
}

Lattice union_lattice(const OrientedBox& a, const OrientedBox& b, int resolution) {
  if (resolution < 1) throw Error(ErrorKind::DegenerateInput, "IoU resolution must be positive");
  if (!((a.extents.array() > 0.0).all() && (b.extents.array() > 0.0).all()))
    throw Error(ErrorKind::DegenerateInput, "box extents must be positive");
  Vec3 lo_a = Vec3::Constant(INFINITY), hi_a = Vec3::Constant(-INFINITY);
  Vec3 lo_b = lo_a, hi_b = hi_a;
  for (const Vec3& c : a.corners()) {
    lo_a = lo_a.cwiseMin(c);
    hi_a = hi_a.cwiseMax(c);
  }
  for (const Vec3& c : b.corners()) {
    lo_b = lo_b.cwiseMin(c);
    hi_b = hi_b.cwiseMax(c);
  }
  const Vec3 lo = lo_a.cwiseMin(lo_b);
  const Vec3 hi = hi_a.cwiseMax(hi_b);
  return {lo, (hi - lo) / resolution, resolution};
}

inline void count_slice(const OrientedBox& a, const OrientedBox& b, const Lattice& lat, int i, CellCounts& c) {
  for (int j = 0; j < lat.res; ++j) {
    for (int k = 0; k < lat.res; ++k) {
      const Vec3 p = lat.cell(i, j, k);
      const bool ia = a.contains(p);
      const bool ib = b.contains(p);
      c.in_a += ia;
      c.in_b += ib;
      c.in_both += ia && ib;
    }
  }
}

double ratio(const CellCounts& c) {
  const std::int64_t uni = c.in_a + c.in_b - c.in_both;
  return uni > 0 ? static_cast<double>(c.in_both) / static_cast<double>(uni) : 0.0;
}

double precision_of(std::span<const PoseError> errors, auto&& pass) {
  if (errors.empty()) throw Error(ErrorKind::EmptyInput, "no pose errors to evaluate");
  std::size_t hits = 0;
  for (const PoseError& e : errors) hits += pass(e) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

}  // namespace

double aligned_box_iou(const OrientedBox& a, const OrientedBox& b) {
  if ((a.rotation - b.rotation).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorKind::DegenerateInput, "boxes are not in a common frame");
  const Vec3 offset = a.rotation.transpose() * (b.center - a.center);
  double inter = 1.0;
  for (int ax = 0; ax < 3; ++ax) {
    const double lo = std::max(-0.5 * a.extents(ax), offset(ax) - 0.5 * b.extents(ax));
    const double hi = std::min(0.5 * a.extents(ax), offset(ax) + 0.5 * b.extents(ax));
    inter *= std::max(0.0, hi - lo);
  }
  return inter / (a.volume() + b.volume() - inter);
}

double box_iou_3d_sampled(const OrientedBox& a_world, const OrientedBox& b_world, int resolution) {
  const OrientedBox a = to_lattice_frame(a_world), b = to_lattice_frame(b_world);
  const Lattice lat = union_lattice(a, b, resolution);
  std::int64_t in_a = 0, in_b = 0, in_both = 0;
  RBP_OMP(parallel for schedule(static) reduction(+ : in_a, in_b, in_both))
  for (int i = 0; i < lat.res; ++i) {
    CellCounts c;
    count_slice(a, b, lat, i, c);
    in_a += c.in_a;
    in_b += c.in_b;
    in_both += c.in_both;
  }
  return ratio({in_a, in_b, in_both});
}

namespace serial {

double box_iou_3d_sampled(const OrientedBox& a_world, const OrientedBox& b_world, int resolution) {
  const OrientedBox a = to_lattice_frame(a_world), b = to_lattice_frame(b_world);
  const Lattice lat = union_lattice(a, b, resolution);
  CellCounts c;
  for (int i = 0; i < lat.res; ++i) count_slice(a, b, lat, i, c);
  return ratio(c);
}

}  // namespace serial

double box_iou_3d(const OrientedBox& a, const OrientedBox& b, int resolution) {
  if ((a.rotation - b.rotation).cwiseAbs().maxCoeff() <= 1e-12) return aligned_box_iou(a, b);
  return box_iou_3d_sampled(a, b, resolution);
}

double rotation_error(const Mat3& a, const Mat3& b, const SymmetryTag& sym) {
  if (sym.type == SymmetryType::AxialY) return rad2deg(vector_angle(a.col(1), b.col(1)));
  return rad2deg(rotation_angle(a, b));
}

PoseError pose_error(const Pose9D& pred, const Pose9D& gt, const SymmetryTag& sym, int iou_resolution) {
  PoseError e;
  e.category = sym.category;
  e.rotation_deg = rotation_error(pred.rotation, gt.rotation, sym);
  e.translation_cm = 100.0 * (pred.translation - gt.translation).norm();
  e.iou = box_iou_3d(OrientedBox::from_pose(pred), OrientedBox::from_pose(gt), iou_resolution);
  return e;
}

double threshold_metric(std::span<const PoseError> errors, double rot_thresh_deg, double trans_thresh_cm) {
  if (!(rot_thresh_deg > 0.0) || !(trans_thresh_cm > 0.0))
    throw Error(ErrorKind::DegenerateInput, "thresholds must be positive");
  return precision_of(errors, [&](const PoseError& e) {
    return e.rotation_deg < rot_thresh_deg && e.translation_cm < trans_thresh_cm;
  });
}

double iou_metric(std::span<const PoseError> errors, double iou_thresh) {
  return precision_of(errors, [&](const PoseError& e) { return e.iou > iou_thresh; });
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Iou: return "iou";
    case SweepAxis::Rotation: return "rotation";
    case SweepAxis::Translation: return "translation";
  }
  return "unknown";
}

std::vector<CurvePoint> map_sweep(std::span<const PoseError> errors, SweepAxis axis, std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorKind::EmptyInput, "empty threshold grid");
  if (!std::is_sorted(grid.begin(), grid.end())) throw Error(ErrorKind::DegenerateInput, "grid must be ascending");
  std::vector<CurvePoint> curve;
  curve.reserve(grid.size());
  for (double tau : grid) {
    double p = 0.0;
    switch (axis) {
      case SweepAxis::Iou: p = precision_of(errors, [&](const PoseError& e) { return e.iou >= tau; }); break;
      case SweepAxis::Rotation: p = precision_of(errors, [&](const PoseError& e) { return e.rotation_deg <= tau; }); break;
      case SweepAxis::Translation:
        p = precision_of(errors, [&](const PoseError& e) { return e.translation_cm <= tau; });
        break;
    }
    curve.push_back({tau, p});
  }
  if (axis == SweepAxis::Iou) std::reverse(curve.begin(), curve.end());
  return curve;
}

std::vector<double> default_grid(SweepAxis axis) {
  std::vector<double> g;
  switch (axis) {
    case SweepAxis::Iou:
      for (int i = 0; i <= 100; ++i) g.push_back(i / 100.0);
      break;
    case SweepAxis::Rotation:
      for (int i = 0; i <= 60; ++i) g.push_back(i);
      break;
    case SweepAxis::Translation:
      for (int i = 0; i <= 100; ++i) g.push_back(i / 10.0);
      break;
  }
  return g;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

namespace {

void fill_medians(MetricRow& r, std::span<const PoseError> errors) {
  std::vector<double> rot, trans, iou;
  for (const PoseError& e : errors) {
    rot.push_back(e.rotation_deg);
    trans.push_back(e.translation_cm);
    iou.push_back(e.iou);
  }
  r.median_rotation_deg = median(std::move(rot));
  r.median_translation_cm = median(std::move(trans));
  r.median_iou = median(std::move(iou));
}

MetricRow row_for(const std::string& category, std::span<const PoseError> errors) {
  MetricRow r;
  r.category = category;
  r.count = errors.size();
  r.iou50 = iou_metric(errors, 0.5);
  r.iou75 = iou_metric(errors, 0.75);
  r.deg5_cm2 = threshold_metric(errors, 5, 2);
  r.deg5_cm5 = threshold_metric(errors, 5, 5);
  r.deg10_cm2 = threshold_metric(errors, 10, 2);
  r.deg10_cm5 = threshold_metric(errors, 10, 5);
  fill_medians(r, errors);
  return r;
}

}  // namespace

MetricReport build_report(std::span<const PoseError> errors) {
  if (errors.empty()) throw Error(ErrorKind::EmptyInput, "no pose errors to report");
  std::map<std::string, std::vector<PoseError>> by_category;
  for (const PoseError& e : errors) by_category[e.category].push_back(e);

  MetricReport report;
  report.mean.category = "mean";
  constexpr SweepAxis kAxes[] = {SweepAxis::Iou, SweepAxis::Rotation, SweepAxis::Translation};
  for (const auto& [name, errs] : by_category) {
    report.categories.push_back(row_for(name, errs));
    for (SweepAxis axis : kAxes) {
      const auto grid = default_grid(axis);
      report.curves[name][std::string(to_string(axis))] = map_sweep(errs, axis, grid);
    }
  }

  const double k = static_cast<double>(report.categories.size());
  // Sum, then divide once, so k perfect categories average to exactly 1.
  MetricRow& m = report.mean;
  for (const MetricRow& r : report.categories) {
    m.count += r.count;
    m.iou50 += r.iou50;
    m.iou75 += r.iou75;
    m.deg5_cm2 += r.deg5_cm2;
    m.deg5_cm5 += r.deg5_cm5;
    m.deg10_cm2 += r.deg10_cm2;
    m.deg10_cm5 += r.deg10_cm5;
  }
  for (double* v : {&m.iou50, &m.iou75, &m.deg5_cm2, &m.deg5_cm5, &m.deg10_cm2, &m.deg10_cm5}) *v /= k;
  // Medians of the mean row are over all instances, not an average of medians.
  fill_medians(report.mean, errors);
  for (SweepAxis axis : kAxes) {
    const std::string key(to_string(axis));
    std::vector<CurvePoint> mean_curve;
    for (const auto& [name, curves] : report.curves) {
      if (name == "mean") continue;
      const auto& c = curves.at(key);
      if (mean_curve.empty()) {
        mean_curve = c;
        for (auto& p : mean_curve) p.precision = 0.0;
      }
      for (std::size_t i = 0; i < c.size(); ++i) mean_curve[i].precision += c[i].precision;
    }
    for (auto& p : mean_curve) p.precision /= k;
    report.curves["mean"][key] = mean_curve;
  }
  return report;
}

}  // namespace rbp
