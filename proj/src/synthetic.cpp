#include "rbp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <variant>

#include "rbp/error.hpp"

namespace rbp {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Orthonormal pair perpendicular to `axis`.
std::pair<Vec3, Vec3> perpendicular_basis(const Vec3& axis) {
  const Vec3 helper = std::abs(axis.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 b1 = axis.cross(helper).normalized();
  return {b1, axis.cross(b1)};
}

// Component of d orthogonal to axis, normalized; falls back to `fallback`.
Vec3 radial_direction(const Vec3& d, const Vec3& axis, const Vec3& fallback) {
  const Vec3 v = d - d.dot(axis) * axis;
  const double n = v.norm();
  return n > 1e-12 ? Vec3(v / n) : fallback;
}

struct Patch {  // origin + u e1 + v e2
  Vec3 origin, e1, e2;
  double area() const { return e1.cross(e2).norm(); }
  Vec3 sample(double u, double v) const { return origin + u * e1 + v * e2; }
  Vec3 support(const Vec3& d) const {
    Vec3 best = origin;
    for (const Vec3& c : std::array<Vec3, 3>{origin + e1, origin + e2, origin + e1 + e2})
      if (d.dot(c) > d.dot(best)) best = c;
    return best;
  }
};

struct Disk {
  Vec3 center, normal;
  double radius;
  double area() const { return M_PI * radius * radius; }
  Vec3 sample(double u, double v) const {
    const auto [b1, b2] = perpendicular_basis(normal);
    const double rho = radius * std::sqrt(u);
    return center + rho * (std::cos(kTwoPi * v) * b1 + std::sin(kTwoPi * v) * b2);
  }
  Vec3 support(const Vec3& d) const {
    const Vec3 v = d - d.dot(normal) * normal;
    return v.norm() > 1e-12 ? Vec3(center + radius * v.normalized()) : center;
  }
};

// Lateral surface of a cone frustum (a cylinder when r0 == r1) from base to base + length * axis.
struct Frustum {
  Vec3 base, axis;
  double length, r0, r1;
  double area() const { return M_PI * (r0 + r1) * std::hypot(length, r1 - r0); }
  Vec3 sample(double u, double v) const {
    double t = u;
    if (r1 != r0) {
      const double a = 0.5 * (r1 - r0);
      const double c = -u * 0.5 * (r0 + r1);
      t = (-r0 + std::sqrt(r0 * r0 - 4.0 * a * c)) / (2.0 * a);
    }
    const auto [b1, b2] = perpendicular_basis(axis);
    const double r = r0 + (r1 - r0) * t;
    return base + t * length * axis + r * (std::cos(kTwoPi * v) * b1 + std::sin(kTwoPi * v) * b2);
  }
  Vec3 support(const Vec3& d) const {
    const Vec3 radial = radial_direction(d, axis, perpendicular_basis(axis).first);
    const Vec3 p0 = base + r0 * radial;
    const Vec3 p1 = base + length * axis + r1 * radial;
    return d.dot(p1) >= d.dot(p0) ? p1 : p0;
  }
};

// Band y in [y0, y1] of a sphere (axis y) centered at `center`.
struct SphereBand {
  Vec3 center;
  double radius, y0, y1;
  double area() const { return kTwoPi * radius * (y1 - y0); }
  Vec3 at(double y, const Vec3& horizontal) const {
    const double rho = std::sqrt(std::max(0.0, radius * radius - y * y));
    return center + y * Vec3::UnitY() + rho * horizontal;
  }
  Vec3 sample(double u, double v) const {
    return at(y0 + u * (y1 - y0), Vec3(std::cos(kTwoPi * v), 0.0, std::sin(kTwoPi * v)));
  }
  Vec3 support(const Vec3& d) const {
    const double y = std::clamp(radius * d.y() / d.norm(), y0, y1);
    return at(y, radial_direction(d, Vec3::UnitY(), Vec3::UnitX()));
  }
};

// Partial torus in the x-y plane around `center`, theta in [theta0, theta1].
struct Handle {
  Vec3 center;
  double major, minor, theta0, theta1;
  double area() const { return (theta1 - theta0) * kTwoPi * minor * major; }
  Vec3 at(double theta, double phi) const {
    const Vec3 u(std::cos(theta), std::sin(theta), 0.0);
    return center + (major + minor * std::cos(phi)) * u + minor * std::sin(phi) * Vec3::UnitZ();
  }
  Vec3 sample(double u, double v) const {
    const double theta = theta0 + u * (theta1 - theta0);
    // Invert the CDF of the density (major + minor cos phi) on [0, 2 pi).
    const double target = v * kTwoPi * major;
    double phi = kTwoPi * v;
    for (int it = 0; it < 50; ++it) {
      const double f = major * phi + minor * std::sin(phi) - target;
      const double step = f / (major + minor * std::cos(phi));
      phi -= step;
      if (std::abs(step) < 1e-15) break;
    }
    return at(theta, phi);
  }
  Vec3 support(const Vec3& d) const {
    // Along d the best phi for a given theta is atan2(dz, w) with w = d . u(theta),
    // and the resulting value increases with w, so maximize w over the arc.
    const double thd = std::atan2(d.y(), d.x());
    auto w = [&](double th) { return d.x() * std::cos(th) + d.y() * std::sin(th); };
    double theta = w(theta0) >= w(theta1) ? theta0 : theta1;
    for (double cand : {thd, thd - kTwoPi, thd + kTwoPi})
      if (cand >= theta0 && cand <= theta1) theta = cand;
    return at(theta, std::atan2(d.z(), w(theta)));
  }
};

using Surface = std::variant<Patch, Disk, Frustum, SphereBand, Handle>;

struct Part {
  Surface surface;
  std::uint8_t label = 0;
};

double param(const ShapeParams& p, const char* key) {
  const auto it = p.find(key);
  if (it == p.end()) throw Error(ErrorKind::DegenerateInput, std::string("missing shape parameter '") + key + "'");
  if (!(it->second > 0.0)) throw Error(ErrorKind::DegenerateInput, std::string("shape parameter '") + key + "' must be positive");
  return it->second;
}

std::vector<Part> build_parts(Category c, const ShapeParams& p, Hinge& hinge) {
  const Vec3 up = Vec3::UnitY();
  std::vector<Part> parts;
  switch (c) {
    case Category::Can: {
      const double r = param(p, "radius"), h = param(p, "height");
      parts.push_back({Frustum{-0.5 * h * up, up, h, r, r}});
      parts.push_back({Disk{-0.5 * h * up, -up, r}});
      parts.push_back({Disk{0.5 * h * up, up, r}});
      break;
    }
    case Category::Bottle: {
      const double r = param(p, "radius"), h = param(p, "height");
      const double rn = r * param(p, "neck_ratio");
      const double body = 0.6 * h, shoulder = 0.15 * h, neck = h - body - shoulder;
      const Vec3 bottom = -0.5 * h * up;
      parts.push_back({Frustum{bottom, up, body, r, r}});
      parts.push_back({Frustum{bottom + body * up, up, shoulder, r, rn}});
      parts.push_back({Frustum{bottom + (body + shoulder) * up, up, neck, rn, rn}});
      parts.push_back({Disk{bottom, -up, r}});
      parts.push_back({Disk{0.5 * h * up, up, rn}});
      break;
    }
    case Category::Bowl: {
      const double r = param(p, "radius"), depth = std::min(param(p, "depth"), 2.0 * param(p, "radius"));
      parts.push_back({SphereBand{Vec3::Zero(), r, -r, -r + depth}});
      break;
    }
    case Category::Camera: {
      const double bx = param(p, "body_x"), by = param(p, "body_y"), bz = param(p, "body_z");
      const double lr = param(p, "lens_radius"), ll = param(p, "lens_length");
      const Vec3 lo(-0.5 * bx, -0.5 * by, -0.5 * bz);
      const Vec3 ex(bx, 0, 0), ey(0, by, 0), ez(0, 0, bz);
      parts.push_back({Patch{lo, ey, ez}});
      parts.push_back({Patch{lo + ex, ey, ez}});
      parts.push_back({Patch{lo, ex, ez}});
      parts.push_back({Patch{lo + ey, ex, ez}});
      parts.push_back({Patch{lo, ex, ey}});
      parts.push_back({Patch{lo + ez, ex, ey}});
      const Vec3 front(0.5 * bx, 0, 0);
      parts.push_back({Frustum{front, Vec3::UnitX(), ll, lr, lr}});
      parts.push_back({Disk{front + ll * Vec3::UnitX(), Vec3::UnitX(), lr}});
      break;
    }
    case Category::Laptop: {
      const double depth = param(p, "depth"), width = param(p, "width");
      const double opening = deg2rad(param(p, "opening_deg"));
      const Vec3 origin(0, 0, -0.5 * width), ez(0, 0, width);
      parts.push_back({Patch{origin, Vec3(depth, 0, 0), ez}, 0});
      parts.push_back({Patch{origin, depth * Vec3(std::cos(opening), std::sin(opening), 0), ez}, 1});
      hinge = Hinge{Vec3::Zero(), Vec3::UnitZ()};
      break;
    }
    case Category::Mug: {
      const double r = param(p, "radius"), h = param(p, "height");
      const double hr = param(p, "handle_major"), hm = param(p, "handle_minor");
      parts.push_back({Frustum{-0.5 * h * up, up, h, r, r}});
      parts.push_back({Disk{-0.5 * h * up, -up, r}});
      parts.push_back({Handle{Vec3(r, 0, 0), hr, hm, -0.5 * M_PI, 0.5 * M_PI}});
      break;
    }
  }
  return parts;
}

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Bottle: return "bottle";
    case Category::Bowl: return "bowl";
    case Category::Camera: return "camera";
    case Category::Can: return "can";
    case Category::Laptop: return "laptop";
    case Category::Mug: return "mug";
  }
  return "unknown";
}

Category parse_category(std::string_view name) {
  for (Category c : kAllCategories)
    if (to_string(c) == name) return c;
  throw Error(ErrorKind::UnknownCategory, "unknown category '" + std::string(name) + "'");
}

SymmetryType default_symmetry(Category c) {
  switch (c) {
    case Category::Bottle:
    case Category::Bowl:
    case Category::Can: return SymmetryType::AxialY;
    default: return SymmetryType::None;
  }
}

ShapeParams mean_shape_params(Category c) {
  switch (c) {
    case Category::Bottle: return {{"radius", 0.035}, {"height", 0.22}, {"neck_ratio", 0.4}};
    case Category::Bowl: return {{"radius", 0.08}, {"depth", 0.05}};
    case Category::Camera:
      return {{"body_x", 0.06}, {"body_y", 0.07}, {"body_z", 0.11}, {"lens_radius", 0.028}, {"lens_length", 0.04}};
    case Category::Can: return {{"radius", 0.033}, {"height", 0.12}};
    case Category::Laptop: return {{"depth", 0.22}, {"width", 0.32}, {"opening_deg", 110.0}};
    case Category::Mug: return {{"radius", 0.045}, {"height", 0.095}, {"handle_major", 0.03}, {"handle_minor", 0.007}};
  }
  throw Error(ErrorKind::UnknownCategory, "unknown category");
}

ShapeParams vary_shape_params(Category, const ShapeParams& mean, double variation, Rng& rng) {
  if (!(variation >= 0.0) || !(variation < 1.0))
    throw Error(ErrorKind::DegenerateInput, "shape variation must be in [0, 1)");
  std::uniform_real_distribution<double> factor(1.0 - variation, 1.0 + variation);
  ShapeParams out = mean;
  for (auto& [key, value] : out) {
    const bool is_length = !key.ends_with("_deg") && !key.ends_with("_ratio");
    const double f = factor(rng);  // drawn for every key so streams stay aligned
    if (is_length && variation > 0.0) value *= f;
  }
  return out;
}

CanonicalShape sample_shape(Category c, const ShapeParams& params, int count, std::uint64_t surface_seed) {
  if (count < 6) throw Error(ErrorKind::DegenerateInput, "a shape needs at least 6 samples");
  CanonicalShape shape;
  const std::vector<Part> parts = build_parts(c, params, shape.hinge);

  auto support = [&](const Vec3& d, std::uint8_t& label) {
    Vec3 best = Vec3::Zero();
    double best_v = -INFINITY;
    for (const Part& part : parts) {
      const Vec3 s = std::visit([&](const auto& surf) { return surf.support(d); }, part.surface);
      if (d.dot(s) > best_v) {
        best_v = d.dot(s);
        best = s;
        label = part.label;
      }
    }
    return best;
  };

  shape.points.resize(count, 3);
  shape.labels.assign(static_cast<std::size_t>(count), 0);
  for (int f = 0; f < kFaceCount; ++f) {
    const FaceId face = FaceId::from_index(f);
    shape.points.row(f) = support(face.sign * Vec3::Unit(face.axis), shape.labels[f]).transpose();
  }

  std::vector<double> cumulative;
  double total = 0.0;
  for (const Part& part : parts) {
    total += std::visit([](const auto& s) { return s.area(); }, part.surface);
    cumulative.push_back(total);
  }
  Rng rng(surface_seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = kFaceCount; i < count; ++i) {
    const double w = uni(rng) * total;
    const double u = uni(rng);
    const double v = uni(rng);
    const std::size_t k = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), w) - cumulative.begin()),
        parts.size() - 1);
    shape.points.row(i) = std::visit([&](const auto& s) { return s.sample(u, v); }, parts[k].surface).transpose();
    shape.labels[static_cast<std::size_t>(i)] = parts[k].label;
  }

  Vec3 hi, lo;
  for (int a = 0; a < 3; ++a) {
    hi(a) = shape.points(FaceId{a, 1}.index(), a);
    lo(a) = shape.points(FaceId{a, -1}.index(), a);
  }
  const Vec3 center = 0.5 * (hi + lo);
  shape.size = hi - lo;
  shape.points.rowwise() -= center.transpose();
  shape.hinge.point -= center;
  return shape;
}

Pose9D sample_pose(const PoseSampler& sampler, const Vec3& size, Rng& rng) {
  Pose9D pose;
  pose.rotation = random_rotation(rng);
  std::uniform_real_distribution<double> lateral(-sampler.lateral, sampler.lateral);
  std::uniform_real_distribution<double> depth(sampler.depth_min, sampler.depth_max);
  pose.translation = Vec3(lateral(rng), lateral(rng), depth(rng));
  pose.size = size;
  return pose;
}

Points SyntheticInstance::observed_nocs() const { return camera_to_nocs(observed, pose); }

Points SyntheticInstance::model_metric() const { return model_nocs * pose.diagonal(); }

SyntheticInstance generate_instance(Category c, const ShapeParams& params, const InstanceOptions& options,
                                    std::uint64_t surface_seed, std::uint64_t seed) {
  if (options.observed_points < 1) throw Error(ErrorKind::DegenerateInput, "need at least one observed point");
  const CanonicalShape shape = sample_shape(c, params, options.model_points, surface_seed);

  SyntheticInstance inst;
  inst.category = c;
  inst.symmetry = SymmetryTag{std::string(to_string(c)), default_symmetry(c)};
  inst.seed = seed;
  inst.params = params;
  inst.hinge = shape.hinge;
  inst.model_labels = shape.labels;

  Rng rng(seed);
  inst.pose = sample_pose(options.pose, shape.size, rng);
  inst.model_nocs = shape.points / inst.pose.diagonal();

  const Eigen::Index m = shape.points.rows();
  const Eigen::Index n = options.observed_points;
  if (n <= m) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < n; ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(i, m - 1);
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }
    inst.observed_index.assign(perm.begin(), perm.begin() + n);
  } else {
    std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
    for (Eigen::Index i = 0; i < n; ++i) inst.observed_index.push_back(pick(rng));
  }

  Points canonical(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) canonical.row(i) = shape.points.row(inst.observed_index[static_cast<std::size_t>(i)]);
  inst.observed = transform_points(canonical, inst.pose.rotation, inst.pose.translation);
  return inst;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace rbp
