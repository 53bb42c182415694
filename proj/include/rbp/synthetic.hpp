#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rbp/augmentation.hpp"
#include "rbp/geometry.hpp"
#include "rbp/projection.hpp"

namespace rbp {

enum class Category { Bottle, Bowl, Camera, Can, Laptop, Mug };

inline constexpr std::array<Category, 6> kAllCategories = {Category::Bottle, Category::Bowl,  Category::Camera,
                                                          Category::Can,    Category::Laptop, Category::Mug};

std::string_view to_string(Category c);
/// Throws UnknownCategory.
Category parse_category(std::string_view name);

/// Bottle, bowl and can are symmetric about y; camera, laptop and mug are not.
SymmetryType default_symmetry(Category c);

/// Named metric dimensions (meters, or degrees for angles) of a parametric shape.
using ShapeParams = std::map<std::string, double>;

/// Mean dimensions used for category priors.
ShapeParams mean_shape_params(Category c);

/// Scales every length parameter by an independent factor in [1 - v, 1 + v].
ShapeParams vary_shape_params(Category c, const ShapeParams& mean, double variation, Rng& rng);

/// A sampled canonical shape: metric points centered on their box, the exact
/// box size, and part labels (1 = moving lid for the laptop, else 0).
struct CanonicalShape {
  Points points;
  Vec3 size = Vec3::Ones();
  PartLabels labels;
  Hinge hinge;  // meaningful for the laptop only
};

/// Area-uniform surface samples of the parametric shape. The first six points
/// are the extreme surface points along +-x, +-y, +-z, so the sampled box is
/// the analytic box. Row i uses the i-th draw of a stream seeded by
/// `surface_seed`, so two shapes of one category with the same seed mostly
/// correspond row by row; a row whose draw sits near a part boundary can land
/// on another part when the part areas differ.
CanonicalShape sample_shape(Category c, const ShapeParams& params, int count, std::uint64_t surface_seed);

struct PoseSampler {
  double lateral = 0.3;    // |x|, |y| translation bound (m)
  double depth_min = 0.5;  // z range (m)
  double depth_max = 1.5;
};

Pose9D sample_pose(const PoseSampler& sampler, const Vec3& size, Rng& rng);

struct SyntheticInstance {
  Category category = Category::Can;
  SymmetryTag symmetry;
  std::uint64_t seed = 0;
  ShapeParams params;
  Points model_nocs;                  // M x 3 canonical model in NOCS
  PartLabels model_labels;            // M
  Hinge hinge;                        // canonical metric frame
  Pose9D pose;                        // ground truth
  std::vector<Eigen::Index> observed_index;  // rows of model_nocs that were observed
  Points observed;                    // N x 3 camera frame

  /// Ground-truth NOCS of the observed points.
  Points observed_nocs() const;
  /// Canonical metric model points (model_nocs * diagonal).
  Points model_metric() const;
};

struct InstanceOptions {
  int model_points = 1024;
  int observed_points = 1024;
  double shape_variation = 0.2;
  PoseSampler pose;
};

/// Deterministic in (category, params, surface_seed, seed).
/// `params` are used as given; use vary_shape_params to draw a variation.
SyntheticInstance generate_instance(Category c, const ShapeParams& params, const InstanceOptions& options,
                                    std::uint64_t surface_seed, std::uint64_t seed);

/// Stateless 64-bit mix for deriving child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace rbp
