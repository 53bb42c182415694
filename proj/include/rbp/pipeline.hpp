#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rbp/augmentation.hpp"
#include "rbp/losses.hpp"
#include "rbp/metrics.hpp"
#include "rbp/projection.hpp"
#include "rbp/shape_prior.hpp"
#include "rbp/synthetic.hpp"

namespace rbp {

enum class AugmentMethod { None, A1, A2, Linear, Auto };
enum class PriorSource { CategoryMean, Instance };
enum class DeformationMode { Exact, Zero };
enum class AssignmentMode { Nearest, Soft };
enum class HypothesisSize { CategoryMean, True };
enum class DecoderMode { Auto, Dvpb, Umeyama };

struct CategoryConfig {
  SymmetryType symmetry = SymmetryType::None;
  ShapeParams params;
};

struct AugmentationConfig {
  AugmentMethod method = AugmentMethod::None;
  AugmentRanges ranges;
  Perturbation perturbation;
};

struct PipelineOptions {
  PriorSource prior = PriorSource::CategoryMean;
  DeformationMode deformation = DeformationMode::Exact;
  double deformation_cap = 0.0;  // 0 disables the cap
  AssignmentMode assignment = AssignmentMode::Nearest;
  int soft_k = 8;
  double soft_bandwidth = 0.01;
  HypothesisSize hypothesis_size = HypothesisSize::CategoryMean;
  double hypothesis_rotation_noise_deg = 0.0;
  double field_noise_sigma = 0.0;  // m, added to the predicted residuals
  double pose_perturbation_deg = 0.0;  // rotation applied to the decoded pose, random axis per instance
  double pose_perturbation_m = 0.0;    // offset applied to the decoded translation, random direction per instance
  DecoderMode decoder = DecoderMode::Auto;
  double sigma_data = 1.0;
  double sigma_reg = 1.0;
  Reduction reduction = Reduction::Mean;
  bool keep_fields = false;
};

/// Everything a corpus and a pipeline run depend on.
struct Config {
  std::uint64_t seed = 0;
  std::size_t count = 60;
  std::vector<Category> categories{kAllCategories.begin(), kAllCategories.end()};
  std::map<Category, CategoryConfig> category_table;
  InstanceOptions instance;
  LossWeights weights;
  AugmentationConfig augmentation;
  PipelineOptions pipeline;
  int iou_resolution = kDefaultIouResolution;
  int threads = 0;  // 0 = OpenMP default

  SymmetryTag symmetry_of(Category c) const;
};

/// Category table populated with mean shapes and default symmetries.
Config default_config();

/// Throws ConfigError naming the offending key.
void validate(const Config& config);

struct Corpus {
  std::uint64_t seed = 0;
  std::vector<SyntheticInstance> instances;
  std::map<Category, Vec3> mean_sizes;  // per-category mean instance size (m)
  std::map<Category, Points> priors;    // per-category mean shape in NOCS
  std::map<Category, std::uint64_t> surface_seeds;
};

std::uint64_t surface_seed_for(std::uint64_t corpus_seed, Category c);

/// Deterministic in the config. Instance i has category categories[i % k].
Corpus generate_corpus(const Config& config);

/// Mean shape of a category in NOCS, sampled with the corpus surface seed.
Points category_prior(const Config& config, Category c, std::uint64_t surface_seed);

/// Applies the configured shape augmentation in the canonical frame, then
/// re-boxes the instance: pose translation and size follow the new box, NOCS
/// and observed points are re-derived. A2 only touches laptops; Auto picks A2
/// for laptops and A1 (along x for cameras, y otherwise) for the rest.
/// Deterministic in the instance seed. Rigid/noise perturbation is not applied here.
void augment_instance(SyntheticInstance& inst, const AugmentationConfig& cfg);

struct InstanceFields {
  ProjectionField ground_truth;
  SprvField sprv;
  ProjectionField from_pose;
};

struct InstanceResult {
  std::size_t index = 0;
  Category category = Category::Can;
  Pose9D gt_pose;
  Pose9D pred_pose;
  PoseError error;
  LossComponents losses;
  double total_loss = 0.0;
  double mean_sprv_norm = 0.0;
  double mean_dvpb_norm = 0.0;
  SharedBoxReport shared_box;
  std::optional<InstanceFields> fields;
};

struct PipelineSummary {
  std::size_t instances = 0;
  double mean_sprv_norm = 0.0;
  double mean_dvpb_norm = 0.0;
  double mean_consistency = 0.0;
  double max_consistency = 0.0;
  double max_abs_sprv_loss = 0.0;
  double max_abs_total_loss = 0.0;
  bool shared_box_contained = true;
};

struct PipelineResult {
  std::vector<InstanceResult> instances;  // corpus order
  MetricReport report;
  PipelineSummary summary;
};

/// Augment -> ground-truth field -> shape prior coords -> hypotheses -> residuals
/// -> losses -> decoded pose -> metrics for one instance.
InstanceResult process_instance(const Corpus& corpus, std::size_t index, const Config& config);

/// Instances run in parallel; results are reduced in corpus order.
PipelineResult run_pipeline(const Corpus& corpus, const Config& config);

}  // namespace rbp
