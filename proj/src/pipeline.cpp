#include "rbp/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "rbp/error.hpp"
#include "rbp/parallel.hpp"

namespace rbp {

namespace {

// Child-seed streams of an instance seed.
enum Stream : std::uint64_t {
  kShapeStream = 1,
  kAugmentStream = 3,
  kPerturbStream = 4,
  kHypothesisStream = 5,
  kFieldStream = 6,
  kScaleStream = 7,
  kPosePerturbStream = 8,
};

int a1_axis(Category c) { return c == Category::Camera ? 0 : 1; }

Vec3 draw_scales(const Interval& range, Rng& rng) {
  if (range.lo == range.hi) return Vec3::Constant(range.lo);
  std::uniform_real_distribution<double> d(range.lo, range.hi);
  const double x = d(rng), y = d(rng), z = d(rng);
  return {x, y, z};
}

}  // namespace

void augment_instance(SyntheticInstance& inst, const AugmentationConfig& cfg) {
  AugmentMethod method = cfg.method;
  if (method == AugmentMethod::None) return;
  const bool articulated = inst.category == Category::Laptop;
  if (method == AugmentMethod::Auto) method = articulated ? AugmentMethod::A2 : AugmentMethod::A1;
  if (method == AugmentMethod::A2 && !articulated) return;

  const Points model = inst.model_nocs * inst.pose.diagonal();
  Points deformed;
  switch (method) {
    case AugmentMethod::A1: {
      const int axis = a1_axis(inst.category);
      const AugmentParams p = sample_augment_params(cfg.ranges, axis, mix_seed(inst.seed, kAugmentStream));
      deformed = augment_a1(model, p, inst.pose.size(axis));
      break;
    }
    case AugmentMethod::A2: {
      const AugmentParams p = sample_augment_params(cfg.ranges, 1, mix_seed(inst.seed, kAugmentStream));
      Rng scale_rng(mix_seed(inst.seed, kScaleStream));
      const Vec3 scales = draw_scales(cfg.ranges.gamma, scale_rng);
      deformed = augment_a2(model, inst.model_labels, inst.hinge, p.hinge_angle, scales);
      inst.hinge.point = inst.hinge.point.cwiseProduct(scales);
      break;
    }
    case AugmentMethod::Linear: {
      Rng scale_rng(mix_seed(inst.seed, kScaleStream));
      deformed = augment_linear(model, draw_scales(cfg.ranges.gamma, scale_rng));
      break;
    }
    default: return;
  }

  const CanonicalBox box = canonical_bbox(deformed);
  deformed.rowwise() -= box.center.transpose();
  inst.hinge.point -= box.center;
  inst.pose.translation += inst.pose.rotation * box.center;
  inst.pose.size = box.size;
  inst.model_nocs = deformed / inst.pose.diagonal();

  Points canonical(static_cast<Eigen::Index>(inst.observed_index.size()), 3);
  for (std::size_t i = 0; i < inst.observed_index.size(); ++i)
    canonical.row(static_cast<Eigen::Index>(i)) = deformed.row(inst.observed_index[i]);
  inst.observed = transform_points(canonical, inst.pose.rotation, inst.pose.translation);
}

namespace {

Mat3 perturb_rotation(const Mat3& r, double angle_deg, std::uint64_t seed) {
  if (angle_deg == 0.0) return r;
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 axis(g(rng), g(rng), g(rng));
  if (axis.norm() == 0.0) axis = Vec3::UnitX();
  return axis_angle(axis, deg2rad(angle_deg)) * r;
}

Vec3 random_direction(std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const Vec3 d(g(rng), g(rng), g(rng));
  return d.norm() > 0.0 ? Vec3(d.normalized()) : Vec3::UnitX();
}

double l1(const auto& m) { return m.cwiseAbs().sum(); }

}  // namespace

SymmetryTag Config::symmetry_of(Category c) const {
  const auto it = category_table.find(c);
  return SymmetryTag{std::string(to_string(c)), it != category_table.end() ? it->second.symmetry : default_symmetry(c)};
}

Config default_config() {
  Config cfg;
  for (Category c : kAllCategories) cfg.category_table[c] = CategoryConfig{default_symmetry(c), mean_shape_params(c)};
  return cfg;
}

void validate(const Config& config) {
  if (config.count == 0) throw ConfigError("count", "must be positive");
  if (config.categories.empty()) throw ConfigError("categories", "must not be empty");
  for (Category c : config.categories)
    if (!config.category_table.contains(c))
      throw ConfigError("category_table." + std::string(to_string(c)), "missing shape parameters");
  if (config.instance.model_points < 6) throw ConfigError("model_points", "must be at least 6");
  if (config.instance.observed_points < 3) throw ConfigError("observed_points", "must be at least 3");
  if (!(config.instance.shape_variation >= 0.0 && config.instance.shape_variation < 1.0))
    throw ConfigError("shape_variation", "must be in [0, 1)");
  if (config.iou_resolution < 1) throw ConfigError("iou_resolution", "must be positive");
  const LossWeights& w = config.weights;
  for (double v : {w.lambda0, w.lambda1, w.lambda2, w.lambda3, w.lambda4})
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("weights", "weights must be finite and non-negative");
  const PipelineOptions& p = config.pipeline;
  if (!(p.sigma_data > 0.0)) throw ConfigError("pipeline.sigma_data", "must be positive");
  if (!(p.sigma_reg > 0.0)) throw ConfigError("pipeline.sigma_reg", "must be positive");
  if (!(p.field_noise_sigma >= 0.0)) throw ConfigError("pipeline.field_noise_sigma", "must be non-negative");
  if (!(p.deformation_cap >= 0.0)) throw ConfigError("pipeline.deformation_cap", "must be non-negative");
  if (!(p.pose_perturbation_deg >= 0.0)) throw ConfigError("pipeline.pose_perturbation_deg", "must be non-negative");
  if (!(p.pose_perturbation_m >= 0.0)) throw ConfigError("pipeline.pose_perturbation_m", "must be non-negative");
  if (p.soft_k < 1 || !(p.soft_bandwidth > 0.0)) throw ConfigError("pipeline.soft_k", "soft assignment needs k >= 1 and a positive bandwidth");
  if (p.decoder == DecoderMode::Dvpb)
    for (Category c : config.categories)
      if (config.symmetry_of(c).type != SymmetryType::None)
        throw ConfigError("pipeline.decoder", "the dvpb decoder cannot handle symmetric category '" +
                                                  std::string(to_string(c)) + "'");
  const Perturbation& pt = config.augmentation.perturbation;
  if (!(pt.noise_sigma >= 0.0) || !(pt.rot_jitter >= 0.0) || !(pt.trans_jitter >= 0.0))
    throw ConfigError("augmentation", "perturbation magnitudes must be non-negative");
  const AugmentRanges& r = config.augmentation.ranges;
  if (!(r.gamma_min.lo <= r.gamma_min.hi && r.gamma_max.lo <= r.gamma_max.hi && r.gamma.lo <= r.gamma.hi &&
        r.hinge_angle.lo <= r.hinge_angle.hi))
    throw ConfigError("augmentation", "ranges must be ordered [lo, hi]");
  if (!(r.gamma_min.hi <= 1.0 && r.gamma_max.lo >= 1.0 && r.gamma_min.lo > 0.0 && r.gamma.lo > 0.0))
    throw ConfigError("augmentation", "need 0 < gamma_min <= 1 <= gamma_max and gamma > 0");
  const PoseSampler& ps = config.instance.pose;
  if (!(ps.lateral >= 0.0 && ps.depth_min > 0.0 && ps.depth_min <= ps.depth_max))
    throw ConfigError("pose", "need lateral >= 0 and 0 < depth_min <= depth_max");
}

std::uint64_t surface_seed_for(std::uint64_t corpus_seed, Category c) {
  return mix_seed(corpus_seed, 1000 + static_cast<std::uint64_t>(c));
}

Points category_prior(const Config& config, Category c, std::uint64_t surface_seed) {
  const CanonicalShape shape =
      sample_shape(c, config.category_table.at(c).params, config.instance.model_points, surface_seed);
  return shape.points / shape.size.norm();
}

Corpus generate_corpus(const Config& config) {
  validate(config);
  Corpus corpus;
  corpus.seed = config.seed;
  for (Category c : config.categories) {
    if (corpus.surface_seeds.contains(c)) continue;
    corpus.surface_seeds[c] = surface_seed_for(config.seed, c);
    corpus.priors[c] = category_prior(config, c, corpus.surface_seeds[c]);
  }

  corpus.instances.resize(config.count);
  const auto n = static_cast<std::int64_t>(config.count);
  RBP_OMP(parallel for schedule(dynamic))
  for (std::int64_t i = 0; i < n; ++i) {
    const Category c = config.categories[static_cast<std::size_t>(i) % config.categories.size()];
    const std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(i));
    Rng shape_rng(mix_seed(seed, kShapeStream));
    const ShapeParams params =
        vary_shape_params(c, config.category_table.at(c).params, config.instance.shape_variation, shape_rng);
    SyntheticInstance inst = generate_instance(c, params, config.instance, corpus.surface_seeds.at(c), seed);
    inst.symmetry = config.symmetry_of(c);
    corpus.instances[static_cast<std::size_t>(i)] = std::move(inst);
  }

  std::map<Category, std::pair<Vec3, int>> sums;
  for (const SyntheticInstance& inst : corpus.instances) {
    auto& [sum, k] = sums.try_emplace(inst.category, Vec3::Zero(), 0).first->second;
    sum += inst.pose.size;
    ++k;
  }
  for (const auto& [c, acc] : sums) corpus.mean_sizes[c] = acc.first / acc.second;
  return corpus;
}

InstanceResult process_instance(const Corpus& corpus, std::size_t index, const Config& config) {
  const PipelineOptions& opt = config.pipeline;
  SyntheticInstance inst = corpus.instances.at(index);
  const SymmetryTag sym = inst.symmetry;

  augment_instance(inst, config.augmentation);
  const Observation obs =
      perturb_observation(inst.observed, inst.pose, config.augmentation.perturbation, mix_seed(inst.seed, kPerturbStream));
  const Pose9D& gt_pose = obs.pose;

  InstanceResult res;
  res.index = index;
  res.category = inst.category;
  res.gt_pose = gt_pose;

  const ProjectionField gt = encode_dvpb(obs.points, gt_pose, sym);

  // Shape prior adaptation: M_r = P_r + D_r, C_o = A_r M_r.
  const Points& prior = opt.prior == PriorSource::Instance ? inst.model_nocs : corpus.priors.at(inst.category);
  Points deformation = Points::Zero(prior.rows(), 3);
  if (opt.deformation == DeformationMode::Exact) {
    if (prior.rows() != inst.model_nocs.rows())
      throw Error(ErrorKind::ShapeMismatch, "prior and instance model differ in point count");
    deformation = inst.model_nocs - prior;
    if (opt.deformation_cap > 0.0) deformation = cap_deformation(deformation, opt.deformation_cap);
  }
  const Points model = reconstruct_model(prior, deformation);
  const Points gt_nocs = camera_to_nocs(obs.points, gt_pose);
  const AssignmentMatrix assignment = opt.assignment == AssignmentMode::Nearest
                                          ? nearest_assignment(gt_nocs, model)
                                          : soft_assignment(gt_nocs, model, opt.soft_k, opt.soft_bandwidth);
  const Points coords = assign_coords(assignment, model);
  res.shared_box = shared_bbox_check(model, coords, assignment);

  // Hypotheses from the model box, a diagonal and a rotation estimate.
  const Vec3 model_size = canonical_bbox(model).size;
  const double diagonal =
      opt.hypothesis_size == HypothesisSize::True ? gt_pose.diagonal() : corpus.mean_sizes.at(inst.category).norm();
  const Mat3 hyp_rotation =
      perturb_rotation(gt_pose.rotation, opt.hypothesis_rotation_noise_deg, mix_seed(inst.seed, kHypothesisStream));
  const ProjectionField hyp = hypothesize_dvpb(encode_dvpb_nocs(coords, model_size, sym), diagonal, hyp_rotation);
  const SprvField sprv = compute_sprv(gt, hyp);

  // Stand-in for a learned residual predictor: the true residual plus noise.
  SprvField pred = sprv;
  if (opt.field_noise_sigma > 0.0) {
    Rng rng(mix_seed(inst.seed, kFieldStream));
    std::normal_distribution<double> noise(0.0, opt.field_noise_sigma);
    for (Eigen::Index i = 0; i < pred.residual.size(); ++i)
      for (int f = 0; f < kFaceCount; ++f)
        if (pred.residual.mask[f])
          for (int k = 0; k < 3; ++k) pred.residual.vectors(i, 3 * f + k) += noise(rng);
  }
  const ProjectionField from_sprv = pred.corrected();

  DecoderMode decoder = opt.decoder;
  if (decoder == DecoderMode::Auto) decoder = sym.type == SymmetryType::None ? DecoderMode::Dvpb : DecoderMode::Umeyama;
  if (decoder == DecoderMode::Dvpb) {
    res.pred_pose = decode_pose(from_sprv, obs.points, sym);
  } else {
    const Similarity s = umeyama(coords, obs.points);
    res.pred_pose = Pose9D{s.rotation, s.translation, s.scale * model_size};
  }
  // Known error injected into the predicted pose, for probing the consistency term.
  const std::uint64_t pose_seed = mix_seed(inst.seed, kPosePerturbStream);
  res.pred_pose.rotation = perturb_rotation(res.pred_pose.rotation, opt.pose_perturbation_deg, pose_seed);
  res.pred_pose.translation += opt.pose_perturbation_m * random_direction(mix_seed(pose_seed, 1));
  const ProjectionField from_pose = encode_dvpb(obs.points, res.pred_pose, sym);

  const FaceSigmas sd = uniform_sigmas(opt.sigma_data);
  const FaceSigmas sr = uniform_sigmas(opt.sigma_reg);
  res.losses.sprv = sprv_loss(pred, sprv, sd, sr, config.weights.lambda0, opt.reduction);
  res.losses.consistency = consistency_loss(from_pose, from_sprv, opt.reduction);
  // Pose and shape terms are L1 proxies; the learned terms they stand for are out of scope.
  res.losses.pose = l1(res.pred_pose.rotation - gt_pose.rotation) + l1(res.pred_pose.translation - gt_pose.translation) +
                    l1(res.pred_pose.size - gt_pose.size);
  res.losses.shape = l1(coords - gt_nocs) / static_cast<double>(std::max<Eigen::Index>(1, coords.rows()));
  res.total_loss = total_loss(res.losses, config.weights);

  res.error = pose_error(res.pred_pose, gt_pose, sym, config.iou_resolution);
  res.mean_sprv_norm = mean_vector_norm(sprv.residual);
  res.mean_dvpb_norm = mean_vector_norm(gt);
  if (opt.keep_fields) res.fields = InstanceFields{gt, sprv, from_pose};
  return res;
}

PipelineResult run_pipeline(const Corpus& corpus, const Config& config) {
  validate(config);
  if (config.threads > 0) set_threads(config.threads);
  PipelineResult out;
  out.instances.resize(corpus.instances.size());
  const auto n = static_cast<std::int64_t>(corpus.instances.size());

  // Exceptions must not escape the parallel region; keep the first by index.
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n));
  RBP_OMP(parallel for schedule(dynamic))
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out.instances[static_cast<std::size_t>(i)] = process_instance(corpus, static_cast<std::size_t>(i), config);
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::vector<PoseError> errors;
  PipelineSummary& s = out.summary;
  for (const InstanceResult& r : out.instances) {
    errors.push_back(r.error);
    s.mean_sprv_norm += r.mean_sprv_norm;
    s.mean_dvpb_norm += r.mean_dvpb_norm;
    s.mean_consistency += r.losses.consistency;
    s.max_consistency = std::max(s.max_consistency, r.losses.consistency);
    s.max_abs_sprv_loss = std::max(s.max_abs_sprv_loss, std::abs(r.losses.sprv));
    s.max_abs_total_loss = std::max(s.max_abs_total_loss, std::abs(r.total_loss));
    s.shared_box_contained = s.shared_box_contained && r.shared_box.contained;
  }
  s.instances = out.instances.size();
  if (s.instances > 0) {
    const double k = static_cast<double>(s.instances);
    s.mean_sprv_norm /= k;
    s.mean_dvpb_norm /= k;
    s.mean_consistency /= k;
    out.report = build_report(errors);
  }
  return out;
}

}  // namespace rbp
