// rbp: command-line harness for the bounding-box projection toolkit.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "rbp/error.hpp"
#include "rbp/io.hpp"
#include "rbp/parallel.hpp"
#include "rbp/pipeline.hpp"

namespace {

using namespace rbp;
namespace fs = std::filesystem;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_format,
                const std::vector<std::string>& formats) {
  cmd->add_option("--seed", c.seed, "Seed (overrides the config)");
  cmd->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output path")->required();
  c.format = default_format;
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember(formats))->capture_default_str();
}

Config load(const Common& c) {
  Config cfg = c.config.empty() ? default_config() : io::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  validate(cfg);
  return cfg;
}

constexpr std::uint64_t kPerturbStream = 4;  // same child stream the pipeline uses

std::string stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return buf;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  Common common;
  std::optional<std::size_t> count;
};

void run_gen(const GenArgs& a) {
  Config cfg = load(a.common);
  if (a.count) cfg.count = *a.count;
  const Corpus corpus = generate_corpus(cfg);
  io::save_corpus(a.common.out, corpus, io::parse_format(a.common.format));
}

// ---------------------------------------------------------------- encode

struct EncodeArgs {
  Common common;
  std::string corpus;
  std::string points;
  std::string pose;
  std::string symmetry = "none";
  std::string kind = "dvpb";
};

void run_encode(const EncodeArgs& a) {
  if (!a.corpus.empty()) {
    Config cfg = load(a.common);
    // Fields describe the corpus as stored; use `augment` to deform it first.
    cfg.augmentation.method = AugmentMethod::None;
    cfg.augmentation.perturbation = Perturbation{};
    cfg.pipeline.keep_fields = true;
    const Corpus corpus = io::load_corpus(a.corpus);
    for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
      const InstanceResult r = process_instance(corpus, i, cfg);
      const fs::path dir(a.common.out);
      if (a.kind == "dvpb" || a.kind == "both")
        io::write_json(dir / (stem(i) + "_dvpb.json"), io::to_json(r.fields->ground_truth));
      if (a.kind == "sprv" || a.kind == "both")
        io::write_json(dir / (stem(i) + "_sprv.json"), io::to_json(r.fields->sprv));
    }
    return;
  }
  if (a.points.empty() || a.pose.empty()) throw ConfigError("encode", "give --corpus, or --points together with --pose");
  if (a.kind != "dvpb") throw ConfigError("kind", "single-instance encode produces dvpb fields only");
  const Points pts = io::read_points(a.points).points;
  const Pose9D pose = io::pose_from_json(io::read_json(a.pose));
  const ProjectionField field = encode_dvpb(pts, pose, SymmetryTag{"", parse_symmetry(a.symmetry)});
  io::write_json(a.common.out, io::to_json(field));
}

// ---------------------------------------------------------------- decode

struct DecodeArgs {
  Common common;
  std::string field;
  std::string points;
  std::string symmetry = "none";
  std::string corpus;
  std::string fields;
};

ProjectionField read_any_field(const fs::path& path) {
  const io::json j = io::read_json(path);
  if (j.value("schema", "") == "rbp.sprv_field") return io::sprv_from_json(j).corrected();
  return io::field_from_json(j);
}

void run_decode(const DecodeArgs& a) {
  if (!a.corpus.empty()) {
    if (a.fields.empty()) throw ConfigError("fields", "corpus decode needs --fields (output directory of encode)");
    const Corpus corpus = io::load_corpus(a.corpus);
    std::vector<io::Prediction> preds;
    for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
      const SyntheticInstance& inst = corpus.instances[i];
      if (inst.symmetry.type != SymmetryType::None) {
        // Only the y faces are valid, which leaves the pose underdetermined.
        std::fprintf(stderr, "rbp: skipping instance %zu (%s is symmetric)\n", i, to_string(inst.category).data());
        continue;
      }
      fs::path path = fs::path(a.fields) / (stem(i) + "_sprv.json");
      if (!fs::exists(path)) path = fs::path(a.fields) / (stem(i) + "_dvpb.json");
      const Pose9D pose = decode_pose(read_any_field(path), inst.observed, inst.symmetry);
      preds.push_back({i, pose});
    }
    io::write_json(a.common.out, io::predictions_to_json(preds));
    return;
  }
  if (a.field.empty() || a.points.empty()) throw ConfigError("decode", "give --field with --points, or --corpus with --fields");
  const Pose9D pose =
      decode_pose(read_any_field(a.field), io::read_points(a.points).points, SymmetryTag{"", parse_symmetry(a.symmetry)});
  io::write_json(a.common.out, io::to_json(pose));
}

// ---------------------------------------------------------------- augment

struct AugmentArgs {
  Common common;
  std::string corpus;
  std::string method;
};

void run_augment(const AugmentArgs& a) {
  Config cfg = load(a.common);
  if (!a.method.empty()) cfg.augmentation.method = io::config_from_json({{"augmentation", {{"method", a.method}}}}).augmentation.method;
  Corpus corpus = io::load_corpus(a.corpus);
  for (SyntheticInstance& inst : corpus.instances) {
    const std::uint64_t seed = inst.seed;
    if (a.common.seed) inst.seed = mix_seed(seed, *a.common.seed);
    augment_instance(inst, cfg.augmentation);
    const Perturbation& p = cfg.augmentation.perturbation;
    if (p.noise_sigma > 0.0 || p.rot_jitter > 0.0 || p.trans_jitter > 0.0) {
      Observation obs = perturb_observation(inst.observed, inst.pose, p, mix_seed(inst.seed, kPerturbStream));
      inst.observed = std::move(obs.points);
      inst.pose = obs.pose;
    }
    inst.seed = seed;
  }
  const std::string fmt = io::read_json(fs::path(a.corpus) / "manifest.json").value("format", "ply");
  io::save_corpus(a.common.out, corpus, io::parse_format(a.common.format.empty() ? fmt : a.common.format));
}

// ---------------------------------------------------------------- eval / report

struct EvalArgs {
  Common common;
  std::string corpus;
  std::string predictions;
  int iou_resolution = kDefaultIouResolution;
};

void write_report(const fs::path& out, const MetricReport& report, const std::string& format) {
  if (format == "csv")
    io::write_text(out, io::report_csv(report));
  else
    io::write_json(out, io::to_json(report));
}

void run_eval(const EvalArgs& a) {
  const Corpus corpus = io::load_corpus(a.corpus);
  const auto preds = io::predictions_from_json(io::read_json(a.predictions));
  std::vector<PoseError> errors;
  for (const io::Prediction& p : preds) {
    if (p.index >= corpus.instances.size())
      throw Error(ErrorKind::IoError, "prediction index " + std::to_string(p.index) + " is not in the corpus");
    const SyntheticInstance& inst = corpus.instances[p.index];
    errors.push_back(pose_error(p.pose, inst.pose, inst.symmetry, a.iou_resolution));
  }
  write_report(a.common.out, build_report(errors), a.common.format);
}

struct ReportArgs {
  Common common;
  std::optional<std::size_t> count;
};

void run_report(const ReportArgs& a) {
  Config cfg = load(a.common);
  if (a.count) cfg.count = *a.count;
  const auto start = std::chrono::steady_clock::now();
  const Corpus corpus = generate_corpus(cfg);
  const PipelineResult result = run_pipeline(corpus, cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path dir(a.common.out);
  write_report(dir / (a.common.format == "csv" ? "report.csv" : "report.json"), result.report, a.common.format);
  io::write_text(dir / "curves.csv", io::curves_csv(result.report));
  io::write_json(dir / "summary.json", io::to_json(result.summary));
  io::write_json(dir / "config.json", io::to_json(cfg));
  if (cfg.pipeline.keep_fields)
    for (const InstanceResult& r : result.instances) {
      io::write_json(dir / "fields" / (stem(r.index) + "_dvpb.json"), io::to_json(r.fields->ground_truth));
      io::write_json(dir / "fields" / (stem(r.index) + "_sprv.json"), io::to_json(r.fields->sprv));
      io::write_json(dir / "fields" / (stem(r.index) + "_pose.json"),
                     {{"ground_truth", io::to_json(r.gt_pose)}, {"predicted", io::to_json(r.pred_pose)}});
    }
  // Timing goes to stderr so the written files stay reproducible.
  std::fprintf(stderr, "%zu instances in %.2f s (%.1f instances/s, %d threads)\n", result.instances.size(), seconds,
               static_cast<double>(result.instances.size()) / seconds, max_threads());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounding-box projection geometry toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus directory");
  add_common(gen_cmd, gen.common, "ply", {"json", "csv", "ply"});
  gen_cmd->add_option("--count", gen.count, "Number of instances (overrides the config)");

  EncodeArgs enc;
  auto* enc_cmd = app.add_subcommand("encode", "Compute DVPB or SPRV fields");
  add_common(enc_cmd, enc.common, "json", {"json"});
  enc_cmd->add_option("--corpus", enc.corpus, "Corpus directory (writes one file per instance into --out)");
  enc_cmd->add_option("--points", enc.points, "Camera-frame points (.ply/.json/.csv)");
  enc_cmd->add_option("--pose", enc.pose, "Pose JSON");
  enc_cmd->add_option("--symmetry", enc.symmetry, "none or axial-y")->capture_default_str();
  enc_cmd->add_option("--kind", enc.kind, "dvpb, sprv or both")
      ->check(CLI::IsMember({"dvpb", "sprv", "both"}))
      ->capture_default_str();

  DecodeArgs dec;
  auto* dec_cmd = app.add_subcommand("decode", "Recover a pose from a projection field");
  add_common(dec_cmd, dec.common, "json", {"json"});
  dec_cmd->add_option("--field", dec.field, "Field JSON (dvpb or sprv)");
  dec_cmd->add_option("--points", dec.points, "Camera-frame points the field belongs to");
  dec_cmd->add_option("--symmetry", dec.symmetry, "none or axial-y")->capture_default_str();
  dec_cmd->add_option("--corpus", dec.corpus, "Corpus directory (batch mode)");
  dec_cmd->add_option("--fields", dec.fields, "Directory written by encode --corpus");

  AugmentArgs aug;
  auto* aug_cmd = app.add_subcommand("augment", "Apply shape augmentation to a corpus");
  add_common(aug_cmd, aug.common, "", {"", "json", "csv", "ply"});
  aug_cmd->add_option("--corpus", aug.corpus, "Input corpus directory")->required();
  aug_cmd->add_option("--method", aug.method, "a1, a2, linear or auto (overrides the config)");

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "Score predictions against a corpus");
  add_common(ev_cmd, ev.common, "json", {"json", "csv"});
  ev_cmd->add_option("--corpus", ev.corpus, "Corpus directory")->required();
  ev_cmd->add_option("--predictions", ev.predictions, "Predictions JSON")->required();
  ev_cmd->add_option("--iou-resolution", ev.iou_resolution, "Lattice cells per axis")->capture_default_str();

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Generate, run the pipeline and write report, curves and summary");
  add_common(rep_cmd, rep.common, "json", {"json", "csv"});
  rep_cmd->add_option("--count", rep.count, "Number of instances (overrides the config)");

  if (argc > 1 && argv[1][0] != '-') {
    const std::string name = argv[1];
    bool known = false;
    for (const CLI::App* sub : app.get_subcommands({})) known = known || sub->get_name() == name;
    if (!known) {
      std::cerr << "rbp: unknown subcommand '" << name << "'\n\n" << app.help();
      return 2;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "\n" << app.help();
    return 2;
  }

  try {
    if (*gen_cmd) run_gen(gen);
    else if (*enc_cmd) run_encode(enc);
    else if (*dec_cmd) run_decode(dec);
    else if (*aug_cmd) run_augment(aug);
    else if (*ev_cmd) run_eval(ev);
    else if (*rep_cmd) run_report(rep);
  } catch (const ConfigError& e) {
    std::cerr << "rbp: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "rbp: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
