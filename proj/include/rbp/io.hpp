#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbp/pipeline.hpp"

namespace rbp::io {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

enum class Format { Json, Csv, Ply };
std::string_view to_string(Format f);
/// Throws ConfigError("format").
Format parse_format(std::string_view name);
/// From the file extension; throws IoError for anything else.
Format format_of(const fs::path& path);
std::string_view extension(Format f);

// Plain value types.
json to_json(const Pose9D& pose);
Pose9D pose_from_json(const json& j);

/// {"schema": "rbp.projection_field", "schema_version", "point_count",
///  "face_mask": [face names], "vectors": N*6*3 row-major numbers}
json to_json(const ProjectionField& field);
ProjectionField field_from_json(const json& j);

/// {"schema": "rbp.sprv_field", "schema_version", "residual": field, "hypothesis": field}
json to_json(const SprvField& field);
SprvField sprv_from_json(const json& j);

json to_json(const MetricReport& report);
json to_json(const PipelineSummary& summary);
/// One row per category plus the mean row.
std::string report_csv(const MetricReport& report);
/// Long format: category, axis, threshold, precision.
std::string curves_csv(const MetricReport& report);

// Point sets with optional integer columns (labels, source indices).
struct PointTable {
  Points points;
  std::map<std::string, std::vector<std::int64_t>> columns;
};

/// PLY is ascii with double coordinates; the reader also accepts
/// binary_little_endian float/double/int vertex properties.
void write_points(const fs::path& path, const PointTable& table, Format format);
PointTable read_points(const fs::path& path);

/// {"schema_version", "category", "points": [[x,y,z], ...]}
void write_prior_fixture(const fs::path& path, Category c, const Points& points);
Points read_prior_fixture(const fs::path& path, Category* category = nullptr);

/// "RBPA", u32 version, u32 dtype (1 = f32, 2 = f64), u64 rows, u64 cols,
/// then row-major little-endian values.
void write_assignment(const fs::path& path, const AssignmentMatrix& a, bool single_precision = false);
AssignmentMatrix read_assignment(const fs::path& path);

// Config file. Unknown or malformed keys throw ConfigError naming the key.
Config config_from_json(const json& j, Config base = default_config());
Config load_config(const fs::path& path);
json to_json(const Config& config);

// Corpus directory: manifest.json, priors/<category>.<ext>, instances/<index>_{model,observed}.<ext>
void save_corpus(const fs::path& dir, const Corpus& corpus, Format format);
Corpus load_corpus(const fs::path& dir);

struct Prediction {
  std::size_t index = 0;
  Pose9D pose;
};
json predictions_to_json(const std::vector<Prediction>& predictions);
std::vector<Prediction> predictions_from_json(const json& j);

json read_json(const fs::path& path);
/// Pretty-printed, trailing newline.
void write_json(const fs::path& path, const json& j);
void write_text(const fs::path& path, const std::string& text);

}  // namespace rbp::io
