#include "rbp/io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rbp/error.hpp"

namespace rbp::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

[[noreturn]] void io_fail(const fs::path& path, const std::string& what) {
  throw Error(ErrorKind::IoError, path.string() + ": " + what);
}

std::string fmt_double(double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

Vec3 vec_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::ShapeMismatch, what + " must be a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void check_schema(const json& j, std::string_view schema) {
  if (!j.is_object()) throw Error(ErrorKind::IoError, "expected a JSON object for " + std::string(schema));
  if (j.contains("schema") && j["schema"] != schema)
    throw Error(ErrorKind::IoError, "expected schema " + std::string(schema) + ", got " + j["schema"].dump());
  if (j.value("schema_version", kSchemaVersion) != kSchemaVersion)
    throw Error(ErrorKind::IoError, "unsupported schema_version for " + std::string(schema));
}

}  // namespace

// ---------------------------------------------------------------- formats

std::string_view to_string(Format f) {
  switch (f) {
    case Format::Json: return "json";
    case Format::Csv: return "csv";
    case Format::Ply: return "ply";
  }
  return "json";
}

Format parse_format(std::string_view name) {
  if (name == "json") return Format::Json;
  if (name == "csv") return Format::Csv;
  if (name == "ply") return Format::Ply;
  throw ConfigError("format", "expected json, csv or ply, got '" + std::string(name) + "'");
}

Format format_of(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".json") return Format::Json;
  if (ext == ".csv") return Format::Csv;
  if (ext == ".ply") return Format::Ply;
  io_fail(path, "unknown point file extension '" + ext + "'");
}

std::string_view extension(Format f) {
  switch (f) {
    case Format::Json: return ".json";
    case Format::Csv: return ".csv";
    case Format::Ply: return ".ply";
  }
  return ".json";
}

// ---------------------------------------------------------------- values

json to_json(const Pose9D& pose) {
  json r = json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r.push_back(pose.rotation(i, k));
  return {{"rotation", r}, {"translation", vec_json(pose.translation)}, {"size", vec_json(pose.size)}};
}

Pose9D pose_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rotation") || !j.contains("translation") || !j.contains("size"))
    throw Error(ErrorKind::IoError, "pose needs rotation, translation and size");
  const json& r = j["rotation"];
  if (!r.is_array() || r.size() != 9) throw Error(ErrorKind::ShapeMismatch, "rotation must have 9 row-major entries");
  Pose9D p;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) p.rotation(i, k) = r[static_cast<std::size_t>(3 * i + k)].get<double>();
  p.translation = vec_from(j["translation"], "translation");
  p.size = vec_from(j["size"], "size");
  return p;
}

json to_json(const ProjectionField& field) {
  json mask = json::array();
  for (FaceId f : faces_of(field.mask)) mask.push_back(f.name());
  json values = json::array();
  for (Eigen::Index i = 0; i < field.vectors.rows(); ++i)
    for (Eigen::Index k = 0; k < field.vectors.cols(); ++k) values.push_back(field.vectors(i, k));
  return {{"schema", "rbp.projection_field"},
          {"schema_version", kSchemaVersion},
          {"point_count", field.size()},
          {"face_mask", mask},
          {"vectors", values}};
}

ProjectionField field_from_json(const json& j) {
  check_schema(j, "rbp.projection_field");
  FaceMask mask;
  for (const json& name : j.at("face_mask")) mask.set(static_cast<std::size_t>(FaceId::parse(name.get<std::string>()).index()));
  const auto n = j.at("point_count").get<Eigen::Index>();
  const json& values = j.at("vectors");
  if (n < 0 || values.size() != static_cast<std::size_t>(n) * 3 * kFaceCount)
    throw Error(ErrorKind::ShapeMismatch, "vectors must hold point_count * 18 numbers");
  ProjectionField field(n, mask);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < 3 * kFaceCount; ++c) field.vectors(i, c) = values[k++].get<double>();
  return field;
}

json to_json(const SprvField& field) {
  return {{"schema", "rbp.sprv_field"},
          {"schema_version", kSchemaVersion},
          {"residual", to_json(field.residual)},
          {"hypothesis", to_json(field.hypothesis)}};
}

SprvField sprv_from_json(const json& j) {
  check_schema(j, "rbp.sprv_field");
  return {field_from_json(j.at("residual")), field_from_json(j.at("hypothesis"))};
}

namespace {

json row_json(const MetricRow& r) {
  return {{"category", r.category},
          {"count", r.count},
          {"iou50", r.iou50},
          {"iou75", r.iou75},
          {"5deg2cm", r.deg5_cm2},
          {"5deg5cm", r.deg5_cm5},
          {"10deg2cm", r.deg10_cm2},
          {"10deg5cm", r.deg10_cm5},
          {"median_rotation_deg", r.median_rotation_deg},
          {"median_translation_cm", r.median_translation_cm},
          {"median_iou", r.median_iou}};
}

std::string row_csv(const MetricRow& r) {
  std::string s = r.category + "," + std::to_string(r.count);
  for (double v : {r.iou50, r.iou75, r.deg5_cm2, r.deg5_cm5, r.deg10_cm2, r.deg10_cm5, r.median_rotation_deg,
                   r.median_translation_cm, r.median_iou})
    s += "," + fmt_double(v, 12);
  return s + "\n";
}

}  // namespace

json to_json(const MetricReport& report) {
  json cats = json::array();
  for (const MetricRow& r : report.categories) cats.push_back(row_json(r));
  json curves = json::object();
  for (const auto& [cat, axes] : report.curves)
    for (const auto& [axis, curve] : axes) {
      json pts = json::array();
      for (const CurvePoint& p : curve) pts.push_back(json::array({p.threshold, p.precision}));
      curves[cat][axis] = pts;
    }
  return {{"schema", "rbp.metric_report"},
          {"schema_version", kSchemaVersion},
          {"categories", cats},
          {"mean", row_json(report.mean)},
          {"curves", curves}};
}

json to_json(const PipelineSummary& s) {
  return {{"instances", s.instances},
          {"mean_sprv_norm", s.mean_sprv_norm},
          {"mean_dvpb_norm", s.mean_dvpb_norm},
          {"mean_consistency", s.mean_consistency},
          {"max_consistency", s.max_consistency},
          {"max_abs_sprv_loss", s.max_abs_sprv_loss},
          {"max_abs_total_loss", s.max_abs_total_loss},
          {"shared_box_contained", s.shared_box_contained}};
}

std::string report_csv(const MetricReport& report) {
  std::string s =
      "category,count,iou50,iou75,5deg2cm,5deg5cm,10deg2cm,10deg5cm,median_rotation_deg,median_translation_cm,"
      "median_iou\n";
  for (const MetricRow& r : report.categories) s += row_csv(r);
  return s + row_csv(report.mean);
}

std::string curves_csv(const MetricReport& report) {
  std::string s = "category,axis,threshold,precision\n";
  for (const auto& [cat, axes] : report.curves)
    for (const auto& [axis, curve] : axes)
      for (const CurvePoint& p : curve)
        s += cat + "," + axis + "," + fmt_double(p.threshold, 12) + "," + fmt_double(p.precision, 12) + "\n";
  return s;
}

// ---------------------------------------------------------------- point files

namespace {

struct PlyProperty {
  std::string name;
  std::string type;
};

std::size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  return 0;
}

double ply_binary_value(const char* p, const std::string& t) {
  auto read = [p]<typename T>(T) {
    T v;
    std::memcpy(&v, p, sizeof v);
    return static_cast<double>(v);
  };
  if (t == "char" || t == "int8") return read(std::int8_t{});
  if (t == "uchar" || t == "uint8") return read(std::uint8_t{});
  if (t == "short" || t == "int16") return read(std::int16_t{});
  if (t == "ushort" || t == "uint16") return read(std::uint16_t{});
  if (t == "int" || t == "int32") return read(std::int32_t{});
  if (t == "uint" || t == "uint32") return read(std::uint32_t{});
  if (t == "float" || t == "float32") return read(float{});
  return read(double{});
}

PointTable table_from_rows(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows,
                           const fs::path& path) {
  int ix = -1, iy = -1, iz = -1;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == "x") ix = static_cast<int>(k);
    if (names[k] == "y") iy = static_cast<int>(k);
    if (names[k] == "z") iz = static_cast<int>(k);
  }
  if (ix < 0 || iy < 0 || iz < 0) io_fail(path, "point file needs x, y and z columns");
  PointTable t;
  t.points.resize(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != names.size()) io_fail(path, "row " + std::to_string(i) + " has the wrong number of values");
    t.points.row(static_cast<Eigen::Index>(i)) << rows[i][ix], rows[i][iy], rows[i][iz];
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (static_cast<int>(k) == ix || static_cast<int>(k) == iy || static_cast<int>(k) == iz) continue;
    auto& col = t.columns[names[k]];
    for (const auto& r : rows) col.push_back(static_cast<std::int64_t>(r[k]));
  }
  return t;
}

PointTable read_ply(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open");
  std::string line;
  std::getline(in, line);
  if (line != "ply") io_fail(path, "missing ply magic");
  std::string format;
  std::size_t vertex_count = 0;
  bool in_vertex = false, seen_vertex = false;
  std::vector<PlyProperty> props;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      ls >> format;
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      if (seen_vertex && name != "vertex") {
        in_vertex = false;  // later elements (faces) are not needed
        continue;
      }
      if (name != "vertex") io_fail(path, "vertex element must come first");
      in_vertex = seen_vertex = true;
      vertex_count = count;
    } else if (word == "property" && in_vertex) {
      PlyProperty p;
      ls >> p.type;
      if (p.type == "list") io_fail(path, "list properties on vertices are not supported");
      ls >> p.name;
      if (ply_type_size(p.type) == 0) io_fail(path, "unknown property type " + p.type);
      props.push_back(p);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!seen_vertex) io_fail(path, "no vertex element");
  std::vector<std::string> names;
  for (const auto& p : props) names.push_back(p.name);
  std::vector<std::vector<double>> rows(vertex_count, std::vector<double>(props.size()));
  if (format == "ascii") {
    for (auto& r : rows)
      for (double& v : r)
        if (!(in >> v)) io_fail(path, "truncated ascii vertex data");
  } else if (format == "binary_little_endian") {
    std::size_t stride = 0;
    for (const auto& p : props) stride += ply_type_size(p.type);
    std::vector<char> buf(stride);
    for (auto& r : rows) {
      if (!in.read(buf.data(), static_cast<std::streamsize>(stride))) io_fail(path, "truncated binary vertex data");
      std::size_t off = 0;
      for (std::size_t k = 0; k < props.size(); ++k) {
        r[k] = ply_binary_value(buf.data() + off, props[k].type);
        off += ply_type_size(props[k].type);
      }
    }
  } else {
    io_fail(path, "unsupported ply format '" + format + "'");
  }
  return table_from_rows(names, rows, path);
}

PointTable read_csv_points(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open");
  std::string line;
  if (!std::getline(in, line)) io_fail(path, "empty file");
  std::vector<std::string> names;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) names.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        r.push_back(std::stod(cell));
      } catch (const std::exception&) {
        io_fail(path, "bad number '" + cell + "'");
      }
    }
    rows.push_back(std::move(r));
  }
  return table_from_rows(names, rows, path);
}

PointTable read_json_points(const fs::path& path) {
  const json j = read_json(path);
  if (!j.contains("points")) io_fail(path, "missing 'points'");
  PointTable t;
  const json& pts = j["points"];
  t.points.resize(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i)
    t.points.row(static_cast<Eigen::Index>(i)) = vec_from(pts[i], "point").transpose();
  if (j.contains("columns"))
    for (const auto& [name, values] : j["columns"].items()) {
      if (values.size() != pts.size()) io_fail(path, "column '" + name + "' length differs from points");
      t.columns[name] = values.get<std::vector<std::int64_t>>();
    }
  return t;
}

}  // namespace

void write_points(const fs::path& path, const PointTable& table, Format format) {
  const auto n = static_cast<std::size_t>(table.points.rows());
  for (const auto& [name, col] : table.columns)
    if (col.size() != n) throw Error(ErrorKind::ShapeMismatch, "column '" + name + "' length differs from points");
  std::string s;
  switch (format) {
    case Format::Json: {
      json pts = json::array();
      for (Eigen::Index i = 0; i < table.points.rows(); ++i)
        pts.push_back(json::array({table.points(i, 0), table.points(i, 1), table.points(i, 2)}));
      json j = {{"points", pts}};
      if (!table.columns.empty()) j["columns"] = table.columns;
      write_json(path, j);
      return;
    }
    case Format::Csv:
      s = "x,y,z";
      for (const auto& [name, col] : table.columns) s += "," + name;
      s += "\n";
      break;
    case Format::Ply:
      s = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(n) +
          "\nproperty double x\nproperty double y\nproperty double z\n";
      for (const auto& [name, col] : table.columns) s += "property int " + name + "\n";
      s += "end_header\n";
      break;
  }
  const char sep = format == Format::Csv ? ',' : ' ';
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    s += fmt_double(table.points(r, 0)) + sep + fmt_double(table.points(r, 1)) + sep + fmt_double(table.points(r, 2));
    for (const auto& [name, col] : table.columns) s += sep + std::to_string(col[i]);
    s += "\n";
  }
  write_text(path, s);
}

PointTable read_points(const fs::path& path) {
  switch (format_of(path)) {
    case Format::Ply: return read_ply(path);
    case Format::Csv: return read_csv_points(path);
    case Format::Json: return read_json_points(path);
  }
  io_fail(path, "unreachable");
}

// ---------------------------------------------------------------- priors and assignments

void write_prior_fixture(const fs::path& path, Category c, const Points& points) {
  json pts = json::array();
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    pts.push_back(json::array({points(i, 0), points(i, 1), points(i, 2)}));
  write_json(path, {{"schema", "rbp.prior"}, {"schema_version", kSchemaVersion}, {"category", to_string(c)}, {"points", pts}});
}

Points read_prior_fixture(const fs::path& path, Category* category) {
  const json j = read_json(path);
  check_schema(j, "rbp.prior");
  if (category) *category = parse_category(j.at("category").get<std::string>());
  const json& pts = j.at("points");
  Points p(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) p.row(static_cast<Eigen::Index>(i)) = vec_from(pts[i], "point").transpose();
  return p;
}

namespace {

constexpr char kAssignMagic[4] = {'R', 'B', 'P', 'A'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof v);
  out.append(buf, sizeof buf);
}

template <typename T>
T take(std::ifstream& in, const fs::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) io_fail(path, "truncated assignment file");
  return v;
}

}  // namespace

void write_assignment(const fs::path& path, const AssignmentMatrix& a, bool single_precision) {
  std::string out(kAssignMagic, 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, single_precision ? 1 : 2);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(a.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(a.cols()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      if (single_precision)
        put<float>(out, static_cast<float>(a(i, k)));
      else
        put<double>(out, a(i, k));
    }
  write_text(path, out);
}

AssignmentMatrix read_assignment(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kAssignMagic, 4) != 0) io_fail(path, "not an assignment file");
  if (take<std::uint32_t>(in, path) != 1) io_fail(path, "unsupported assignment version");
  const auto dtype = take<std::uint32_t>(in, path);
  if (dtype != 1 && dtype != 2) io_fail(path, "unknown dtype " + std::to_string(dtype));
  const auto rows = take<std::uint64_t>(in, path);
  const auto cols = take<std::uint64_t>(in, path);
  if (rows > (1u << 24) || cols > (1u << 24)) io_fail(path, "implausible dimensions");
  AssignmentMatrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k)
      a(i, k) = dtype == 1 ? static_cast<double>(take<float>(in, path)) : take<double>(in, path);
  return a;
}

// ---------------------------------------------------------------- config

namespace {

template <typename E>
E parse_enum(const json& j, const std::string& key, std::initializer_list<std::pair<const char*, E>> table) {
  if (!j.is_string()) throw ConfigError(key, "expected a string");
  const auto s = j.get<std::string>();
  for (const auto& [name, value] : table)
    if (s == name) return value;
  std::string options;
  for (const auto& [name, value] : table) options += std::string(options.empty() ? "" : ", ") + name;
  throw ConfigError(key, "unknown value '" + s + "' (expected one of: " + options + ")");
}

template <typename E>
const char* enum_name(E v, std::initializer_list<std::pair<const char*, E>> table) {
  for (const auto& [name, value] : table)
    if (value == v) return name;
  return "?";
}

const std::initializer_list<std::pair<const char*, AugmentMethod>> kMethods = {
    {"none", AugmentMethod::None}, {"a1", AugmentMethod::A1},     {"a2", AugmentMethod::A2},
    {"linear", AugmentMethod::Linear}, {"auto", AugmentMethod::Auto}};
const std::initializer_list<std::pair<const char*, PriorSource>> kPriors = {{"category_mean", PriorSource::CategoryMean},
                                                                            {"instance", PriorSource::Instance}};
const std::initializer_list<std::pair<const char*, DeformationMode>> kDeformations = {
    {"exact", DeformationMode::Exact}, {"zero", DeformationMode::Zero}};
const std::initializer_list<std::pair<const char*, AssignmentMode>> kAssignments = {{"nearest", AssignmentMode::Nearest},
                                                                                  {"soft", AssignmentMode::Soft}};
const std::initializer_list<std::pair<const char*, HypothesisSize>> kSizes = {
    {"category_mean", HypothesisSize::CategoryMean}, {"true", HypothesisSize::True}};
const std::initializer_list<std::pair<const char*, DecoderMode>> kDecoders = {
    {"auto", DecoderMode::Auto}, {"dvpb", DecoderMode::Dvpb}, {"umeyama", DecoderMode::Umeyama}};
const std::initializer_list<std::pair<const char*, Reduction>> kReductions = {{"mean", Reduction::Mean},
                                                                             {"sum", Reduction::Sum}};

double num(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "expected a number");
  return j.get<double>();
}

std::int64_t integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key, "expected an integer");
  return j.get<std::int64_t>();
}

bool boolean(const json& j, const std::string& key) {
  if (!j.is_boolean()) throw ConfigError(key, "expected true or false");
  return j.get<bool>();
}

void require_object(const json& j, const std::string& key) {
  if (!j.is_object()) throw ConfigError(key, "expected an object");
}

Interval interval(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(key, "expected [lo, hi]");
  Interval r{num(j[0], key), num(j[1], key)};
  if (!(r.lo <= r.hi)) throw ConfigError(key, "lo must not exceed hi");
  return r;
}

json interval_json(const Interval& r) { return json::array({r.lo, r.hi}); }

// Degrees on disk, radians in memory. Written degrees are rounded to 1e-9 so
// that 30 reads back as 30 after the radian round trip.
double degrees(double rad) { return std::round(rad2deg(rad) * 1e9) / 1e9; }

Interval degrees_interval(const json& j, const std::string& key) {
  const Interval d = interval(j, key);
  return {deg2rad(d.lo), deg2rad(d.hi)};
}

Category category_key(const std::string& name, const std::string& key) {
  try {
    return parse_category(name);
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

Config config_from_json(const json& j, Config cfg) {
  require_object(j, "<root>");
  for (const auto& [key, v] : j.items()) {
    if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ConfigError(key, "expected a non-negative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "count") {
      const auto n = integer(v, key);
      if (n <= 0) throw ConfigError(key, "must be positive");
      cfg.count = static_cast<std::size_t>(n);
    } else if (key == "categories") {
      if (!v.is_array()) throw ConfigError(key, "expected an array of category names");
      cfg.categories.clear();
      for (const json& c : v) {
        if (!c.is_string()) throw ConfigError(key, "expected category names");
        cfg.categories.push_back(category_key(c.get<std::string>(), key));
      }
    } else if (key == "category_table") {
      require_object(v, key);
      for (const auto& [name, entry] : v.items()) {
        const std::string base = key + "." + name;
        const Category c = category_key(name, base);
        require_object(entry, base);
        CategoryConfig& cc = cfg.category_table[c];
        if (cc.params.empty()) cc = CategoryConfig{default_symmetry(c), mean_shape_params(c)};
        for (const auto& [field, value] : entry.items()) {
          const std::string fkey = base + "." + field;
          if (field == "symmetry") {
            if (!value.is_string()) throw ConfigError(fkey, "expected a string");
            try {
              cc.symmetry = parse_symmetry(value.get<std::string>());
            } catch (const Error& e) {
              throw ConfigError(fkey, e.what());
            }
          } else if (field == "params") {
            require_object(value, fkey);
            for (const auto& [pname, pval] : value.items()) {
              const std::string pkey = fkey + "." + pname;
              if (!cc.params.contains(pname)) throw ConfigError(pkey, "unknown shape parameter");
              const double x = num(pval, pkey);
              if (!(x > 0.0)) throw ConfigError(pkey, "must be positive");
              cc.params[pname] = x;
            }
          } else {
            throw ConfigError(fkey, "unknown key");
          }
        }
      }
    } else if (key == "shape_variation") {
      cfg.instance.shape_variation = num(v, key);
    } else if (key == "model_points") {
      cfg.instance.model_points = static_cast<int>(integer(v, key));
    } else if (key == "observed_points") {
      cfg.instance.observed_points = static_cast<int>(integer(v, key));
    } else if (key == "pose") {
      require_object(v, key);
      for (const auto& [f, x] : v.items()) {
        const std::string k = key + "." + f;
        if (f == "lateral") cfg.instance.pose.lateral = num(x, k);
        else if (f == "depth_min") cfg.instance.pose.depth_min = num(x, k);
        else if (f == "depth_max") cfg.instance.pose.depth_max = num(x, k);
        else throw ConfigError(k, "unknown key");
      }
    } else if (key == "weights") {
      require_object(v, key);
      for (const auto& [f, x] : v.items()) {
        const std::string k = key + "." + f;
        if (f == "lambda0") cfg.weights.lambda0 = num(x, k);
        else if (f == "lambda1") cfg.weights.lambda1 = num(x, k);
        else if (f == "lambda2") cfg.weights.lambda2 = num(x, k);
        else if (f == "lambda3") cfg.weights.lambda3 = num(x, k);
        else if (f == "lambda4") cfg.weights.lambda4 = num(x, k);
        else throw ConfigError(k, "unknown key");
      }
    } else if (key == "augmentation") {
      require_object(v, key);
      AugmentationConfig& a = cfg.augmentation;
      for (const auto& [f, x] : v.items()) {
        const std::string k = key + "." + f;
        if (f == "method") a.method = parse_enum(x, k, kMethods);
        else if (f == "gamma_max") a.ranges.gamma_max = interval(x, k);
        else if (f == "gamma_min") a.ranges.gamma_min = interval(x, k);
        else if (f == "gamma") a.ranges.gamma = interval(x, k);
        else if (f == "hinge_angle_deg") a.ranges.hinge_angle = degrees_interval(x, k);
        else if (f == "noise_sigma") a.perturbation.noise_sigma = num(x, k);
        else if (f == "rot_jitter_deg") a.perturbation.rot_jitter = deg2rad(num(x, k));
        else if (f == "trans_jitter") a.perturbation.trans_jitter = num(x, k);
        else throw ConfigError(k, "unknown key");
      }
    } else if (key == "pipeline") {
      require_object(v, key);
      PipelineOptions& p = cfg.pipeline;
      for (const auto& [f, x] : v.items()) {
        const std::string k = key + "." + f;
        if (f == "prior") p.prior = parse_enum(x, k, kPriors);
        else if (f == "deformation") p.deformation = parse_enum(x, k, kDeformations);
        else if (f == "deformation_cap") p.deformation_cap = num(x, k);
        else if (f == "assignment") p.assignment = parse_enum(x, k, kAssignments);
        else if (f == "soft_k") p.soft_k = static_cast<int>(integer(x, k));
        else if (f == "soft_bandwidth") p.soft_bandwidth = num(x, k);
        else if (f == "hypothesis_size") p.hypothesis_size = parse_enum(x, k, kSizes);
        else if (f == "hypothesis_rotation_noise_deg") p.hypothesis_rotation_noise_deg = num(x, k);
        else if (f == "field_noise_sigma") p.field_noise_sigma = num(x, k);
        else if (f == "pose_perturbation_deg") p.pose_perturbation_deg = num(x, k);
        else if (f == "pose_perturbation_m") p.pose_perturbation_m = num(x, k);
        else if (f == "decoder") p.decoder = parse_enum(x, k, kDecoders);
        else if (f == "sigma_data") p.sigma_data = num(x, k);
        else if (f == "sigma_reg") p.sigma_reg = num(x, k);
        else if (f == "reduction") p.reduction = parse_enum(x, k, kReductions);
        else if (f == "dump_fields") p.keep_fields = boolean(x, k);
        else throw ConfigError(k, "unknown key");
      }
    } else if (key == "iou_resolution") {
      cfg.iou_resolution = static_cast<int>(integer(v, key));
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(integer(v, key));
      if (cfg.threads < 0) throw ConfigError(key, "must be non-negative");
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  validate(cfg);
  return cfg;
}

Config load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json to_json(const Config& c) {
  json cats = json::array();
  for (Category cat : c.categories) cats.push_back(to_string(cat));
  json table = json::object();
  for (const auto& [cat, cc] : c.category_table)
    table[std::string(to_string(cat))] = {{"symmetry", to_string(cc.symmetry)}, {"params", cc.params}};
  const AugmentationConfig& a = c.augmentation;
  const PipelineOptions& p = c.pipeline;
  return {
      {"seed", c.seed},
      {"count", c.count},
      {"categories", cats},
      {"category_table", table},
      {"shape_variation", c.instance.shape_variation},
      {"model_points", c.instance.model_points},
      {"observed_points", c.instance.observed_points},
      {"pose",
       {{"lateral", c.instance.pose.lateral}, {"depth_min", c.instance.pose.depth_min}, {"depth_max", c.instance.pose.depth_max}}},
      {"weights",
       {{"lambda0", c.weights.lambda0},
        {"lambda1", c.weights.lambda1},
        {"lambda2", c.weights.lambda2},
        {"lambda3", c.weights.lambda3},
        {"lambda4", c.weights.lambda4}}},
      {"augmentation",
       {{"method", enum_name(a.method, kMethods)},
        {"gamma_max", interval_json(a.ranges.gamma_max)},
        {"gamma_min", interval_json(a.ranges.gamma_min)},
        {"gamma", interval_json(a.ranges.gamma)},
        {"hinge_angle_deg", json::array({degrees(a.ranges.hinge_angle.lo), degrees(a.ranges.hinge_angle.hi)})},
        {"noise_sigma", a.perturbation.noise_sigma},
        {"rot_jitter_deg", degrees(a.perturbation.rot_jitter)},
        {"trans_jitter", a.perturbation.trans_jitter}}},
      {"pipeline",
       {{"prior", enum_name(p.prior, kPriors)},
        {"deformation", enum_name(p.deformation, kDeformations)},
        {"deformation_cap", p.deformation_cap},
        {"assignment", enum_name(p.assignment, kAssignments)},
        {"soft_k", p.soft_k},
        {"soft_bandwidth", p.soft_bandwidth},
        {"hypothesis_size", enum_name(p.hypothesis_size, kSizes)},
        {"hypothesis_rotation_noise_deg", p.hypothesis_rotation_noise_deg},
        {"field_noise_sigma", p.field_noise_sigma},
        {"pose_perturbation_deg", p.pose_perturbation_deg},
        {"pose_perturbation_m", p.pose_perturbation_m},
        {"decoder", enum_name(p.decoder, kDecoders)},
        {"sigma_data", p.sigma_data},
        {"sigma_reg", p.sigma_reg},
        {"reduction", enum_name(p.reduction, kReductions)},
        {"dump_fields", p.keep_fields}}},
      {"iou_resolution", c.iou_resolution},
      {"threads", c.threads},
  };
}

// ---------------------------------------------------------------- corpus

namespace {

std::string instance_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return buf;
}

}  // namespace

void save_corpus(const fs::path& dir, const Corpus& corpus, Format format) {
  std::error_code ec;
  fs::create_directories(dir / "instances", ec);
  fs::create_directories(dir / "priors", ec);
  if (ec) io_fail(dir, "cannot create corpus directory: " + ec.message());
  const std::string ext(extension(format));

  json priors = json::object(), sizes = json::object(), seeds = json::object();
  for (const auto& [c, points] : corpus.priors) {
    const std::string name(to_string(c));
    const std::string rel = "priors/" + name + ext;
    write_points(dir / rel, PointTable{points, {}}, format);
    priors[name] = rel;
    seeds[name] = corpus.surface_seeds.at(c);
  }
  for (const auto& [c, s] : corpus.mean_sizes) sizes[std::string(to_string(c))] = vec_json(s);

  json instances = json::array();
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    const SyntheticInstance& inst = corpus.instances[i];
    const std::string model = "instances/" + instance_stem(i) + "_model" + ext;
    const std::string observed = "instances/" + instance_stem(i) + "_observed" + ext;
    PointTable m{inst.model_nocs, {}};
    m.columns["label"] = std::vector<std::int64_t>(inst.model_labels.begin(), inst.model_labels.end());
    write_points(dir / model, m, format);
    PointTable o{inst.observed, {}};
    o.columns["source"] = std::vector<std::int64_t>(inst.observed_index.begin(), inst.observed_index.end());
    write_points(dir / observed, o, format);
    instances.push_back({{"index", i},
                         {"category", to_string(inst.category)},
                         {"symmetry", to_string(inst.symmetry.type)},
                         {"seed", inst.seed},
                         {"params", inst.params},
                         {"pose", to_json(inst.pose)},
                         {"hinge", {{"point", vec_json(inst.hinge.point)}, {"direction", vec_json(inst.hinge.direction)}}},
                         {"model", model},
                         {"observed", observed}});
  }
  write_json(dir / "manifest.json", {{"schema", "rbp.corpus"},
                                     {"schema_version", kSchemaVersion},
                                     {"seed", corpus.seed},
                                     {"format", to_string(format)},
                                     {"mean_sizes", sizes},
                                     {"surface_seeds", seeds},
                                     {"priors", priors},
                                     {"instances", instances}});
}

Corpus load_corpus(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  try {
    check_schema(m, "rbp.corpus");
  } catch (const Error& e) {
    io_fail(dir / "manifest.json", e.what());
  }
  Corpus corpus;
  try {
    corpus.seed = m.at("seed").get<std::uint64_t>();
    for (const auto& [name, s] : m.at("mean_sizes").items()) corpus.mean_sizes[parse_category(name)] = vec_from(s, "mean size");
    for (const auto& [name, s] : m.at("surface_seeds").items()) corpus.surface_seeds[parse_category(name)] = s.get<std::uint64_t>();
    for (const auto& [name, rel] : m.at("priors").items())
      corpus.priors[parse_category(name)] = read_points(dir / rel.get<std::string>()).points;
    for (const json& e : m.at("instances")) {
      SyntheticInstance inst;
      inst.category = parse_category(e.at("category").get<std::string>());
      inst.symmetry = SymmetryTag{std::string(to_string(inst.category)), parse_symmetry(e.at("symmetry").get<std::string>())};
      inst.seed = e.at("seed").get<std::uint64_t>();
      inst.params = e.at("params").get<ShapeParams>();
      inst.pose = pose_from_json(e.at("pose"));
      inst.hinge.point = vec_from(e.at("hinge").at("point"), "hinge point");
      inst.hinge.direction = vec_from(e.at("hinge").at("direction"), "hinge direction");
      PointTable model = read_points(dir / e.at("model").get<std::string>());
      inst.model_nocs = std::move(model.points);
      for (std::int64_t l : model.columns["label"]) inst.model_labels.push_back(static_cast<std::uint8_t>(l));
      if (inst.model_labels.empty()) inst.model_labels.assign(static_cast<std::size_t>(inst.model_nocs.rows()), 0);
      PointTable obs = read_points(dir / e.at("observed").get<std::string>());
      inst.observed = std::move(obs.points);
      for (std::int64_t s : obs.columns["source"]) {
        if (s < 0 || s >= inst.model_nocs.rows()) io_fail(dir, "observed source index out of range");
        inst.observed_index.push_back(static_cast<Eigen::Index>(s));
      }
      corpus.instances.push_back(std::move(inst));
    }
  } catch (const json::exception& e) {
    io_fail(dir / "manifest.json", e.what());
  }
  return corpus;
}

json predictions_to_json(const std::vector<Prediction>& predictions) {
  json arr = json::array();
  for (const Prediction& p : predictions) arr.push_back({{"index", p.index}, {"pose", to_json(p.pose)}});
  return {{"schema", "rbp.predictions"}, {"schema_version", kSchemaVersion}, {"predictions", arr}};
}

std::vector<Prediction> predictions_from_json(const json& j) {
  check_schema(j, "rbp.predictions");
  std::vector<Prediction> out;
  for (const json& e : j.at("predictions")) out.push_back({e.at("index").get<std::size_t>(), pose_from_json(e.at("pose"))});
  return out;
}

// ---------------------------------------------------------------- files

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    io_fail(path, e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail(path, "cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) io_fail(path, "write failed");
}

}  // namespace rbp::io
