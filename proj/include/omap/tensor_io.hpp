#ifndef OMAP_TENSOR_IO_HPP_
#define OMAP_TENSOR_IO_HPP_

// Matrix and report files.
//
// Binary matrix layout (all integers little-endian):
//   "OMAP" | u16 version = 1 | u8 kind | u8 reserved = 0 | u64 N | u64 C |
//   N*C IEEE-754 binary32, row-major.
// CSV layout: header "sample_id,<class_0>,...,<class_C-1>", then one row per
// sample starting with its index.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "omap/detail/text.hpp"
#include "omap/error.hpp"
#include "omap/matrix.hpp"
#include "omap/metrics.hpp"
#include "omap/report.hpp"

namespace omap {

enum class MatrixKind : std::uint8_t { kScores = 0, kLabels = 1, kWeights = 2 };
enum class MatrixFormat { kCsv, kBinary };

inline constexpr char kMatrixMagic[4] = {'O', 'M', 'A', 'P'};
inline constexpr std::size_t kMatrixHeaderSize = 4 + 2 + 1 + 1 + 8 + 8;

inline const char* kind_name(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::kScores: return "scores";
    case MatrixKind::kLabels: return "labels";
    case MatrixKind::kWeights: return "weights";
  }
  return "unknown";
}

namespace detail {

static_assert(std::numeric_limits<float>::is_iec559, "binary32 floats required");

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t get_le(std::string_view in, std::size_t offset, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

/// Checks one decoded element against the rules of its kind.
inline void check_element(MatrixKind kind, double v, std::size_t r, std::size_t c) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNonFinite, std::string("non-finite ") + kind_name(kind) +
                                           " value at " + cell_name(r, c));
  }
  switch (kind) {
    case MatrixKind::kScores:
      if (v < 0.0 || v > 1.0) {
        throw Error(ErrorCode::kRange, "score " + format_shortest(v) + " outside [0,1] at " +
                                           cell_name(r, c));
      }
      break;
    case MatrixKind::kLabels:
      if (v != 0.0 && v != 1.0) {
        throw Error(ErrorCode::kBinarity,
                    "label " + format_shortest(v) + " is not 0 or 1 at " + cell_name(r, c));
      }
      break;
    case MatrixKind::kWeights:
      if (v < 0.0) {
        throw Error(ErrorCode::kRange, "negative weight at " + cell_name(r, c));
      }
      break;
  }
}

inline bool looks_binary(std::string_view bytes) {
  return bytes.size() >= 4 && std::memcmp(bytes.data(), kMatrixMagic, 4) == 0;
}

}  // namespace detail

/// Encodes values as the binary matrix format. Doubles are narrowed to
/// binary32.
template <class T>
std::string encode_binary(const Matrix<T>& m, MatrixKind kind) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw Error(ErrorCode::kShape, "cannot write a matrix with no rows or columns");
  }
  std::string out;
  out.reserve(kMatrixHeaderSize + 4 * m.data().size());
  out.append(kMatrixMagic, 4);
  detail::put_le(out, kMatrixFormatVersion, 2);
  detail::put_le(out, static_cast<std::uint8_t>(kind), 1);
  detail::put_le(out, 0, 1);
  detail::put_le(out, m.rows(), 8);
  detail::put_le(out, m.cols(), 8);
  for (T v : m.data()) {
    detail::put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
  }
  return out;
}

/// Decodes and validates a binary matrix of the expected kind.
inline Matrix<float> decode_binary(std::string_view bytes, MatrixKind expected) {
  if (bytes.size() < kMatrixHeaderSize) {
    throw Error(ErrorCode::kFormat, "matrix file is shorter than its header");
  }
  if (!detail::looks_binary(bytes)) throw Error(ErrorCode::kFormat, "bad matrix magic bytes");
  const auto version = detail::get_le(bytes, 4, 2);
  if (version != kMatrixFormatVersion) {
    throw Error(ErrorCode::kVersion,
                "unsupported matrix format version " + std::to_string(version));
  }
  const auto kind = detail::get_le(bytes, 6, 1);
  if (kind != static_cast<std::uint8_t>(expected)) {
    throw Error(ErrorCode::kFormat, "matrix kind byte is " + std::to_string(kind) +
                                        ", expected " +
                                        std::to_string(static_cast<int>(expected)) + " (" +
                                        kind_name(expected) + ")");
  }
  if (detail::get_le(bytes, 7, 1) != 0) {
    throw Error(ErrorCode::kFormat, "reserved header byte must be 0");
  }
  const std::uint64_t rows = detail::get_le(bytes, 8, 8);
  const std::uint64_t cols = detail::get_le(bytes, 16, 8);
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::kShape, "matrix header declares no rows or no columns");
  }
  const std::uint64_t payload = bytes.size() - kMatrixHeaderSize;
  if (cols > payload / 4 || rows > payload / 4 / cols) {
    throw Error(ErrorCode::kFormat, "truncated matrix payload: header declares " +
                                        std::to_string(rows) + "x" + std::to_string(cols) +
                                        " but only " + std::to_string(payload) +
                                        " payload bytes follow");
  }
  if (rows * cols * 4 != payload) {
    throw Error(ErrorCode::kFormat, "matrix payload has trailing bytes after " +
                                        std::to_string(rows) + "x" + std::to_string(cols) +
                                        " values");
  }
  Matrix<float> m(rows, cols);
  auto data = m.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto bits = static_cast<std::uint32_t>(
        detail::get_le(bytes, kMatrixHeaderSize + 4 * i, 4));
    data[i] = std::bit_cast<float>(bits);
    detail::check_element(expected, data[i], i / cols, i % cols);
  }
  return m;
}

/// CSV text with shortest round-trip decimals. `class_names` defaults to
/// c0..c{C-1}.
template <class T>
std::string encode_csv(const Matrix<T>& m, const std::vector<std::string>& class_names = {}) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw Error(ErrorCode::kShape, "cannot write a matrix with no rows or columns");
  }
  if (!class_names.empty() && class_names.size() != m.cols()) {
    throw Error(ErrorCode::kShape, "class name count does not match the matrix width");
  }
  std::string out = "sample_id";
  for (std::size_t c = 0; c < m.cols(); ++c) {
    out += ',';
    out += class_names.empty() ? "c" + std::to_string(c) : detail::csv_quote(class_names[c]);
  }
  out += '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += std::to_string(r);
    for (T v : m.row(r)) {
      out += ',';
      if constexpr (std::is_same_v<T, std::uint8_t>) {
        out += v ? '1' : '0';
      } else {
        out += detail::format_shortest(v);
      }
    }
    out += '\n';
  }
  return out;
}

/// Parses CSV into element type T (float for scores/labels, double for
/// weights) and validates every element for `kind`.
template <class T>
Matrix<T> decode_csv(std::string_view text, MatrixKind kind) {
  const auto lines = detail::split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() && detail::trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw Error(ErrorCode::kShape, "CSV matrix has no header");
  const auto header = detail::split_csv_record(lines[first]);
  if (!header || header->size() < 2) {
    throw Error(ErrorCode::kParse, "CSV header must be sample_id followed by class columns");
  }
  const std::size_t cols = header->size() - 1;
  std::vector<T> values;
  std::size_t rows = 0;
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const auto fields = detail::split_csv_record(lines[i]);
    if (!fields || fields->size() != cols + 1) {
      throw Error(ErrorCode::kShape,
                  "CSV line " + std::to_string(i + 1) + " has " +
                      std::to_string(fields ? fields->size() : 0) + " fields, header has " +
                      std::to_string(cols + 1));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = detail::parse_number<T>((*fields)[c + 1]);
      if (!v) {
        throw Error(ErrorCode::kParse, "unparsable number '" + (*fields)[c + 1] + "' at " +
                                           cell_name(rows, c));
      }
      detail::check_element(kind, static_cast<double>(*v), rows, c);
      values.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::kShape, "CSV matrix has no data rows");
  return Matrix<T>(rows, cols, std::move(values));
}

namespace detail {

template <class T>
Matrix<T> read_any(const std::filesystem::path& path, MatrixKind kind) {
  const std::string bytes = read_file(path);
  if (looks_binary(bytes)) {
    const Matrix<float> raw = decode_binary(bytes, kind);
    std::vector<T> converted(raw.data().begin(), raw.data().end());
    return Matrix<T>(raw.rows(), raw.cols(), std::move(converted));
  }
  return decode_csv<T>(bytes, kind);
}

}  // namespace detail

/// Reads a score matrix from either format (detected from the magic bytes).
inline ScoreMatrix read_scores(const std::filesystem::path& path) {
  return detail::read_any<float>(path, MatrixKind::kScores);
}

inline LabelMatrix read_labels(const std::filesystem::path& path) {
  const Matrix<float> raw = detail::read_any<float>(path, MatrixKind::kLabels);
  std::vector<std::uint8_t> bits(raw.data().size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = raw.data()[i] != 0.0f;
  return LabelMatrix(raw.rows(), raw.cols(), std::move(bits));
}

inline WeightMatrix read_weights(const std::filesystem::path& path) {
  return detail::read_any<double>(path, MatrixKind::kWeights);
}

template <class T>
void write_matrix(const Matrix<T>& m, MatrixKind kind, const std::filesystem::path& path,
                  MatrixFormat format, const std::vector<std::string>& class_names = {}) {
  detail::write_file(path, format == MatrixFormat::kBinary ? encode_binary(m, kind)
                                                           : encode_csv(m, class_names));
}

inline void write_matrix(const ScoreMatrix& m, const std::filesystem::path& path,
                         MatrixFormat format) {
  validate_scores(m);
  write_matrix(m, MatrixKind::kScores, path, format);
}

inline void write_matrix(const LabelMatrix& m, const std::filesystem::path& path,
                         MatrixFormat format) {
  validate_labels(m);
  write_matrix(m, MatrixKind::kLabels, path, format);
}

inline void write_matrix(const WeightMatrix& m, const std::filesystem::path& path,
                         MatrixFormat format) {
  write_matrix(m, MatrixKind::kWeights, path, format);
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::json report_to_json(const EvaluationReport& report) {
  using nlohmann::json;
  json root;
  root["schema"] = report.metadata.schema;
  root["map"] = report.map;
  root["omap"] = report.omap;
  root["omap0"] = report.omap0 ? json(*report.omap0) : json(nullptr);
  json levels = json::array();
  for (const LevelSummary& level : report.levels) {
    levels.push_back({{"lambda", level.level}, {"mean_oap", level.mean_oap}});
  }
  root["levels"] = std::move(levels);
  json classes = json::array();
  for (const ClassResult& r : report.per_class) {
    classes.push_back({{"column", r.column},
                       {"id", r.id},
                       {"name", r.name},
                       {"positives", r.positives},
                       {"skipped", r.skipped},
                       {"ap", r.ap ? json(*r.ap) : json(nullptr)},
                       {"oap", r.oap}});
  }
  root["per_class"] = std::move(classes);
  const ReportMetadata& m = report.metadata;
  root["metadata"] = {
      {"matrix_format_version", m.matrix_format_version},
      {"tool_version", m.tool_version},
      {"ontology_digest", m.ontology_digest},
      {"d_max", m.d_max},
      {"level_first", m.level_first},
      {"level_last", m.level_last},
      {"n_samples", m.n_samples},
      {"n_classes", m.n_classes},
      {"evaluated_classes", m.evaluated_classes},
      {"empty_label_samples", m.empty_label_samples},
      {"empty_label_policy", m.empty_label_policy},
      {"zero_positive_policy", m.zero_positive_policy},
      {"timestamp", m.timestamp ? json(*m.timestamp) : json(nullptr)},
  };
  return root;
}

inline std::string format_report(const EvaluationReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

inline constexpr double kReportIntegrityTolerance = 1e-12;

/// Recomputes the level means, mAP and OmAP from the per-class values and
/// rejects the report if any stored aggregate disagrees.
inline void check_report_integrity(const EvaluationReport& report) {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kIntegrity, "report " + what +
                                           " disagrees with its per-class values");
  };
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  const std::size_t n_levels = report.levels.size();
  if (n_levels == 0) throw Error(ErrorCode::kIntegrity, "report has no levels");
  double ap_sum = 0.0;
  std::size_t evaluated = 0;
  std::vector<double> level_sums(n_levels, 0.0);
  for (const ClassResult& r : report.per_class) {
    if (r.skipped) continue;
    if (!r.ap || r.oap.size() != n_levels) {
      throw Error(ErrorCode::kIntegrity, "class " + r.id + " lacks per-level values");
    }
    if (!in_unit(*r.ap)) throw Error(ErrorCode::kIntegrity, "class " + r.id + " AP outside [0,1]");
    ap_sum += *r.ap;
    for (std::size_t l = 0; l < n_levels; ++l) {
      if (!in_unit(r.oap[l])) {
        throw Error(ErrorCode::kIntegrity, "class " + r.id + " OAP outside [0,1]");
      }
      level_sums[l] += r.oap[l];
    }
    ++evaluated;
  }
  if (evaluated == 0) throw Error(ErrorCode::kIntegrity, "report evaluates no classes");
  const double count = static_cast<double>(evaluated);
  if (std::abs(ap_sum / count - report.map) > kReportIntegrityTolerance) fail("mAP");
  double total = 0.0;
  std::optional<double> level0;
  for (std::size_t l = 0; l < n_levels; ++l) {
    if (std::abs(level_sums[l] / count - report.levels[l].mean_oap) > kReportIntegrityTolerance) {
      fail("mean OAP at level " + std::to_string(report.levels[l].level));
    }
    if (report.levels[l].level == 0) level0 = report.levels[l].mean_oap;
    total += level_sums[l];
  }
  if (std::abs(total / (static_cast<double>(n_levels) * count) - report.omap) >
      kReportIntegrityTolerance) {
    fail("OmAP");
  }
  if (level0.has_value() != report.omap0.has_value() ||
      (level0 && std::abs(*level0 - *report.omap0) > kReportIntegrityTolerance)) {
    fail("OmAP0");
  }
}

inline EvaluationReport report_from_json(const nlohmann::json& root) {
  const auto schema = root.find("schema");
  if (schema == root.end() || !schema->is_string()) {
    throw Error(ErrorCode::kVersion, "report has no schema field");
  }
  if (schema->get<std::string>() != kReportSchema) {
    throw Error(ErrorCode::kVersion, "unsupported report schema '" +
                                         schema->get<std::string>() + "', expected '" +
                                         kReportSchema + "'");
  }
  EvaluationReport report;
  try {
    report.map = root.at("map").get<double>();
    report.omap = root.at("omap").get<double>();
    if (!root.at("omap0").is_null()) report.omap0 = root.at("omap0").get<double>();
    for (const auto& level : root.at("levels")) {
      report.levels.push_back(
          {level.at("lambda").get<Distance>(), level.at("mean_oap").get<double>()});
    }
    for (const auto& c : root.at("per_class")) {
      ClassResult r;
      r.column = c.at("column").get<std::size_t>();
      r.id = c.at("id").get<std::string>();
      r.name = c.at("name").get<std::string>();
      r.positives = c.at("positives").get<std::size_t>();
      r.skipped = c.at("skipped").get<bool>();
      if (!c.at("ap").is_null()) r.ap = c.at("ap").get<double>();
      r.oap = c.at("oap").get<std::vector<double>>();
      report.per_class.push_back(std::move(r));
    }
    const auto& m = root.at("metadata");
    ReportMetadata& meta = report.metadata;
    meta.schema = schema->get<std::string>();
    meta.matrix_format_version = m.at("matrix_format_version").get<unsigned>();
    meta.tool_version = m.at("tool_version").get<std::string>();
    meta.ontology_digest = m.at("ontology_digest").get<std::string>();
    meta.d_max = m.at("d_max").get<Distance>();
    meta.level_first = m.at("level_first").get<Distance>();
    meta.level_last = m.at("level_last").get<Distance>();
    meta.n_samples = m.at("n_samples").get<std::size_t>();
    meta.n_classes = m.at("n_classes").get<std::size_t>();
    meta.evaluated_classes = m.at("evaluated_classes").get<std::size_t>();
    meta.empty_label_samples = m.at("empty_label_samples").get<std::size_t>();
    meta.empty_label_policy = m.at("empty_label_policy").get<std::string>();
    meta.zero_positive_policy = m.at("zero_positive_policy").get<std::string>();
    if (!m.at("timestamp").is_null()) meta.timestamp = m.at("timestamp").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed report: ") + e.what());
  }
  check_report_integrity(report);
  return report;
}

inline EvaluationReport parse_report(std::string_view text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("report is not valid JSON: ") + e.what());
  }
  return report_from_json(root);
}

inline void write_report(const EvaluationReport& report, const std::filesystem::path& path) {
  detail::write_file(path, format_report(report));
}

inline EvaluationReport read_report(const std::filesystem::path& path) {
  return parse_report(detail::read_file(path));
}

/// Plot table "lambda,mean_oap,delta" where delta is mean_oap minus mAP.
inline std::string format_level_table(const EvaluationReport& report) {
  std::string out = "lambda,mean_oap,delta\n";
  for (const LevelSummary& level : report.levels) {
    out += std::to_string(level.level) + "," + detail::format_shortest(level.mean_oap) + "," +
           detail::format_shortest(level.mean_oap - report.map) + "\n";
  }
  return out;
}

/// Plot table "lambda,oap_a,oap_b,delta" for a two-model comparison.
inline std::string format_comparison_table(const ReportComparison& cmp) {
  std::string out = "lambda,oap_a,oap_b,delta\n";
  for (const LevelDelta& d : cmp.levels) {
    out += std::to_string(d.level) + "," + detail::format_shortest(d.a) + "," +
           detail::format_shortest(d.b) + "," + detail::format_shortest(d.delta) + "\n";
  }
  return out;
}

}  // namespace omap

#endif  // OMAP_TENSOR_IO_HPP_
