#ifndef OMAP_REPORT_HPP_
#define OMAP_REPORT_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "omap/ontology.hpp"

namespace omap {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kReportSchema = "omap_report_v1";
inline constexpr unsigned kMatrixFormatVersion = 1;

struct LevelSummary {
  Distance level = 0;
  double mean_oap = 0.0;
};

struct ClassResult {
  std::size_t column = 0;
  std::string id;
  std::string name;
  std::size_t positives = 0;
  // Classes without positive labels are excluded from every mean; ap and oap
  // are then absent.
  bool skipped = false;
  std::optional<double> ap;
  std::vector<double> oap;  // one value per evaluated level, in level order
};

struct ReportMetadata {
  std::string schema = kReportSchema;
  unsigned matrix_format_version = kMatrixFormatVersion;
  std::string tool_version = kVersion;
  std::string ontology_digest;
  Distance d_max = 0;
  Distance level_first = 0;
  Distance level_last = 0;
  std::size_t n_samples = 0;
  std::size_t n_classes = 0;
  std::size_t evaluated_classes = 0;
  std::size_t empty_label_samples = 0;
  std::string empty_label_policy;
  std::string zero_positive_policy;
  // Left empty unless the caller stamps it, so repeated runs stay
  // byte-identical.
  std::optional<std::string> timestamp;

  bool operator==(const ReportMetadata&) const = default;
};

struct EvaluationReport {
  double map = 0.0;
  double omap = 0.0;
  // Mean OAP at level 0; absent when level 0 is outside the evaluated range.
  std::optional<double> omap0;
  std::vector<LevelSummary> levels;
  std::vector<ClassResult> per_class;
  ReportMetadata metadata;
};

}  // namespace omap

#endif  // OMAP_REPORT_HPP_
