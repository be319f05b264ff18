#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "omap/omap.hpp"
#include "support/random_instances.hpp"

namespace {

using omap::ErrorCode;
using omap::LabelMatrix;
using omap::MatrixFormat;
using omap::MatrixKind;
using omap::ScoreMatrix;

template <class Fn>
ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const omap::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected omap::Error";
  return ErrorCode::kInternal;
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("omap_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

TEST(BinaryMatrix, HeaderLayout) {
  const ScoreMatrix m(2, 3, 0.25f);
  const std::string bytes = omap::encode_binary(m, MatrixKind::kScores);
  ASSERT_EQ(bytes.size(), 24u + 6u * 4u);
  EXPECT_EQ(bytes.substr(0, 4), "OMAP");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 0);
  EXPECT_EQ(bytes[7], 0);
  EXPECT_EQ(bytes[8], 2);
  EXPECT_EQ(bytes[16], 3);
  // 0.25f is 0x3E800000, stored little-endian.
  EXPECT_EQ(static_cast<unsigned char>(bytes[24 + 3]), 0x3Eu);
  EXPECT_EQ(static_cast<unsigned char>(bytes[24 + 2]), 0x80u);
}

TEST(BinaryMatrix, RoundTripIsBitExact) {
  testing_support::Rng rng(1);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  for (int trial = 0; trial < 100; ++trial) {
    const auto scores = testing_support::random_scores(rng, dim(rng), dim(rng));
    const auto back = omap::decode_binary(omap::encode_binary(scores, MatrixKind::kScores),
                                          MatrixKind::kScores);
    EXPECT_EQ(back, scores);
  }
}

TEST(BinaryMatrix, SingleElement) {
  const ScoreMatrix m(1, 1, 1.0f);
  EXPECT_EQ(omap::decode_binary(omap::encode_binary(m, MatrixKind::kScores), MatrixKind::kScores), m);
}

TEST(BinaryMatrix, Errors) {
  const ScoreMatrix m(2, 2, 0.5f);
  const std::string good = omap::encode_binary(m, MatrixKind::kScores);

  EXPECT_EQ(error_of([&] { omap::decode_binary(good.substr(0, 10), MatrixKind::kScores); }),
            ErrorCode::kFormat);
  EXPECT_EQ(error_of([&] { omap::decode_binary(good.substr(0, good.size() - 1), MatrixKind::kScores); }),
            ErrorCode::kFormat);
  EXPECT_EQ(error_of([&] { omap::decode_binary(good + "x", MatrixKind::kScores); }), ErrorCode::kFormat);

  std::string magic = good;
  magic[0] = 'X';
  EXPECT_EQ(error_of([&] { omap::decode_binary(magic, MatrixKind::kScores); }), ErrorCode::kFormat);
  std::string version = good;
  version[4] = 2;
  EXPECT_EQ(error_of([&] { omap::decode_binary(version, MatrixKind::kScores); }), ErrorCode::kVersion);
  EXPECT_EQ(error_of([&] { omap::decode_binary(good, MatrixKind::kLabels); }), ErrorCode::kFormat);
  std::string reserved = good;
  reserved[7] = 1;
  EXPECT_EQ(error_of([&] { omap::decode_binary(reserved, MatrixKind::kScores); }), ErrorCode::kFormat);

  std::string empty_rows = good.substr(0, 24);
  empty_rows[8] = 0;
  EXPECT_EQ(error_of([&] { omap::decode_binary(empty_rows, MatrixKind::kScores); }), ErrorCode::kShape);
  EXPECT_EQ(error_of([&] { omap::encode_binary(ScoreMatrix(0, 3), MatrixKind::kScores); }),
            ErrorCode::kShape);

  // Header claiming an enormous matrix must not allocate.
  std::string huge = good.substr(0, 24);
  for (int i = 8; i < 24; ++i) huge[i] = static_cast<char>(0xFF);
  EXPECT_EQ(error_of([&] { omap::decode_binary(huge, MatrixKind::kScores); }), ErrorCode::kFormat);
}

TEST(BinaryMatrix, ElementChecks) {
  ScoreMatrix nan(1, 2, 0.5f);
  nan(0, 1) = std::numeric_limits<float>::quiet_NaN();
  try {
    omap::decode_binary(omap::encode_binary(nan, MatrixKind::kScores), MatrixKind::kScores);
    FAIL() << "expected a non-finite error";
  } catch (const omap::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
    EXPECT_NE(std::string(e.what()).find("row 0, col 1"), std::string::npos);
  }
  const ScoreMatrix big(1, 1, 1.5f);
  EXPECT_EQ(error_of([&] {
              omap::decode_binary(omap::encode_binary(big, MatrixKind::kScores), MatrixKind::kScores);
            }),
            ErrorCode::kRange);
  const ScoreMatrix half(1, 1, 0.5f);
  EXPECT_EQ(error_of([&] {
              omap::decode_binary(omap::encode_binary(half, MatrixKind::kLabels), MatrixKind::kLabels);
            }),
            ErrorCode::kBinarity);
}

TEST(CsvMatrix, RoundTripIsExact) {
  testing_support::Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto scores = testing_support::random_scores(rng, 1 + trial % 13, 1 + trial % 7);
    const auto text = omap::encode_csv(scores);
    EXPECT_EQ(omap::decode_csv<float>(text, MatrixKind::kScores), scores);
  }
  omap::WeightMatrix w(2, 2, 1.0 / 3.0);
  EXPECT_EQ(omap::decode_csv<double>(omap::encode_csv(w), MatrixKind::kWeights), w);
}

TEST(CsvMatrix, HeaderAndNames) {
  const LabelMatrix m(1, 2, std::vector<std::uint8_t>{1, 0});
  EXPECT_EQ(omap::encode_csv(m), "sample_id,c0,c1\n0,1,0\n");
  EXPECT_EQ(omap::encode_csv(m, {"Dog", "a,b"}), "sample_id,Dog,\"a,b\"\n0,1,0\n");
  EXPECT_EQ(error_of([&] { omap::encode_csv(m, {"only"}); }), ErrorCode::kShape);
}

TEST(CsvMatrix, Errors) {
  EXPECT_EQ(error_of([] { omap::decode_csv<float>("sample_id,a\n0,1.2\n", MatrixKind::kScores); }),
            ErrorCode::kRange);
  EXPECT_EQ(error_of([] { omap::decode_csv<float>("sample_id,a\n0,0.5\n", MatrixKind::kLabels); }),
            ErrorCode::kBinarity);
  EXPECT_EQ(error_of([] { omap::decode_csv<float>("sample_id,a\n0,nan\n", MatrixKind::kScores); }),
            ErrorCode::kNonFinite);
  EXPECT_EQ(error_of([] { omap::decode_csv<float>("sample_id,a\n0,abc\n", MatrixKind::kScores); }),
            ErrorCode::kParse);
  EXPECT_EQ(error_of([] { omap::decode_csv<float>("sample_id,a,b\n0,0.1\n", MatrixKind::kScores); }),
            ErrorCode::kShape);
  EXPECT_EQ(error_of([] { omap::decode_csv<float>("sample_id,a\n", MatrixKind::kScores); }),
            ErrorCode::kShape);
  EXPECT_EQ(error_of([] { omap::decode_csv<float>("", MatrixKind::kScores); }), ErrorCode::kShape);
  EXPECT_EQ(error_of([] { omap::decode_csv<double>("sample_id,a\n0,-1\n", MatrixKind::kWeights); }),
            ErrorCode::kRange);
}

TEST(MatrixFiles, FormatDetectedFromContent) {
  TempDir dir;
  testing_support::Rng rng(3);
  const auto scores = testing_support::random_scores(rng, 9, 4);
  const auto labels = testing_support::random_labels(rng, 9, 4, 0.3);
  omap::write_matrix(scores, dir / "s.bin", MatrixFormat::kBinary);
  omap::write_matrix(scores, dir / "s.csv", MatrixFormat::kCsv);
  omap::write_matrix(labels, dir / "y.bin", MatrixFormat::kBinary);
  omap::write_matrix(labels, dir / "y.csv", MatrixFormat::kCsv);
  EXPECT_EQ(omap::read_scores(dir / "s.bin"), scores);
  EXPECT_EQ(omap::read_scores(dir / "s.csv"), scores);
  EXPECT_EQ(omap::read_labels(dir / "y.bin"), labels);
  EXPECT_EQ(omap::read_labels(dir / "y.csv"), labels);
  // A score file is not a label file.
  EXPECT_EQ(error_of([&] { omap::read_labels(dir / "s.bin"); }), ErrorCode::kFormat);
  EXPECT_EQ(error_of([&] { omap::read_scores(dir / "missing.bin"); }), ErrorCode::kIo);
}

TEST(MatrixFiles, WeightsNarrowToFloatInBinary) {
  TempDir dir;
  omap::WeightMatrix w(1, 2, std::vector<double>{1.0 / 3.0, 2.5});
  omap::write_matrix(w, dir / "w.bin", MatrixFormat::kBinary);
  const auto back = omap::read_weights(dir / "w.bin");
  EXPECT_EQ(back(0, 0), static_cast<double>(static_cast<float>(1.0 / 3.0)));
  EXPECT_EQ(back(0, 1), 2.5);
}

omap::EvaluationReport sample_report() {
  const auto graph = omap::parse_edge_list("a\nb\nc\nd\n\na b\nb c\nc d\n");
  const auto classes = omap::ClassIndex::all_vertices(graph);
  const auto base = omap::all_pairs_distance(graph, classes);
  testing_support::Rng rng(4);
  const auto scores = testing_support::random_scores(rng, 20, 4);
  auto labels = testing_support::random_labels(rng, 20, 3, 0.3);
  omap::LabelMatrix padded(20, 4);  // class d never positive
  for (std::size_t n = 0; n < 20; ++n) {
    for (std::size_t c = 0; c < 3; ++c) padded(n, c) = labels(n, c);
  }
  return omap::ontology_aware_map(scores, padded, base, classes);
}

TEST(Report, RoundTripIsExact) {
  const auto report = sample_report();
  const auto text = omap::format_report(report);
  const auto back = omap::parse_report(text);
  EXPECT_EQ(back.map, report.map);
  EXPECT_EQ(back.omap, report.omap);
  EXPECT_EQ(back.omap0, report.omap0);
  ASSERT_EQ(back.per_class.size(), report.per_class.size());
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    EXPECT_EQ(back.per_class[c].ap, report.per_class[c].ap);
    EXPECT_EQ(back.per_class[c].oap, report.per_class[c].oap);
    EXPECT_EQ(back.per_class[c].skipped, report.per_class[c].skipped);
  }
  EXPECT_EQ(back.metadata.ontology_digest, report.metadata.ontology_digest);
  EXPECT_EQ(omap::format_report(back), text);
}

TEST(Report, FieldsPresent) {
  const auto json = omap::report_to_json(sample_report());
  EXPECT_EQ(json.at("schema"), "omap_report_v1");
  EXPECT_TRUE(json.at("metadata").at("timestamp").is_null());
  EXPECT_EQ(json.at("metadata").at("tool_version"), omap::kVersion);
  EXPECT_EQ(json.at("levels").size(), 3u);
  EXPECT_TRUE(json.at("per_class")[3].at("skipped").get<bool>());
}

TEST(Report, Errors) {
  auto json = omap::report_to_json(sample_report());
  auto unknown = json;
  unknown["schema"] = "omap_report_v9";
  EXPECT_EQ(error_of([&] { omap::report_from_json(unknown); }), ErrorCode::kVersion);
  auto tampered = json;
  tampered["omap"] = tampered["omap"].get<double>() + 1e-6;
  EXPECT_EQ(error_of([&] { omap::report_from_json(tampered); }), ErrorCode::kIntegrity);
  auto tampered_level = json;
  tampered_level["levels"][1]["mean_oap"] = 0.0;
  EXPECT_EQ(error_of([&] { omap::report_from_json(tampered_level); }), ErrorCode::kIntegrity);
  auto missing = json;
  missing.erase("map");
  EXPECT_EQ(error_of([&] { omap::report_from_json(missing); }), ErrorCode::kParse);
  EXPECT_EQ(error_of([] { omap::parse_report("{not json"); }), ErrorCode::kParse);
}

TEST(Report, LevelTable) {
  const auto report = sample_report();
  const auto table = omap::format_level_table(report);
  const auto lines = omap::detail::split_lines(table);
  EXPECT_EQ(lines[0], "lambda,mean_oap,delta");
  EXPECT_EQ(lines[1].substr(0, 2), "0,");
  const auto cmp = omap::compare_reports(report, report);
  const auto cmp_table = omap::format_comparison_table(cmp);
  EXPECT_EQ(omap::detail::split_lines(cmp_table)[1].substr(0, 2), "0,");
}

}  // namespace
