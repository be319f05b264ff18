// omap: command-line front end for ontology-aware audio-tagging evaluation.
//
//   omap eval            scores + labels -> JSON report, mAP / OmAP / OmAP0
//   omap compare         two score files -> per-level delta CSV
//   omap obce-weights    labels -> per-sample loss weights
//   omap ontology-stats  graph size, maximum class distance, mean distance
//
// Data goes to files or stdout, diagnostics to stderr. Failures print a
// single "error E_CODE: ..." line and exit with 2 (validation), 3 (I/O) or 4
// (internal invariant).

#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "omap/omap.hpp"

namespace {

struct GraphInputs {
  std::string ontology;
  std::string edges;
  std::string class_index;
};

struct PolicyFlags {
  bool strict_empty_labels = true;
  bool skip_zero_positive = true;
  bool include_top_level = false;
  std::string levels;
};

void add_graph_options(CLI::App* cmd, GraphInputs& in) {
  auto* onto = cmd->add_option("--ontology", in.ontology, "taxonomy JSON (AudioSet layout)")
                   ->check(CLI::ExistingFile);
  auto* edges = cmd->add_option("--edges", in.edges, "edge-list graph")->check(CLI::ExistingFile);
  onto->excludes(edges);
  cmd->add_option("--class-index", in.class_index,
                  "CSV index,mid,display_name (default: every graph vertex)")
      ->check(CLI::ExistingFile);
}

void add_policy_options(CLI::App* cmd, PolicyFlags& p, bool with_levels) {
  cmd->add_flag("--strict-empty-labels,!--no-strict-empty-labels", p.strict_empty_labels,
                "reject samples without labels (default on)");
  if (!with_levels) return;
  cmd->add_flag("--skip-zero-positive-classes,!--no-skip-zero-positive-classes",
                p.skip_zero_positive, "exclude classes without positives (default on)");
  cmd->add_option("--levels", p.levels, "coarse-grained levels A..B (default 0..D_m-1)");
  cmd->add_flag("--include-top-level", p.include_top_level,
                "extend the default range to lambda = D_m");
}

omap::OntologyGraph load_graph(const GraphInputs& in) {
  if (!in.ontology.empty()) return omap::load_ontology(in.ontology);
  if (!in.edges.empty()) return omap::load_edge_list(in.edges);
  throw omap::Error(omap::ErrorCode::kArgument, "one of --ontology or --edges is required");
}

omap::ClassIndex load_classes(const GraphInputs& in, const omap::OntologyGraph& graph) {
  if (in.class_index.empty()) return omap::ClassIndex::all_vertices(graph);
  return omap::load_class_index(in.class_index, graph);
}

std::optional<omap::LevelRange> parse_levels(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto bad = [&] {
    return omap::Error(omap::ErrorCode::kArgument,
                       "--levels expects A..B or A, got '" + text + "'");
  };
  const auto dots = text.find("..");
  const auto first = omap::detail::parse_number<omap::Distance>(text.substr(0, dots));
  if (!first) throw bad();
  if (dots == std::string::npos) return omap::LevelRange{*first, *first};
  const auto last = omap::detail::parse_number<omap::Distance>(text.substr(dots + 2));
  if (!last) throw bad();
  return omap::LevelRange{*first, *last};
}

omap::EvaluationOptions make_options(const PolicyFlags& p, std::size_t threads) {
  omap::EvaluationOptions options;
  options.levels = parse_levels(p.levels);
  options.include_top_level = p.include_top_level;
  options.empty_labels =
      p.strict_empty_labels ? omap::EmptyLabelPolicy::kError : omap::EmptyLabelPolicy::kMaxWeight;
  options.zero_positive =
      p.skip_zero_positive ? omap::ZeroPositivePolicy::kSkip : omap::ZeroPositivePolicy::kError;
  options.threads = threads;
  return options;
}

std::string percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", value * 100.0);
  return buf;
}

void log_report_warnings(const omap::EvaluationReport& report, const std::string& tag) {
  const std::size_t skipped = report.metadata.n_classes - report.metadata.evaluated_classes;
  if (skipped > 0) {
    std::cerr << "warning: " << tag << skipped
              << " class(es) without positive labels excluded from all means\n";
  }
  if (report.metadata.empty_label_samples > 0) {
    std::cerr << "warning: " << tag << report.metadata.empty_label_samples
              << " sample(s) without labels weighted as maximally serious false positives\n";
  }
}

omap::MatrixFormat parse_format(const std::string& name) {
  return name == "binary" ? omap::MatrixFormat::kBinary : omap::MatrixFormat::kCsv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ontology-aware mAP evaluation and OBCE loss weights"};
  app.set_version_flag("--version", std::string(omap::kVersion));
  app.require_subcommand(1);
  std::size_t threads = 1;
  app.add_option("--threads", threads, "worker threads (0 = one per core)")->capture_default_str();

  // eval
  GraphInputs eval_graph;
  PolicyFlags eval_policy;
  std::string eval_scores, eval_labels, eval_out, eval_levels_csv, eval_timestamp;
  auto* eval = app.add_subcommand("eval", "evaluate one score matrix");
  add_graph_options(eval, eval_graph);
  add_policy_options(eval, eval_policy, true);
  eval->add_option("--scores", eval_scores, "score matrix (CSV or binary)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--labels", eval_labels, "label matrix (CSV or binary)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "report JSON path")->required();
  eval->add_option("--levels-csv", eval_levels_csv, "write lambda,mean_oap,delta table");
  eval->add_option("--timestamp", eval_timestamp, "string recorded as the report timestamp");

  // compare
  GraphInputs cmp_graph;
  PolicyFlags cmp_policy;
  std::string cmp_scores_a, cmp_scores_b, cmp_labels, cmp_report_a, cmp_report_b, cmp_out,
      cmp_levels_b;
  auto* compare = app.add_subcommand("compare", "per-level comparison of two models");
  add_graph_options(compare, cmp_graph);
  add_policy_options(compare, cmp_policy, true);
  auto* sa = compare->add_option("--scores-a", cmp_scores_a)->check(CLI::ExistingFile);
  auto* sb = compare->add_option("--scores-b", cmp_scores_b)->check(CLI::ExistingFile);
  auto* lab = compare->add_option("--labels", cmp_labels)->check(CLI::ExistingFile);
  auto* ra = compare->add_option("--report-a", cmp_report_a, "existing report of model A")
                 ->check(CLI::ExistingFile);
  auto* rb = compare->add_option("--report-b", cmp_report_b, "existing report of model B")
                 ->check(CLI::ExistingFile);
  compare->add_option("--levels-b", cmp_levels_b, "level range for model B (default: --levels)");
  compare->add_option("--out", cmp_out, "lambda,oap_a,oap_b,delta CSV path")->required();
  sa->needs(sb, lab);
  sb->needs(sa);
  ra->needs(rb);
  rb->needs(ra);
  sa->excludes(ra);

  // obce-weights
  GraphInputs w_graph;
  PolicyFlags w_policy;
  std::string w_labels, w_out, w_format = "binary";
  double beta = 1.0;
  auto* weights = app.add_subcommand("obce-weights", "per-sample OBCE loss weights");
  add_graph_options(weights, w_graph);
  add_policy_options(weights, w_policy, false);
  weights->add_option("--labels", w_labels)->required()->check(CLI::ExistingFile);
  weights->add_option("--beta", beta, "distance power factor (>= 0)")->capture_default_str();
  weights->add_option("--out", w_out, "weight matrix path")->required();
  weights->add_option("--format", w_format)
      ->check(CLI::IsMember({"csv", "binary"}))
      ->capture_default_str();

  // ontology-stats
  GraphInputs s_graph;
  auto* stats = app.add_subcommand("ontology-stats", "graph and class-distance summary");
  add_graph_options(stats, s_graph);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string message = e.what();
    for (char& ch : message) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "error E_ARGUMENT: " << message << "\n";
    return static_cast<int>(omap::ErrorCategory::kValidation);
  }

  try {
    if (*eval) {
      const auto graph = load_graph(eval_graph);
      const omap::Evaluator evaluator(graph, load_classes(eval_graph, graph), threads);
      const auto scores = omap::read_scores(eval_scores);
      const auto labels = omap::read_labels(eval_labels);
      auto report = evaluator.evaluate(scores, labels, make_options(eval_policy, threads));
      if (!eval_timestamp.empty()) report.metadata.timestamp = eval_timestamp;
      log_report_warnings(report, "");
      omap::write_report(report, eval_out);
      if (!eval_levels_csv.empty()) {
        omap::detail::write_file(eval_levels_csv, omap::format_level_table(report));
      }
      std::cout << "mAP " << percent(report.map) << "\n"
                << "OmAP " << percent(report.omap) << "\n"
                << "OmAP0 " << (report.omap0 ? percent(*report.omap0) : std::string("n/a"))
                << "\n";
      return 0;
    }

    if (*compare) {
      omap::EvaluationReport a, b;
      if (!cmp_report_a.empty()) {
        a = omap::read_report(cmp_report_a);
        b = omap::read_report(cmp_report_b);
      } else if (!cmp_scores_a.empty()) {
        const auto graph = load_graph(cmp_graph);
        const omap::Evaluator evaluator(graph, load_classes(cmp_graph, graph), threads);
        const auto labels = omap::read_labels(cmp_labels);
        const auto options_a = make_options(cmp_policy, threads);
        auto options_b = options_a;
        if (!cmp_levels_b.empty()) options_b.levels = parse_levels(cmp_levels_b);
        a = evaluator.evaluate(omap::read_scores(cmp_scores_a), labels, options_a);
        log_report_warnings(a, "model A: ");
        b = evaluator.evaluate(omap::read_scores(cmp_scores_b), labels, options_b);
        log_report_warnings(b, "model B: ");
      } else {
        throw omap::Error(omap::ErrorCode::kArgument,
                          "compare needs --scores-a/--scores-b/--labels or --report-a/--report-b");
      }
      const auto cmp = omap::compare_reports(a, b);
      omap::detail::write_file(cmp_out, omap::format_comparison_table(cmp));
      std::cout << "metric a b delta\n"
                << "mAP " << percent(cmp.map.a) << " " << percent(cmp.map.b) << " "
                << percent(cmp.map.delta) << "\n"
                << "OmAP " << percent(cmp.omap.a) << " " << percent(cmp.omap.b) << " "
                << percent(cmp.omap.delta) << "\n";
      return 0;
    }

    if (*weights) {
      if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw omap::Error(omap::ErrorCode::kArgument,
                          "--beta must be >= 0, got " + std::to_string(beta));
      }
      const auto graph = load_graph(w_graph);
      const omap::Evaluator evaluator(graph, load_classes(w_graph, graph), threads);
      const auto labels = omap::read_labels(w_labels);
      const auto r = evaluator.obce_weights(labels, beta, !w_policy.strict_empty_labels, threads);
      double worst = 0.0;
      for (std::size_t n = 0; n < r.rows(); ++n) {
        double sum = 0.0;
        for (double v : r.row(n)) sum += v;
        worst = std::max(worst, std::abs(sum / static_cast<double>(r.cols()) - 1.0));
      }
      std::cerr << "rows " << r.rows() << ", max |row mean - 1| = " << worst << "\n";
      if (worst > 1e-9) {
        throw omap::Error(omap::ErrorCode::kInternal, "weight rows do not average to 1");
      }
      std::vector<std::string> names;
      for (const auto& entry : evaluator.classes().entries()) names.push_back(entry.node_id);
      omap::write_matrix(r, omap::MatrixKind::kWeights, w_out, parse_format(w_format), names);
      return 0;
    }

    if (*stats) {
      const auto graph = load_graph(s_graph);
      const auto classes = load_classes(s_graph, graph);
      std::cout << "vertices " << graph.vertex_count() << "\n"
                << "edges " << graph.edge_count() << "\n"
                << "classes " << classes.size() << "\n";
      const auto unreachable = omap::disconnected_classes(graph, classes);
      if (!unreachable.empty()) {
        std::cout << "connected no\n";
        std::string ids;
        for (std::size_t c : unreachable) ids += (ids.empty() ? "" : ", ") + classes[c].node_id;
        throw omap::Error(omap::ErrorCode::kDisconnected,
                          "classes not connected to '" + classes[0].node_id + "': " + ids);
      }
      const auto base = omap::all_pairs_distance(graph, classes, threads);
      std::cout << "connected yes\n"
                << "d_max " << base.d_max() << "\n"
                << "mu " << omap::detail::format_shortest(base.mu()) << "\n";
      return 0;
    }
  } catch (const omap::Error& e) {
    std::cerr << "error " << e.diagnostic() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error E_INTERNAL: " << e.what() << "\n";
    return static_cast<int>(omap::ErrorCategory::kInternal);
  }
  return static_cast<int>(omap::ErrorCategory::kInternal);
}
