#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "commentgen/evalkit.hpp"
#include "commentgen/llmclient.hpp"
#include "commentgen/promptgen.hpp"

namespace commentgen {

/// Run description. Relative paths resolve against `base_dir`.
struct Manifest {
  std::string name = "run";
  std::filesystem::path base_dir;
  std::filesystem::path pairs;
  std::optional<std::filesystem::path> index;
  std::optional<std::filesystem::path> ast_dir;
  std::filesystem::path exemplars;
  std::optional<std::filesystem::path> models_registry;  // builtin mock registry when absent
  std::vector<std::string> models;
  std::vector<Setup> setups;
  std::size_t budget = 8192;
  std::uint64_t seed = 0;
  std::size_t k = 5;
  std::optional<DocType> doc_type;
  GenerationParams params;
  std::filesystem::path out_dir = "runs";
  std::optional<std::filesystem::path> cache_dir;  // <out_dir>/cache when absent
  std::string embedder;                            // "", "hashed" or "service:<endpoint>|<model>|<auth_env>"
  std::string judge;                               // registry model name or ""
  std::size_t concurrency = 4;
  std::size_t max_units = 0;                       // 0 = all commented units

  nlohmann::json raw;  // as read, for the run record
};

Manifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);
std::filesystem::path resolve(const Manifest& m, const std::filesystem::path& p);

struct CellFailure {
  std::string unit_id;
  std::string model;
  Setup setup = Setup::Code;
  std::string stage;  // prompt, complete, extract, evaluate
  std::string message;
};

struct ExperimentRun {
  std::string run_id;
  Manifest manifest;
  std::string started;
  std::string finished;
  std::map<std::string, std::size_t> counts;
  std::vector<MetricReport> reports;
  std::vector<GeneratedComment> generated;
  std::vector<CellFailure> failures;
  std::vector<CategoryLabel> original_labels;  // rules labels of the reference comments
  std::map<std::string, std::string> display_names;
};

/// Deterministic id from the manifest content.
std::string run_id_for(const Manifest& m);

/// Every (model, setup, unit) cell either yields a report or a recorded
/// failure. Throws Error naming the rebuild command when an input artifact
/// is missing.
ExperimentRun run_matrix(const Manifest& manifest, LlmClient& client);
/// Uses LlmClient::with_defaults with the manifest cache directory.
ExperimentRun run_matrix(const Manifest& manifest);

/// Writes run.json, reports.jsonl, generated.jsonl and failures.csv into
/// <out_dir>/<run_id>/ and returns that directory.
std::filesystem::path write_run(const ExperimentRun& run);
ExperimentRun load_run(const std::filesystem::path& run_dir);

nlohmann::json to_json(const MetricReport& r);
MetricReport metric_report_from_json(const nlohmann::json& j);

enum class SimilarityMetric : std::uint8_t { RougeL, Bleu4, Embed, Judge };
inline constexpr std::array<SimilarityMetric, 4> kSimilarityMetrics = {SimilarityMetric::RougeL, SimilarityMetric::Bleu4,
                                                                      SimilarityMetric::Embed, SimilarityMetric::Judge};
std::string_view to_string(SimilarityMetric m);

struct CellStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
};

struct SimilarityRow {
  std::string model;  // display name
  std::array<std::array<std::optional<CellStats>, 4>, 4> cells;  // [setup][metric]
};

struct SimilarityTable {
  std::vector<SimilarityRow> rows;
};

/// Models follow `model_order`, then any others alphabetically. Throws
/// PreconditionError on an empty report list.
SimilarityTable table_similarity(const std::vector<MetricReport>& reports,
                                 const std::vector<std::string>& model_order = {},
                                 const std::map<std::string, std::string>& display_names = {});

inline constexpr std::string_view kEmptyCell = "—";

/// Setups as column groups, four metrics each, two decimals, "—" for empty cells.
std::string render_similarity_table(const SimilarityTable& table);
std::string render_similarity_row(const SimilarityRow& row);
std::string similarity_csv(const SimilarityTable& table);

struct CurvePoint {
  std::string model;
  std::size_t bucket_low = 0;   // bytes, inclusive
  std::size_t bucket_high = 0;  // bytes, exclusive
  std::size_t n = 0;
  double mean_completeness = 0.0;
};

/// Power-of-two size buckets; empty buckets are left out.
std::vector<CurvePoint> completeness_curve(const std::vector<MetricReport>& reports);
std::string completeness_csv(const std::vector<CurvePoint>& curve);
std::string completeness_svg(const std::vector<CurvePoint>& curve);

struct TimeRecord {
  std::string participant;
  std::string model;  // or "Original" / "No Comments"
  std::string setup;  // empty for the two baselines
  std::string task;
  double minutes = 0.0;
};

/// Columns participant, model, setup, task, minutes (any order, header
/// required). Throws ConfigError listing the columns found when one is missing.
std::vector<TimeRecord> parse_times_csv(std::string_view text);

enum class Binning : std::uint8_t { NoCommentMedian, PooledMedian };
std::string_view to_string(Binning b);
Binning binning_from_string(std::string_view s);

struct TimeCell {
  std::optional<double> mean;
  bool starred = false;
  std::size_t n = 0;
  std::optional<double> reduction_vs_original;      // (original - mean) / original
  std::optional<double> reduction_vs_no_comments;
};

struct TimeRow {
  std::string model;
  std::array<TimeCell, 4> cells;  // indexed like kAllSetups
};

struct TimeTable {
  std::string task;
  std::vector<TimeRow> rows;
  std::optional<double> original;
  std::optional<double> no_comments;
  std::vector<std::string> warnings;
};

/// One table per task, in order of first appearance. The design-doc cell is
/// starred when the chi-square test against every other setup of that model
/// gives p < 0.05 under `binning`.
std::vector<TimeTable> time_analysis(const std::vector<TimeRecord>& records, Binning binning = Binning::NoCommentMedian,
                                     const std::vector<std::string>& model_order = {});

/// Table from precomputed means: columns model, setup, mean and optionally
/// starred (1/0, true/false, or a trailing '*' on the mean). Baseline rows
/// use model "Original" or "No Comments" with an empty setup.
TimeTable time_table_from_means(std::string_view csv_text, std::string task = "",
                                const std::vector<std::string>& model_order = {});

/// A cell: mean with trailing zeros dropped, '*' when starred, "—" when empty.
std::string render_time_cell(const TimeCell& cell);
/// The four setup cells of a row joined by `separator`, without the model.
std::string render_time_row(const TimeRow& row, std::string_view separator = " | ");
std::string render_time_table(const TimeTable& table);
std::string times_csv(const std::vector<TimeTable>& tables);

/// Writes similarity.csv, completeness.csv, completeness.svg, categories.csv,
/// reports.csv, failures.csv and tables.txt (plus times.csv when times are given).
void write_report(const ExperimentRun& run, const std::filesystem::path& out_dir,
                  const std::vector<TimeTable>* times = nullptr);

std::string failures_csv(const std::vector<CellFailure>& failures);

std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace commentgen
