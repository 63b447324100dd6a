#pragma once

// AUC evaluation of the three subtasks and the experiment harness
// (end-to-end runs, lambda / ablation / hypothesis grids, sweeps).

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hgane/train.hpp"

namespace hgane {

// P(random positive scores above random negative), ties count 1/2.
// Exact rank statistic; throws EvaluationError on empty input or NaN.
double auc(std::span<const double> scores_pos, std::span<const double> scores_neg);

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  double lambda = 0.8;
  std::uint64_t seed = 1;

  // One-line "key=value" echo of every field.
  std::string echo() const;
};

struct EvalReport {
  double auc_soc1 = 0.0;
  double auc_soc2 = 0.0;
  double auc_anchor = 0.0;
  RunConfig config;
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // seconds
};

enum class EvalPartition { kTest, kTrain };

// Scores the chosen partition's positives and negatives with the social and
// anchor link probabilities (under config.train.roles when embedded in a
// run; `roles` here).
EvalReport evaluate(const AlignedPair& pair, const LinkSplit& split,
                    const EmbeddingTable& embeddings, FeatureRoles roles = FeatureRoles::kBoth,
                    EvalPartition partition = EvalPartition::kTest);

struct FileSource {
  std::filesystem::path g1_edges;
  std::filesystem::path g2_edges;
  std::filesystem::path anchors;
};

using DataSource = std::variant<FileSource, SyntheticParams>;

AlignedPair load_data(const DataSource& source);
// Synthetic sources get their seed shifted by `offset`; file sources are unchanged.
DataSource with_seed_offset(const DataSource& source, std::uint64_t offset);

// Failure inside run_experiment, labeled with the pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct ExperimentRun {
  AlignedPair pair;
  LinkSplit split;
  FitResult fit;
  EvalReport report;
};

// load/generate -> split -> message graph -> fit -> evaluate on test links.
ExperimentRun run_experiment_full(const RunConfig& config, const DataSource& source,
                                  std::ostream* trace_csv = nullptr);
EvalReport run_experiment(const RunConfig& config, const DataSource& source);

// Runs every config `repeats` times; repeat r uses seed config.seed + r and
// the source's seed shifted by r.
std::vector<EvalReport> run_grid(std::span<const RunConfig> configs, std::size_t repeats,
                                 const DataSource& source);

std::vector<RunConfig> lambda_grid(const RunConfig& base, std::span<const double> lambdas);
std::vector<RunConfig> hypothesis_grid(const RunConfig& base);
std::vector<RunConfig> ablation_grid(const RunConfig& base);

enum class SweepAxis { kEmbeddingDim, kAlpha, kBeta };
SweepAxis parse_sweep_axis(std::string_view text);
std::string to_string(SweepAxis axis);
RunConfig with_axis_value(const RunConfig& base, SweepAxis axis, double value);

struct SummaryRow {
  std::string label;
  std::size_t runs = 0;
  std::array<double, 3> mean{};    // soc1, soc2, anchor
  std::array<double, 3> stddev{};  // sample standard deviation; 0 for one run
};

std::vector<SummaryRow> sweep(const RunConfig& base, SweepAxis axis, std::span<const double> values,
                              std::size_t repeats, const DataSource& source);

// Groups consecutive blocks of `repeats` reports under the given labels.
std::vector<SummaryRow> summarize(std::span<const EvalReport> reports,
                                  std::span<const std::string> labels, std::size_t repeats);

// CSV writers; the first line is "# " + echo.
void write_reports_csv(std::ostream& out, const std::string& echo,
                       std::span<const EvalReport> reports, bool with_time = false);
void write_summary_csv(std::ostream& out, const std::string& echo, const std::string& key,
                       std::span<const SummaryRow> rows);

}  // namespace hgane
