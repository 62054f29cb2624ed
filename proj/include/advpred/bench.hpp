#pragma once

// Data ingestion, preprocessing, cross-validation and the benchmark runner.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "advpred/dataset.hpp"
#include "advpred/features.hpp"
#include "advpred/loss.hpp"
#include "advpred/prediction.hpp"

namespace advpred {

struct CsvOptions {
  // 0-based label column; negative counts from the end (-1 is the last column).
  int label_column = -1;
  char delimiter = ',';
  // A first row that fails to parse as numbers is treated as a header.
  bool allow_header = true;
  // Without labels every column is a feature and all rows get label 1.
  bool has_labels = true;
};

// Labels are remapped to 1..k in increasing order of the raw values; a gap in
// the raw labels adds a warning.
Dataset parse_csv(std::istream& in, const CsvOptions& options = {}, const std::string& name = "data",
                  std::vector<std::string>* warnings = nullptr);
Dataset load_csv(const std::string& path, const CsvOptions& options = {},
                 std::vector<std::string>* warnings = nullptr);

// z-scores both sets with statistics fitted on train only.
std::tuple<Dataset, Dataset, Scaler> standardize(const Dataset& train, const Dataset& test, bool intercept = false);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Stratified random train/test splits. TooSmall if a class has fewer than 2 members.
std::vector<Split> stratified_splits(const Dataset& data, double ratio, std::uint64_t seed, std::size_t count);

// Stratified k-fold partition; fold f is the test side of split f.
std::vector<Split> stratified_folds(const Dataset& data, std::size_t folds, std::uint64_t seed);

enum class Learner {
  Linear,  // explicit theta, subgradient training
  Kernel,  // kernelized PEGASOS
};

struct Hyperparameters {
  double c = 1.0;  // lambda = 1 / (c n_train) unless lambda is set
  std::optional<double> lambda;
  double gamma = 1.0;

  double lambda_for(std::size_t n_train) const { return lambda ? *lambda : 1.0 / (c * static_cast<double>(n_train)); }
};

struct ExperimentConfig {
  LossSpec spec = ZeroOne{};
  FeatureKind features = FeatureKind::Multiclass;
  Learner learner = Learner::Linear;
  KernelSpec kernel = LinearKernel{};
  std::size_t splits = 20;
  double ratio = 0.7;
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  std::size_t linear_epochs = 50;
  std::size_t pegasos_factor = 100;  // T = factor * n_train
  // Append a constant feature after scaling. On by default for the
  // multiclass map, which has no per-class offset of its own.
  bool intercept = true;

  // Stage-1 grids. An empty lambda grid means the C grid is used.
  std::vector<double> c_grid;
  std::vector<double> lambda_grid;
  std::vector<double> gamma_grid;
  // Stage-2 multiplicative refinements around the stage-1 winner.
  std::vector<double> c_refine;
  std::vector<double> lambda_refine;
  std::vector<double> gamma_refine;

  // Fills the grids with the defaults for the spec and learner.
  static ExperimentConfig defaults(const LossSpec& spec, FeatureKind features, Learner learner,
                                   const KernelSpec& kernel);
  void check() const;
};

bool is_ordinal(const LossSpec& spec);

// Whether preprocessing for this config appends the constant feature.
bool wants_intercept(const ExperimentConfig& config);

// Fits one model on an already standardized training set.
Model fit_model(const Dataset& train, const ExperimentConfig& config, const Hyperparameters& hp, std::uint64_t seed);

struct Evaluation {
  double loss = 0.0;   // mean L[prediction, truth]
  double metric = 0.0; // accuracy for zero-one, otherwise equal to loss
  double abstain_rate = 0.0;
  std::vector<Label> predictions;
};

// Predictions use predict_default.
Evaluation evaluate(const Model& model, const Dataset& test);

const char* metric_name(const LossSpec& spec);

struct TuningResult {
  Hyperparameters best;
  double best_loss = 0.0;
  std::size_t candidates = 0;
  std::vector<std::pair<Hyperparameters, double>> stage1;
  std::vector<std::pair<Hyperparameters, double>> stage2;
};

// Two-stage grid search by k-fold CV on `data`; each fold is standardized on its own training side.
TuningResult tune_two_stage(const Dataset& data, const ExperimentConfig& config);

struct SplitResult {
  std::size_t split = 0;
  Hyperparameters hp;
  double metric = 0.0;
  double abstain_rate = 0.0;
};

struct MetricReport {
  std::string dataset;
  std::string metric;
  std::vector<SplitResult> splits;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over splits
  double abstain_rate = 0.0;
  std::string error;  // non-empty when the dataset failed
};

void summarize(MetricReport& report);

// Tunes on the training side of split 1, then trains and evaluates on every split.
MetricReport run_experiment(const Dataset& data, const ExperimentConfig& config);

// Runs every dataset, appending rows to <out>/results.csv and a table to
// <out>/summary.txt. Failures are recorded per dataset and the run continues.
std::vector<MetricReport> run_benchmark(const ExperimentConfig& config, const std::vector<std::string>& paths,
                                        const std::string& out_dir, const CsvOptions& csv = {});

std::string summary_table(const std::vector<MetricReport>& reports, const ExperimentConfig& config);

}  // namespace advpred
