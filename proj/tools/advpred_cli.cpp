// advpred: train, apply and benchmark adversarial surrogate classifiers.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "advpred/bench.hpp"
#include "advpred/consistency.hpp"
#include "advpred/model_io.hpp"
#include "advpred/training.hpp"

using namespace advpred;

namespace {

struct ModelFlags {
  std::string loss = "zero-one";
  double alpha = 0.5;
  std::string loss_matrix;
  bool weighted = false;
  std::string features;
  std::string kernel;
  double gamma = 1.0;
  double lambda = 0.0;
  std::size_t epochs = 0;
  std::uint64_t seed = 1;
  int label_column = -1;
  bool no_intercept = false;
};

Matrix read_matrix_csv(const std::string& path) {
  CsvOptions o;
  o.has_labels = false;
  o.allow_header = false;
  const Dataset d = load_csv(path, o);
  return d.x;
}

LossSpec parse_loss(const ModelFlags& f) {
  LossSpec spec;
  if (f.loss == "zero-one")
    spec = ZeroOne{};
  else if (f.loss == "ordinal-abs")
    spec = OrdinalAbsolute{};
  else if (f.loss == "ordinal-sq")
    spec = OrdinalSquared{};
  else if (f.loss == "abstain")
    spec = Abstain{f.alpha};
  else if (f.loss == "general") {
    if (f.loss_matrix.empty()) throw Error(ErrorCode::BadConfig, "--loss general needs --loss-matrix");
    spec = General{LossMatrix(read_matrix_csv(f.loss_matrix))};
  } else
    throw Error(ErrorCode::InvalidSpec, "unknown loss '" + f.loss + "'");
  if (f.weighted) spec = make_weighted(spec, f.alpha);
  validate(spec);
  return spec;
}

FeatureKind parse_features(const ModelFlags& f, const LossSpec& spec) {
  if (f.features.empty()) return is_ordinal(spec) ? FeatureKind::Thresholded : FeatureKind::Multiclass;
  if (f.features == "thresholded") return FeatureKind::Thresholded;
  if (f.features == "multiclass") return FeatureKind::Multiclass;
  throw Error(ErrorCode::BadConfig, "unknown feature map '" + f.features + "'");
}

ExperimentConfig make_config(const ModelFlags& f) {
  const LossSpec spec = parse_loss(f);
  const FeatureKind kind = parse_features(f, spec);
  Learner learner = Learner::Linear;
  KernelSpec kernel = LinearKernel{};
  if (!f.kernel.empty()) {
    learner = Learner::Kernel;
    if (f.kernel == "gaussian")
      kernel = GaussianKernel{f.gamma};
    else if (f.kernel != "linear")
      throw Error(ErrorCode::BadConfig, "unknown kernel '" + f.kernel + "'");
  }
  ExperimentConfig c = ExperimentConfig::defaults(spec, kind, learner, kernel);
  c.seed = f.seed;
  if (f.epochs) c.linear_epochs = f.epochs;
  c.intercept = !f.no_intercept;
  return c;
}

void add_model_flags(CLI::App* app, ModelFlags& f, bool with_hyper) {
  app->add_option("--loss", f.loss, "zero-one | ordinal-abs | ordinal-sq | abstain | general")
      ->check(CLI::IsMember({"zero-one", "ordinal-abs", "ordinal-sq", "abstain", "general"}));
  app->add_option("--alpha", f.alpha, "abstain penalty, or weight with --weighted");
  app->add_option("--loss-matrix", f.loss_matrix, "CSV of the l x k loss matrix for --loss general");
  app->add_flag("--weighted", f.weighted, "scale the base metric's offsets by --alpha");
  app->add_option("--features", f.features, "thresholded | multiclass (default by loss)")
      ->check(CLI::IsMember({"thresholded", "multiclass"}));
  app->add_option("--kernel", f.kernel, "linear | gaussian; selects kernel PEGASOS (default: primal linear)")
      ->check(CLI::IsMember({"linear", "gaussian"}));
  if (with_hyper) {
    app->add_option("--gamma", f.gamma, "Gaussian kernel width");
    app->add_option("--lambda", f.lambda, "regularization (default 1 / n_train)");
  }
  app->add_option("--epochs", f.epochs, "epochs for the primal learner");
  app->add_flag("--no-intercept", f.no_intercept, "do not append a constant feature for the multiclass map");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--label-column", f.label_column, "0-based label column, negative from the end");
}

CsvOptions csv_options(const ModelFlags& f) {
  CsvOptions o;
  o.label_column = f.label_column;
  return o;
}

Dataset load_reporting(const std::string& path, const CsvOptions& o) {
  std::vector<std::string> warnings;
  Dataset d = load_csv(path, o, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return d;
}

Dataset scaled(const Dataset& d, const SavedModel& m) { return m.scaler ? m.scaler->transform(d) : d; }

int run_train(const ModelFlags& f, const std::string& data_path, const std::string& out, bool no_standardize) {
  const ExperimentConfig config = make_config(f);
  Dataset data = load_reporting(data_path, csv_options(f));
  SavedModel saved;
  if (!no_standardize) {
    saved.scaler = Scaler::fit(data, wants_intercept(config));
    data = saved.scaler->transform(data);
  }
  Hyperparameters hp;
  if (f.lambda > 0.0) hp.lambda = f.lambda;
  hp.gamma = f.gamma;
  saved.model = fit_model(data, config, hp, config.seed);
  save_model(out, saved);
  const Evaluation e = evaluate(saved.model, data);
  std::cout << "trained " << describe(config.spec) << " on " << data.size() << " rows, lambda "
            << hp.lambda_for(data.size()) << "; training " << metric_name(config.spec) << " " << e.metric << "\n"
            << "model written to " << out << "\n";
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path, bool no_labels, int label_column,
                const std::string& out) {
  const SavedModel saved = load_model(model_path);
  CsvOptions o;
  o.has_labels = !no_labels;
  o.label_column = label_column;
  const Dataset data = scaled(load_csv(data_path, o), saved);
  std::ofstream file;
  if (!out.empty()) file.open(out);
  std::ostream& os = out.empty() ? std::cout : file;
  os << "label,abstained\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Prediction p = predict_default(saved.model, data.row(i));
    os << p.label << "," << (p.abstained ? 1 : 0) << "\n";
  }
  return 0;
}

int run_evaluate(const std::string& model_path, const std::string& data_path, int label_column) {
  const SavedModel saved = load_model(model_path);
  CsvOptions o;
  o.label_column = label_column;
  const Dataset data = scaled(load_reporting(data_path, o), saved);
  const Evaluation e = evaluate(saved.model, data);
  const LossSpec& spec = loss_spec(saved.model);
  std::cout << metric_name(spec) << " " << e.metric << "\n";
  if (has_abstain_option(spec)) std::cout << "abstain_rate " << e.abstain_rate << "\n";
  return 0;
}

void print_hp(const Hyperparameters& hp, const ExperimentConfig& c, std::size_t n_train) {
  if (hp.lambda)
    std::cout << "lambda " << *hp.lambda;
  else
    std::cout << "C " << hp.c << " (lambda " << hp.lambda_for(n_train) << ")";
  if (c.learner == Learner::Kernel && std::holds_alternative<GaussianKernel>(c.kernel))
    std::cout << " gamma " << hp.gamma;
}

int run_tune(const ModelFlags& f, const std::string& data_path) {
  const ExperimentConfig config = make_config(f);
  const Dataset data = load_reporting(data_path, csv_options(f));
  const TuningResult r = tune_two_stage(data, config);
  std::cout << "candidates " << r.candidates << "\nbest ";
  print_hp(r.best, config, data.size() * (config.folds - 1) / config.folds);
  std::cout << "\ncv loss " << r.best_loss << "\n";
  return 0;
}

int run_bench(const ModelFlags& f, const std::vector<std::string>& paths, std::size_t splits, const std::string& out) {
  ExperimentConfig config = make_config(f);
  config.splits = splits;
  const auto reports = run_benchmark(config, paths, out, csv_options(f));
  std::cout << summary_table(reports, config);
  for (const auto& r : reports)
    if (!r.error.empty()) return 1;
  return 0;
}

int run_consistency(const ModelFlags& f, std::size_t classes, std::size_t trials, bool verbose) {
  ConsistencyOptions o;
  o.classes = classes;
  o.trials = trials;
  o.seed = f.seed;
  const ConsistencyReport r = check_consistency(parse_loss(f), o);
  const std::string text = r.to_text();
  if (verbose) {
    std::cout << text;
  } else {
    for (const auto& t : r.trials)
      if (!t.ok) std::cout << t.to_line() << "\n";
    std::cout << text.substr(text.rfind('\n', text.size() - 2) + 1);
  }
  return r.violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial surrogate classifiers"};
  app.require_subcommand(1);

  ModelFlags train_flags;
  std::string train_data, train_out = "model.txt";
  bool no_standardize = false;
  auto* train = app.add_subcommand("train", "fit a model on a labeled CSV");
  add_model_flags(train, train_flags, true);
  train->add_option("--data", train_data, "training CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "model file");
  train->add_flag("--no-standardize", no_standardize, "skip z-scoring");

  std::string predict_model, predict_data, predict_out;
  bool no_labels = false;
  int predict_label_column = -1;
  auto* predict = app.add_subcommand("predict", "write predictions for a CSV");
  predict->add_option("--model", predict_model)->required()->check(CLI::ExistingFile);
  predict->add_option("--data", predict_data)->required()->check(CLI::ExistingFile);
  predict->add_option("--out", predict_out, "prediction CSV (default stdout)");
  predict->add_flag("--no-labels", no_labels, "every column is a feature");
  predict->add_option("--label-column", predict_label_column);

  std::string eval_model, eval_data;
  int eval_label_column = -1;
  auto* eval = app.add_subcommand("evaluate", "score a model on a labeled CSV");
  eval->add_option("--model", eval_model)->required()->check(CLI::ExistingFile);
  eval->add_option("--data", eval_data)->required()->check(CLI::ExistingFile);
  eval->add_option("--label-column", eval_label_column);

  ModelFlags tune_flags;
  std::string tune_data;
  auto* tune = app.add_subcommand("tune", "two-stage cross-validated grid search");
  add_model_flags(tune, tune_flags, false);
  tune->add_option("--data", tune_data)->required()->check(CLI::ExistingFile);

  ModelFlags bench_flags;
  std::vector<std::string> bench_data;
  std::size_t bench_splits = 20;
  std::string bench_out = "results";
  auto* bench = app.add_subcommand("benchmark", "split, tune, train and evaluate on each dataset");
  add_model_flags(bench, bench_flags, false);
  bench->add_option("--data", bench_data, "dataset CSVs")->required()->check(CLI::ExistingFile);
  bench->add_option("--splits", bench_splits, "random 70/30 splits");
  bench->add_option("--out", bench_out, "output directory");

  ModelFlags cons_flags;
  std::size_t cons_classes = 3, cons_trials = 200;
  bool cons_verbose = false;
  auto* cons = app.add_subcommand("consistency-check", "numerical Fisher-consistency check");
  cons->add_option("--loss", cons_flags.loss, "loss to check")
      ->check(CLI::IsMember({"zero-one", "ordinal-abs", "ordinal-sq", "abstain", "general"}));
  cons->add_option("--alpha", cons_flags.alpha, "abstain penalty");
  cons->add_option("--loss-matrix", cons_flags.loss_matrix, "CSV loss matrix for --loss general");
  cons->add_option("--classes", cons_classes, "number of classes (at most 10)");
  cons->add_option("--trials", cons_trials, "random distributions to test");
  cons->add_option("--seed", cons_flags.seed, "random seed");
  cons->add_flag("--verbose", cons_verbose, "one line per trial");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(train_flags, train_data, train_out, no_standardize);
    if (*predict) return run_predict(predict_model, predict_data, no_labels, predict_label_column, predict_out);
    if (*eval) return run_evaluate(eval_model, eval_data, eval_label_column);
    if (*tune) return run_tune(tune_flags, tune_data);
    if (*bench) return run_bench(bench_flags, bench_data, bench_splits, bench_out);
    if (*cons) return run_consistency(cons_flags, cons_classes, cons_trials, cons_verbose);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
