#include "advpred/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "advpred/training.hpp"

namespace advpred {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, delim)) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == delim) cells.emplace_back();
  return cells;
}

bool parse_number(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_label(const std::string& cell, long& out) {
  double v = 0.0;
  if (!parse_number(cell, v) || v != std::floor(v) || std::abs(v) > 1e15) return false;
  out = static_cast<long>(v);
  return true;
}

std::vector<std::vector<std::size_t>> by_class(const Dataset& data) {
  std::vector<std::vector<std::size_t>> members(data.classes);
  for (std::size_t i = 0; i < data.size(); ++i) members[static_cast<std::size_t>(data.y[i] - 1)].push_back(i);
  return members;
}

std::vector<double> powers_of_two(std::initializer_list<double> exponents) {
  std::vector<double> out;
  for (double e : exponents) out.push_back(std::exp2(e));
  return out;
}

bool uses_gamma(const ExperimentConfig& config) {
  return config.learner == Learner::Kernel && std::holds_alternative<GaussianKernel>(config.kernel);
}

std::vector<Hyperparameters> grid(const ExperimentConfig& config, const std::vector<double>& scale_values,
                                  const std::vector<double>& gammas) {
  const bool by_lambda = !config.lambda_grid.empty();
  std::vector<Hyperparameters> out;
  for (double s : scale_values)
    for (double g : gammas) {
      Hyperparameters hp;
      if (by_lambda)
        hp.lambda = s;
      else
        hp.c = s;
      hp.gamma = g;
      out.push_back(hp);
    }
  return out;
}

std::string hp_key(const Hyperparameters& hp) {
  std::ostringstream s;
  s << std::hexfloat << hp.c << "/" << (hp.lambda ? *hp.lambda : -1.0) << "/" << hp.gamma;
  return s.str();
}

}  // namespace

Dataset parse_csv(std::istream& in, const CsvOptions& options, const std::string& name,
                  std::vector<std::string>* warnings) {
  std::vector<std::vector<double>> rows;
  std::vector<long> raw_labels;
  std::size_t arity = 0;
  std::size_t line_no = 0;
  std::string line;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line, options.delimiter);
    if (arity == 0) {
      arity = cells.size();
      if (arity < (options.has_labels ? 2u : 1u))
        throw Error(ErrorCode::ParseError, "row " + std::to_string(line_no) + ": too few columns");
    } else if (cells.size() != arity) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(line_no) + ": expected " + std::to_string(arity) +
                                             " cells, found " + std::to_string(cells.size()));
    }
    const int lc = !options.has_labels         ? -1
                   : options.label_column < 0 ? static_cast<int>(arity) + options.label_column
                                              : options.label_column;
    if (options.has_labels && (lc < 0 || static_cast<std::size_t>(lc) >= arity))
      throw Error(ErrorCode::ParseError, "label column " + std::to_string(options.label_column) + " out of range");

    std::vector<double> features;
    long label = 0;
    std::size_t bad = arity;
    for (std::size_t c = 0; c < arity && bad == arity; ++c) {
      if (static_cast<int>(c) == lc) {
        if (!parse_label(cells[c], label)) bad = c;
      } else {
        double v = 0.0;
        if (!parse_number(cells[c], v)) bad = c;
        features.push_back(v);
      }
    }
    if (bad != arity) {
      if (first_row && options.allow_header) {
        first_row = false;
        continue;
      }
      throw Error(ErrorCode::ParseError, "row " + std::to_string(line_no) + ", column " + std::to_string(bad + 1) +
                                             ": cannot parse '" + cells[bad] + "'");
    }
    first_row = false;
    rows.push_back(std::move(features));
    raw_labels.push_back(label);
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "no data rows in " + name);
  if (!options.has_labels) {
    Dataset d;
    d.name = name;
    d.classes = 1;
    d.x = Matrix(rows.size(), arity);
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), d.x.row(i).begin());
    d.y.assign(rows.size(), 1);
    return d;
  }

  std::vector<long> distinct = raw_labels;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw Error(ErrorCode::TooSmall, name + " has fewer than two classes");
  if (warnings && (distinct.front() != 1 || distinct.back() != static_cast<long>(distinct.size()))) {
    std::ostringstream w;
    w << name << ": labels remapped to 1.." << distinct.size() << " (raw";
    for (long v : distinct) w << " " << v;
    w << ")";
    warnings->push_back(w.str());
  }

  Dataset d;
  d.name = name;
  d.classes = distinct.size();
  d.x = Matrix(rows.size(), arity - 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), d.x.row(i).begin());
    d.y.push_back(static_cast<Label>(std::lower_bound(distinct.begin(), distinct.end(), raw_labels[i]) -
                                     distinct.begin() + 1));
  }
  d.check();
  return d;
}

Dataset load_csv(const std::string& path, const CsvOptions& options, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  return parse_csv(in, options, std::filesystem::path(path).stem().string(), warnings);
}

std::tuple<Dataset, Dataset, Scaler> standardize(const Dataset& train, const Dataset& test, bool intercept) {
  Scaler s = Scaler::fit(train, intercept);
  Dataset a = s.transform(train);
  Dataset b = s.transform(test);
  return {std::move(a), std::move(b), std::move(s)};
}

std::vector<Split> stratified_splits(const Dataset& data, double ratio, std::uint64_t seed, std::size_t count) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::BadConfig, "split ratio must lie in (0, 1)");
  auto members = by_class(data);
  for (std::size_t c = 0; c < members.size(); ++c)
    if (members[c].size() < 2)
      throw Error(ErrorCode::TooSmall, "class " + std::to_string(c + 1) + " has fewer than two members");

  // Per-class train counts: floor(ratio n_c) clamped to [1, n_c - 1], then
  // adjusted by largest remainder towards round(ratio n).
  const std::size_t k = members.size();
  std::vector<std::size_t> take(k);
  std::vector<double> remainder(k);
  std::size_t total = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double exact = ratio * static_cast<double>(members[c].size());
    take[c] = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(exact)), 1, members[c].size() - 1);
    remainder[c] = exact - static_cast<double>(take[c]);
    total += take[c];
  }
  const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(data.size())));
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (bool moved = true; total < target && moved;) {
    moved = false;
    for (std::size_t c : order)
      if (total < target && take[c] + 1 < members[c].size()) {
        ++take[c];
        ++total;
        moved = true;
      }
  }
  for (bool moved = true; total > target && moved;) {
    moved = false;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      if (total > target && take[*it] > 1) {
        --take[*it];
        --total;
        moved = true;
      }
  }

  std::mt19937_64 rng(seed);
  std::vector<Split> out(count);
  for (auto& split : out) {
    for (std::size_t c = 0; c < k; ++c) {
      auto idx = members[c];
      std::shuffle(idx.begin(), idx.end(), rng);
      split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take[c]));
      split.test.insert(split.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(take[c]), idx.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
  }
  return out;
}

std::vector<Split> stratified_folds(const Dataset& data, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::BadConfig, "need at least two folds");
  if (data.size() < folds) throw Error(ErrorCode::TooSmall, "fewer rows than folds");
  auto members = by_class(data);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold_of(data.size());
  std::size_t next = 0;
  for (auto& idx : members) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i : idx) fold_of[i] = next++ % folds;
  }
  std::vector<Split> out(folds);
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t f = 0; f < folds; ++f) (fold_of[i] == f ? out[f].test : out[f].train).push_back(i);
  return out;
}

bool is_ordinal(const LossSpec& spec) {
  if (std::holds_alternative<OrdinalAbsolute>(spec) || std::holds_alternative<OrdinalSquared>(spec)) return true;
  if (const auto* w = std::get_if<Weighted>(&spec)) return w->base != BaseMetric::ZeroOne;
  return false;
}

bool wants_intercept(const ExperimentConfig& config) {
  return config.intercept && config.features == FeatureKind::Multiclass;
}

ExperimentConfig ExperimentConfig::defaults(const LossSpec& spec, FeatureKind features, Learner learner,
                                            const KernelSpec& kernel) {
  ExperimentConfig c;
  c.spec = spec;
  c.features = features;
  c.learner = learner;
  c.kernel = kernel;
  if (is_ordinal(spec) && learner == Learner::Linear) {
    c.lambda_grid = powers_of_two({-1, -3, -5, -7, -9, -11, -13});
    c.lambda_refine = powers_of_two({-1.5, -1, -0.5, 0, 0.5, 1, 1.5});
  } else {
    c.c_grid = powers_of_two({0, 3, 6, 9, 12});
    c.c_refine = powers_of_two({-2, -1, 0, 1, 2});
  }
  if (uses_gamma(c)) {
    c.gamma_grid = powers_of_two({-12, -9, -6, -3, 0});
    c.gamma_refine = powers_of_two({-2, -1, 0, 1, 2});
  }
  return c;
}

void ExperimentConfig::check() const {
  validate(spec);
  if (learner == Learner::Kernel) advpred::validate(kernel);
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::BadConfig, "split ratio must lie in (0, 1)");
  if (splits == 0) throw Error(ErrorCode::BadConfig, "need at least one split");
  if (c_grid.empty() && lambda_grid.empty()) throw Error(ErrorCode::BadConfig, "empty regularization grid");
  if (uses_gamma(*this) && gamma_grid.empty()) throw Error(ErrorCode::BadConfig, "empty gamma grid");
  for (const auto* g : {&c_grid, &lambda_grid, &gamma_grid, &c_refine, &lambda_refine, &gamma_refine})
    for (double v : *g)
      if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::BadConfig, "grid values must be positive");
}

Model fit_model(const Dataset& train, const ExperimentConfig& config, const Hyperparameters& hp, std::uint64_t seed) {
  const FeatureMap map(config.features, train.features(), train.classes);
  const double lambda = hp.lambda_for(train.size());
  if (config.learner == Learner::Linear) {
    OptimizerConfig opt;
    opt.epochs = config.linear_epochs;
    opt.seed = seed;
    return train_linear(train, config.spec, map, lambda, opt).model;
  }
  KernelSpec kernel = config.kernel;
  if (auto* g = std::get_if<GaussianKernel>(&kernel)) g->gamma = hp.gamma;
  return train_pegasos_kernel(train, config.spec, kernel, map, lambda, config.pegasos_factor * train.size(), seed);
}

Evaluation evaluate(const Model& model, const Dataset& test) {
  const LossSpec& spec = loss_spec(model);
  const std::size_t k = feature_map(model).classes();
  if (test.classes > k) throw Error(ErrorCode::DimensionMismatch, "test labels exceed the model's classes");
  const LossMatrix loss = build_loss_matrix(spec, k);
  Evaluation e;
  if (test.size() == 0) return e;
  std::size_t abstained = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Prediction p = predict_default(model, test.row(i));
    e.predictions.push_back(p.label);
    e.loss += loss(static_cast<std::size_t>(p.label - 1), static_cast<std::size_t>(test.y[i] - 1));
    if (p.abstained) ++abstained;
  }
  const double n = static_cast<double>(test.size());
  e.loss /= n;
  e.abstain_rate = static_cast<double>(abstained) / n;
  e.metric = std::holds_alternative<ZeroOne>(spec) ? 1.0 - e.loss : e.loss;
  return e;
}

const char* metric_name(const LossSpec& spec) {
  if (std::holds_alternative<ZeroOne>(spec)) return "accuracy";
  if (std::holds_alternative<OrdinalAbsolute>(spec)) return "mae";
  if (std::holds_alternative<OrdinalSquared>(spec)) return "mse";
  if (std::holds_alternative<Abstain>(spec)) return "abstention_loss";
  return "mean_loss";
}

TuningResult tune_two_stage(const Dataset& data, const ExperimentConfig& config) {
  config.check();
  const auto folds = stratified_folds(data, config.folds, config.seed ^ 0x5f0fULL);
  std::vector<std::tuple<Dataset, Dataset>> prepared;
  for (const auto& f : folds) {
    auto [tr, te, sc] = standardize(data.subset(f.train), data.subset(f.test), wants_intercept(config));
    prepared.emplace_back(std::move(tr), std::move(te));
  }

  std::map<std::string, double> seen;
  auto score = [&](const Hyperparameters& hp) {
    const std::string key = hp_key(hp);
    if (auto it = seen.find(key); it != seen.end()) return it->second;
    double total = 0.0;
    for (std::size_t f = 0; f < prepared.size(); ++f) {
      const Model m = fit_model(std::get<0>(prepared[f]), config, hp, config.seed + 7919 * (f + 1));
      total += evaluate(m, std::get<1>(prepared[f])).loss;
    }
    const double mean = total / static_cast<double>(prepared.size());
    seen.emplace(key, mean);
    return mean;
  };

  TuningResult result;
  const bool by_lambda = !config.lambda_grid.empty();
  const std::vector<double> gammas = uses_gamma(config) ? config.gamma_grid : std::vector<double>{1.0};
  auto pick = [&](const std::vector<Hyperparameters>& candidates, auto& log) {
    for (const auto& hp : candidates) {
      const double s = score(hp);
      log.emplace_back(hp, s);
      if (s < result.best_loss) {
        result.best_loss = s;
        result.best = hp;
      }
    }
  };

  result.best_loss = std::numeric_limits<double>::infinity();
  pick(grid(config, by_lambda ? config.lambda_grid : config.c_grid, gammas), result.stage1);

  const Hyperparameters winner = result.best;
  std::vector<double> scales;
  for (double f : by_lambda ? config.lambda_refine : config.c_refine)
    scales.push_back((by_lambda ? *winner.lambda : winner.c) * f);
  if (scales.empty()) scales.push_back(by_lambda ? *winner.lambda : winner.c);
  std::vector<double> refined_gammas;
  if (uses_gamma(config))
    for (double f : config.gamma_refine) refined_gammas.push_back(winner.gamma * f);
  if (refined_gammas.empty()) refined_gammas.push_back(winner.gamma);
  pick(grid(config, scales, refined_gammas), result.stage2);
  result.candidates = seen.size();
  return result;
}

void summarize(MetricReport& report) {
  const double n = static_cast<double>(report.splits.size());
  report.mean = report.stddev = report.abstain_rate = 0.0;
  if (report.splits.empty()) return;
  for (const auto& s : report.splits) {
    report.mean += s.metric;
    report.abstain_rate += s.abstain_rate;
  }
  report.mean /= n;
  report.abstain_rate /= n;
  if (report.splits.size() > 1) {
    double ss = 0.0;
    for (const auto& s : report.splits) ss += (s.metric - report.mean) * (s.metric - report.mean);
    report.stddev = std::sqrt(ss / (n - 1.0));
  }
}

MetricReport run_experiment(const Dataset& data, const ExperimentConfig& config) {
  config.check();
  data.check();
  MetricReport report;
  report.dataset = data.name;
  report.metric = metric_name(config.spec);
  const auto splits = stratified_splits(data, config.ratio, config.seed, config.splits);
  const TuningResult tuned = tune_two_stage(data.subset(splits.front().train), config);
  for (std::size_t s = 0; s < splits.size(); ++s) {
    auto [train, test, scaler] = standardize(data.subset(splits[s].train), data.subset(splits[s].test), wants_intercept(config));
    const Model m = fit_model(train, config, tuned.best, config.seed + 104729 * (s + 1));
    const Evaluation e = evaluate(m, test);
    report.splits.push_back({s + 1, tuned.best, e.metric, e.abstain_rate});
  }
  summarize(report);
  return report;
}

std::vector<MetricReport> run_benchmark(const ExperimentConfig& config, const std::vector<std::string>& paths,
                                        const std::string& out_dir, const CsvOptions& csv) {
  std::filesystem::create_directories(out_dir);
  const auto results_path = std::filesystem::path(out_dir) / "results.csv";
  const bool fresh = !std::filesystem::exists(results_path);
  std::ofstream results(results_path, std::ios::app);
  if (!results) throw Error(ErrorCode::BadConfig, "cannot write " + results_path.string());
  if (fresh) results << "dataset,split,C,lambda,gamma,metric,value,abstain_rate\n";
  results << std::setprecision(17);

  std::vector<MetricReport> reports;
  for (const auto& path : paths) {
    MetricReport report;
    try {
      const Dataset data = load_csv(path, csv);
      report = run_experiment(data, config);
      const std::size_t n_train =
          static_cast<std::size_t>(std::llround(config.ratio * static_cast<double>(data.size())));
      for (const auto& s : report.splits)
        results << report.dataset << "," << s.split << "," << (s.hp.lambda ? 0.0 : s.hp.c) << ","
                << s.hp.lambda_for(n_train) << "," << (uses_gamma(config) ? s.hp.gamma : 0.0) << ","
                << report.metric << "," << s.metric << "," << s.abstain_rate << "\n";
      results.flush();
    } catch (const std::exception& ex) {
      report.dataset = std::filesystem::path(path).stem().string();
      report.metric = metric_name(config.spec);
      report.error = ex.what();
    }
    reports.push_back(std::move(report));
  }
  std::ofstream summary(std::filesystem::path(out_dir) / "summary.txt", std::ios::app);
  summary << summary_table(reports, config);
  return reports;
}

std::string summary_table(const std::vector<MetricReport>& reports, const ExperimentConfig& config) {
  std::ostringstream s;
  s << "loss: " << describe(config.spec) << "  learner: " << (config.learner == Learner::Linear ? "linear" : "kernel");
  if (config.learner == Learner::Kernel)
    s << " (" << (std::holds_alternative<GaussianKernel>(config.kernel) ? "gaussian" : "linear") << ")";
  s << "  features: " << (config.features == FeatureKind::Thresholded ? "thresholded" : "multiclass") << "\n";
  s << "C grid maps to lambda = 1 / (C n_train)\n";
  s << std::left << std::setw(16) << "dataset" << std::setw(18) << "metric" << "mean (std)\n";
  for (const auto& r : reports) {
    s << std::left << std::setw(16) << r.dataset << std::setw(18) << r.metric;
    if (!r.error.empty()) {
      s << "FAILED: " << r.error << "\n";
      continue;
    }
    s << std::fixed << std::setprecision(4) << r.mean << " (" << r.stddev << ")";
    if (std::holds_alternative<Abstain>(config.spec))
      s << " [" << std::setprecision(1) << 100.0 * r.abstain_rate << "%]";
    s << std::defaultfloat << "\n";
  }
  return s.str();
}

}  // namespace advpred
