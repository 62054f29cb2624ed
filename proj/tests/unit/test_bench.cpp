#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "advpred/bench.hpp"

using namespace advpred;

namespace {

Dataset parse(const std::string& text, const CsvOptions& opts = {}, std::vector<std::string>* warn = nullptr) {
  std::istringstream in(text);
  return parse_csv(in, opts, "t", warn);
}

Dataset blobs(std::size_t per_class, std::size_t k, std::uint64_t seed, double spread = 0.3) {
  Dataset d;
  d.classes = k;
  d.x = Matrix(per_class * k, 2);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  for (std::size_t i = 0; i < per_class * k; ++i) {
    const std::size_t c = i % k;
    d.x(i, 0) = double(c) + noise(rng);
    d.x(i, 1) = 2.0 - double(c) + noise(rng);
    d.y.push_back(Label(c + 1));
  }
  return d;
}

}  // namespace

TEST_CASE("csv parsing") {
  const Dataset d = parse("1.0,2.0,1\n0.5,1.0,2\n0,0,1\n");
  CHECK(d.size() == 3);
  CHECK(d.features() == 2);
  CHECK(d.classes == 2);
  CHECK(d.x(1, 0) == 0.5);

  const Dataset h = parse("a,b,label\n1,2,5\n3,4,7\n");
  CHECK(h.size() == 2);
  CHECK(h.y == std::vector<Label>{1, 2});

  CsvOptions first;
  first.label_column = 0;
  const Dataset f = parse("2,1.5,3\n1,0.5,4\n", first);
  CHECK(f.y == std::vector<Label>{2, 1});
  CHECK(f.x(0, 0) == 1.5);

  std::vector<std::string> warn;
  const Dataset g = parse("0,1\n0,3\n1,1\n", {}, &warn);
  CHECK(g.y == std::vector<Label>{1, 2, 1});
  CHECK(warn.size() == 1);
}

TEST_CASE("csv errors") {
  try {
    parse("1,2,1\n1,x,2\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("row 2, column 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("1,2,1\n1,2\n"), Error);
  try {
    parse("");
    FAIL("expected EmptyDataset");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyDataset);
  }
  CHECK_THROWS_AS(load_csv("/nonexistent.csv"), Error);
}

TEST_CASE("standardize") {
  Dataset train;
  train.classes = 2;
  train.x = Matrix{{1, 5}, {3, 5}, {5, 5}};
  train.y = {1, 2, 1};
  Dataset test = train;
  test.x = Matrix{{3, 9}};
  test.y = {2};
  auto [tr, te, scaler] = standardize(train, test);
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    mean += tr.x(i, 0) / 3;
    sq += tr.x(i, 0) * tr.x(i, 0) / 3;
    CHECK(tr.x(i, 1) == 0.0);
  }
  CHECK(mean == doctest::Approx(0.0));
  CHECK(sq == doctest::Approx(1.0));
  CHECK(te.x(0, 0) == doctest::Approx(0.0));
  CHECK(te.x(0, 1) == 0.0);

  auto [tr2, te2, sc2] = standardize(train, test, true);
  CHECK(tr2.features() == 3);
  CHECK(te2.x(0, 2) == 1.0);
  CHECK(sc2.output_dim() == 3);
}

TEST_CASE("stratified splits") {
  Dataset ten = blobs(5, 2, 1);
  const auto s = stratified_splits(ten, 0.7, 9, 20);
  CHECK(s.size() == 20);
  for (const auto& sp : s) {
    CHECK(sp.train.size() == 7);
    CHECK(sp.test.size() == 3);
    std::set<Label> seen;
    for (auto i : sp.train) seen.insert(ten.y[i]);
    CHECK(seen.size() == 2);
  }
  const auto again = stratified_splits(ten, 0.7, 9, 20);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i].train == again[i].train);

  Dataset lonely = ten;
  lonely.classes = 3;
  lonely.y[0] = 3;
  CHECK_THROWS_AS(stratified_splits(lonely, 0.7, 1, 1), Error);
  CHECK_THROWS_AS(stratified_splits(ten, 1.0, 1, 1), Error);

  const auto folds = stratified_folds(blobs(10, 3, 2), 5, 4);
  std::vector<int> hits(30, 0);
  for (const auto& f : folds) {
    CHECK(f.train.size() + f.test.size() == 30);
    for (auto i : f.test) ++hits[i];
  }
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("evaluation metrics") {
  Dataset d;
  d.classes = 3;
  d.x = Matrix{{1.0}, {1.0}, {1.0}, {1.0}};
  d.y = {2, 2, 2, 2};
  // theta puts all potential on class 2
  const LinearModel perfect{{0, 5, 0}, FeatureMap::multiclass(1, 3), ZeroOne{}, 0.0};
  const Evaluation e = evaluate(perfect, d);
  CHECK(e.metric == 1.0);
  CHECK(e.loss == 0.0);

  const LinearModel abstainer{{0, 0, 0}, FeatureMap::multiclass(1, 3), Abstain{0.5}, 0.0};
  const Evaluation a = evaluate(abstainer, d);
  CHECK(a.loss == 0.5);
  CHECK(a.abstain_rate == 1.0);
  CHECK(std::string(metric_name(Abstain{0.5})) == "abstention_loss");

  // thresholded map with w = 0 and eta = (-5, 5): always predicts class 2
  Dataset ends = d;
  ends.y = {1, 3, 1, 3};
  const LinearModel middle{{0, -5, 5}, FeatureMap::thresholded(1, 3), OrdinalAbsolute{}, 0.0};
  const Evaluation m = evaluate(middle, ends);
  CHECK(m.metric == 1.0);
  CHECK(m.predictions == std::vector<Label>{2, 2, 2, 2});
  const LinearModel middle_sq{{0, -5, 5}, FeatureMap::thresholded(1, 3), OrdinalSquared{}, 0.0};
  CHECK(evaluate(middle_sq, ends).metric == 1.0);
  CHECK(std::string(metric_name(OrdinalAbsolute{})) == "mae");
}

TEST_CASE("degenerate grids return their only point") {
  const Dataset d = blobs(10, 3, 5);
  ExperimentConfig cfg = ExperimentConfig::defaults(ZeroOne{}, FeatureKind::Multiclass, Learner::Linear, LinearKernel{});
  cfg.c_grid = {8.0};
  cfg.c_refine = {1.0};
  cfg.linear_epochs = 10;
  const TuningResult r = tune_two_stage(d, cfg);
  CHECK(r.best.c == 8.0);
  CHECK(r.stage1.size() == 1);

  cfg.c_grid = {1.0, 64.0};
  cfg.c_refine = {0.5, 1.0, 2.0};
  const TuningResult two = tune_two_stage(d, cfg);
  bool has_winner = false;
  for (const auto& [hp, loss] : two.stage2) has_winner = has_winner || hp.c == (two.stage1[0].second <= two.stage1[1].second ? 1.0 : 64.0);
  CHECK(has_winner);
}

TEST_CASE("default grids") {
  const auto ord = ExperimentConfig::defaults(OrdinalAbsolute{}, FeatureKind::Thresholded, Learner::Linear,
                                              LinearKernel{});
  REQUIRE(ord.lambda_grid.size() == 7);
  CHECK(ord.lambda_grid.front() == 0.5);
  CHECK(ord.lambda_grid.back() == std::ldexp(1.0, -13));
  const auto cls = ExperimentConfig::defaults(ZeroOne{}, FeatureKind::Multiclass, Learner::Kernel, GaussianKernel{});
  CHECK(cls.c_grid == Vector{1, 8, 64, 512, 4096});
  CHECK(cls.gamma_grid.size() == 5);
  CHECK(cls.gamma_grid.back() == 1.0);
  ExperimentConfig bad = cls;
  bad.ratio = 1.5;
  CHECK_THROWS_AS(bad.check(), Error);
}

TEST_CASE("experiment pipeline") {
  const Dataset d = blobs(15, 3, 6);
  ExperimentConfig cfg = ExperimentConfig::defaults(ZeroOne{}, FeatureKind::Multiclass, Learner::Linear, LinearKernel{});
  cfg.splits = 3;
  cfg.c_grid = {1.0, 64.0};
  cfg.c_refine = {1.0};
  cfg.linear_epochs = 20;
  const MetricReport r = run_experiment(d, cfg);
  REQUIRE(r.splits.size() == 3);
  double mean = 0.0;
  for (const auto& s : r.splits) mean += s.metric / 3;
  CHECK(r.mean == doctest::Approx(mean).epsilon(1e-15));
  CHECK(r.mean >= 0.8);
  const MetricReport again = run_experiment(d, cfg);
  CHECK(again.mean == r.mean);

  const auto dir = std::filesystem::temp_directory_path() / "advpred_bench_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "blobs.csv");
    for (std::size_t i = 0; i < d.size(); ++i) out << d.x(i, 0) << "," << d.x(i, 1) << "," << d.y[i] << "\n";
  }
  const auto reports = run_benchmark(cfg, {(dir / "blobs.csv").string(), (dir / "missing.csv").string()},
                                     (dir / "out").string());
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].error.empty());
  CHECK_FALSE(reports[1].error.empty());
  std::ifstream results(dir / "out" / "results.csv");
  std::string header;
  std::getline(results, header);
  CHECK(header == "dataset,split,C,lambda,gamma,metric,value,abstain_rate");
  std::size_t rows = 0;
  for (std::string line; std::getline(results, line);) ++rows;
  CHECK(rows == 3);
  CHECK(std::filesystem::exists(dir / "out" / "summary.txt"));
  std::filesystem::remove_all(dir);
}
