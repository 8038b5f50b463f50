#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <set>

#include "shrunk/evalkit.hpp"
#include "shrunk/rng.hpp"

using namespace shrunk;
using Eigen::MatrixXd;
using Eigen::VectorXi;

namespace {

MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  CounterRng rng{seed};
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = 2.0 * rng.next_double() - 1.0;
  return m;
}

VectorXi cyclic_labels(int n, int classes) {
  VectorXi labels(n);
  for (int i = 0; i < n; ++i) labels(i) = i % classes;
  return labels;
}

}  // namespace

TEST_CASE("1-nn returns the label of an exactly matching point") {
  MatrixXd train = random_matrix(3, 10, 8);
  VectorXi labels = cyclic_labels(10, 4);
  MatrixXd test = train.col(7);
  VectorXi pred = knn1_classify(train, labels, test);
  CHECK(pred(0) == labels(7));
}

TEST_CASE("1-nn ties resolve to the lowest training index") {
  MatrixXd train(1, 2);
  train << 0.0, 2.0;
  VectorXi labels(2);
  labels << 0, 1;
  MatrixXd test(1, 1);
  test << 1.0;
  CHECK(knn1_classify(train, labels, test)(0) == 0);
}

TEST_CASE("1-nn agrees with the double-loop oracle") {
  MatrixXd train = random_matrix(4, 60, 8);
  MatrixXd test = random_matrix(4, 40, 9);
  VectorXi labels = cyclic_labels(60, 5);
  VectorXi pred = knn1_classify(train, labels, test);
  for (int j = 0; j < 40; ++j) {
    int best = 0;
    double best_d = (test.col(j) - train.col(0)).squaredNorm();
    for (int i = 1; i < 60; ++i) {
      double d = (test.col(j) - train.col(i)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    CHECK(pred(j) == labels(best));
  }
}

TEST_CASE("1-nn validates shapes") {
  MatrixXd train = random_matrix(3, 5, 10);
  VectorXi labels = cyclic_labels(5, 2);
  CHECK_THROWS_AS(knn1_classify(train, labels, random_matrix(2, 3, 11)), InvalidDimension);
  CHECK_THROWS_AS(knn1_classify(MatrixXd(3, 0), VectorXi(), train), InvalidInput);
}

TEST_CASE("accuracy counts matches") {
  VectorXi a(4), b(4);
  a << 0, 0, 1, 1;
  b << 0, 1, 1, 1;
  CHECK(accuracy(a, a) == 1.0);
  CHECK(accuracy(a, b) == doctest::Approx(0.75));
  VectorXi c(4);
  c << 2, 2, 2, 2;
  CHECK(accuracy(a, c) == 0.0);
  VectorXi wrong_len(3);
  CHECK_THROWS_AS(accuracy(a, wrong_len), InvalidInput);
}

TEST_CASE("split_per_class counts and determinism") {
  VectorXi labels = cyclic_labels(30, 3);  // 10 per class
  SplitSpec spec{2, 99, 0};
  Split split = split_per_class(labels, spec);
  CHECK(split.train.size() == 6);
  CHECK(split.test.size() == 24);
  for (int c = 0; c < 3; ++c) {
    int count = 0;
    for (int idx : split.train)
      if (labels(idx) == c) ++count;
    CHECK(count == 2);
  }
  Split again = split_per_class(labels, spec);
  CHECK(split.train == again.train);
  CHECK(split.test == again.test);

  Split other_repeat = split_per_class(labels, SplitSpec{2, 99, 1});
  CHECK(split.train != other_repeat.train);
}

TEST_CASE("split_per_class property sweep") {
  VectorXi labels(40);
  for (int i = 0; i < 40; ++i) labels(i) = i < 12 ? 0 : (i < 25 ? 1 : 2);
  for (int rep = 0; rep < 200; ++rep) {
    Split split = split_per_class(labels, SplitSpec{3, 7, rep});
    CHECK(split.train.size() == 9);
    CHECK(split.test.size() == 31);
    std::set<int> seen(split.train.begin(), split.train.end());
    for (int idx : split.test) CHECK(seen.insert(idx).second);
    CHECK(seen.size() == 40);
  }
}

TEST_CASE("split_per_class rejects classes that are too small") {
  VectorXi labels = cyclic_labels(9, 3);  // 3 per class
  CHECK_THROWS_AS(split_per_class(labels, SplitSpec{3, 1, 0}), InsufficientSamples);
  CHECK_THROWS_AS(split_per_class(labels, SplitSpec{4, 1, 0}), InsufficientSamples);
}

TEST_CASE("split_half_per_class halves every class") {
  VectorXi labels(30);
  for (int i = 0; i < 30; ++i) labels(i) = i < 10 ? 0 : 1;  // 10 + 20
  Split split = split_half_per_class(labels, 5);
  int train0 = 0, train1 = 0;
  for (int idx : split.train) (labels(idx) == 0 ? train0 : train1)++;
  CHECK(train0 == 5);
  CHECK(train1 == 10);
  CHECK(split.train.size() + split.test.size() == 30);
}

TEST_CASE("run_experiment with one repeat reports zero deviation") {
  MatrixXd x = random_matrix(3, 30, 12);
  VectorXi labels = cyclic_labels(30, 3);
  ExperimentConfig config;
  config.methods = {MethodConfig{"pca"}};
  config.train_sizes = {4};
  config.dimensions = {2};
  config.repeats = 1;
  config.seed = 3;
  auto reports = run_experiment(x, labels, config);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].std_dev == 0.0);
  CHECK(reports[0].repeats == 1);
  CHECK(reports[0].status == "ok");
}

TEST_CASE("baseline achieves perfect accuracy on separated data") {
  MatrixXd x(1, 20);
  VectorXi labels(20);
  for (int i = 0; i < 20; ++i) {
    labels(i) = i < 10 ? 0 : 1;
    x(0, i) = labels(i) == 0 ? 0.0 + 0.01 * i : 100.0 + 0.01 * i;
  }
  ExperimentConfig config;
  config.methods = {MethodConfig{"baseline"}};
  config.train_sizes = {3};
  config.dimensions = {1};
  config.repeats = 5;
  config.seed = 4;
  auto reports = run_experiment(x, labels, config);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].mean_accuracy == 1.0);
}

TEST_CASE("full-rank pca reproduces baseline accuracy exactly") {
  MatrixXd x = random_matrix(4, 36, 13);
  VectorXi labels = cyclic_labels(36, 3);
  ExperimentConfig config;
  config.methods = {MethodConfig{"baseline"}, MethodConfig{"pca"}};
  config.train_sizes = {5};
  config.dimensions = {4};
  config.repeats = 8;
  config.seed = 5;
  auto reports = run_experiment(x, labels, config);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].mean_accuracy == reports[1].mean_accuracy);
  CHECK(reports[0].std_dev == reports[1].std_dev);
}

TEST_CASE("methods share the split within a repeat") {
  VectorXi labels = cyclic_labels(24, 2);
  // The split only depends on (seed, L, repeat, class), never on the method.
  Split a = split_per_class(labels, SplitSpec{4, 11, 3});
  Split b = split_per_class(labels, SplitSpec{4, 11, 3});
  CHECK(a.train == b.train);
}

TEST_CASE("report csv header is pinned") {
  CHECK(report_csv_header() ==
        "method,mode,L,dimension,sigma,gamma,k,repeats,mean_accuracy,std_dev");
}

TEST_CASE("report csv rows serialize grids and blanks") {
  ExperimentReport r;
  r.method = "lsda";
  r.mode = GraphMode::Supervised;
  r.train_size = 4;
  r.dimension = 10;
  r.sigma = 0.5;
  r.gamma = Gamma::value(0.03125);
  r.k = 30;
  r.repeats = 50;
  r.mean_accuracy = 0.875;
  r.std_dev = 0.0125;
  CHECK(report_csv_row(r) == "lsda,supervised,4,10,0.5,0.03125,30,50,0.875,0.0125");

  ExperimentReport plain;
  plain.method = "pca";
  plain.mode = GraphMode::Unsupervised;
  plain.train_size = 2;
  plain.dimension = 8;
  plain.repeats = 1;
  plain.mean_accuracy = 1.0;
  plain.std_dev = 0.0;
  CHECK(report_csv_row(plain) == "pca,unsupervised,2,8,,,,1,1,0");
}

TEST_CASE("grid search reports the best point per dimension") {
  // Two separated blobs; a supervised lsda sweep over two sigmas and two
  // gammas must pick some grid point and stay deterministic.
  MatrixXd x = random_matrix(3, 40, 17);
  VectorXi labels(40);
  for (int i = 0; i < 40; ++i) {
    labels(i) = i % 2;
    x(0, i) += labels(i) * 8.0;
  }
  MethodConfig lsda;
  lsda.method = "lsda";
  lsda.mode = GraphMode::Supervised;
  lsda.sigma_grid = {0.3, 0.7};
  lsda.gamma_grid = {Gamma::value(0.25), Gamma::value(4.0)};
  ExperimentConfig config;
  config.methods = {lsda};
  config.train_sizes = {6};
  config.dimensions = {1, 2};
  config.repeats = 3;
  config.seed = 21;
  auto reports = run_experiment(x, labels, config);
  REQUIRE(reports.size() == 2);
  for (const auto& r : reports) {
    CHECK(r.status == "ok");
    CHECK(r.sigma.has_value());
    CHECK(r.gamma.has_value());
    CHECK(r.mean_accuracy >= 0.9);  // trivially separable
  }

  auto rerun = run_experiment(x, labels, config);
  for (size_t i = 0; i < reports.size(); ++i)
    CHECK(report_csv_row(reports[i]) == report_csv_row(rerun[i]));
}

TEST_CASE("parallel execution does not change results") {
  MatrixXd x = random_matrix(3, 36, 19);
  VectorXi labels = cyclic_labels(36, 3);
  MethodConfig lsda;
  lsda.method = "lsda";
  lsda.mode = GraphMode::Supervised;
  lsda.sigma_grid = {0.4, 0.8};
  lsda.gamma_grid = {Gamma::value(0.5), Gamma::value(2.0)};
  MethodConfig lpp;
  lpp.method = "lpp";
  lpp.mode = GraphMode::Supervised;
  lpp.sigma_grid = {0.4, 0.8};
  MethodConfig local_lda;
  local_lda.method = "local-lda";
  local_lda.mode = GraphMode::Supervised;
  local_lda.sigma_grid = {0.6};
  ExperimentConfig config;
  config.methods = {MethodConfig{"baseline"}, MethodConfig{"pca"}, lsda, lpp, local_lda};
  config.train_sizes = {4, 6};
  config.dimensions = {1, 3};
  config.repeats = 4;
  config.seed = 23;
  config.jobs = 1;
  auto serial = run_experiment(x, labels, config);
  config.jobs = 8;
  auto parallel = run_experiment(x, labels, config);
  REQUIRE(serial.size() == parallel.size());
  int healthy = 0;
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(report_csv_row(serial[i]) == report_csv_row(parallel[i]));
    if (serial[i].status == "ok") ++healthy;
  }
  CHECK(healthy == static_cast<int>(serial.size()));
}

TEST_CASE("failures are recorded per row and the run continues") {
  MatrixXd x = random_matrix(3, 30, 29);
  VectorXi labels = cyclic_labels(30, 3);
  MethodConfig bogus;
  bogus.method = "unknown-method";
  ExperimentConfig config;
  config.methods = {bogus, MethodConfig{"pca"}};
  config.train_sizes = {4};
  config.dimensions = {2};
  config.repeats = 2;
  config.seed = 31;
  auto reports = run_experiment(x, labels, config);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].status.rfind("failed:", 0) == 0);
  CHECK(reports[1].status == "ok");
}
