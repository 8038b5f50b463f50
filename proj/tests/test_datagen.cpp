#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>

#include "shrunk/datagen.hpp"
#include "shrunk/reducers.hpp"

using namespace shrunk;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  out << contents;
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("toy ellipses counts and class layout") {
  LabeledDataset toy = toy_ellipses(1000, 42);
  CHECK(toy.n() == 3000);
  CHECK(toy.r() == 2);
  int class0 = 0, class1 = 0;
  for (int i = 0; i < toy.n(); ++i) (toy.labels(i) == 0 ? class0 : class1)++;
  CHECK(class0 == 1000);
  CHECK(class1 == 2000);
}

TEST_CASE("toy ellipses are deterministic") {
  LabeledDataset a = toy_ellipses(50, 9);
  LabeledDataset b = toy_ellipses(50, 9);
  CHECK(a.x == b.x);
  CHECK(a.labels == b.labels);
  LabeledDataset c = toy_ellipses(50, 10);
  CHECK(a.x != c.x);
}

TEST_CASE("both toy class means sit near zero along x") {
  LabeledDataset toy = toy_ellipses(1000, 42);
  double mean0 = 0.0, mean1 = 0.0;
  for (int i = 0; i < toy.n(); ++i)
    (toy.labels(i) == 0 ? mean0 : mean1) += toy.x(0, i);
  mean0 /= 1000.0;
  mean1 /= 2000.0;
  // This x-degeneracy of the class means is exactly what defeats plain LDA.
  CHECK(std::abs(mean0) <= 0.05);
  CHECK(std::abs(mean1) <= 0.05);
}

TEST_CASE("toy flank means are symmetric about zero") {
  LabeledDataset toy = toy_ellipses(800, 3);
  double left = 0.0, right = 0.0;
  int n_left = 0, n_right = 0;
  for (int i = 0; i < toy.n(); ++i) {
    if (toy.labels(i) != 1) continue;
    if (toy.x(0, i) < 0) {
      left += toy.x(0, i);
      ++n_left;
    } else {
      right += toy.x(0, i);
      ++n_right;
    }
  }
  left /= n_left;
  right /= n_right;
  // Flanks at -2 and +2 with x std below 0.32: three standard errors.
  const double tol = 3.0 * 0.32 / std::sqrt(800.0);
  CHECK(std::abs(left + 2.0) <= tol);
  CHECK(std::abs(right - 2.0) <= tol);
}

TEST_CASE("zero covariance collapses a component onto its center") {
  MixtureComponent comp;
  comp.center = Eigen::Vector3d(1.0, -2.0, 0.5);
  comp.covariance = MatrixXd::Zero(3, 3);
  comp.count = 10;
  comp.label = 0;
  LabeledDataset data = gaussian_mixture({comp}, 4);
  for (int i = 0; i < 10; ++i) CHECK(data.x.col(i) == comp.center);
}

TEST_CASE("separated mixture components are linearly separable by lda") {
  MixtureComponent a, b;
  a.center = Eigen::Vector2d(-5.0, 0.0);
  b.center = Eigen::Vector2d(5.0, 0.0);
  a.covariance = b.covariance = 0.01 * MatrixXd::Identity(2, 2);
  a.count = b.count = 40;
  a.label = 0;
  b.label = 1;
  LabeledDataset data = gaussian_mixture({a, b}, 5);
  Projection p = lda_fit(data.x, data.labels, 1);
  MatrixXd z = transform(p, data.x);
  // Perfect separation: the max of one class is below the min of the other.
  double max0 = -1e100, min1 = 1e100, min0 = 1e100, max1 = -1e100;
  for (int i = 0; i < data.n(); ++i) {
    if (data.labels(i) == 0) {
      max0 = std::max(max0, z(0, i));
      min0 = std::min(min0, z(0, i));
    } else {
      max1 = std::max(max1, z(0, i));
      min1 = std::min(min1, z(0, i));
    }
  }
  CHECK((max0 < min1 || max1 < min0));
}

TEST_CASE("sample covariance approaches the requested covariance") {
  MixtureComponent comp;
  comp.center = Eigen::Vector2d(1.0, 2.0);
  comp.covariance.resize(2, 2);
  comp.covariance << 2.0, 0.6, 0.6, 1.0;
  comp.count = 100000;
  comp.label = 0;
  LabeledDataset data = gaussian_mixture({comp}, 6);
  VectorXd mean = data.x.rowwise().mean();
  MatrixXd centered = data.x.colwise() - mean;
  MatrixXd sample_cov = centered * centered.transpose() / double(comp.count - 1);
  CHECK((sample_cov - comp.covariance).norm() <= 0.05 * comp.covariance.norm());
}

TEST_CASE("non-psd covariance is rejected") {
  MixtureComponent comp;
  comp.center = Eigen::Vector2d(0.0, 0.0);
  comp.covariance.resize(2, 2);
  comp.covariance << 1.0, 0.0, 0.0, -0.5;
  comp.count = 3;
  CHECK_THROWS_AS(gaussian_mixture({comp}, 7), InvalidCovariance);
}

TEST_CASE("csv parsing of a small file") {
  TempFile tmp("datagen_small.csv");
  write_file(tmp.path, "1,0.5,0.25\n2,0.5,0.75\n");
  LabeledDataset data = load_csv(tmp.path);
  CHECK(data.n() == 2);
  CHECK(data.r() == 2);
  CHECK(data.labels(0) == 0);
  CHECK(data.labels(1) == 1);
  CHECK(data.x(0, 0) == 0.5);
  CHECK(data.x(1, 1) == 0.75);
}

TEST_CASE("labels re-index by first appearance") {
  TempFile tmp("datagen_reindex.csv");
  write_file(tmp.path, "7,1.0\n7,2.0\n3,3.0\n");
  LabeledDataset data = load_csv(tmp.path);
  CHECK(data.labels(0) == 0);
  CHECK(data.labels(1) == 0);
  CHECK(data.labels(2) == 1);
}

TEST_CASE("csv loader rejects malformed rows with line numbers") {
  TempFile ragged("datagen_ragged.csv");
  write_file(ragged.path, "0,1.0,2.0\n1,3.0\n");
  try {
    load_csv(ragged.path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  TempFile garbage("datagen_garbage.csv");
  write_file(garbage.path, "0,1.0\n0,abc\n");
  try {
    load_csv(garbage.path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  TempFile empty("datagen_empty.csv");
  write_file(empty.path, "");
  CHECK_THROWS_AS(load_csv(empty.path), EmptyDataset);
}

TEST_CASE("save and load round-trip bit-exactly") {
  LabeledDataset toy = toy_ellipses(30, 11);
  TempFile tmp("datagen_roundtrip.csv");
  save_csv(toy, tmp.path);
  LabeledDataset loaded = load_csv(tmp.path);
  CHECK(loaded.x == toy.x);
  // Labels re-index by first appearance, so compare the induced partitions.
  for (int i = 0; i < toy.n(); ++i)
    for (int j = 0; j < toy.n(); ++j)
      CHECK((loaded.labels(i) == loaded.labels(j)) == (toy.labels(i) == toy.labels(j)));
}

TEST_CASE("pixel scaling") {
  MatrixXd x(1, 3);
  x << 255.0, 0.0, 128.0;
  MatrixXd scaled = scale_pixels(x);
  CHECK(scaled(0, 0) == 0.99609375);
  CHECK(scaled(0, 1) == 0.0);
  CHECK(scaled(0, 2) == 0.5);
  CHECK(scaled.maxCoeff() <= 1.0);
  // Not idempotent: a second pass divides again.
  CHECK(scale_pixels(scaled)(0, 2) == doctest::Approx(0.5 / 256.0));

  MatrixXd negative(1, 1);
  negative << -1.0;
  CHECK_THROWS_AS(scale_pixels(negative), InvalidInput);
}
