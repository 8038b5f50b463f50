#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shrunk/reducers.hpp"

namespace shrunk {

// One per-class random split: exactly per_class_train indices of every class
// go to training. The draw is a pure function of (seed, per_class_train,
// repeat_index, class), so splits reproduce independently of execution order.
struct SplitSpec {
  int per_class_train = 1;
  std::uint64_t seed = 0;
  int repeat_index = 0;
};

struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

Split split_per_class(const Eigen::VectorXi& labels, const SplitSpec& spec);

// Half of every class (rounded down) to training; same keyed generator.
Split split_half_per_class(const Eigen::VectorXi& labels, std::uint64_t seed,
                           int repeat_index = 0);

// Nearest-training-column label under the Euclidean metric; distance ties
// resolve to the lowest training index.
Eigen::VectorXi knn1_classify(const Eigen::MatrixXd& train_z,
                              const Eigen::VectorXi& train_labels,
                              const Eigen::MatrixXd& test_z);

double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth);

struct MethodConfig {
  std::string method;  // baseline | pca | lda | lpp | lsda | local-lda
  GraphMode mode = GraphMode::Supervised;
  std::vector<double> sigma_grid;  // used by lpp, lsda, local-lda
  std::vector<Gamma> gamma_grid;   // used by lsda
  int k = 0;                       // 0 -> mode default
  double ridge = kDefaultRidge;
  SigmaScale sigma_scale = SigmaScale::MedianDist;
};

struct ExperimentConfig {
  std::vector<MethodConfig> methods;
  std::vector<int> train_sizes;  // L values
  std::vector<int> dimensions;
  int repeats = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Best grid point per (method, L, dimension): mean accuracy over repeats with
// its standard deviation and the winning parameters.
struct ExperimentReport {
  std::string method;
  GraphMode mode = GraphMode::Supervised;
  int train_size = 0;
  int dimension = 0;
  std::optional<double> sigma;
  std::optional<Gamma> gamma;
  std::optional<int> k;
  int repeats = 0;
  double mean_accuracy = 0.0;
  double std_dev = 0.0;
  std::string status = "ok";
};

// Runs the full protocol: per repeat one shared split across all methods,
// fit on train, transform train and test, 1-NN accuracy per dimension, then
// the best grid point per dimension by mean accuracy.
std::vector<ExperimentReport> run_experiment(const DataMatrix& x,
                                             const Eigen::VectorXi& labels,
                                             const ExperimentConfig& config);

// Fits one method on the given data; baseline returns the identity basis.
// d is clamped to the method's feasible range (C-1 for LDA, min(r, n) for
// PCA), mirroring how accuracy curves keep their last feasible value.
Projection fit_method(const DataMatrix& x, const Eigen::VectorXi& labels,
                      const MethodConfig& method, double sigma, const Gamma& gamma,
                      int d);

std::string report_csv_header();
std::string report_csv_row(const ExperimentReport& r);
void write_report_csv(const std::vector<ExperimentReport>& reports, const std::string& path);

std::string to_string(GraphMode mode);
GraphMode mode_from_string(const std::string& s);

}  // namespace shrunk
