#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "shrunk/graph.hpp"

namespace shrunk {

struct LabeledDataset {
  DataMatrix x;            // r x n
  Eigen::VectorXi labels;  // contiguous 0..C-1
  std::string name;

  int n() const { return static_cast<int>(x.cols()); }
  int r() const { return static_cast<int>(x.rows()); }
};

// Three axis-aligned 2-D Gaussian clusters at x = -2, 0, +2, elongated along
// the y axis (y variance 1). The x variances are 0.1, 0.05, 0.07 from left to
// right. The center cluster is class 0; the two flanks form class 1, so both
// class means sit near the origin and the between-class scatter carries no
// signal along the informative x axis.
LabeledDataset toy_ellipses(int n_per, std::uint64_t seed);

struct MixtureComponent {
  Eigen::VectorXd center;
  Eigen::MatrixXd covariance;  // PSD
  int count = 0;
  int label = 0;
};

LabeledDataset gaussian_mixture(const std::vector<MixtureComponent>& components,
                                std::uint64_t seed);

// CSV, no header, one sample per row: integer label, then decimal features.
// Labels are re-indexed to 0..C-1 in first-appearance order.
LabeledDataset load_csv(const std::string& path);
void save_csv(const LabeledDataset& data, const std::string& path);

// Divides every entry by the denominator; 256 maps 8-bit pixels into [0, 1).
DataMatrix scale_pixels(const DataMatrix& x, double denominator = 256.0);

}  // namespace shrunk
