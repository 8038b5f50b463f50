#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <vector>

#include "shrunk/matrices.hpp"

namespace shrunk {

// Samples are columns: X is r x n.
using DataMatrix = Eigen::MatrixXd;

enum class GraphMode { Unsupervised, Supervised };

// How the Gaussian width is interpreted: Absolute uses sigma as-is;
// MedianDist multiplies sigma by the median neighbor distance.
enum class SigmaScale { Absolute, MedianDist };

// For each sample i, the index set of its k nearest neighbors (self excluded,
// restricted to same-label samples in supervised mode).
struct NeighborSets {
  int n = 0;
  int k = 0;
  GraphMode mode = GraphMode::Unsupervised;
  std::vector<std::vector<int>> sets;
};

// Symmetric nonnegative weights with zero diagonal, their degrees, and the
// graph Laplacian L = D - A. sigma_eff is the Gaussian width actually used
// (0 when the graph was not Gaussian-built).
struct AffinityGraph {
  Eigen::SparseMatrix<double> weights;
  Eigen::VectorXd degrees;
  SymMatrixd laplacian;
  double sigma_eff = 0.0;
};

// Exact k-nearest-neighbor search under the Euclidean metric. Distance ties
// break toward the lower index. In supervised mode candidates are restricted
// to same-class samples and a singleton class yields an empty set.
NeighborSets knn_neighbors(const DataMatrix& x, int k, GraphMode mode,
                           const Eigen::VectorXi* labels = nullptr);

// Gaussian weights a_ij = exp(-||x_i - x_j||^2 / (2 sigma_eff^2)) over pairs
// with j in N(i) or i in N(j). Each undirected pair is evaluated once, so the
// result is symmetric bit-exactly.
AffinityGraph gaussian_affinity(const DataMatrix& x, const NeighborSets& nbrs,
                                double sigma, SigmaScale scale = SigmaScale::MedianDist);

// Degree vector and Laplacian L = D - A of a symmetric nonnegative affinity.
std::pair<Eigen::VectorXd, SymMatrixd> laplacian(const Eigen::SparseMatrix<double>& a);

// Class-block affinity: a_ij = 1/n_k when i != j share class k, else 0.
// The diagonal is zero; L is unchanged by any constant added there.
AffinityGraph block_affinity(const Eigen::VectorXi& labels);

// Connected components of the nonzero pattern; labels are assigned in
// first-visit order starting at 0.
std::vector<int> connected_components(const Eigen::SparseMatrix<double>& a);

// Builds an affinity graph from a sparse weight matrix (validates symmetry,
// nonnegativity and zero diagonal).
AffinityGraph make_affinity_graph(const Eigen::SparseMatrix<double>& a, double sigma_eff = 0.0);

// Default neighbor counts: 30 unsupervised; per-class min(n_class - 1, 50)
// supervised. Returns the k to request from knn_neighbors.
int default_neighbor_count(GraphMode mode);

}  // namespace shrunk
