#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <string>
#include <vector>

#include "shrunk/graph.hpp"
#include "shrunk/matrices.hpp"

namespace shrunk {

// Embedded shrunk patterns, one d-dimensional column per training sample.
using ShrunkEmbedding = Eigen::MatrixXd;

// Constraint metric a projection satisfies.
enum class Metric { StOrthonormal, DWeighted, EuclideanOrthonormal, SwOrthonormal };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

struct Projection {
  Eigen::MatrixXd basis;        // r x d, one direction per column
  Metric metric = Metric::EuclideanOrthonormal;
  Eigen::VectorXd eigenvalues;  // solver eigenvalue per column
  double ridge_applied = 0.0;   // ridge used on the constraint metric, 0 if none

  int dim() const { return static_cast<int>(basis.cols()); }
};

// Balance weight between graph smoothness and data fidelity. Numeric values
// must be strictly positive; the exact limits are represented symbolically
// and solved by their closed forms.
class Gamma {
 public:
  enum class Kind { Zero, Value, Infinity };

  static Gamma zero() { return Gamma(Kind::Zero, 0.0); }
  static Gamma infinity() { return Gamma(Kind::Infinity, 0.0); }
  static Gamma value(double g);

  Kind kind() const { return kind_; }
  bool is_value() const { return kind_ == Kind::Value; }
  double get() const;

 private:
  Gamma(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_;
  double value_;
};

// Accepts a decimal, "2^k", "zero", or "inf".
Gamma parse_gamma(const std::string& text);
std::string format_gamma(const Gamma& g);

struct LsdaParams {
  Gamma gamma = Gamma::value(1.0);
  double sigma = 0.5;
  int k = 0;  // 0 -> 30 unsupervised, 50 supervised (capped per class)
  GraphMode mode = GraphMode::Supervised;
  int dim = 2;
  double ridge = 1e-6;
  SigmaScale sigma_scale = SigmaScale::MedianDist;
};

struct ScatterSet {
  SymMatrixd between;          // S_B
  SymMatrixd within;           // S_W
  SymMatrixd total;            // S_t, equals S_B + S_W
  Eigen::VectorXd mean;        // global mean
  Eigen::MatrixXd class_means; // one column per class
  std::vector<int> class_sizes;
};

struct LsdaResult {
  Projection projection;
  ShrunkEmbedding embedding;
};

constexpr double kDefaultRidge = 1e-6;

// Unnormalized between/within/total scatter; S_B + S_W = S_t holds exactly
// in the algebra and to roundoff here.
ScatterSet scatter_matrices(const DataMatrix& x, const Eigen::VectorXi& labels);

// Total scatter of centered data (no labels needed).
SymMatrixd total_scatter(const DataMatrix& x);

// Top-d directions of the sample covariance, Euclidean-orthonormal, sorted
// by descending variance.
Projection pca_fit(const DataMatrix& x, int d);

// Top-d generalized eigenvectors of S_B w = lambda S_W' w. d is capped at
// C - 1, the number of nonzero generalized eigenvalues.
Projection lda_fit(const DataMatrix& x, const Eigen::VectorXi& labels, int d,
                   double ridge = kDefaultRidge);

// d smallest pairs of X L X^T w = lambda X D X^T w.
Projection lpp_fit(const DataMatrix& x, const AffinityGraph& graph, int d,
                   double ridge = kDefaultRidge);

// H = X (gamma I - gamma^2 (L + gamma I)^{-1}) X^T, assembled from SPD solves
// against L + gamma I; symmetric positive semidefinite.
SymMatrixd lsda_build_H(const DataMatrix& x, const SymMatrixd& l, double gamma);

// Closed-form embedding for fixed W: F = gamma (L + gamma I)^{-1} X^T W,
// returned with one column per sample.
ShrunkEmbedding lsda_recover_F(const DataMatrix& x, const Projection& w,
                               const SymMatrixd& l, double gamma);

// Full pipeline: neighbor graph, Gaussian affinity, H, generalized
// eigensolve against the total scatter, embedding recovery.
LsdaResult lsda_fit(const DataMatrix& x, const LsdaParams& params,
                    const Eigen::VectorXi* labels = nullptr);

// Same solve on a caller-supplied graph; used by the limit analyses and by
// non-Gaussian affinities such as the class-block graph.
LsdaResult lsda_fit_with_graph(const DataMatrix& x, const AffinityGraph& graph,
                               const Gamma& gamma, int d, double ridge = kDefaultRidge);

// gamma -> infinity limit: d smallest pairs of X L X^T w = lambda S_t' w.
Projection local_lda_fit(const DataMatrix& x, const AffinityGraph& graph, int d,
                         double ridge = kDefaultRidge);

// Z = W^T X.
Eigen::MatrixXd transform(const Projection& w, const DataMatrix& x);

// Pairwise objective sum_ij a_ij ||f_i - f_j||^2 + gamma sum_i ||W^T x_i - f_i||^2.
double lsda_objective(const DataMatrix& x, const ShrunkEmbedding& f,
                      const Eigen::MatrixXd& w, const Eigen::SparseMatrix<double>& a,
                      double gamma);

// Projection file: one comment line "# metric=<id> dim=<d> method=<name>"
// then r rows x d columns of 17-significant-digit decimals.
void save_projection(const Projection& p, const std::string& method,
                     const std::string& path);

struct LoadedProjection {
  Projection projection;
  std::string method;
};
LoadedProjection load_projection(const std::string& path);

}  // namespace shrunk
