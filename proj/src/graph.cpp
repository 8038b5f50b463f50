#include "shrunk/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <utility>

#include "shrunk/errors.hpp"

namespace shrunk {

namespace {

// Squared distances from the Gram matrix; only the lower triangle of G is
// computed so d2(i,j) and d2(j,i) read the same memory.
struct PairDistances {
  Eigen::MatrixXd gram;
  Eigen::VectorXd sq;

  explicit PairDistances(const DataMatrix& x) {
    const Eigen::Index n = x.cols();
    gram = Eigen::MatrixXd::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    gram.triangularView<Eigen::StrictlyUpper>() =
        gram.triangularView<Eigen::StrictlyLower>().transpose();
    sq = gram.diagonal();
  }

  double operator()(int i, int j) const {
    double d2 = sq(i) + sq(j) - 2.0 * gram(i, j);
    return d2 > 0.0 ? d2 : 0.0;
  }
};

std::vector<int> class_counts(const Eigen::VectorXi& labels) {
  int c = labels.size() ? labels.maxCoeff() + 1 : 0;
  std::vector<int> counts(static_cast<size_t>(c), 0);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) < 0) throw InvalidLabels("labels must be nonnegative");
    ++counts[static_cast<size_t>(labels(i))];
  }
  return counts;
}

}  // namespace

int default_neighbor_count(GraphMode mode) {
  return mode == GraphMode::Unsupervised ? 30 : 50;
}

NeighborSets knn_neighbors(const DataMatrix& x, int k, GraphMode mode,
                           const Eigen::VectorXi* labels) {
  const int n = static_cast<int>(x.cols());
  if (k < 1) throw InvalidK("k must be >= 1");
  if (mode == GraphMode::Supervised) {
    if (labels == nullptr || labels->size() != n)
      throw InvalidLabels("supervised mode requires one label per sample");
  } else {
    if (labels != nullptr) throw InvalidLabels("unsupervised mode takes no labels");
    if (k >= n) throw InvalidK("k must be smaller than the sample count");
  }
  if (!x.allFinite()) throw InvalidInput("knn_neighbors: non-finite entries");

  PairDistances dist(x);
  NeighborSets out;
  out.n = n;
  out.k = k;
  out.mode = mode;
  out.sets.resize(static_cast<size_t>(n));

  std::vector<std::pair<double, int>> cand;
  for (int i = 0; i < n; ++i) {
    cand.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (mode == GraphMode::Supervised && (*labels)(j) != (*labels)(i)) continue;
      cand.emplace_back(dist(i, j), j);
    }
    const int take = std::min<int>(k, static_cast<int>(cand.size()));
    std::partial_sort(cand.begin(), cand.begin() + take, cand.end());
    auto& set = out.sets[static_cast<size_t>(i)];
    set.reserve(static_cast<size_t>(take));
    for (int t = 0; t < take; ++t) set.push_back(cand[static_cast<size_t>(t)].second);
  }
  return out;
}

AffinityGraph gaussian_affinity(const DataMatrix& x, const NeighborSets& nbrs,
                                double sigma, SigmaScale scale) {
  if (sigma <= 0.0) throw InvalidSigma("sigma must be > 0");
  const int n = nbrs.n;
  if (static_cast<int>(x.cols()) != n)
    throw InvalidInput("gaussian_affinity: sample count mismatch");

  PairDistances dist(x);

  double sigma_eff = sigma;
  if (scale == SigmaScale::MedianDist) {
    std::vector<double> d;
    for (int i = 0; i < n; ++i)
      for (int j : nbrs.sets[static_cast<size_t>(i)]) d.push_back(std::sqrt(dist(i, j)));
    double median = 0.0;
    if (!d.empty()) {
      std::sort(d.begin(), d.end());
      const size_t m = d.size();
      median = (m % 2 == 1) ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
    }
    sigma_eff = sigma * median;
  }

  // Union of directed neighbor pairs, stored once per undirected edge.
  std::map<std::pair<int, int>, double> edges;
  const double denom = 2.0 * sigma_eff * sigma_eff;
  for (int i = 0; i < n; ++i) {
    for (int j : nbrs.sets[static_cast<size_t>(i)]) {
      auto key = std::minmax(i, j);
      if (edges.count(key)) continue;
      const double d2 = dist(key.first, key.second);
      double w;
      if (d2 == 0.0)
        w = 1.0;
      else
        w = denom > 0.0 ? std::exp(-d2 / denom) : 0.0;
      edges.emplace(key, w);
    }
  }

  Eigen::SparseMatrix<double> a(n, n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(edges.size() * 2);
  for (const auto& [key, w] : edges) {
    trips.emplace_back(key.first, key.second, w);
    trips.emplace_back(key.second, key.first, w);
  }
  a.setFromTriplets(trips.begin(), trips.end());

  AffinityGraph g = make_affinity_graph(a, sigma_eff);
  return g;
}

std::pair<Eigen::VectorXd, SymMatrixd> laplacian(const Eigen::SparseMatrix<double>& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw InvalidAffinity("affinity matrix must be square");
  Eigen::MatrixXd dense_a(a);
  if ((dense_a.array() != dense_a.transpose().array()).any())
    throw InvalidAffinity("affinity matrix must be symmetric");
  if ((dense_a.array() < 0.0).any())
    throw InvalidAffinity("affinity weights must be nonnegative");
  if ((dense_a.diagonal().array() != 0.0).any())
    throw InvalidAffinity("affinity diagonal must be zero");

  Eigen::VectorXd degrees = dense_a.rowwise().sum();
  Eigen::MatrixXd l = -dense_a;
  l.diagonal() = degrees;
  return {degrees, SymMatrixd(l)};
}

AffinityGraph make_affinity_graph(const Eigen::SparseMatrix<double>& a, double sigma_eff) {
  AffinityGraph g;
  auto [degrees, lap] = laplacian(a);
  g.weights = a;
  g.degrees = std::move(degrees);
  g.laplacian = std::move(lap);
  g.sigma_eff = sigma_eff;
  return g;
}

AffinityGraph block_affinity(const Eigen::VectorXi& labels) {
  const Eigen::Index n = labels.size();
  if (n == 0) throw InvalidLabels("block_affinity: empty labels");
  std::vector<int> counts = class_counts(labels);

  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && labels(i) == labels(j))
        trips.emplace_back(i, j, 1.0 / counts[static_cast<size_t>(labels(i))]);

  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return make_affinity_graph(a, 0.0);
}

std::vector<int> connected_components(const Eigen::SparseMatrix<double>& a) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw InvalidAffinity("affinity matrix must be square");
  std::vector<int> comp(static_cast<size_t>(n), -1);
  int next = 0;
  std::deque<int> queue;
  for (int start = 0; start < n; ++start) {
    if (comp[static_cast<size_t>(start)] != -1) continue;
    comp[static_cast<size_t>(start)] = next;
    queue.push_back(start);
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (Eigen::SparseMatrix<double>::InnerIterator it(a, u); it; ++it) {
        int v = static_cast<int>(it.row());
        if (it.value() != 0.0 && comp[static_cast<size_t>(v)] == -1) {
          comp[static_cast<size_t>(v)] = next;
          queue.push_back(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

}  // namespace shrunk
