#include "shrunk/reducers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shrunk/errors.hpp"
#include "shrunk/format.hpp"

namespace shrunk {

namespace {

void validate_data(const DataMatrix& x) {
  if (x.cols() < 2) throw InvalidInput("need at least two samples");
  if (!x.allFinite()) throw InvalidInput("data matrix has non-finite entries");
}

// Labels must be 0..C-1 with every class populated.
int num_classes(const Eigen::VectorXi& labels) {
  if (labels.size() == 0) throw InvalidLabels("empty label vector");
  if (labels.minCoeff() < 0) throw InvalidLabels("labels must be nonnegative");
  const int c = labels.maxCoeff() + 1;
  std::vector<int> counts(static_cast<size_t>(c), 0);
  for (Eigen::Index i = 0; i < labels.size(); ++i) ++counts[static_cast<size_t>(labels(i))];
  for (int k = 0; k < c; ++k)
    if (counts[static_cast<size_t>(k)] == 0)
      throw InvalidLabels("class " + std::to_string(k) + " has no samples");
  return c;
}

SymMatrixd outer_scatter(const Eigen::MatrixXd& centered) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(centered.rows(), centered.rows());
  s.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  s.triangularView<Eigen::StrictlyUpper>() =
      s.triangularView<Eigen::StrictlyLower>().transpose();
  return SymMatrixd(s);
}

}  // namespace

Gamma Gamma::value(double g) {
  if (!std::isfinite(g) || g <= 0.0)
    throw InvalidInput(
        "gamma must be a positive finite number; use the symbolic zero/inf limits instead");
  return Gamma(Kind::Value, g);
}

double Gamma::get() const {
  if (kind_ != Kind::Value) throw InvalidInput("symbolic gamma has no numeric value");
  return value_;
}

Gamma parse_gamma(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s == "zero") return Gamma::zero();
  if (s == "inf" || s == "infinity") return Gamma::infinity();
  if (s.rfind("2^", 0) == 0) {
    size_t used = 0;
    int exponent = 0;
    try {
      exponent = std::stoi(s.substr(2), &used);
    } catch (const std::exception&) {
      throw InvalidInput("bad gamma exponent: " + text);
    }
    if (used != s.size() - 2) throw InvalidInput("bad gamma exponent: " + text);
    return Gamma::value(std::ldexp(1.0, exponent));
  }
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidInput("bad gamma value: " + text);
  }
  if (used != s.size()) throw InvalidInput("bad gamma value: " + text);
  return Gamma::value(v);
}

std::string format_gamma(const Gamma& g) {
  switch (g.kind()) {
    case Gamma::Kind::Zero:
      return "zero";
    case Gamma::Kind::Infinity:
      return "inf";
    default:
      return format_compact(g.get());
  }
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::StOrthonormal:
      return "st-orthonormal";
    case Metric::DWeighted:
      return "d-weighted";
    case Metric::EuclideanOrthonormal:
      return "euclidean-orthonormal";
    case Metric::SwOrthonormal:
      return "sw-orthonormal";
  }
  throw InvalidInput("unknown metric");
}

Metric metric_from_string(const std::string& s) {
  if (s == "st-orthonormal") return Metric::StOrthonormal;
  if (s == "d-weighted") return Metric::DWeighted;
  if (s == "euclidean-orthonormal") return Metric::EuclideanOrthonormal;
  if (s == "sw-orthonormal") return Metric::SwOrthonormal;
  throw InvalidInput("unknown metric id: " + s);
}

ScatterSet scatter_matrices(const DataMatrix& x, const Eigen::VectorXi& labels) {
  validate_data(x);
  const Eigen::Index n = x.cols();
  if (labels.size() != n) throw InvalidLabels("one label per sample required");
  const int c = num_classes(labels);

  ScatterSet out;
  out.mean = x.rowwise().mean();
  out.class_means = Eigen::MatrixXd::Zero(x.rows(), c);
  out.class_sizes.assign(static_cast<size_t>(c), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.class_means.col(labels(i)) += x.col(i);
    ++out.class_sizes[static_cast<size_t>(labels(i))];
  }
  for (int k = 0; k < c; ++k) out.class_means.col(k) /= out.class_sizes[static_cast<size_t>(k)];

  Eigen::MatrixXd within_centered = x;
  for (Eigen::Index i = 0; i < n; ++i) within_centered.col(i) -= out.class_means.col(labels(i));
  out.within = outer_scatter(within_centered);

  Eigen::MatrixXd mean_dev(x.rows(), c);
  for (int k = 0; k < c; ++k)
    mean_dev.col(k) = std::sqrt(static_cast<double>(out.class_sizes[static_cast<size_t>(k)])) *
                      (out.class_means.col(k) - out.mean);
  out.between = outer_scatter(mean_dev);

  out.total = outer_scatter(x.colwise() - out.mean);
  return out;
}

SymMatrixd total_scatter(const DataMatrix& x) {
  validate_data(x);
  Eigen::VectorXd mean = x.rowwise().mean();
  return outer_scatter(x.colwise() - mean);
}

Projection pca_fit(const DataMatrix& x, int d) {
  validate_data(x);
  const Eigen::Index r = x.rows();
  const Eigen::Index n = x.cols();
  if (d < 1 || d > std::min(r, n))
    throw InvalidDimension("pca_fit: d must lie in [1, min(r, n)]");

  Eigen::VectorXd mean = x.rowwise().mean();
  Eigen::MatrixXd centered = x.colwise() - mean;
  SymMatrixd cov(Eigen::MatrixXd(outer_scatter(centered).dense() / double(n - 1)));
  EigPaird pair = sym_eig(cov);

  Projection p;
  p.metric = Metric::EuclideanOrthonormal;
  p.basis.resize(r, d);
  p.eigenvalues.resize(d);
  for (int j = 0; j < d; ++j) {
    p.basis.col(j) = pair.vectors.col(r - 1 - j);
    p.eigenvalues(j) = pair.values(r - 1 - j);
  }
  return p;
}

Projection lda_fit(const DataMatrix& x, const Eigen::VectorXi& labels, int d, double ridge) {
  validate_data(x);
  if (labels.size() != x.cols()) throw InvalidLabels("one label per sample required");
  const int c = num_classes(labels);
  if (c < 2) throw InvalidLabels("lda_fit: need at least two classes");
  if (d < 1 || d > c - 1)
    throw InvalidDimension("lda_fit: d must lie in [1, C-1]; the between-class scatter has at most C-1 nonzero generalized eigenvalues");

  ScatterSet sc = scatter_matrices(x, labels);
  const double r_eff = adaptive_ridge(sc.within, ridge);
  // The d largest pairs of (S_B, S_W') are the d smallest of (-S_B, S_W').
  SymMatrixd negated(Eigen::MatrixXd(-sc.between.dense()));
  EigPaird pair = gen_eig_smallest(negated, sc.within, d, r_eff);

  Projection p;
  p.metric = Metric::SwOrthonormal;
  p.basis = pair.vectors;
  p.eigenvalues = -pair.values;
  p.ridge_applied = r_eff;
  return p;
}

Projection lpp_fit(const DataMatrix& x, const AffinityGraph& graph, int d, double ridge) {
  validate_data(x);
  if (graph.degrees.size() != x.cols()) throw InvalidInput("lpp_fit: graph size mismatch");
  if (d < 1 || d > x.rows()) throw InvalidDimension("lpp_fit: d must lie in [1, r]");

  SymMatrixd smoothness(Eigen::MatrixXd(x * graph.laplacian.dense() * x.transpose()));
  SymMatrixd weighted(Eigen::MatrixXd(x * graph.degrees.asDiagonal() * x.transpose()));
  const double r_eff = adaptive_ridge(weighted, ridge);
  EigPaird pair = gen_eig_smallest(smoothness, weighted, d, r_eff);

  Projection p;
  p.metric = Metric::DWeighted;
  p.basis = pair.vectors;
  p.eigenvalues = pair.values;
  p.ridge_applied = r_eff;
  return p;
}

SymMatrixd lsda_build_H(const DataMatrix& x, const SymMatrixd& l, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw InvalidInput("lsda_build_H: gamma must be positive and finite");
  if (l.dim() != x.cols()) throw InvalidInput("lsda_build_H: Laplacian size mismatch");
  // gamma I - gamma^2 (L + gamma I)^{-1}, applied through a Cholesky solve.
  Eigen::MatrixXd solved = spd_solve(l.shifted(gamma), Eigen::MatrixXd(x.transpose()));
  Eigen::MatrixXd h = gamma * (x * x.transpose()) - (gamma * gamma) * (x * solved);
  return SymMatrixd(h);
}

ShrunkEmbedding lsda_recover_F(const DataMatrix& x, const Projection& w,
                               const SymMatrixd& l, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw InvalidInput("lsda_recover_F: gamma must be positive and finite");
  Eigen::MatrixXd rhs = x.transpose() * w.basis;  // n x d
  Eigen::MatrixXd g = gamma * spd_solve(l.shifted(gamma), rhs);
  return g.transpose();
}

Projection local_lda_fit(const DataMatrix& x, const AffinityGraph& graph, int d, double ridge) {
  validate_data(x);
  if (graph.degrees.size() != x.cols()) throw InvalidInput("local_lda_fit: graph size mismatch");
  if (d < 1 || d > x.rows()) throw InvalidDimension("local_lda_fit: d must lie in [1, r]");

  SymMatrixd smoothness(Eigen::MatrixXd(x * graph.laplacian.dense() * x.transpose()));
  SymMatrixd st = total_scatter(x);
  const double r_eff = adaptive_ridge(st, ridge);
  EigPaird pair = gen_eig_smallest(smoothness, st, d, r_eff);

  Projection p;
  p.metric = Metric::StOrthonormal;
  p.basis = pair.vectors;
  p.eigenvalues = pair.values;
  p.ridge_applied = r_eff;
  return p;
}

LsdaResult lsda_fit_with_graph(const DataMatrix& x, const AffinityGraph& graph,
                               const Gamma& gamma, int d, double ridge) {
  validate_data(x);
  if (graph.degrees.size() != x.cols())
    throw InvalidInput("lsda_fit_with_graph: graph size mismatch");
  if (d < 1 || d > x.rows())
    throw InvalidDimension("lsda_fit_with_graph: d must lie in [1, r]");

  LsdaResult out;
  switch (gamma.kind()) {
    case Gamma::Kind::Value: {
      const double g = gamma.get();
      SymMatrixd h = lsda_build_H(x, graph.laplacian, g);
      SymMatrixd st = total_scatter(x);
      const double r_eff = adaptive_ridge(st, ridge);
      EigPaird pair = gen_eig_smallest(h, st, d, r_eff);
      out.projection.metric = Metric::StOrthonormal;
      out.projection.basis = pair.vectors;
      out.projection.eigenvalues = pair.values;
      out.projection.ridge_applied = r_eff;
      out.embedding = lsda_recover_F(x, out.projection, graph.laplacian, g);
      break;
    }
    case Gamma::Kind::Infinity: {
      // Exact limit: the fidelity term forces F = X^T W.
      out.projection = local_lda_fit(x, graph, d, ridge);
      out.embedding = transform(out.projection, x);
      break;
    }
    case Gamma::Kind::Zero: {
      // Exact limit: F is constant on each graph component, so the smoothness
      // term reduces to the within-component scatter.
      std::vector<int> comp = connected_components(graph.weights);
      const int n_comp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
      Eigen::MatrixXd comp_means = Eigen::MatrixXd::Zero(x.rows(), n_comp);
      Eigen::VectorXd comp_sizes = Eigen::VectorXd::Zero(n_comp);
      for (Eigen::Index i = 0; i < x.cols(); ++i) {
        comp_means.col(comp[static_cast<size_t>(i)]) += x.col(i);
        comp_sizes(comp[static_cast<size_t>(i)]) += 1.0;
      }
      for (int k = 0; k < n_comp; ++k) comp_means.col(k) /= comp_sizes(k);

      Eigen::MatrixXd centered = x;
      for (Eigen::Index i = 0; i < x.cols(); ++i)
        centered.col(i) -= comp_means.col(comp[static_cast<size_t>(i)]);
      Eigen::MatrixXd s_cc = Eigen::MatrixXd::Zero(x.rows(), x.rows());
      s_cc.selfadjointView<Eigen::Lower>().rankUpdate(centered);
      s_cc.triangularView<Eigen::StrictlyUpper>() =
          s_cc.triangularView<Eigen::StrictlyLower>().transpose();

      SymMatrixd st = total_scatter(x);
      const double r_eff = adaptive_ridge(st, ridge);
      EigPaird pair = gen_eig_smallest(SymMatrixd(s_cc), st, d, r_eff);
      out.projection.metric = Metric::StOrthonormal;
      out.projection.basis = pair.vectors;
      out.projection.eigenvalues = pair.values;
      out.projection.ridge_applied = r_eff;

      out.embedding.resize(d, x.cols());
      Eigen::MatrixXd embedded_means = out.projection.basis.transpose() * comp_means;
      for (Eigen::Index i = 0; i < x.cols(); ++i)
        out.embedding.col(i) = embedded_means.col(comp[static_cast<size_t>(i)]);
      break;
    }
  }
  return out;
}

LsdaResult lsda_fit(const DataMatrix& x, const LsdaParams& params,
                    const Eigen::VectorXi* labels) {
  if (params.mode == GraphMode::Supervised && labels == nullptr)
    throw InvalidLabels("supervised LSDA requires labels");
  if (params.mode == GraphMode::Unsupervised && labels != nullptr)
    throw InvalidLabels("unsupervised LSDA takes no labels");
  const int k = params.k > 0 ? params.k : default_neighbor_count(params.mode);
  NeighborSets nbrs = knn_neighbors(x, k, params.mode, labels);
  AffinityGraph graph = gaussian_affinity(x, nbrs, params.sigma, params.sigma_scale);
  return lsda_fit_with_graph(x, graph, params.gamma, params.dim, params.ridge);
}

Eigen::MatrixXd transform(const Projection& w, const DataMatrix& x) {
  if (w.basis.rows() != x.rows())
    throw InvalidDimension("transform: projection expects " +
                           std::to_string(w.basis.rows()) + "-dimensional samples");
  return w.basis.transpose() * x;
}

double lsda_objective(const DataMatrix& x, const ShrunkEmbedding& f,
                      const Eigen::MatrixXd& w, const Eigen::SparseMatrix<double>& a,
                      double gamma) {
  if (f.cols() != x.cols() || a.rows() != x.cols() || a.cols() != x.cols())
    throw InvalidInput("lsda_objective: sample count mismatch");
  if (w.rows() != x.rows() || w.cols() != f.rows())
    throw InvalidInput("lsda_objective: projection shape mismatch");

  double smoothness = 0.0;
  for (int col = 0; col < a.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
      smoothness += it.value() * (f.col(it.row()) - f.col(it.col())).squaredNorm();
  const double fidelity = gamma * (w.transpose() * x - f).squaredNorm();
  return smoothness + fidelity;
}

void save_projection(const Projection& p, const std::string& method,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  out << "# metric=" << to_string(p.metric) << " dim=" << p.dim()
      << " method=" << method << "\n";
  for (Eigen::Index i = 0; i < p.basis.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.basis.cols(); ++j) {
      if (j) out << ',';
      out << format_decimal(p.basis(i, j));
    }
    out << '\n';
  }
}

LoadedProjection load_projection(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open: " + path);
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0)
    throw ParseError("projection file must start with a '# metric=...' line", 1);

  LoadedProjection out;
  std::string metric_id;
  int dim = -1;
  std::istringstream hs(header.substr(2));
  std::string token;
  while (hs >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    std::string key = token.substr(0, eq);
    std::string value = token.substr(eq + 1);
    if (key == "metric")
      metric_id = value;
    else if (key == "dim")
      dim = std::stoi(value);
    else if (key == "method")
      out.method = value;
  }
  if (metric_id.empty() || dim < 1)
    throw ParseError("projection header missing metric or dim", 1);

  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw ParseError("non-numeric projection entry", line_no);
      }
      if (used != cell.size()) throw ParseError("non-numeric projection entry", line_no);
      row.push_back(v);
    }
    if (static_cast<int>(row.size()) != dim)
      throw ParseError("projection row has wrong column count", line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyDataset("projection file has no rows: " + path);

  out.projection.metric = metric_from_string(metric_id);
  out.projection.basis.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < dim; ++j)
      out.projection.basis(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<size_t>(j)];
  return out;
}

}  // namespace shrunk
