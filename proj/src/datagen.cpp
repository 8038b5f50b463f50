#include "shrunk/datagen.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "shrunk/errors.hpp"
#include "shrunk/format.hpp"
#include "shrunk/matrices.hpp"
#include "shrunk/rng.hpp"

namespace shrunk {

namespace {
// Domain separation so different generators never share a key stream.
constexpr std::uint64_t kToyTag = 0x746f79;      // "toy"
constexpr std::uint64_t kMixtureTag = 0x6d6978;  // "mix"
}  // namespace

LabeledDataset toy_ellipses(int n_per, std::uint64_t seed) {
  if (n_per < 2) throw InvalidInput("toy_ellipses: need at least 2 samples per cluster");

  const double centers_x[3] = {-2.0, 0.0, 2.0};
  const double var_x[3] = {0.1, 0.05, 0.07};
  const int cluster_label[3] = {1, 0, 1};  // center cluster is class 0

  LabeledDataset out;
  out.name = "toy-ellipses";
  out.x.resize(2, 3 * n_per);
  out.labels.resize(3 * n_per);
  for (int c = 0; c < 3; ++c) {
    CounterRng rng{kToyTag, seed, static_cast<std::uint64_t>(c)};
    const double sx = std::sqrt(var_x[c]);
    for (int i = 0; i < n_per; ++i) {
      const Eigen::Index col = c * n_per + i;
      out.x(0, col) = centers_x[c] + sx * rng.next_normal();
      out.x(1, col) = rng.next_normal();
      out.labels(col) = cluster_label[c];
    }
  }
  return out;
}

LabeledDataset gaussian_mixture(const std::vector<MixtureComponent>& components,
                                std::uint64_t seed) {
  if (components.empty()) throw InvalidInput("gaussian_mixture: no components");
  const Eigen::Index r = components.front().center.size();
  Eigen::Index n = 0;
  for (const auto& comp : components) {
    if (comp.center.size() != r)
      throw InvalidInput("gaussian_mixture: component dimensions differ");
    if (comp.covariance.rows() != r || comp.covariance.cols() != r)
      throw InvalidCovariance("covariance shape does not match the center");
    if (comp.count < 1) throw InvalidInput("gaussian_mixture: component count must be >= 1");
    if (comp.label < 0) throw InvalidLabels("component labels must be nonnegative");
    n += comp.count;
  }

  LabeledDataset out;
  out.name = "gaussian-mixture";
  out.x.resize(r, n);
  out.labels.resize(n);

  Eigen::Index col = 0;
  for (size_t ci = 0; ci < components.size(); ++ci) {
    const auto& comp = components[ci];
    // PSD factor via eigendecomposition; tolerates exactly singular covariances.
    EigPaird eig = sym_eig(SymMatrixd(comp.covariance));
    const double scale = std::max(1.0, std::abs(eig.values(eig.values.size() - 1)));
    if (eig.values(0) < -1e-12 * scale)
      throw InvalidCovariance("covariance has a negative eigenvalue");
    Eigen::MatrixXd factor =
        eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();

    CounterRng rng{kMixtureTag, seed, static_cast<std::uint64_t>(ci)};
    Eigen::VectorXd z(r);
    for (int i = 0; i < comp.count; ++i, ++col) {
      for (Eigen::Index q = 0; q < r; ++q) z(q) = rng.next_normal();
      out.x.col(col) = comp.center + factor * z;
      out.labels(col) = comp.label;
    }
  }
  return out;
}

LabeledDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open: " + path);

  std::vector<long> raw_labels;
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  Eigen::Index width = -1;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");

    if (cells.size() < 2) throw ParseError("need a label and at least one feature", line_no);
    if (width == -1) width = static_cast<Eigen::Index>(cells.size());
    if (static_cast<Eigen::Index>(cells.size()) != width)
      throw ParseError("row has " + std::to_string(cells.size()) + " columns, expected " +
                           std::to_string(width),
                       line_no);

    size_t used = 0;
    long label = 0;
    try {
      label = std::stol(cells[0], &used);
    } catch (const std::exception&) {
      throw ParseError("non-integer label", line_no);
    }
    if (used != cells[0].size()) throw ParseError("non-integer label", line_no);
    raw_labels.push_back(label);

    std::vector<double> features;
    features.reserve(cells.size() - 1);
    for (size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        throw ParseError("non-numeric feature in column " + std::to_string(c), line_no);
      }
      if (used != cells[c].size())
        throw ParseError("non-numeric feature in column " + std::to_string(c), line_no);
      features.push_back(v);
    }
    rows.push_back(std::move(features));
  }

  if (rows.empty()) throw EmptyDataset("no samples in " + path);

  // Re-index labels to 0..C-1 in first-appearance order.
  std::map<long, int> remap;
  std::vector<int> mapped;
  mapped.reserve(raw_labels.size());
  for (long l : raw_labels) {
    auto it = remap.find(l);
    if (it == remap.end()) it = remap.emplace(l, static_cast<int>(remap.size())).first;
    mapped.push_back(it->second);
  }

  LabeledDataset out;
  out.name = path;
  out.x.resize(width - 1, static_cast<Eigen::Index>(rows.size()));
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    out.labels(static_cast<Eigen::Index>(i)) = mapped[i];
    for (Eigen::Index j = 0; j < width - 1; ++j)
      out.x(j, static_cast<Eigen::Index>(i)) = rows[i][static_cast<size_t>(j)];
  }
  return out;
}

void save_csv(const LabeledDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  for (Eigen::Index i = 0; i < data.x.cols(); ++i) {
    out << data.labels(i);
    for (Eigen::Index j = 0; j < data.x.rows(); ++j)
      out << ',' << format_decimal(data.x(j, i));
    out << '\n';
  }
}

DataMatrix scale_pixels(const DataMatrix& x, double denominator) {
  if (!(denominator > 0.0)) throw InvalidInput("scale_pixels: denominator must be > 0");
  if ((x.array() < 0.0).any())
    throw InvalidInput("scale_pixels: negative pixel value");
  return x / denominator;
}

}  // namespace shrunk
