#include "shrunk/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <thread>

#include "shrunk/errors.hpp"
#include "shrunk/format.hpp"
#include "shrunk/rng.hpp"

namespace shrunk {

namespace {

constexpr std::uint64_t kHalfSplitTag = 0x68616c66;  // distinguishes the 50/50 stream

std::vector<std::vector<int>> indices_by_class(const Eigen::VectorXi& labels) {
  if (labels.size() == 0) throw InvalidLabels("empty label vector");
  if (labels.minCoeff() < 0) throw InvalidLabels("labels must be nonnegative");
  std::vector<std::vector<int>> by_class(static_cast<size_t>(labels.maxCoeff()) + 1);
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    by_class[static_cast<size_t>(labels(i))].push_back(static_cast<int>(i));
  return by_class;
}

Split split_with_counts(const std::vector<std::vector<int>>& by_class,
                        const std::vector<int>& train_counts, std::uint64_t seed,
                        std::uint64_t size_key, int repeat_index) {
  Split out;
  for (size_t c = 0; c < by_class.size(); ++c) {
    std::vector<int> pool = by_class[c];
    CounterRng rng{seed, size_key, static_cast<std::uint64_t>(repeat_index),
                   static_cast<std::uint64_t>(c)};
    // Fisher-Yates over the class pool, keyed per class.
    for (size_t i = pool.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(rng.next_below(i));
      std::swap(pool[i - 1], pool[j]);
    }
    const int take = train_counts[c];
    out.train.insert(out.train.end(), pool.begin(), pool.begin() + take);
    out.test.insert(out.test.end(), pool.begin() + take, pool.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<int>& idx) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = x.col(idx[i]);
  return out;
}

Eigen::VectorXi select_labels(const Eigen::VectorXi& labels, const std::vector<int>& idx) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = labels(idx[i]);
  return out;
}

void run_parallel(int n_tasks, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  const int count = std::min(jobs, n_tasks);
  workers.reserve(static_cast<size_t>(count));
  for (int t = 0; t < count; ++t)
    workers.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n_tasks;) fn(i);
    });
  for (auto& w : workers) w.join();
}

bool uses_sigma(const std::string& method) {
  return method == "lpp" || method == "lsda" || method == "local-lda";
}

bool uses_gamma(const std::string& method) { return method == "lsda"; }

bool uses_graph(const std::string& method) { return uses_sigma(method); }

}  // namespace

std::string to_string(GraphMode mode) {
  return mode == GraphMode::Supervised ? "supervised" : "unsupervised";
}

GraphMode mode_from_string(const std::string& s) {
  if (s == "supervised") return GraphMode::Supervised;
  if (s == "unsupervised") return GraphMode::Unsupervised;
  throw InvalidInput("unknown mode: " + s);
}

Split split_per_class(const Eigen::VectorXi& labels, const SplitSpec& spec) {
  if (spec.per_class_train < 1) throw InvalidInput("per-class train count must be >= 1");
  auto by_class = indices_by_class(labels);
  std::vector<int> counts(by_class.size(), spec.per_class_train);
  for (size_t c = 0; c < by_class.size(); ++c)
    if (static_cast<int>(by_class[c].size()) <= spec.per_class_train)
      throw InsufficientSamples("class " + std::to_string(c) + " has " +
                                std::to_string(by_class[c].size()) +
                                " samples, need more than " +
                                std::to_string(spec.per_class_train));
  return split_with_counts(by_class, counts,
                           spec.seed, static_cast<std::uint64_t>(spec.per_class_train),
                           spec.repeat_index);
}

Split split_half_per_class(const Eigen::VectorXi& labels, std::uint64_t seed,
                           int repeat_index) {
  auto by_class = indices_by_class(labels);
  std::vector<int> counts(by_class.size());
  for (size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].size() < 2)
      throw InsufficientSamples("class " + std::to_string(c) +
                                " needs at least 2 samples for a half split");
    counts[c] = static_cast<int>(by_class[c].size() / 2);
  }
  return split_with_counts(by_class, counts, seed, kHalfSplitTag, repeat_index);
}

Eigen::VectorXi knn1_classify(const Eigen::MatrixXd& train_z,
                              const Eigen::VectorXi& train_labels,
                              const Eigen::MatrixXd& test_z) {
  if (train_z.cols() == 0) throw InvalidInput("knn1_classify: empty training set");
  if (train_labels.size() != train_z.cols())
    throw InvalidInput("knn1_classify: one label per training column required");
  if (train_z.rows() != test_z.rows())
    throw InvalidDimension("knn1_classify: embedded dimensions differ");

  const Eigen::Index m = train_z.cols();
  const Eigen::Index t = test_z.cols();
  Eigen::VectorXd train_sq = train_z.colwise().squaredNorm();
  Eigen::MatrixXd cross = train_z.transpose() * test_z;  // m x t

  Eigen::VectorXi out(t);
  for (Eigen::Index j = 0; j < t; ++j) {
    Eigen::Index best = 0;
    double best_score = train_sq(0) - 2.0 * cross(0, j);
    for (Eigen::Index i = 1; i < m; ++i) {
      double score = train_sq(i) - 2.0 * cross(i, j);
      if (score < best_score) {
        best_score = score;
        best = i;
      }
    }
    out(j) = train_labels(best);
  }
  return out;
}

double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth) {
  if (predicted.size() != truth.size())
    throw InvalidInput("accuracy: prediction and truth lengths differ");
  if (predicted.size() == 0) throw InvalidInput("accuracy: empty inputs");
  int hits = 0;
  for (Eigen::Index i = 0; i < predicted.size(); ++i)
    if (predicted(i) == truth(i)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

Projection fit_method(const DataMatrix& x, const Eigen::VectorXi& labels,
                      const MethodConfig& method, double sigma, const Gamma& gamma,
                      int d) {
  const Eigen::Index r = x.rows();
  const Eigen::Index n = x.cols();
  if (method.method == "baseline") {
    Projection p;
    p.basis = Eigen::MatrixXd::Identity(r, r);
    p.metric = Metric::EuclideanOrthonormal;
    return p;
  }
  if (method.method == "pca")
    return pca_fit(x, std::min<int>(d, static_cast<int>(std::min(r, n))));
  if (method.method == "lda") {
    const int c = labels.maxCoeff() + 1;
    return lda_fit(x, labels, std::min(d, c - 1), method.ridge);
  }
  const bool supervised = method.mode == GraphMode::Supervised;
  if (uses_graph(method.method)) {
    const int k = method.k > 0 ? method.k : default_neighbor_count(method.mode);
    NeighborSets nbrs =
        knn_neighbors(x, k, method.mode, supervised ? &labels : nullptr);
    AffinityGraph graph = gaussian_affinity(x, nbrs, sigma, method.sigma_scale);
    const int d_eff = std::min<int>(d, static_cast<int>(r));
    if (method.method == "lpp") return lpp_fit(x, graph, d_eff, method.ridge);
    if (method.method == "local-lda") return local_lda_fit(x, graph, d_eff, method.ridge);
    if (method.method == "lsda")
      return lsda_fit_with_graph(x, graph, gamma, d_eff, method.ridge).projection;
  }
  throw InvalidInput("unknown method: " + method.method);
}

std::vector<ExperimentReport> run_experiment(const DataMatrix& x,
                                             const Eigen::VectorXi& labels,
                                             const ExperimentConfig& config) {
  if (config.repeats < 1) throw InvalidInput("repeats must be >= 1");
  if (config.methods.empty()) throw InvalidInput("no methods configured");
  if (config.train_sizes.empty()) throw InvalidInput("no train sizes configured");
  if (config.dimensions.empty()) throw InvalidInput("no dimensions configured");

  struct GridPoint {
    std::optional<double> sigma;
    std::optional<Gamma> gamma;
  };
  // Canonical grid enumeration per method: sigma outer, gamma inner.
  std::vector<std::vector<GridPoint>> grids;
  for (const auto& m : config.methods) {
    std::vector<GridPoint> pts;
    if (uses_sigma(m.method)) {
      if (m.sigma_grid.empty())
        throw InvalidInput("method " + m.method + " needs a sigma grid");
      for (double s : m.sigma_grid) {
        if (uses_gamma(m.method)) {
          if (m.gamma_grid.empty()) throw InvalidInput("lsda needs a gamma grid");
          for (const Gamma& g : m.gamma_grid) pts.push_back({s, g});
        } else {
          pts.push_back({s, std::nullopt});
        }
      }
    } else {
      pts.push_back({std::nullopt, std::nullopt});
    }
    grids.push_back(std::move(pts));
  }

  struct Task {
    int method_idx, size_idx, grid_idx, repeat;
  };
  std::vector<Task> tasks;
  for (int mi = 0; mi < static_cast<int>(config.methods.size()); ++mi)
    for (int li = 0; li < static_cast<int>(config.train_sizes.size()); ++li)
      for (int gi = 0; gi < static_cast<int>(grids[static_cast<size_t>(mi)].size()); ++gi)
        for (int rep = 0; rep < config.repeats; ++rep)
          tasks.push_back({mi, li, gi, rep});

  struct TaskResult {
    std::vector<double> acc_per_dim;
    std::string error;
  };
  std::vector<TaskResult> results(tasks.size());

  const int d_max = *std::max_element(config.dimensions.begin(), config.dimensions.end());

  auto run_task = [&](int ti) {
    const Task& task = tasks[static_cast<size_t>(ti)];
    const MethodConfig& method = config.methods[static_cast<size_t>(task.method_idx)];
    const GridPoint& gp = grids[static_cast<size_t>(task.method_idx)][static_cast<size_t>(task.grid_idx)];
    TaskResult& res = results[static_cast<size_t>(ti)];
    try {
      SplitSpec spec{config.train_sizes[static_cast<size_t>(task.size_idx)], config.seed,
                     task.repeat};
      Split split = split_per_class(labels, spec);
      Eigen::MatrixXd train_x = select_columns(x, split.train);
      Eigen::MatrixXd test_x = select_columns(x, split.test);
      Eigen::VectorXi train_y = select_labels(labels, split.train);
      Eigen::VectorXi test_y = select_labels(labels, split.test);

      Projection proj = fit_method(train_x, train_y, method,
                                   gp.sigma.value_or(0.5),
                                   gp.gamma.value_or(Gamma::value(1.0)), d_max);
      Eigen::MatrixXd train_z = transform(proj, train_x);
      Eigen::MatrixXd test_z = transform(proj, test_x);

      if (method.method == "baseline") {
        // No reduction: classify in the original space.
        Eigen::VectorXi pred = knn1_classify(train_z, train_y, test_z);
        res.acc_per_dim.push_back(accuracy(pred, test_y));
      } else {
        res.acc_per_dim.reserve(config.dimensions.size());
        for (int d : config.dimensions) {
          const Eigen::Index d_eff = std::min<Eigen::Index>(d, train_z.rows());
          Eigen::VectorXi pred =
              knn1_classify(train_z.topRows(d_eff), train_y, test_z.topRows(d_eff));
          res.acc_per_dim.push_back(accuracy(pred, test_y));
        }
      }
    } catch (const std::exception& e) {
      res.error = e.what();
    }
  };
  run_parallel(static_cast<int>(tasks.size()), config.jobs, run_task);

  // Index tasks for aggregation.
  auto task_id = [&](int mi, int li, int gi, int rep) {
    size_t id = 0;
    for (int m = 0; m < mi; ++m)
      id += grids[static_cast<size_t>(m)].size() * config.train_sizes.size() *
            static_cast<size_t>(config.repeats);
    id += static_cast<size_t>(li) * grids[static_cast<size_t>(mi)].size() *
          static_cast<size_t>(config.repeats);
    id += static_cast<size_t>(gi) * static_cast<size_t>(config.repeats);
    id += static_cast<size_t>(rep);
    return id;
  };

  std::vector<ExperimentReport> reports;
  for (int mi = 0; mi < static_cast<int>(config.methods.size()); ++mi) {
    const MethodConfig& method = config.methods[static_cast<size_t>(mi)];
    const auto& grid = grids[static_cast<size_t>(mi)];
    const bool is_baseline = method.method == "baseline";
    const int n_dims = is_baseline ? 1 : static_cast<int>(config.dimensions.size());

    for (int li = 0; li < static_cast<int>(config.train_sizes.size()); ++li) {
      for (int di = 0; di < n_dims; ++di) {
        ExperimentReport row;
        row.method = method.method;
        row.mode = method.mode;
        row.train_size = config.train_sizes[static_cast<size_t>(li)];
        row.dimension = is_baseline ? static_cast<int>(x.rows())
                                    : config.dimensions[static_cast<size_t>(di)];
        if (uses_graph(method.method))
          row.k = method.k > 0 ? method.k : default_neighbor_count(method.mode);
        row.repeats = config.repeats;

        bool any_failure = false;
        std::string first_error;
        bool have_best = false;
        double best_mean = 0.0, best_std = 0.0;
        std::optional<double> best_sigma;
        std::optional<Gamma> best_gamma;

        for (int gi = 0; gi < static_cast<int>(grid.size()); ++gi) {
          std::vector<double> accs;
          for (int rep = 0; rep < config.repeats; ++rep) {
            const TaskResult& res = results[task_id(mi, li, gi, rep)];
            if (!res.error.empty()) {
              any_failure = true;
              if (first_error.empty()) first_error = res.error;
            } else {
              accs.push_back(res.acc_per_dim[static_cast<size_t>(di)]);
            }
          }
          if (accs.size() != static_cast<size_t>(config.repeats)) continue;
          double mean = 0.0;
          for (double a : accs) mean += a;
          mean /= static_cast<double>(accs.size());
          double sd = 0.0;
          if (accs.size() > 1) {
            for (double a : accs) sd += (a - mean) * (a - mean);
            sd = std::sqrt(sd / static_cast<double>(accs.size() - 1));
          }
          if (!have_best || mean > best_mean) {
            have_best = true;
            best_mean = mean;
            best_std = sd;
            best_sigma = grid[static_cast<size_t>(gi)].sigma;
            best_gamma = grid[static_cast<size_t>(gi)].gamma;
          }
        }

        if (have_best) {
          row.mean_accuracy = best_mean;
          row.std_dev = best_std;
          row.sigma = best_sigma;
          row.gamma = best_gamma;
          row.status = any_failure ? "partial: " + first_error : "ok";
        } else {
          row.mean_accuracy = std::nan("");
          row.std_dev = std::nan("");
          row.status = "failed: " + first_error;
        }
        reports.push_back(std::move(row));
      }
    }
  }
  return reports;
}

std::string report_csv_header() {
  return "method,mode,L,dimension,sigma,gamma,k,repeats,mean_accuracy,std_dev";
}

std::string report_csv_row(const ExperimentReport& r) {
  std::string row = r.method;
  row += ',' + to_string(r.mode);
  row += ',' + std::to_string(r.train_size);
  row += ',' + std::to_string(r.dimension);
  row += ',';
  if (r.sigma) row += format_compact(*r.sigma);
  row += ',';
  if (r.gamma) row += format_gamma(*r.gamma);
  row += ',';
  if (r.k) row += std::to_string(*r.k);
  row += ',' + std::to_string(r.repeats);
  row += ',' + format_compact(r.mean_accuracy);
  row += ',' + format_compact(r.std_dev);
  return row;
}

void write_report_csv(const std::vector<ExperimentReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  out << report_csv_header() << '\n';
  for (const auto& r : reports) out << report_csv_row(r) << '\n';
}

}  // namespace shrunk
