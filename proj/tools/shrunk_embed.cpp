// Command-line driver: single fits and transforms, benchmark sweeps over the
// sigma/gamma grids, limit-mode comparisons, and the two-ellipse toy study.
#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "shrunk/datagen.hpp"
#include "shrunk/evalkit.hpp"
#include "shrunk/format.hpp"
#include "shrunk/reducers.hpp"

using namespace shrunk;
using nlohmann::json;

namespace {

std::vector<double> default_sigma_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  return grid;
}

std::vector<Gamma> default_gamma_grid() {
  std::vector<Gamma> grid;
  for (int k = -10; k <= 10; ++k) grid.push_back(Gamma::value(std::ldexp(1.0, k)));
  return grid;
}

std::uint64_t seed_fallback() {
  if (const char* env = std::getenv("SHRUNK_EMBED_SEED"))
    return std::strtoull(env, nullptr, 10);
  return 0;
}

int default_jobs() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

SigmaScale scale_from_string(const std::string& s) {
  if (s == "median-dist") return SigmaScale::MedianDist;
  if (s == "absolute") return SigmaScale::Absolute;
  throw InvalidInput("unknown sigma scale: " + s);
}

std::vector<Gamma> parse_gamma_list(const std::vector<std::string>& texts) {
  std::vector<Gamma> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(parse_gamma(t));
  return out;
}

AffinityGraph build_graph(const DataMatrix& x, const Eigen::VectorXi& labels,
                          GraphMode mode, int k, double sigma, SigmaScale scale,
                          const std::string& affinity) {
  if (affinity == "block") return block_affinity(labels);
  const bool supervised = mode == GraphMode::Supervised;
  const int k_eff = k > 0 ? k : default_neighbor_count(mode);
  NeighborSets nbrs = knn_neighbors(x, k_eff, mode, supervised ? &labels : nullptr);
  return gaussian_affinity(x, nbrs, sigma, scale);
}

// Residual of the constraint gram matrix against the identity, under the
// metric the projection declares.
double constraint_residual(const Projection& p, const DataMatrix& x,
                           const Eigen::VectorXi& labels, const MethodConfig& cfg,
                           double sigma) {
  const Eigen::Index d = p.basis.cols();
  Eigen::MatrixXd gram;
  switch (p.metric) {
    case Metric::EuclideanOrthonormal:
      gram = p.basis.transpose() * p.basis;
      break;
    case Metric::StOrthonormal: {
      SymMatrixd st = total_scatter(x);
      gram = p.basis.transpose() *
             st.shifted(p.ridge_applied * st.trace() / static_cast<double>(st.dim())).dense() *
             p.basis;
      break;
    }
    case Metric::SwOrthonormal: {
      ScatterSet sc = scatter_matrices(x, labels);
      gram = p.basis.transpose() *
             sc.within.shifted(p.ridge_applied * sc.within.trace() /
                               static_cast<double>(sc.within.dim())).dense() *
             p.basis;
      break;
    }
    case Metric::DWeighted: {
      AffinityGraph g = build_graph(x, labels, cfg.mode, cfg.k, sigma,
                                    cfg.sigma_scale, "gaussian");
      SymMatrixd weighted(
          Eigen::MatrixXd(x * g.degrees.asDiagonal() * x.transpose()));
      gram = p.basis.transpose() *
             weighted.shifted(p.ridge_applied * weighted.trace() /
                              static_cast<double>(weighted.dim())).dense() *
             p.basis;
      break;
    }
  }
  return (gram - Eigen::MatrixXd::Identity(d, d)).norm();
}

struct FitOptions {
  std::string dataset;
  std::string method = "pca";
  std::string mode = "supervised";
  int dim = 2;
  double sigma = 0.5;
  std::string gamma = "1";
  int k = 0;
  double ridge = kDefaultRidge;
  std::string sigma_scale = "median-dist";
  std::string out = "projection.csv";
};

Projection fit_exact(const LabeledDataset& data, const FitOptions& opt) {
  const GraphMode mode = mode_from_string(opt.mode);
  if (opt.method == "baseline") {
    Projection p;
    p.basis = Eigen::MatrixXd::Identity(data.r(), data.r());
    p.metric = Metric::EuclideanOrthonormal;
    return p;
  }
  if (opt.method == "pca") return pca_fit(data.x, opt.dim);
  if (opt.method == "lda") return lda_fit(data.x, data.labels, opt.dim, opt.ridge);

  const SigmaScale scale = scale_from_string(opt.sigma_scale);
  if (opt.method == "lpp" || opt.method == "local-lda") {
    AffinityGraph graph =
        build_graph(data.x, data.labels, mode, opt.k, opt.sigma, scale, "gaussian");
    return opt.method == "lpp" ? lpp_fit(data.x, graph, opt.dim, opt.ridge)
                               : local_lda_fit(data.x, graph, opt.dim, opt.ridge);
  }
  if (opt.method == "lsda") {
    LsdaParams params;
    params.gamma = parse_gamma(opt.gamma);
    params.sigma = opt.sigma;
    params.k = opt.k;
    params.mode = mode;
    params.dim = opt.dim;
    params.ridge = opt.ridge;
    params.sigma_scale = scale;
    const bool supervised = mode == GraphMode::Supervised;
    return lsda_fit(data.x, params, supervised ? &data.labels : nullptr).projection;
  }
  throw InvalidInput("unknown method: " + opt.method);
}

int cmd_fit(const FitOptions& opt) {
  LabeledDataset data = load_csv(opt.dataset);
  Projection p = fit_exact(data, opt);

  MethodConfig cfg;
  cfg.method = opt.method;
  cfg.mode = mode_from_string(opt.mode);
  cfg.k = opt.k;
  cfg.ridge = opt.ridge;
  cfg.sigma_scale = scale_from_string(opt.sigma_scale);
  const double residual = constraint_residual(p, data.x, data.labels, cfg, opt.sigma);

  save_projection(p, opt.method, opt.out);
  std::cout << "method=" << opt.method << " dim=" << p.dim()
            << " metric=" << to_string(p.metric)
            << " constraint_residual=" << format_compact(residual) << "\n";
  std::cout << "eigenvalues:";
  for (Eigen::Index i = 0; i < p.eigenvalues.size(); ++i)
    std::cout << ' ' << format_compact(p.eigenvalues(i));
  std::cout << "\n";
  std::cout << "wrote " << opt.out << "\n";
  return 0;
}

int cmd_transform(const std::string& projection_path, const std::string& dataset_path,
                  const std::string& out_path) {
  LoadedProjection loaded = load_projection(projection_path);
  LabeledDataset data = load_csv(dataset_path);
  Eigen::MatrixXd z = transform(loaded.projection, data.x);
  LabeledDataset embedded;
  embedded.x = z;
  embedded.labels = data.labels;
  save_csv(embedded, out_path);
  std::cout << "wrote " << out_path << " (" << z.rows() << " x " << z.cols() << ")\n";
  return 0;
}

struct SweepOptions {
  std::string config_path;
  std::string dataset;
  std::vector<std::string> methods;
  std::string mode = "supervised";
  std::vector<int> train_sizes;
  std::vector<int> dims;
  std::vector<double> sigmas;
  std::vector<std::string> gammas;
  int k = 0;
  int repeats = 1;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string out = "report.csv";
};

void merge_json_config(SweepOptions& opt, const CLI::App* app) {
  std::ifstream in(opt.config_path);
  if (!in) throw InvalidInput("cannot open config: " + opt.config_path);
  json cfg = json::parse(in);

  auto unset = [&](const std::string& flag) { return app->count(flag) == 0; };
  if (cfg.contains("dataset") && unset("--dataset")) opt.dataset = cfg["dataset"];
  if (cfg.contains("methods") && unset("--methods"))
    opt.methods = cfg["methods"].get<std::vector<std::string>>();
  if (cfg.contains("mode") && unset("--mode")) opt.mode = cfg["mode"];
  if (cfg.contains("L") && unset("--train-sizes"))
    opt.train_sizes = cfg["L"].get<std::vector<int>>();
  if (cfg.contains("dims") && unset("--dims"))
    opt.dims = cfg["dims"].get<std::vector<int>>();
  if (cfg.contains("sigma_grid") && unset("--sigmas"))
    opt.sigmas = cfg["sigma_grid"].get<std::vector<double>>();
  if (cfg.contains("gamma_grid") && unset("--gammas"))
    opt.gammas = cfg["gamma_grid"].get<std::vector<std::string>>();
  if (cfg.contains("k") && unset("--k")) opt.k = cfg["k"];
  if (cfg.contains("repeats") && unset("--repeats")) opt.repeats = cfg["repeats"];
  if (cfg.contains("seed") && unset("--seed")) opt.seed = cfg["seed"];
  if (cfg.contains("jobs") && unset("--jobs")) opt.jobs = cfg["jobs"];
  if (cfg.contains("out") && unset("--out")) opt.out = cfg["out"];
}

int cmd_sweep(const SweepOptions& opt) {
  if (opt.dataset.empty()) throw InvalidInput("sweep needs a dataset");
  if (opt.methods.empty()) throw InvalidInput("sweep needs at least one method");
  if (opt.train_sizes.empty()) throw InvalidInput("sweep needs train sizes (L values)");
  if (opt.dims.empty()) throw InvalidInput("sweep needs dimensions");

  LabeledDataset data = load_csv(opt.dataset);
  const GraphMode mode = mode_from_string(opt.mode);

  ExperimentConfig config;
  config.train_sizes = opt.train_sizes;
  config.dimensions = opt.dims;
  config.repeats = opt.repeats;
  config.seed = opt.seed;
  config.jobs = opt.jobs > 0 ? opt.jobs : default_jobs();
  for (const auto& name : opt.methods) {
    MethodConfig m;
    m.method = name;
    m.mode = mode;
    m.k = opt.k;
    m.sigma_grid = opt.sigmas.empty() ? default_sigma_grid() : opt.sigmas;
    m.gamma_grid = opt.gammas.empty() ? default_gamma_grid() : parse_gamma_list(opt.gammas);
    config.methods.push_back(std::move(m));
  }

  std::vector<ExperimentReport> reports = run_experiment(data.x, data.labels, config);

  std::ofstream out(opt.out);
  if (!out) throw InvalidInput("cannot open for writing: " + opt.out);
  out << report_csv_header() << ",status\n";
  bool any_failed = false;
  for (const auto& r : reports) {
    out << report_csv_row(r) << ',' << r.status << '\n';
    if (r.status != "ok") any_failed = true;
  }
  std::cout << "wrote " << opt.out << " (" << reports.size() << " rows)\n";
  return any_failed ? 1 : 0;
}

struct LimitsOptions {
  std::string dataset;
  std::vector<int> dims;
  std::string mode = "supervised";
  std::string affinity = "gaussian";
  double sigma = 0.5;
  std::string sigma_scale = "median-dist";
  std::vector<std::string> gammas;
  int k = 0;
  int train_size = 0;  // 0 -> half split
  int repeats = 5;
  std::uint64_t seed = 0;
  double ridge = kDefaultRidge;
  std::string out = "limits.csv";
};

int cmd_limits(const LimitsOptions& opt) {
  if (opt.dataset.empty()) throw InvalidInput("limits needs a dataset");
  if (opt.dims.empty()) throw InvalidInput("limits needs dimensions");

  LabeledDataset data = load_csv(opt.dataset);
  const GraphMode mode = mode_from_string(opt.mode);
  const SigmaScale scale = scale_from_string(opt.sigma_scale);
  const int classes = data.labels.maxCoeff() + 1;
  std::vector<Gamma> grid =
      opt.gammas.empty() ? default_gamma_grid() : parse_gamma_list(opt.gammas);

  // Full-data fits give the subspace angles.
  AffinityGraph full_graph =
      build_graph(data.x, data.labels, mode, opt.k, opt.sigma, scale, opt.affinity);

  // Accuracy of one gamma at one dimension, averaged over split repeats.
  auto mean_accuracy = [&](const Gamma& gamma, int d, double* std_out) {
    std::vector<double> accs;
    for (int rep = 0; rep < opt.repeats; ++rep) {
      Split split = opt.train_size > 0
                        ? split_per_class(data.labels, SplitSpec{opt.train_size,
                                                                 opt.seed, rep})
                        : split_half_per_class(data.labels, opt.seed, rep);
      Eigen::MatrixXd train_x(data.r(), static_cast<Eigen::Index>(split.train.size()));
      Eigen::MatrixXd test_x(data.r(), static_cast<Eigen::Index>(split.test.size()));
      Eigen::VectorXi train_y(static_cast<Eigen::Index>(split.train.size()));
      Eigen::VectorXi test_y(static_cast<Eigen::Index>(split.test.size()));
      for (size_t i = 0; i < split.train.size(); ++i) {
        train_x.col(static_cast<Eigen::Index>(i)) = data.x.col(split.train[i]);
        train_y(static_cast<Eigen::Index>(i)) = data.labels(split.train[i]);
      }
      for (size_t i = 0; i < split.test.size(); ++i) {
        test_x.col(static_cast<Eigen::Index>(i)) = data.x.col(split.test[i]);
        test_y(static_cast<Eigen::Index>(i)) = data.labels(split.test[i]);
      }
      AffinityGraph train_graph =
          build_graph(train_x, train_y, mode, opt.k, opt.sigma, scale, opt.affinity);
      LsdaResult fit = lsda_fit_with_graph(train_x, train_graph, gamma,
                                           std::min<int>(d, data.r()), opt.ridge);
      Eigen::VectorXi pred = knn1_classify(transform(fit.projection, train_x), train_y,
                                           transform(fit.projection, test_x));
      accs.push_back(accuracy(pred, test_y));
    }
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    double sd = 0.0;
    if (accs.size() > 1) {
      for (double a : accs) sd += (a - mean) * (a - mean);
      sd = std::sqrt(sd / static_cast<double>(accs.size() - 1));
    }
    *std_out = sd;
    return mean;
  };

  std::ofstream out(opt.out);
  if (!out) throw InvalidInput("cannot open for writing: " + opt.out);
  out << "gamma_mode,gamma,dimension,mean_accuracy,std_dev,angle_vs_lda,angle_vs_local_lda\n";

  for (int d : opt.dims) {
    const int d_eff = std::min<int>(d, data.r());
    Projection lda = lda_fit(data.x, data.labels, std::min(d_eff, classes - 1), opt.ridge);
    Projection local = local_lda_fit(data.x, full_graph, d_eff, opt.ridge);

    auto angles_for = [&](const Projection& p) {
      const int shared = std::min<int>(p.dim(), lda.dim());
      const double vs_lda =
          principal_angles(Eigen::MatrixXd(p.basis.leftCols(shared)),
                           Eigen::MatrixXd(lda.basis)).maxCoeff();
      const double vs_local = principal_angles(p.basis, local.basis).maxCoeff();
      return std::pair<double, double>(vs_lda, vs_local);
    };

    // Symbolic endpoints.
    for (const char* mode_name : {"zero", "inf"}) {
      const Gamma gamma =
          std::string(mode_name) == "zero" ? Gamma::zero() : Gamma::infinity();
      LsdaResult full_fit = lsda_fit_with_graph(data.x, full_graph, gamma, d_eff, opt.ridge);
      auto [vs_lda, vs_local] = angles_for(full_fit.projection);
      double sd = 0.0;
      const double mean = mean_accuracy(gamma, d_eff, &sd);
      out << mode_name << ',' << format_gamma(gamma) << ',' << d << ','
          << format_compact(mean) << ',' << format_compact(sd) << ','
          << format_compact(vs_lda) << ',' << format_compact(vs_local) << '\n';
    }

    // Best numeric gamma over the grid.
    bool have_best = false;
    double best_mean = 0.0, best_sd = 0.0;
    Gamma best_gamma = grid.front();
    for (const Gamma& gamma : grid) {
      double sd = 0.0;
      const double mean = mean_accuracy(gamma, d_eff, &sd);
      if (!have_best || mean > best_mean) {
        have_best = true;
        best_mean = mean;
        best_sd = sd;
        best_gamma = gamma;
      }
    }
    LsdaResult best_fit =
        lsda_fit_with_graph(data.x, full_graph, best_gamma, d_eff, opt.ridge);
    auto [vs_lda, vs_local] = angles_for(best_fit.projection);
    out << "best," << format_gamma(best_gamma) << ',' << d << ','
        << format_compact(best_mean) << ',' << format_compact(best_sd) << ','
        << format_compact(vs_lda) << ',' << format_compact(vs_local) << '\n';
  }
  std::cout << "wrote " << opt.out << "\n";
  return 0;
}

struct ToyOptions {
  int n_per = 1000;
  std::uint64_t seed = 42;
  double sigma = 0.5;
  std::string gamma = "2^-5";
  std::string out_prefix = "toy";
};

int cmd_toy(const ToyOptions& opt) {
  LabeledDataset toy = toy_ellipses(opt.n_per, opt.seed);
  save_csv(toy, opt.out_prefix + "_data.csv");

  Split split = split_half_per_class(toy.labels, opt.seed);
  Eigen::MatrixXd train_x(2, static_cast<Eigen::Index>(split.train.size()));
  Eigen::MatrixXd test_x(2, static_cast<Eigen::Index>(split.test.size()));
  Eigen::VectorXi train_y(static_cast<Eigen::Index>(split.train.size()));
  Eigen::VectorXi test_y(static_cast<Eigen::Index>(split.test.size()));
  for (size_t i = 0; i < split.train.size(); ++i) {
    train_x.col(static_cast<Eigen::Index>(i)) = toy.x.col(split.train[i]);
    train_y(static_cast<Eigen::Index>(i)) = toy.labels(split.train[i]);
  }
  for (size_t i = 0; i < split.test.size(); ++i) {
    test_x.col(static_cast<Eigen::Index>(i)) = toy.x.col(split.test[i]);
    test_y(static_cast<Eigen::Index>(i)) = toy.labels(split.test[i]);
  }

  Projection lda = lda_fit(train_x, train_y, 1);
  LsdaParams params;
  params.gamma = parse_gamma(opt.gamma);
  params.sigma = opt.sigma;
  params.mode = GraphMode::Supervised;
  params.dim = 1;
  LsdaResult lsda = lsda_fit(train_x, params, &train_y);

  auto cos_e1 = [](const Projection& p) {
    return std::abs(p.basis(0, 0)) / p.basis.col(0).norm();
  };
  auto test_accuracy = [&](const Projection& p) {
    Eigen::VectorXi pred =
        knn1_classify(transform(p, train_x), train_y, transform(p, test_x));
    return accuracy(pred, test_y);
  };
  const double lda_cos = cos_e1(lda);
  const double lsda_cos = cos_e1(lsda.projection);
  const double lda_acc = test_accuracy(lda);
  const double lsda_acc = test_accuracy(lsda.projection);

  {
    std::ofstream out(opt.out_prefix + "_projections.csv");
    if (!out) throw InvalidInput("cannot write projections file");
    out << "x,y,class,z_lda,z_lsda\n";
    Eigen::MatrixXd z_lda = transform(lda, toy.x);
    Eigen::MatrixXd z_lsda = transform(lsda.projection, toy.x);
    for (int i = 0; i < toy.n(); ++i)
      out << format_decimal(toy.x(0, i)) << ',' << format_decimal(toy.x(1, i)) << ','
          << toy.labels(i) << ',' << format_decimal(z_lda(0, i)) << ','
          << format_decimal(z_lsda(0, i)) << '\n';
  }
  {
    std::ofstream out(opt.out_prefix + "_summary.csv");
    if (!out) throw InvalidInput("cannot write summary file");
    out << "method,sigma,gamma,cos_angle_e1,test_accuracy\n";
    out << "lda,,," << format_compact(lda_cos) << ',' << format_compact(lda_acc) << '\n';
    out << "lsda," << format_compact(opt.sigma) << ',' << opt.gamma << ','
        << format_compact(lsda_cos) << ',' << format_compact(lsda_acc) << '\n';
  }

  std::cout << "lda: cos(w,e1)=" << format_compact(lda_cos)
            << " accuracy=" << format_compact(lda_acc) << "\n";
  std::cout << "lsda: cos(w,e1)=" << format_compact(lsda_cos)
            << " accuracy=" << format_compact(lsda_acc) << "\n";
  std::cout << "wrote " << opt.out_prefix << "_data.csv, " << opt.out_prefix
            << "_projections.csv, " << opt.out_prefix << "_summary.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shrunk-pattern dimensionality reduction toolkit"};
  app.require_subcommand(1);

  FitOptions fit_opt;
  CLI::App* fit = app.add_subcommand("fit", "fit one method and save the projection");
  fit->add_option("--dataset", fit_opt.dataset, "dataset CSV")->required();
  fit->add_option("--method", fit_opt.method, "baseline|pca|lda|lpp|lsda|local-lda");
  fit->add_option("--mode", fit_opt.mode, "supervised|unsupervised");
  fit->add_option("--dim", fit_opt.dim, "target dimension");
  fit->add_option("--sigma", fit_opt.sigma, "Gaussian width");
  fit->add_option("--gamma", fit_opt.gamma, "balance weight (decimal, 2^k, zero, inf)");
  fit->add_option("--k", fit_opt.k, "neighbor count (0 = default)");
  fit->add_option("--ridge", fit_opt.ridge, "metric regularization");
  fit->add_option("--sigma-scale", fit_opt.sigma_scale, "median-dist|absolute");
  fit->add_option("--out", fit_opt.out, "projection file");

  std::string tr_projection, tr_dataset, tr_out = "embedded.csv";
  CLI::App* tr = app.add_subcommand("transform", "project a dataset with a saved fit");
  tr->add_option("--projection", tr_projection, "projection file")->required();
  tr->add_option("--dataset", tr_dataset, "dataset CSV")->required();
  tr->add_option("--out", tr_out, "output CSV");

  SweepOptions sweep_opt;
  CLI::App* sweep = app.add_subcommand("sweep", "benchmark methods over parameter grids");
  sweep->add_option("--config", sweep_opt.config_path, "JSON config file");
  sweep->add_option("--dataset", sweep_opt.dataset, "dataset CSV");
  sweep->add_option("--methods", sweep_opt.methods, "methods to compare")->delimiter(',');
  sweep->add_option("--mode", sweep_opt.mode, "supervised|unsupervised");
  sweep->add_option("--train-sizes,--L", sweep_opt.train_sizes, "per-class train counts")
      ->delimiter(',');
  sweep->add_option("--dims", sweep_opt.dims, "dimensions")->delimiter(',');
  sweep->add_option("--sigmas", sweep_opt.sigmas, "sigma grid")->delimiter(',');
  sweep->add_option("--gammas", sweep_opt.gammas, "gamma grid")->delimiter(',');
  sweep->add_option("--k", sweep_opt.k, "neighbor count (0 = default)");
  sweep->add_option("--repeats", sweep_opt.repeats, "random splits per L");
  sweep->add_option("--seed", sweep_opt.seed, "seed (env SHRUNK_EMBED_SEED fallback)");
  sweep->add_option("--jobs", sweep_opt.jobs, "worker threads (0 = logical cores)");
  sweep->add_option("--out", sweep_opt.out, "report CSV");

  LimitsOptions limits_opt;
  CLI::App* limits = app.add_subcommand("limits", "compare the gamma limit modes");
  limits->add_option("--dataset", limits_opt.dataset, "dataset CSV")->required();
  limits->add_option("--dims", limits_opt.dims, "dimensions")->required()->delimiter(',');
  limits->add_option("--mode", limits_opt.mode, "supervised|unsupervised");
  limits->add_option("--affinity", limits_opt.affinity, "gaussian|block");
  limits->add_option("--sigma", limits_opt.sigma, "Gaussian width");
  limits->add_option("--sigma-scale", limits_opt.sigma_scale, "median-dist|absolute");
  limits->add_option("--gammas", limits_opt.gammas, "gamma grid")->delimiter(',');
  limits->add_option("--k", limits_opt.k, "neighbor count (0 = default)");
  limits->add_option("--train-size,--L", limits_opt.train_size,
                     "per-class train count (0 = half split)");
  limits->add_option("--repeats", limits_opt.repeats, "random splits");
  limits->add_option("--seed", limits_opt.seed, "seed (env SHRUNK_EMBED_SEED fallback)");
  limits->add_option("--ridge", limits_opt.ridge, "metric regularization");
  limits->add_option("--out", limits_opt.out, "output CSV");

  ToyOptions toy_opt;
  CLI::App* toy = app.add_subcommand("toy", "reproduce the two-ellipse study");
  toy->add_option("--n-per", toy_opt.n_per, "samples per ellipse");
  toy->add_option("--seed", toy_opt.seed, "seed (env SHRUNK_EMBED_SEED fallback)");
  toy->add_option("--sigma", toy_opt.sigma, "Gaussian width");
  toy->add_option("--gamma", toy_opt.gamma, "balance weight");
  toy->add_option("--out-prefix", toy_opt.out_prefix, "output file prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_opt);
    if (tr->parsed()) return cmd_transform(tr_projection, tr_dataset, tr_out);
    if (sweep->parsed()) {
      if (sweep->count("--seed") == 0) sweep_opt.seed = seed_fallback();
      if (!sweep_opt.config_path.empty()) merge_json_config(sweep_opt, sweep);
      return cmd_sweep(sweep_opt);
    }
    if (limits->parsed()) {
      if (limits->count("--seed") == 0) limits_opt.seed = seed_fallback();
      return cmd_limits(limits_opt);
    }
    if (toy->parsed()) {
      if (toy->count("--seed") == 0 && std::getenv("SHRUNK_EMBED_SEED") != nullptr)
        toy_opt.seed = seed_fallback();
      return cmd_toy(toy_opt);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: bad config: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
