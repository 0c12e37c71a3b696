// Command-line front end for the hmvc library: single fits, anchor fits,
// parameter sweeps, synthetic demos, and metric/diagnostic utilities.

#include <CLI11.hpp>
#include <iomanip>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "hmvc/hmvc.hpp"

namespace {

using hmvc::Index;
using hmvc::Mat;

constexpr const char* kVersion = "hmvc 0.1.0";

// ---------------------------------------------------------------------------
// Shared option blocks

struct DataOptions {
  std::vector<std::string> views;
  std::vector<std::string> graphs;
  std::string labels;
  int clusters = 0;
  std::string format = "csv";
  bool header = false;
  std::string name = "dataset";
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--views", d.views, "Feature matrix per view (comma-separated paths)")
      ->required()
      ->delimiter(',');
  cmd->add_option("--graphs", d.graphs,
                  "Edge-list adjacency per view; one shared graph or one per view")
      ->delimiter(',');
  cmd->add_option("--labels", d.labels, "Ground-truth labels, one integer per line");
  cmd->add_option("--clusters", d.clusters, "Cluster count (defaults to the label range)");
  cmd->add_option("--format", d.format, "Feature matrix format")
      ->check(CLI::IsMember({"csv", "binary"}));
  cmd->add_flag("--header", d.header, "Skip the first line of CSV feature files");
  cmd->add_option("--name", d.name, "Dataset name used in reports");
}

hmvc::MultiViewDataset load_dataset(const DataOptions& d) {
  const hmvc::MatrixFormat format =
      d.format == "binary" ? hmvc::MatrixFormat::binary : hmvc::MatrixFormat::csv;
  hmvc::MultiViewDataset ds =
      d.graphs.empty() ? hmvc::load_feature_views(d.views, format, d.header)
                       : hmvc::load_attributed_graph(d.views, d.graphs, format, d.header);
  if (!d.labels.empty()) hmvc::attach_labels_file(ds, d.labels);
  if (d.clusters > 0) ds.n_clusters = d.clusters;
  ds.name = d.name;
  return ds;
}

struct FitOptions {
  double alpha = 1.0, beta = 1.0, mu = 1.0;
  int filter_order = 2;
  std::string order = "auto";
  std::string sim_normalization = "symmetric";
  std::string cluster_method = "spectral";
  int max_iters = 50;
  double tol = 1e-6;
  std::uint64_t seed = 42;
  std::string out;
  bool no_graph_artifacts = false;
};

void add_fit_options(CLI::App* cmd, FitOptions& f) {
  cmd->add_option("--alpha", f.alpha, "High-order anchoring weight");
  cmd->add_option("--beta", f.beta, "Consensus fusion weight");
  cmd->add_option("--mu", f.mu, "Consensus ridge weight");
  cmd->add_option("--filter-order,-k", f.filter_order, "Low-pass filter order k");
  cmd->add_option("--order,-n", f.order, "Similarity order: positive integer, 'inf', or 'auto'");
  cmd->add_option("--sim-normalization", f.sim_normalization, "Similarity normalization")
      ->check(CLI::IsMember({"symmetric", "row"}));
  cmd->add_option("--cluster-method", f.cluster_method, "Consensus clustering method")
      ->check(CLI::IsMember({"spectral", "kmeans"}));
  cmd->add_option("--max-iters", f.max_iters, "Maximum alternating iterations");
  cmd->add_option("--tol", f.tol, "Relative objective-change stopping tolerance");
  cmd->add_option("--seed", f.seed, "Seed for the clustering stage");
  cmd->add_option("--out", f.out, "Directory for reports and artifacts");
  cmd->add_flag("--no-graph-artifacts", f.no_graph_artifacts,
                "Skip writing the learned graph matrix");
}

int parse_order(const std::string& token) {
  if (token == "auto") return hmvc::kOrderAuto;
  if (token == "inf" || token == "infinity") return hmvc::kOrderInfinity;
  try {
    const int n = std::stoi(token);
    if (n >= 1) return n;
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError("--order", "expected a positive integer, 'inf', or 'auto'");
}

hmvc::RunConfig to_run_config(const DataOptions& d, const FitOptions& f, hmvc::FitMethod method) {
  hmvc::RunConfig cfg;
  cfg.dataset_name = d.name;
  cfg.method = method;
  cfg.cluster_method = f.cluster_method == "kmeans" ? hmvc::ClusterMethod::kmeans_rows
                                                    : hmvc::ClusterMethod::spectral;
  cfg.n_clusters = d.clusters;
  cfg.seed = f.seed;
  cfg.base.sim_normalization = f.sim_normalization == "row" ? hmvc::GraphNorm::row_stochastic
                                                            : hmvc::GraphNorm::symmetric;
  cfg.base.max_iters = f.max_iters;
  cfg.base.rel_tol = f.tol;
  cfg.grid_alpha = {f.alpha};
  cfg.grid_beta = {f.beta};
  cfg.grid_mu = {f.mu};
  cfg.grid_k = {f.filter_order};
  cfg.grid_n = {parse_order(f.order)};
  cfg.output_dir = f.out;
  cfg.save_graphs = !f.no_graph_artifacts;
  return cfg;
}

std::string format_metric(double v) {
  if (std::isnan(v)) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

int print_results(const hmvc::RunConfig& cfg, const std::vector<hmvc::GridPointResult>& rows) {
  std::cout << "dataset=" << cfg.dataset_name << " method="
            << (cfg.method == hmvc::FitMethod::hmvc ? "hmvc" : "ahmvc") << " points="
            << rows.size() << "\n";
  std::cout << std::left << std::setw(6) << "idx" << std::setw(9) << "alpha" << std::setw(9)
            << "beta" << std::setw(9) << "mu" << std::setw(4) << "k" << std::setw(6) << "n"
            << std::setw(8) << "acc" << std::setw(8) << "nmi" << std::setw(8) << "ari"
            << std::setw(8) << "f1" << std::setw(8) << "pur" << std::setw(7) << "iters"
            << std::setw(10) << "seconds"
            << "status\n";
  int failures = 0;
  for (const auto& r : rows) {
    if (r.status != "ok") ++failures;
    std::cout << std::left << std::setw(6) << r.index << std::setw(9) << r.alpha << std::setw(9)
              << r.beta << std::setw(9) << r.mu << std::setw(4) << r.k << std::setw(6)
              << hmvc::harness_detail::order_to_string(r.n) << std::setw(8)
              << format_metric(r.metrics.acc) << std::setw(8) << format_metric(r.metrics.nmi)
              << std::setw(8) << format_metric(r.metrics.ari) << std::setw(8)
              << format_metric(r.metrics.f1) << std::setw(8) << format_metric(r.metrics.purity)
              << std::setw(7) << r.iterations << std::setw(10) << std::fixed
              << std::setprecision(3) << r.seconds << r.status << "\n";
    std::cout.unsetf(std::ios::fixed);
    std::cout << std::setprecision(6);
  }
  if (!cfg.output_dir.empty())
    std::cout << "artifacts written to " << cfg.output_dir << "\n";
  if (failures == static_cast<int>(rows.size())) return 1;
  if (failures > 0) std::cerr << failures << " grid point(s) failed; see the status column\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Subcommands

int run_fit(const DataOptions& d, const FitOptions& f, hmvc::FitMethod method,
            const hmvc::AnchorConfig& anchor) {
  hmvc::RunConfig cfg = to_run_config(d, f, method);
  cfg.anchor = anchor;
  const auto ds = load_dataset(d);
  const auto rows = hmvc::run_and_report(cfg, ds);
  return print_results(cfg, rows);
}

struct SweepOptions {
  std::string method = "hmvc";
  std::vector<double> alphas{1.0};
  std::vector<double> betas{1.0};
  std::vector<double> mus{1.0};
  std::vector<int> ks{2};
  std::vector<std::string> ns{"auto"};
  int jobs = 1;
};

int run_sweep(const DataOptions& d, const FitOptions& f, const SweepOptions& s,
              const hmvc::AnchorConfig& anchor) {
  hmvc::RunConfig cfg = to_run_config(
      d, f, s.method == "ahmvc" ? hmvc::FitMethod::ahmvc : hmvc::FitMethod::hmvc);
  cfg.anchor = anchor;
  cfg.grid_alpha = s.alphas;
  cfg.grid_beta = s.betas;
  cfg.grid_mu = s.mus;
  cfg.grid_k = s.ks;
  cfg.grid_n.clear();
  for (const auto& token : s.ns) cfg.grid_n.push_back(parse_order(token));
  cfg.jobs = s.jobs;
  const auto ds = load_dataset(d);
  const auto rows = hmvc::run_and_report(cfg, ds);
  return print_results(cfg, rows);
}

int run_two_moons_demo(int n, double noise, std::uint64_t seed, int knn, int top_k,
                       const std::vector<std::string>& order_tokens) {
  std::vector<int> orders;
  for (const auto& token : order_tokens) orders.push_back(parse_order(token));
  const auto rows = hmvc::two_moons_order_quality(n, noise, seed, knn, orders, top_k);
  std::cout << "two-moons n=" << n << " noise=" << noise << " seed=" << seed << " knn=" << knn
            << " top_k=" << top_k << "\n";
  std::cout << std::left << std::setw(8) << "order" << std::setw(8) << "edges" << std::setw(8)
            << "wrong"
            << "accurate\n";
  for (const auto& row : rows)
    std::cout << std::left << std::setw(8) << hmvc::harness_detail::order_to_string(row.order)
              << std::setw(8) << row.quality.total_edges << std::setw(8)
              << row.quality.wrong_edges << std::fixed << std::setprecision(4)
              << row.quality.accurate_fraction << "\n";
  return 0;
}

int run_metrics(const std::string& pred_path, const std::string& truth_path) {
  const auto pred = hmvc::read_labels(pred_path);
  const auto truth = hmvc::read_labels(truth_path);
  const hmvc::MetricSet m = hmvc::evaluate_labels(pred, truth);
  std::cout << std::fixed << std::setprecision(6);
  std::cout << "acc " << m.acc << "\nnmi " << m.nmi << "\nari " << m.ari << "\nf1  " << m.f1
            << "\npur " << m.purity << "\n";
  return 0;
}

int run_edge_quality(const std::string& similarity_path, const std::string& graph_path,
                     const std::string& labels_path, const std::string& format, int top_k,
                     double threshold, bool use_threshold) {
  const auto labels = hmvc::read_labels(labels_path);
  hmvc::EdgeQuality q;
  if (!graph_path.empty()) {
    const auto records = hmvc::read_edge_list(graph_path);
    q = hmvc::edge_quality(
        hmvc::build_adjacency(records, static_cast<Index>(labels.size()), true, graph_path),
        labels);
  } else {
    const Mat sim = hmvc::read_matrix(
        similarity_path,
        format == "binary" ? hmvc::MatrixFormat::binary : hmvc::MatrixFormat::csv);
    q = use_threshold ? hmvc::edge_quality_threshold(sim, labels, threshold)
                      : hmvc::edge_quality_topk(sim, labels, top_k);
  }
  std::cout << "edges " << q.total_edges << "\nwrong " << q.wrong_edges << "\naccurate "
            << std::fixed << std::setprecision(6) << q.accurate_fraction << "\n";
  return 0;
}

int run_change_rates(const std::string& view_path, const std::string& format, int n_max) {
  const Mat x = hmvc::read_matrix(
      view_path, format == "binary" ? hmvc::MatrixFormat::binary : hmvc::MatrixFormat::csv);
  const auto w1 =
      hmvc::normalize_similarity(hmvc::cosine_similarity_graph(x), hmvc::GraphNorm::symmetric);
  const auto rates = hmvc::order_change_rate(w1, n_max);
  std::cout << std::left << std::setw(8) << "order" << std::setw(16) << "mean_change"
            << "skipped\n";
  for (size_t i = 0; i < rates.orders.size(); ++i)
    std::cout << std::left << std::setw(8)
              << hmvc::harness_detail::order_to_string(rates.orders[i]) << std::setw(16)
              << std::setprecision(6) << rates.rates[i] << rates.skipped[i] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-order multi-view clustering: graph filtering, high-order similarity "
               "fusion, and anchor-based scaling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read options from an INI file");

  int rc = 0;
  bool dispatched = false;  // config-file sections can re-trigger a named subcommand
  DataOptions data;
  FitOptions fit_opts;
  hmvc::AnchorConfig anchor;
  SweepOptions sweep_opts;

  CLI::App* fit = app.add_subcommand("fit", "Fit the full method and cluster the consensus graph")->configurable();
  add_data_options(fit, data);
  add_fit_options(fit, fit_opts);
  fit->callback([&] { if (std::exchange(dispatched, true)) return; rc = run_fit(data, fit_opts, hmvc::FitMethod::hmvc, anchor); });

  CLI::App* fit_anchor =
      app.add_subcommand("fit-anchor", "Fit the anchor-factorized method for large N")->configurable();
  add_data_options(fit_anchor, data);
  add_fit_options(fit_anchor, fit_opts);
  fit_anchor->add_option("--anchors,-m", anchor.m, "Anchor count m");
  fit_anchor->add_option("--eta", anchor.eta, "Anchor importance sharpening exponent");
  fit_anchor->add_option("--anchor-knn", anchor.degree_knn,
                         "KNN order for feature-only anchor importance");
  fit_anchor->callback([&] { if (std::exchange(dispatched, true)) return; rc = run_fit(data, fit_opts, hmvc::FitMethod::ahmvc, anchor); });

  CLI::App* sweep = app.add_subcommand("sweep", "Cross-product parameter sweep with a report")->configurable();
  add_data_options(sweep, data);
  add_fit_options(sweep, fit_opts);
  sweep->add_option("--method", sweep_opts.method, "Fitting method")
      ->check(CLI::IsMember({"hmvc", "ahmvc"}));
  sweep->add_option("--grid-alpha", sweep_opts.alphas, "Alpha grid")->delimiter(',');
  sweep->add_option("--grid-beta", sweep_opts.betas, "Beta grid")->delimiter(',');
  sweep->add_option("--grid-mu", sweep_opts.mus, "Mu grid")->delimiter(',');
  sweep->add_option("--grid-k", sweep_opts.ks, "Filter-order grid")->delimiter(',');
  sweep->add_option("--grid-n", sweep_opts.ns, "Similarity-order grid (ints, 'inf', 'auto')")
      ->delimiter(',');
  sweep->add_option("--jobs,-j", sweep_opts.jobs, "Parallel grid workers");
  sweep->add_option("--anchors,-m", anchor.m, "Anchor count m (ahmvc)");
  sweep->add_option("--eta", anchor.eta, "Anchor importance exponent (ahmvc)");
  sweep->add_option("--anchor-knn", anchor.degree_knn, "Anchor KNN order (ahmvc)");
  sweep->callback([&] { if (std::exchange(dispatched, true)) return; rc = run_sweep(data, fit_opts, sweep_opts, anchor); });

  int demo_n = 200;
  double demo_noise = 0.05;
  std::uint64_t demo_seed = 7;
  int demo_knn = 5, demo_top_k = 5;
  std::vector<std::string> demo_orders{"1", "2", "3", "inf"};
  CLI::App* demo = app.add_subcommand(
      "two-moons-demo", "Edge quality of similarity orders on the two-moons benchmark")->configurable();
  demo->add_option("--n", demo_n, "Number of points (even)");
  demo->add_option("--noise", demo_noise, "Gaussian noise level");
  demo->add_option("--seed", demo_seed, "Noise seed");
  demo->add_option("--knn", demo_knn, "KNN order of the base graph");
  demo->add_option("--top-k", demo_top_k, "Edges kept per row when scoring");
  demo->add_option("--orders", demo_orders, "Similarity orders to score")->delimiter(',');
  demo->callback([&] {
    if (std::exchange(dispatched, true)) return;
    rc = run_two_moons_demo(demo_n, demo_noise, demo_seed, demo_knn, demo_top_k, demo_orders);
  });

  std::string pred_path, truth_path;
  CLI::App* metrics =
      app.add_subcommand("metrics", "Clustering metrics between two label files")->configurable();
  metrics->add_option("--pred", pred_path, "Predicted labels")->required();
  metrics->add_option("--truth", truth_path, "Ground-truth labels")->required();
  metrics->callback([&] { if (std::exchange(dispatched, true)) return; rc = run_metrics(pred_path, truth_path); });

  std::string eq_similarity, eq_graph, eq_labels, eq_format = "csv";
  int eq_top_k = 5;
  double eq_threshold = 0.0;
  CLI::App* eq = app.add_subcommand("edge-quality",
                                    "Intra-class fraction of graph or similarity edges")->configurable();
  auto* sim_opt = eq->add_option("--similarity", eq_similarity, "Dense similarity matrix file");
  auto* graph_opt = eq->add_option("--graph", eq_graph, "Edge-list graph file");
  sim_opt->excludes(graph_opt);
  eq->add_option("--labels", eq_labels, "Ground-truth labels")->required();
  eq->add_option("--format", eq_format, "Similarity matrix format")
      ->check(CLI::IsMember({"csv", "binary"}));
  eq->add_option("--top-k", eq_top_k, "Edges kept per similarity row");
  auto* thr_opt = eq->add_option("--threshold", eq_threshold, "Edge threshold instead of top-k");
  eq->callback([&] {
    if (std::exchange(dispatched, true)) return;
    if (eq_similarity.empty() && eq_graph.empty())
      throw CLI::ValidationError("edge-quality", "need --similarity or --graph");
    rc = run_edge_quality(eq_similarity, eq_graph, eq_labels, eq_format, eq_top_k,
                          eq_threshold, thr_opt->count() > 0);
  });

  std::string cr_view, cr_format = "csv";
  int cr_n_max = 5;
  CLI::App* cr = app.add_subcommand(
      "change-rates", "Mean relative change between consecutive similarity orders")->configurable();
  cr->add_option("--view", cr_view, "Feature matrix file")->required();
  cr->add_option("--format", cr_format, "Matrix format")->check(CLI::IsMember({"csv", "binary"}));
  cr->add_option("--n-max", cr_n_max, "Largest finite order to score");
  cr->callback([&] { if (std::exchange(dispatched, true)) return; rc = run_change_rates(cr_view, cr_format, cr_n_max); });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const hmvc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
