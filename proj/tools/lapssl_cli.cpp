#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <Eigen/SVD>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lapssl/data_io.hpp"
#include "lapssl/edge_weights.hpp"
#include "lapssl/gcn.hpp"
#include "lapssl/graph.hpp"
#include "lapssl/labelprop.hpp"
#include "lapssl/spectral.hpp"
#include "lapssl/subspace.hpp"
#include "lapssl/types.hpp"

using json = nlohmann::json;
using namespace lapssl;

namespace {

// Flag mistakes that CLI11 cannot catch on its own (a resolvable dataset
// path, mutually dependent flags) exit with the usage code, not the
// runtime one.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  unsigned seed = 0;
  int threads = 1;
  std::string out;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--seed", o.seed, "random seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "internal thread count")
      ->check(CLI::Range(1, 1 << 16))
      ->capture_default_str();
  sub->add_option("--out", o.out, "write results as JSON to this path");
}

void apply_threads(const CommonOpts& o) { Eigen::setNbThreads(o.threads); }

std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit_json(const CommonOpts& common, json j) {
  if (common.out.empty()) return;
  j["timestamp"] = now_utc();
  std::ofstream f(common.out);
  if (!f) throw std::runtime_error("cannot write " + common.out);
  f << j.dump(2) << "\n";
}

std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void trow(const std::string& key, const std::string& value) {
  std::printf("  %-20s %s\n", key.c_str(), value.c_str());
}
void trow(const std::string& key, double value) { trow(key, fmt4(value)); }
void trow(const std::string& key, long long value) {
  trow(key, std::to_string(value));
}
void trow(const std::string& key, int value) {
  trow(key, static_cast<long long>(value));
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t used = 0;
    const double v = std::stod(item, &used);
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw UsageError("bad numeric list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty numeric list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_double_list(text)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw UsageError("expected integer list");
    out.push_back(i);
  }
  return out;
}

// Dataset files resolve from the flag first, then LAPSSL_DATA_DIR (both
// bare and under a cora/ subdirectory).
std::string find_data_file(const std::string& flag_value, const std::string& name) {
  namespace fs = std::filesystem;
  if (!flag_value.empty()) return flag_value;
  const char* env = std::getenv("LAPSSL_DATA_DIR");
  const std::string root = env ? env : "";
  if (root.empty())
    throw UsageError("no path given for " + name + " and LAPSSL_DATA_DIR is not set");
  for (const fs::path cand : {fs::path(root) / name, fs::path(root) / "cora" / name}) {
    std::error_code ec;
    if (fs::exists(cand, ec)) return cand.string();
  }
  throw UsageError(name + " not found under '" + root + "'");
}

struct CoraOpts {
  std::string content;
  std::string cites;
  bool row_normalize = false;
  int per_class_train = 20;
  int val_size = 500;
  int test_size = 1000;
  unsigned split_seed = 0;
};

void add_cora_options(CLI::App* sub, CoraOpts& o, bool with_split,
                      bool row_normalize_default) {
  o.row_normalize = row_normalize_default;
  sub->add_option("--content", o.content, "citation-network content file");
  sub->add_option("--cites", o.cites, "citation-network cites file");
  sub->add_flag("--row-normalize,!--no-row-normalize", o.row_normalize,
                "rescale each feature row to sum 1")
      ->capture_default_str();
  if (!with_split) return;
  sub->add_option("--per-class-train", o.per_class_train, "train nodes per class")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--val-size", o.val_size, "validation node count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--test-size", o.test_size, "test node count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--split-seed", o.split_seed, "seed for the split draw")
      ->capture_default_str();
}

Dataset load_cora_dataset(const CoraOpts& o) {
  const std::string content = find_data_file(o.content, "cora.content");
  const std::string cites = find_data_file(o.cites, "cora.cites");
  Dataset ds = load_cora(content, cites, o.row_normalize);
  SplitSpec spec{o.per_class_train, o.val_size, o.test_size, o.split_seed};
  SplitMasks masks = make_split(ds, spec);
  ds.train_mask = masks.train;
  ds.val_mask = masks.val;
  ds.test_mask = masks.test;
  ds.Y = make_label_matrix(ds.labels, ds.train_mask, ds.num_classes());
  return ds;
}

json cora_config_json(const CoraOpts& o) {
  return {{"row_normalize", o.row_normalize},
          {"per_class_train", o.per_class_train},
          {"val_size", o.val_size},
          {"test_size", o.test_size},
          {"split_seed", o.split_seed}};
}

struct GraphOpts {
  std::string edges;
  int nodes = 0;
};

void add_graph_options(CLI::App* sub, GraphOpts& o, bool required) {
  CLI::Option* e = sub->add_option(
      "--edges", o.edges, "edge-list file, one 'i<TAB>j[<TAB>w]' per line");
  if (required) e->required();
  sub->add_option("--nodes", o.nodes, "node count when larger than any listed id")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

const std::map<std::string, FilterKind> kFilterNames{
    {"ar", FilterKind::AutoRegressive},
    {"autoregressive", FilterKind::AutoRegressive},
    {"residual", FilterKind::Residual},
    {"renorm", FilterKind::Renormalized},
    {"renormalized", FilterKind::Renormalized}};

std::string filter_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::AutoRegressive: return "autoregressive";
    case FilterKind::Residual: return "residual";
    case FilterKind::Renormalized: return "renormalized";
  }
  return "?";
}

struct FilterOpts {
  FilterKind kind = FilterKind::Renormalized;
  double eta = 1.0;
  int k = 1;
  double gamma = 1.0;
};

void add_filter_options(CLI::App* sub, FilterOpts& o,
                        FilterKind default_kind = FilterKind::Renormalized) {
  o.kind = default_kind;
  sub->add_option("--filter", o.kind, "layer filter: ar | residual | renorm")
      ->transform(CLI::CheckedTransformer(kFilterNames, CLI::ignore_case))
      ->default_str(filter_name(default_kind));
  sub->add_option("--eta", o.eta, "filter strength for ar / residual")
      ->capture_default_str();
  sub->add_option("--k", o.k, "power of the renormalized filter")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--gamma", o.gamma, "self-loop weight of the filter Laplacian")
      ->capture_default_str();
}

FilterSpec to_spec(const FilterOpts& o) {
  FilterSpec spec;
  spec.kind = o.kind;
  spec.eta = o.eta;
  spec.k = o.k;
  spec.gamma = o.gamma;
  return spec;
}

json filter_config_json(const FilterOpts& o) {
  return {{"filter", filter_name(o.kind)},
          {"eta", o.eta},
          {"k", o.k},
          {"gamma", o.gamma}};
}

struct TrainOpts {
  int hidden = 16;
  double lr = 0.1;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  int epochs = 200;
  Optimizer optimizer = Optimizer::Adam;
};

const std::map<std::string, Optimizer> kOptimizerNames{
    {"adam", Optimizer::Adam}, {"sgd", Optimizer::Sgd}};

void add_train_options(CLI::App* sub, TrainOpts& o, int default_epochs) {
  o.epochs = default_epochs;
  sub->add_option("--hidden", o.hidden, "hidden layer width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--lr", o.lr, "learning rate")->capture_default_str();
  sub->add_option("--weight-decay", o.weight_decay, "first-layer L2 penalty")
      ->capture_default_str();
  sub->add_option("--dropout", o.dropout, "hidden dropout probability")
      ->check(CLI::Range(0.0, 0.999))
      ->capture_default_str();
  sub->add_option("--epochs", o.epochs, "training epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--optimizer", o.optimizer, "adam | sgd")
      ->transform(CLI::CheckedTransformer(kOptimizerNames, CLI::ignore_case))
      ->default_str("adam");
}

TrainConfig to_config(const TrainOpts& o, unsigned seed) {
  TrainConfig config;
  config.hidden = o.hidden;
  config.lr = o.lr;
  config.weight_decay = o.weight_decay;
  config.dropout = o.dropout;
  config.epochs = o.epochs;
  config.optimizer = o.optimizer;
  config.seed = seed;
  return config;
}

json train_config_json(const TrainOpts& o) {
  return {{"hidden", o.hidden},
          {"lr", o.lr},
          {"weight_decay", o.weight_decay},
          {"dropout", o.dropout},
          {"epochs", o.epochs},
          {"optimizer", o.optimizer == Optimizer::Adam ? "adam" : "sgd"}};
}

json metrics_json(const Metrics& m, json config) {
  return {{"accuracy",
           {{"train", m.train_acc}, {"val", m.val_acc}, {"test", m.test_acc}}},
          {"loss_curve", m.loss_curve},
          {"config", std::move(config)},
          {"seed", m.seed},
          {"best_epoch", m.best_epoch}};
}

void print_metrics_table(const Metrics& m) {
  trow("train accuracy", m.train_acc);
  trow("val accuracy", m.val_acc);
  trow("test accuracy", m.test_acc);
  trow("best epoch", m.best_epoch);
  if (!m.loss_curve.empty()) trow("final loss", m.loss_curve.back());
}

WeightMatrix row_stochastic_adjacency(const Graph& g) {
  std::vector<Triplet> trips;
  for (int i = 0; i < g.n; ++i) {
    double sum = 0.0;
    for (SpMat::InnerIterator it(g.adjacency, i); it; ++it) sum += it.value();
    if (sum <= 0.0) continue;
    for (SpMat::InnerIterator it(g.adjacency, i); it; ++it)
      trips.emplace_back(i, static_cast<int>(it.col()), it.value() / sum);
  }
  SpMat W(g.n, g.n);
  W.setFromTriplets(trips.begin(), trips.end());
  W.makeCompressed();
  return {W, true};
}

// Lazy-walk weights A/dmax + diag(1 - deg/dmax): row-stochastic and,
// unlike plain degree normalization, symmetric, so I - W is a valid
// (scaled-Laplacian) precision matrix.
WeightMatrix lazy_walk_weights(const Graph& g) {
  Vec deg = Vec::Zero(g.n);
  for (int i = 0; i < g.n; ++i)
    for (SpMat::InnerIterator it(g.adjacency, i); it; ++it) deg[i] += it.value();
  const double dmax = deg.maxCoeff() + 1.0;
  std::vector<Triplet> trips;
  for (int i = 0; i < g.n; ++i) {
    for (SpMat::InnerIterator it(g.adjacency, i); it; ++it)
      trips.emplace_back(i, static_cast<int>(it.col()), it.value() / dmax);
    trips.emplace_back(i, i, 1.0 - deg[i] / dmax);
  }
  SpMat W(g.n, g.n);
  W.setFromTriplets(trips.begin(), trips.end());
  W.makeCompressed();
  return {W, true};
}

std::vector<int> read_label_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<int> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::stringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;
    std::string extra;
    size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || (ss >> extra))
      throw std::runtime_error(path + ": bad label on line " + std::to_string(lineno));
    out.push_back(v);
  }
  return out;
}

void write_label_file(const std::vector<int>& labels, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  for (int v : labels) f << v << "\n";
}

// Rows of "a b c" or "a,b,c" with a fixed column count.
std::vector<std::vector<double>> read_numeric_rows(const std::string& path,
                                                   int columns) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    for (char& c : line)
      if (c == ',' || c == '\t') c = ' ';
    std::stringstream ss(line);
    std::vector<double> row;
    double v = 0.0;
    while (ss >> v) row.push_back(v);
    if (row.empty()) continue;
    if (static_cast<int>(row.size()) != columns)
      throw std::runtime_error(path + ": expected " + std::to_string(columns) +
                               " values on line " + std::to_string(lineno));
    out.push_back(std::move(row));
  }
  return out;
}

int numeric_rank(const Mat& M) {
  if (M.size() == 0) return 0;
  Eigen::BDCSVD<Mat> svd(M);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s[0] <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > 1e-6 * s[0]) ++r;
  return r;
}

json report_json(const SolverReport& rep, bool with_history = true) {
  json j{{"iterations", rep.iterations}, {"converged", rep.converged}};
  if (with_history && !rep.objective_history.empty())
    j["objective_history"] = rep.objective_history;
  return j;
}

double best_permuted_accuracy(const std::vector<int>& got,
                              const std::vector<int>& want, int k) {
  if (k > 8) throw std::runtime_error("accuracy check supports at most 8 clusters");
  std::vector<int> perm(k);
  for (int i = 0; i < k; ++i) perm[i] = i;
  double best = 0.0;
  do {
    int hits = 0;
    for (size_t i = 0; i < got.size(); ++i)
      if (got[i] >= 0 && got[i] < k && perm[got[i]] == want[i]) ++hits;
    best = std::max(best, static_cast<double>(hits) / got.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// ---------------------------------------------------------------- spectral-stats

struct SpectralStatsOpts {
  CommonOpts common;
  CoraOpts cora;
  GraphOpts graph;
  double gamma = 1.0;
};

void run_spectral_stats(const SpectralStatsOpts& o) {
  apply_threads(o.common);
  Graph g;
  json config{{"gamma", o.gamma}};
  json results;
  if (!o.graph.edges.empty()) {
    g = read_edge_list(o.graph.edges, false, o.graph.nodes);
    config["edges"] = o.graph.edges;
  } else {
    const std::string content = find_data_file(o.cora.content, "cora.content");
    const std::string cites = find_data_file(o.cora.cites, "cora.cites");
    Dataset ds = load_cora(content, cites, o.cora.row_normalize);
    g = ds.g;
    config["row_normalize"] = o.cora.row_normalize;
    results["features"] = ds.X.cols();
    results["classes"] = ds.num_classes();
  }
  const DegreeStats stats = degree_stats(g);
  const SpMat L = laplacian(g, {LaplacianKind::SymNormalized, o.gamma});
  auto [pair, rep] = extreme_eigen(L, EigenWhich::Largest);
  const double estimate = lambda_max_estimate(stats, o.gamma);

  std::printf("spectral-stats\n");
  trow("nodes", g.n);
  trow("edge ends", stats.edge_end_count);
  if (results.contains("features")) {
    trow("features", results["features"].get<int>());
    trow("classes", results["classes"].get<int>());
  }
  trow("mean degree", stats.mean_degree);
  trow("max degree", stats.max_degree);
  trow("min degree", stats.min_degree);
  trow("lambda_max", pair.value);
  trow("lambda_max estimate", estimate);

  results["n"] = g.n;
  results["edge_end_count"] = stats.edge_end_count;
  results["mean_degree"] = stats.mean_degree;
  results["max_degree"] = stats.max_degree;
  results["min_degree"] = stats.min_degree;
  results["lambda_max"] = pair.value;
  results["lambda_max_estimate"] = estimate;
  results["eigen_iterations"] = rep.iterations;
  results["eigen_converged"] = rep.converged;
  emit_json(o.common, {{"command", "spectral-stats"},
                       {"config", config},
                       {"results", results},
                       {"seed", o.common.seed}});
}

void register_spectral_stats(CLI::App& app) {
  auto o = std::make_shared<SpectralStatsOpts>();
  CLI::App* sub = app.add_subcommand(
      "spectral-stats", "degree and Laplacian-spectrum statistics of a graph");
  add_cora_options(sub, o->cora, false, false);
  add_graph_options(sub, o->graph, false);
  sub->add_option("--gamma", o->gamma, "self-loop weight")->capture_default_str();
  add_common(sub, o->common);
  sub->callback([o] { run_spectral_stats(*o); });
}

// ------------------------------------------------------------------------ filter

struct FilterCmdOpts {
  CommonOpts common;
  GraphOpts graph;
  FilterOpts filter;
  std::string x_path;
  std::string out_x;
  bool iterative = false;
  int ar_steps = 0;
};

void run_filter(const FilterCmdOpts& o) {
  apply_threads(o.common);
  const Graph g = read_edge_list(o.graph.edges, false, o.graph.nodes);
  const Mat X = read_csv_matrix(o.x_path);
  if (X.rows() != g.n)
    throw std::runtime_error("feature rows (" + std::to_string(X.rows()) +
                             ") do not match graph nodes (" + std::to_string(g.n) + ")");
  const FilterMode mode = o.iterative ? FilterMode::Iterative : FilterMode::Direct;
  auto [Xf, rep] = apply_filter(g, to_spec(o.filter), X, mode, o.ar_steps);
  if (!o.out_x.empty()) write_csv_matrix(Xf, o.out_x);

  std::printf("filter\n");
  trow("filter", filter_name(o.filter.kind));
  trow("nodes", g.n);
  trow("columns", static_cast<long long>(X.cols()));
  trow("mode", o.iterative ? "iterative" : "direct");
  trow("iterations", rep.iterations);
  trow("input norm", X.norm());
  trow("output norm", Xf.norm());

  json config = filter_config_json(o.filter);
  config["edges"] = o.graph.edges;
  config["x"] = o.x_path;
  config["mode"] = o.iterative ? "iterative" : "direct";
  if (o.ar_steps > 0) config["ar_steps"] = o.ar_steps;
  json results{{"iterations", rep.iterations},
               {"converged", rep.converged},
               {"input_norm", X.norm()},
               {"output_norm", Xf.norm()}};
  if (!o.out_x.empty()) results["out_x"] = o.out_x;
  emit_json(o.common, {{"command", "filter"},
                       {"config", config},
                       {"results", results},
                       {"seed", o.common.seed}});
}

void register_filter(CLI::App& app) {
  auto o = std::make_shared<FilterCmdOpts>();
  CLI::App* sub =
      app.add_subcommand("filter", "apply a spectral filter to a feature matrix");
  add_graph_options(sub, o->graph, true);
  sub->add_option("--x", o->x_path, "feature matrix CSV, one node per row")
      ->required();
  add_filter_options(sub, o->filter);
  sub->add_flag("--iterative", o->iterative,
                "expand the autoregressive filter as a power series");
  sub->add_option("--ar-steps", o->ar_steps,
                  "series length override for --iterative")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--out-x", o->out_x, "write the filtered matrix as CSV");
  add_common(sub, o->common);
  sub->callback([o] { run_filter(*o); });
}

// --------------------------------------------------------------------- labelprop

struct LabelpropOpts {
  CommonOpts common;
  GraphOpts graph;
  std::string labels_path;
  std::string out_labels;
  double alpha = 0.99;
  bool iterate = false;
  double tol = 1e-8;
  int max_iter = 10000;
};

void run_labelprop(const LabelpropOpts& o) {
  apply_threads(o.common);
  const Graph g = read_edge_list(o.graph.edges, false, o.graph.nodes);
  const std::vector<int> raw = read_label_file(o.labels_path);
  if (static_cast<int>(raw.size()) != g.n)
    throw std::runtime_error("label file has " + std::to_string(raw.size()) +
                             " rows for " + std::to_string(g.n) + " nodes");
  int num_classes = 0;
  std::vector<bool> labeled(raw.size(), false);
  int labeled_count = 0;
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0) continue;
    labeled[i] = true;
    ++labeled_count;
    num_classes = std::max(num_classes, raw[i] + 1);
  }
  if (labeled_count == 0) throw std::runtime_error("no labeled nodes (all -1)");
  const LabelMatrix Y = make_label_matrix(raw, labeled, num_classes);
  const WeightMatrix W = row_stochastic_adjacency(g);

  Mat F;
  SolverReport rep;
  if (o.iterate) {
    auto [Fi, ri] = lp_iterate(W, Y.Y, o.alpha, o.tol, o.max_iter);
    F = Fi;
    rep = ri;
  } else {
    F = lp_closed_form(W, Y.Y, o.alpha);
  }
  const std::vector<int> preds = hard_labels(F);
  if (!o.out_labels.empty()) write_label_file(preds, o.out_labels);

  std::vector<long long> histogram(num_classes, 0);
  for (int p : preds) ++histogram[p];

  std::printf("labelprop\n");
  trow("nodes", g.n);
  trow("labeled", labeled_count);
  trow("classes", num_classes);
  trow("mode", o.iterate ? "iterate" : "closed");
  if (o.iterate) trow("iterations", rep.iterations);
  for (int c = 0; c < num_classes; ++c)
    trow("class " + std::to_string(c), histogram[c]);

  json config{{"edges", o.graph.edges},
              {"labels", o.labels_path},
              {"alpha", o.alpha},
              {"mode", o.iterate ? "iterate" : "closed"}};
  json results{{"n", g.n},
               {"labeled", labeled_count},
               {"classes", num_classes},
               {"histogram", histogram},
               {"predictions", preds}};
  if (o.iterate) {
    results["iterations"] = rep.iterations;
    results["converged"] = rep.converged;
  }
  if (!o.out_labels.empty()) results["out_labels"] = o.out_labels;
  emit_json(o.common, {{"command", "labelprop"},
                       {"config", config},
                       {"results", results},
                       {"seed", o.common.seed}});
}

void register_labelprop(CLI::App& app) {
  auto o = std::make_shared<LabelpropOpts>();
  CLI::App* sub = app.add_subcommand(
      "labelprop", "diffuse partial labels over a graph; -1 marks unlabeled");
  add_graph_options(sub, o->graph, true);
  sub->add_option("--labels", o->labels_path,
                  "label file, one class index per node (-1 = unlabeled)")
      ->required();
  sub->add_option("--alpha", o->alpha, "diffusion retention")
      ->check(CLI::Range(0.0, 0.9999))
      ->capture_default_str();
  sub->add_flag("--iterate", o->iterate,
                "use the diffusion iteration instead of the closed form");
  sub->add_option("--tol", o->tol, "iteration stop tolerance")->capture_default_str();
  sub->add_option("--max-iter", o->max_iter, "iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--out-labels", o->out_labels, "write predicted labels here");
  add_common(sub, o->common);
  sub->callback([o] { run_labelprop(*o); });
}

// --------------------------------------------------------------------------- crf

struct CrfOpts {
  CommonOpts common;
  GraphOpts graph;
  std::string observed_path;
  std::string out_x;
  double lambda = 0.0;
  bool observation_bias = false;
  BiasAnchor anchor = BiasAnchor::Observations;
};

const std::map<std::string, BiasAnchor> kAnchorNames{
    {"observations", BiasAnchor::Observations}, {"bias", BiasAnchor::Bias}};

void run_crf(const CrfOpts& o) {
  apply_threads(o.common);
  const Graph g = read_edge_list(o.graph.edges, false, o.graph.nodes);
  std::vector<std::vector<double>> rows = read_numeric_rows(o.observed_path, 2);
  if (rows.empty()) throw std::runtime_error("no observed values given");
  std::vector<bool> observed_mask(g.n, false);
  std::vector<std::pair<int, double>> entries;
  for (const auto& row : rows) {
    const int i = static_cast<int>(row[0]);
    if (static_cast<double>(i) != row[0] || i < 0 || i >= g.n)
      throw std::runtime_error("observed node index out of range");
    if (observed_mask[i]) throw std::runtime_error("node observed twice");
    observed_mask[i] = true;
    entries.emplace_back(i, row[1]);
  }
  if (static_cast<int>(entries.size()) == g.n)
    throw std::runtime_error("every node is observed; nothing to infer");
  std::sort(entries.begin(), entries.end());

  const WeightMatrix W = lazy_walk_weights(g);
  const Mat Q = Mat(Mat::Identity(g.n, g.n)) - Mat(W.W);
  const PartitionedPrecision P = partition_precision(Q, observed_mask);
  Vec y(entries.size());
  for (size_t t = 0; t < entries.size(); ++t) y[static_cast<int>(t)] = entries[t].second;

  Vec x_full = Vec::Zero(g.n);
  json results;
  if (o.lambda > 0.0) {
    const BiasedSolution sol =
        o.observation_bias ? crf_biased_observations(P, o.lambda, y, o.anchor)
                           : crf_biased_states(P, o.lambda, y);
    for (size_t t = 0; t < P.observed.size(); ++t)
      x_full[P.observed[t]] = sol.y[static_cast<int>(t)];
    for (size_t t = 0; t < P.latent.size(); ++t)
      x_full[P.latent[t]] = sol.x[static_cast<int>(t)];
    results["bias"] = std::vector<double>(sol.b.data(), sol.b.data() + sol.b.size());
    results["block_residual"] = sol.report.residual_history.empty()
                                    ? 0.0
                                    : sol.report.residual_history.back();
  } else {
    const Vec xl = crf_expectation(P, y);
    for (size_t t = 0; t < P.observed.size(); ++t)
      x_full[P.observed[t]] = y[static_cast<int>(t)];
    for (size_t t = 0; t < P.latent.size(); ++t)
      x_full[P.latent[t]] = xl[static_cast<int>(t)];
  }
  if (!o.out_x.empty()) {
    Mat col(g.n, 1);
    col.col(0) = x_full;
    write_csv_matrix(col, o.out_x);
  }

  std::printf("crf\n");
  trow("nodes", g.n);
  trow("observed", static_cast<long long>(entries.size()));
  trow("model", o.lambda > 0.0 ? (o.observation_bias ? "biased-observations"
                                                      : "biased-states")
                               : "expectation");
  if (o.lambda > 0.0) trow("lambda", o.lambda);
  trow("energy order 1", graph_energy(W, x_full, 1));
  trow("energy order 2", graph_energy(W, x_full, 2));
  trow("min state", x_full.minCoeff());
  trow("max state", x_full.maxCoeff());

  json config{{"edges", o.graph.edges},
              {"observed", o.observed_path},
              {"lambda", o.lambda}};
  if (o.lambda > 0.0) {
    config["model"] = o.observation_bias ? "observations" : "states";
    if (o.observation_bias)
      config["anchor"] =
          o.anchor == BiasAnchor::Observations ? "observations" : "bias";
  }
  results["states"] = std::vector<double>(x_full.data(), x_full.data() + g.n);
  results["energy_order1"] = graph_energy(W, x_full, 1);
  results["energy_order2"] = graph_energy(W, x_full, 2);
  if (!o.out_x.empty()) results["out_x"] = o.out_x;
  emit_json(o.common, {{"command", "crf"},
                       {"config", config},
                       {"results", results},
                       {"seed", o.common.seed}});
}

void register_crf(CLI::App& app) {
  auto o = std::make_shared<CrfOpts>();
  CLI::App* sub = app.add_subcommand(
      "crf", "Gaussian conditional-expectation inference of latent node states");
  add_graph_options(sub, o->graph, true);
  sub->add_option("--observed", o->observed_path,
                  "file of 'node value' rows fixing observed states")
      ->required();
  sub->add_option("--lambda", o->lambda,
                  "bias coupling; 0 gives the plain conditional mean")
      ->check(CLI::Range(0.0, 0.9999))
      ->capture_default_str();
  sub->add_flag("--observation-bias", o->observation_bias,
                "couple the bias to observations instead of latent states");
  sub->add_option("--anchor", o->anchor,
                  "which block the observed values pin: observations | bias")
      ->transform(CLI::CheckedTransformer(kAnchorNames, CLI::ignore_case))
      ->default_str("observations");
  sub->add_option("--out-x", o->out_x, "write the full state vector as CSV");
  add_common(sub, o->common);
  sub->callback([o] { run_crf(*o); });
}

// --------------------------------------------------------------------- train-gcn

struct TrainGcnOpts {
  CommonOpts common;
  CoraOpts cora;
  FilterOpts filter;
  TrainOpts train;
  std::string save_path;
};

void run_train_gcn(const TrainGcnOpts& o) {
  apply_threads(o.common);
  const Dataset ds = load_cora_dataset(o.cora);
  TrainConfig config = to_config(o.train, o.common.seed);
  auto [model, metrics] = train_gcn(ds, to_spec(o.filter), config);
  if (!o.save_path.empty()) save_checkpoint(model, o.save_path);

  std::printf("train-gcn\n");
  trow("filter", filter_name(o.filter.kind));
  print_metrics_table(metrics);

  json cfg = train_config_json(o.train);
  cfg.update(filter_config_json(o.filter));
  cfg.update(cora_config_json(o.cora));
  emit_json(o.common, metrics_json(metrics, cfg));
}

void register_train_gcn(CLI::App& app) {
  auto o = std::make_shared<TrainGcnOpts>();
  CLI::App* sub = app.add_subcommand(
      "train-gcn", "train a two-layer graph convolutional classifier");
  add_cora_options(sub, o->cora, true, true);
  add_filter_options(sub, o->filter);
  add_train_options(sub, o->train, 200);
  sub->add_option("--save", o->save_path, "write the best checkpoint here");
  add_common(sub, o->common);
  sub->callback([o] { run_train_gcn(*o); });
}

// --------------------------------------------------------------------- eta-sweep

struct EtaSweepOpts {
  CommonOpts common;
  CoraOpts cora;
  FilterOpts filter;
  TrainOpts train;
  std::string etas_text = "0.5,0.66,1,2";
  int seeds = 5;
};

void run_eta_sweep(const EtaSweepOpts& o) {
  apply_threads(o.common);
  const std::vector<double> etas = parse_double_list(o.etas_text);
  const Dataset ds = load_cora_dataset(o.cora);

  std::printf("eta-sweep (%s, %d seeds, %d epochs)\n",
              filter_name(o.filter.kind).c_str(), o.seeds, o.train.epochs);
  std::vector<double> medians;
  std::vector<std::vector<double>> per_seed;
  for (double eta : etas) {
    FilterSpec spec = to_spec(o.filter);
    spec.eta = eta;
    // the propagation operator does not depend on the seed, so
    // materialize it and the filtered features once per eta
    const Propagator P = propagation_matrix(ds.g, spec);
    const Mat PX = P.apply(ds.X);
    std::vector<double> accs;
    for (int s = 0; s < o.seeds; ++s) {
      TrainConfig config = to_config(o.train, o.common.seed + static_cast<unsigned>(s));
      auto [model, metrics] = train_gcn(ds, spec, config, &P, &PX);
      accs.push_back(metrics.test_acc);
    }
    std::vector<double> sorted = accs;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    medians.push_back(median);
    per_seed.push_back(accs);
    trow("eta " + fmt4(eta), median);
  }

  json cfg = train_config_json(o.train);
  cfg.update(filter_config_json(o.filter));
  cfg.update(cora_config_json(o.cora));
  cfg["etas"] = etas;
  cfg["seeds"] = o.seeds;
  emit_json(o.common, {{"command", "eta-sweep"},
                       {"config", cfg},
                       {"results",
                        {{"etas", etas},
                         {"median_test_accuracy", medians},
                         {"per_seed_test_accuracy", per_seed}}},
                       {"seed", o.common.seed}});
}

void register_eta_sweep(CLI::App& app) {
  auto o = std::make_shared<EtaSweepOpts>();
  CLI::App* sub = app.add_subcommand(
      "eta-sweep", "median test accuracy across filter strengths");
  add_cora_options(sub, o->cora, true, true);
  add_filter_options(sub, o->filter, FilterKind::Residual);
  add_train_options(sub, o->train, 50);
  sub->add_option("--etas", o->etas_text, "comma-separated filter strengths")
      ->capture_default_str();
  sub->add_option("--seeds", o->seeds, "number of consecutive seeds to run")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(sub, o->common);
  sub->callback([o] { run_eta_sweep(*o); });
}

// -------------------------------------------------------------------------- net1

struct Net1Opts {
  CommonOpts common;
  CoraOpts cora;
  FilterOpts filter;
  TrainOpts train;
  double lp_alpha = 0.99;
  int knn_k = 10;
};

void run_net1(const Net1Opts& o) {
  apply_threads(o.common);
  const Dataset ds = load_cora_dataset(o.cora);
  TrainConfig config = to_config(o.train, o.common.seed);
  const Metrics metrics =
      net1_pipeline(ds, to_spec(o.filter), config, o.lp_alpha, o.knn_k);

  std::printf("net1\n");
  trow("filter", filter_name(o.filter.kind));
  trow("lp alpha", o.lp_alpha);
  trow("knn k", o.knn_k);
  print_metrics_table(metrics);

  json cfg = train_config_json(o.train);
  cfg.update(filter_config_json(o.filter));
  cfg.update(cora_config_json(o.cora));
  cfg["lp_alpha"] = o.lp_alpha;
  cfg["knn_k"] = o.knn_k;
  emit_json(o.common, metrics_json(metrics, cfg));
}

void register_net1(CLI::App& app) {
  auto o = std::make_shared<Net1Opts>();
  CLI::App* sub = app.add_subcommand(
      "net1",
      "train a classifier, then propagate labels over its embedding graph");
  add_cora_options(sub, o->cora, true, true);
  add_filter_options(sub, o->filter);
  add_train_options(sub, o->train, 100);
  sub->add_option("--lp-alpha", o->lp_alpha, "label diffusion retention")
      ->check(CLI::Range(0.0, 0.9999))
      ->capture_default_str();
  sub->add_option("--knn-k", o->knn_k, "embedding neighborhood size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(sub, o->common);
  sub->callback([o] { run_net1(*o); });
}

// --------------------------------------------------------------------------- lrr

struct LrrOpts {
  CommonOpts common;
  std::string x_path;
  std::string out_z;
  std::string out_e;
  double lambda = 10.0;
  double tol = 1e-6;
  int max_iter = 1000;
};

void run_lrr(const LrrOpts& o) {
  apply_threads(o.common);
  const Mat X = read_csv_matrix(o.x_path);
  const LrrResult res = lrr_alm(X, o.lambda, 1e-2, 1e6, 1.5, o.tol, o.max_iter);
  if (!o.out_z.empty()) write_csv_matrix(res.Z, o.out_z);
  if (!o.out_e.empty()) write_csv_matrix(res.E, o.out_e);

  const double e_max = res.E.cwiseAbs().maxCoeff();
  int noisy_cols = 0;
  for (int j = 0; j < res.E.cols(); ++j)
    if (res.E.col(j).norm() > 1e-8 * std::max(1.0, e_max)) ++noisy_cols;

  std::printf("lrr\n");
  trow("data", std::to_string(X.rows()) + " x " + std::to_string(X.cols()));
  trow("lambda", o.lambda);
  trow("rank(Z)", numeric_rank(res.Z));
  trow("noisy columns", noisy_cols);
  trow("residual", (X - X * res.Z - res.E).norm());
  trow("iterations", res.report.iterations);
  trow("converged", res.report.converged ? "yes" : "no");

  json results{{"rank_z", numeric_rank(res.Z)},
               {"noisy_columns", noisy_cols},
               {"residual", (X - X * res.Z - res.E).norm()},
               {"report", report_json(res.report)}};
  if (!o.out_z.empty()) results["out_z"] = o.out_z;
  if (!o.out_e.empty()) results["out_e"] = o.out_e;
  emit_json(o.common, {{"command", "lrr"},
                       {"config",
                        {{"x", o.x_path},
                         {"lambda", o.lambda},
                         {"tol", o.tol},
                         {"max_iter", o.max_iter}}},
                       {"results", results},
                       {"seed", o.common.seed}});
}

void register_lrr(CLI::App& app) {
  auto o = std::make_shared<LrrOpts>();
  CLI::App* sub = app.add_subcommand(
      "lrr", "low-rank self-representation with column-sparse error");
  sub->add_option("--x", o->x_path, "data matrix CSV, one point per column")
      ->required();
  sub->add_option("--lambda", o->lambda, "column-error penalty")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--tol", o->tol, "feasibility tolerance")->capture_default_str();
  sub->add_option("--max-iter", o->max_iter, "iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--out-z", o->out_z, "write the representation matrix as CSV");
  sub->add_option("--out-e", o->out_e, "write the error matrix as CSV");
  add_common(sub, o->common);
  sub->callback([o] { run_lrr(*o); });
}

// --------------------------------------------------------------------------- ssc

struct SscOpts {
  CommonOpts common;
  std::string x_path;
  std::string out_z;
  double lambda = 0.05;
  double tol = 1e-8;
  int max_iter = 2000;
};

void run_ssc(const SscOpts& o) {
  apply_threads(o.common);
  const Mat X = read_csv_matrix(o.x_path);
  auto [Z, rep] = ssc(X, o.lambda, o.tol, o.max_iter);
  if (!o.out_z.empty()) write_csv_matrix(Z, o.out_z);

  const double z_max = Z.cwiseAbs().maxCoeff();
  long long support = 0;
  for (int i = 0; i < Z.rows(); ++i)
    for (int j = 0; j < Z.cols(); ++j)
      if (std::abs(Z(i, j)) > 1e-8 * std::max(1.0, z_max)) ++support;

  std::printf("ssc\n");
  trow("data", std::to_string(X.rows()) + " x " + std::to_string(X.cols()));
  trow("lambda", o.lambda);
  trow("support entries", support);
  trow("residual", (X - X * Z).norm());
  trow("iterations", rep.iterations);
  trow("converged", rep.converged ? "yes" : "no");

  json results{{"support_entries", support},
               {"residual", (X - X * Z).norm()},
               {"report", report_json(rep)}};
  if (!o.out_z.empty()) results["out_z"] = o.out_z;
  emit_json(o.common, {{"command", "ssc"},
                       {"config",
                        {{"x", o.x_path},
                         {"lambda", o.lambda},
                         {"tol", o.tol},
                         {"max_iter", o.max_iter}}},
                       {"results", results},
                       {"seed", o.common.seed}});
}

void register_ssc(CLI::App& app) {
  auto o = std::make_shared<SscOpts>();
  CLI::App* sub = app.add_subcommand(
      "ssc", "sparse self-representation with a zero diagonal");
  sub->add_option("--x", o->x_path, "data matrix CSV, one point per column")
      ->required();
  sub->add_option("--lambda", o->lambda, "sparsity penalty")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--tol", o->tol, "stop tolerance")->capture_default_str();
  sub->add_option("--max-iter", o->max_iter, "iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--out-z", o->out_z, "write the representation matrix as CSV");
  add_common(sub, o->common);
  sub->callback([o] { run_ssc(*o); });
}

// -------------------------------------------------------------------------- rpca

struct RpcaOpts {
  CommonOpts common;
  std::string x_path;
  std::string out_l;
  std::string out_s;
  double rho = 0.0;
  double tol = 1e-7;
  int max_iter = 1000;
};

void run_rpca(const RpcaOpts& o) {
  apply_threads(o.common);
  const Mat M = read_csv_matrix(o.x_path);
  const double rho =
      o.rho > 0.0 ? o.rho
                  : 1.0 / std::sqrt(static_cast<double>(std::max(M.rows(), M.cols())));
  const RpcaResult res = rpca(M, rho, o.tol, o.max_iter);
  if (!o.out_l.empty()) write_csv_matrix(res.Lr, o.out_l);
  if (!o.out_s.empty()) write_csv_matrix(res.S, o.out_s);

  const double s_max = res.S.cwiseAbs().maxCoeff();
  long long spikes = 0;
  for (int i = 0; i < res.S.rows(); ++i)
    for (int j = 0; j < res.S.cols(); ++j)
      if (std::abs(res.S(i, j)) > 1e-8 * std::max(1.0, s_max)) ++spikes;

  std::printf("rpca\n");
  trow("data", std::to_string(M.rows()) + " x " + std::to_string(M.cols()));
  trow("rho", rho);
  trow("rank(L)", numeric_rank(res.Lr));
  trow("spike entries", spikes);
  trow("residual", (M - res.Lr - res.S).norm());
  trow("iterations", res.report.iterations);
  trow("converged", res.report.converged ? "yes" : "no");

  json results{{"rank_l", numeric_rank(res.Lr)},
               {"spike_entries", spikes},
               {"residual", (M - res.Lr - res.S).norm()},
               {"report", report_json(res.report)}};
  if (!o.out_l.empty()) results["out_l"] = o.out_l;
  if (!o.out_s.empty()) results["out_s"] = o.out_s;
  emit_json(o.common, {{"command", "rpca"},
                       {"config",
                        {{"x", o.x_path},
                         {"rho", rho},
                         {"tol", o.tol},
                         {"max_iter", o.max_iter}}},
                       {"results", results},
                       {"seed", o.common.seed}});
}

void register_rpca(CLI::App& app) {
  auto o = std::make_shared<RpcaOpts>();
  CLI::App* sub = app.add_subcommand(
      "rpca", "split a matrix into low-rank plus sparse parts");
  sub->add_option("--x", o->x_path, "data matrix CSV")->required();
  sub->add_option("--rho", o->rho,
                  "sparse penalty; 0 picks 1/sqrt(max dimension)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--tol", o->tol, "feasibility tolerance")->capture_default_str();
  sub->add_option("--max-iter", o->max_iter, "iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--out-l", o->out_l, "write the low-rank part as CSV");
  sub->add_option("--out-s", o->out_s, "write the sparse part as CSV");
  add_common(sub, o->common);
  sub->callback([o] { run_rpca(*o); });
}

// ---------------------------------------------------------------------- complete

struct CompleteOpts {
  CommonOpts common;
  std::string observed_path;
  std::string out_x;
  std::string schedule_text;
  int rows = 0;
  int cols = 0;
  double tol = 1e-8;
  int max_iter = 2000;
};

void run_complete(const CompleteOpts& o) {
  apply_threads(o.common);
  ObservedEntries observed;
  for (const auto& row : read_numeric_rows(o.observed_path, 3)) {
    const int i = static_cast<int>(row[0]);
    const int j = static_cast<int>(row[1]);
    if (static_cast<double>(i) != row[0] || static_cast<double>(j) != row[1])
      throw std::runtime_error("observed entry indices must be integers");
    observed.emplace_back(i, j, row[2]);
  }
  std::vector<double> schedule;
  if (!o.schedule_text.empty()) schedule = parse_double_list(o.schedule_text);
  auto [X, rep] = matrix_complete(observed, o.rows, o.cols, schedule, o.tol, o.max_iter);
  if (!o.out_x.empty()) write_csv_matrix(X, o.out_x);

  std::printf("complete\n");
  trow("shape", std::to_string(o.rows) + " x " + std::to_string(o.cols));
  trow("observed", static_cast<long long>(observed.size()));
  trow("rank", numeric_rank(X));
  trow("iterations", rep.iterations);
  trow("converged", rep.converged ? "yes" : "no");

  json config{{"observed", o.observed_path},
              {"rows", o.rows},
              {"cols", o.cols},
              {"tol", o.tol},
              {"max_iter", o.max_iter}};
  if (!schedule.empty()) config["lambda_schedule"] = schedule;
  json results{{"rank", numeric_rank(X)},
               {"observed_entries", observed.size()},
               {"report", report_json(rep)}};
  if (!o.out_x.empty()) results["out_x"] = o.out_x;
  emit_json(o.common, {{"command", "complete"},
                       {"config", config},
                       {"results", results},
                       {"seed", o.common.seed}});
}

void register_complete(CLI::App& app) {
  auto o = std::make_shared<CompleteOpts>();
  CLI::App* sub = app.add_subcommand(
      "complete", "fill in a partially observed matrix at low rank");
  sub->add_option("--observed", o->observed_path,
                  "file of 'i j value' rows for the known entries")
      ->required();
  sub->add_option("--rows", o->rows, "matrix row count")
      ->check(CLI::PositiveNumber)
      ->required();
  sub->add_option("--cols", o->cols, "matrix column count")
      ->check(CLI::PositiveNumber)
      ->required();
  sub->add_option("--lambda-schedule", o->schedule_text,
                  "comma-separated decreasing shrinkage values");
  sub->add_option("--tol", o->tol, "stop tolerance")->capture_default_str();
  sub->add_option("--max-iter", o->max_iter, "iteration cap per shrinkage value")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--out-x", o->out_x, "write the completed matrix as CSV");
  add_common(sub, o->common);
  sub->callback([o] { run_complete(*o); });
}

// ----------------------------------------------------------------------- cluster

struct ClusterOpts {
  CommonOpts common;
  std::string x_path;
  std::string truth_path;
  std::string out_labels;
  SubspaceMethod method = SubspaceMethod::Lrr;
  int k = 0;
  double lambda = 0.0;
  double tol = 1e-6;
  int max_iter = 1000;
  int restarts = 5;
};

const std::map<std::string, SubspaceMethod> kMethodNames{
    {"lrr", SubspaceMethod::Lrr}, {"ssc", SubspaceMethod::Ssc}};

void run_cluster(const ClusterOpts& o) {
  apply_threads(o.common);
  const Mat X = read_csv_matrix(o.x_path);
  SubspaceClusterParams params;
  // lambda scales differ between the two representations
  params.lambda = o.lambda > 0.0
                      ? o.lambda
                      : (o.method == SubspaceMethod::Lrr ? 10.0 : 0.05);
  params.tol = o.tol;
  params.max_iter = o.max_iter;
  params.seed = o.common.seed;
  params.restarts = o.restarts;
  const std::vector<int> labels = subspace_cluster(X, o.method, o.k, params);
  if (!o.out_labels.empty()) write_label_file(labels, o.out_labels);

  std::vector<long long> sizes(o.k, 0);
  for (int c : labels) ++sizes[c];

  std::printf("cluster\n");
  trow("points", static_cast<long long>(X.cols()));
  trow("method", o.method == SubspaceMethod::Lrr ? "lrr" : "ssc");
  trow("clusters", o.k);
  trow("lambda", params.lambda);
  for (int c = 0; c < o.k; ++c) trow("cluster " + std::to_string(c), sizes[c]);

  json results{{"sizes", sizes}, {"labels", labels}};
  if (!o.truth_path.empty()) {
    const std::vector<int> truth = read_label_file(o.truth_path);
    if (truth.size() != labels.size())
      throw std::runtime_error("truth labels do not match point count");
    const double acc = best_permuted_accuracy(labels, truth, o.k);
    trow("accuracy", acc);
    results["accuracy"] = acc;
  }
  if (!o.out_labels.empty()) results["out_labels"] = o.out_labels;
  emit_json(o.common, {{"command", "cluster"},
                       {"config",
                        {{"x", o.x_path},
                         {"method", o.method == SubspaceMethod::Lrr ? "lrr" : "ssc"},
                         {"k", o.k},
                         {"lambda", params.lambda},
                         {"tol", o.tol},
                         {"max_iter", o.max_iter},
                         {"restarts", o.restarts}}},
                       {"results", results},
                       {"seed", o.common.seed}});
}

void register_cluster(CLI::App& app) {
  auto o = std::make_shared<ClusterOpts>();
  CLI::App* sub = app.add_subcommand(
      "cluster", "cluster points by the subspaces they lie in");
  sub->add_option("--x", o->x_path, "data matrix CSV, one point per column")
      ->required();
  sub->add_option("--k", o->k, "number of clusters")
      ->check(CLI::PositiveNumber)
      ->required();
  sub->add_option("--method", o->method, "representation: lrr | ssc")
      ->transform(CLI::CheckedTransformer(kMethodNames, CLI::ignore_case))
      ->default_str("lrr");
  sub->add_option("--lambda", o->lambda,
                  "representation penalty; 0 picks a method default")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--tol", o->tol, "solver tolerance")->capture_default_str();
  sub->add_option("--max-iter", o->max_iter, "solver iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--restarts", o->restarts, "k-means restarts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--truth", o->truth_path,
                  "ground-truth labels for a permutation-matched accuracy");
  sub->add_option("--out-labels", o->out_labels, "write cluster labels here");
  add_common(sub, o->common);
  sub->callback([o] { run_cluster(*o); });
}

// ------------------------------------------------------------------------- synth

struct SynthOpts {
  CommonOpts common;
  std::string kind;
  std::string out_x;
  std::string out_edges;
  std::string out_labels;
  std::string subspace_dims_text = "2,2";
  std::string blocks_text = "20,20";
  int dims = 6;
  int points_per = 20;
  double noise = 0.0;
  double p_in = 0.5;
  double p_out = 0.05;
};

void run_synth(const SynthOpts& o) {
  apply_threads(o.common);
  json config{{"kind", o.kind}};
  json results;
  std::printf("synth (%s)\n", o.kind.c_str());
  if (o.kind == "subspaces") {
    if (o.out_x.empty()) throw UsageError("synth subspaces needs --out-x");
    const std::vector<int> sub_dims = parse_int_list(o.subspace_dims_text);
    auto [X, labels] =
        synth_union_of_subspaces(o.dims, sub_dims, o.points_per, o.noise, o.common.seed);
    write_csv_matrix(X, o.out_x);
    if (!o.out_labels.empty()) write_label_file(labels, o.out_labels);
    trow("dims", o.dims);
    trow("subspaces", static_cast<long long>(sub_dims.size()));
    trow("points", static_cast<long long>(X.cols()));
    trow("noise", o.noise);
    config["dims"] = o.dims;
    config["subspace_dims"] = sub_dims;
    config["points_per"] = o.points_per;
    config["noise"] = o.noise;
    results["points"] = X.cols();
    results["out_x"] = o.out_x;
  } else if (o.kind == "sbm") {
    if (o.out_edges.empty()) throw UsageError("synth sbm needs --out-edges");
    const std::vector<int> blocks = parse_int_list(o.blocks_text);
    auto [g, labels] = synth_sbm(blocks, o.p_in, o.p_out, o.common.seed);
    write_edge_list(g, o.out_edges);
    if (!o.out_labels.empty()) write_label_file(labels, o.out_labels);
    const DegreeStats stats = degree_stats(g);
    trow("nodes", g.n);
    trow("edge ends", stats.edge_end_count);
    trow("blocks", static_cast<long long>(blocks.size()));
    config["blocks"] = blocks;
    config["p_in"] = o.p_in;
    config["p_out"] = o.p_out;
    results["nodes"] = g.n;
    results["edge_end_count"] = stats.edge_end_count;
    results["out_edges"] = o.out_edges;
  } else {
    throw UsageError("unknown synth kind '" + o.kind + "' (subspaces | sbm)");
  }
  if (!o.out_labels.empty()) results["out_labels"] = o.out_labels;
  emit_json(o.common, {{"command", "synth"},
                       {"config", config},
                       {"results", results},
                       {"seed", o.common.seed}});
}

void register_synth(CLI::App& app) {
  auto o = std::make_shared<SynthOpts>();
  CLI::App* sub = app.add_subcommand(
      "synth", "generate seeded synthetic data: subspaces | sbm");
  sub->add_option("--kind", o->kind, "subspaces | sbm")->required();
  sub->add_option("--dims", o->dims, "ambient dimension (subspaces)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--subspace-dims", o->subspace_dims_text,
                  "comma-separated subspace dimensions")
      ->capture_default_str();
  sub->add_option("--points-per", o->points_per, "points per subspace")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--noise", o->noise, "feature noise level (subspaces)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--blocks", o->blocks_text, "comma-separated block sizes (sbm)")
      ->capture_default_str();
  sub->add_option("--p-in", o->p_in, "within-block edge probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_option("--p-out", o->p_out, "between-block edge probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_option("--out-x", o->out_x, "write generated features as CSV");
  sub->add_option("--out-edges", o->out_edges, "write the generated edge list");
  sub->add_option("--out-labels", o->out_labels, "write generated labels");
  add_common(sub, o->common);
  sub->callback([o] { run_synth(*o); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph semi-supervised learning and subspace toolkit"};
  app.require_subcommand(1);
  register_spectral_stats(app);
  register_filter(app);
  register_labelprop(app);
  register_crf(app);
  register_train_gcn(app);
  register_eta_sweep(app);
  register_net1(app);
  register_lrr(app);
  register_ssc(app);
  register_rpca(app);
  register_complete(app);
  register_cluster(app);
  register_synth(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
