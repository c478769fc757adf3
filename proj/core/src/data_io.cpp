#include "lapssl/data_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lapssl/rng.hpp"

namespace lapssl {

void Dataset::validate() const {
  const int nn = g.n;
  if (X.rows() != nn || static_cast<int>(labels.size()) != nn ||
      Y.Y.rows() != nn)
    throw std::invalid_argument("Dataset: field sizes disagree");
  if (static_cast<int>(train_mask.size()) != nn ||
      static_cast<int>(val_mask.size()) != nn ||
      static_cast<int>(test_mask.size()) != nn)
    throw std::invalid_argument("Dataset: mask sizes disagree");
  std::vector<bool> class_seen(class_names.size(), false);
  for (int i = 0; i < nn; ++i) {
    const int overlap = static_cast<int>(train_mask[i]) +
                        static_cast<int>(val_mask[i]) +
                        static_cast<int>(test_mask[i]);
    if (overlap > 1) throw std::invalid_argument("Dataset: masks overlap");
    if (train_mask[i]) class_seen[labels[i]] = true;
  }
  for (bool seen : class_seen)
    if (!seen)
      throw std::invalid_argument("Dataset: a class is missing from the train mask");
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream ss(line);
  while (ss >> tok) out.push_back(tok);
  return out;
}

long long parse_id(const std::string& tok, int lineno, const char* what) {
  try {
    size_t used = 0;
    const long long id = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing");
    return id;
  } catch (...) {
    throw std::runtime_error(std::string("load_cora: bad ") + what + " at line " +
                             std::to_string(lineno));
  }
}

}  // namespace

Dataset load_cora(const std::string& content_path, const std::string& cites_path,
                  bool row_normalize) {
  std::ifstream content(content_path);
  if (!content)
    throw std::runtime_error("load_cora: cannot open " + content_path);

  struct Row {
    long long id;
    std::vector<double> feats;
    std::string label;
  };
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  int d = -1;
  while (std::getline(content, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> toks = split_tabs(line);
    if (toks.size() < 3)
      throw std::runtime_error("load_cora: malformed content line " +
                               std::to_string(lineno));
    const int row_d = static_cast<int>(toks.size()) - 2;
    if (d < 0)
      d = row_d;
    else if (row_d != d)
      throw std::runtime_error("load_cora: column count mismatch at line " +
                               std::to_string(lineno));
    Row r;
    r.id = parse_id(toks.front(), lineno, "node id");
    r.feats.resize(d);
    for (int f = 0; f < d; ++f) {
      const std::string& t = toks[f + 1];
      if (t == "0")
        r.feats[f] = 0.0;
      else if (t == "1")
        r.feats[f] = 1.0;
      else
        throw std::runtime_error("load_cora: non-binary feature at line " +
                                 std::to_string(lineno));
    }
    r.label = toks.back();
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::runtime_error("load_cora: empty content file");

  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.id < b.id; });
  const int n = static_cast<int>(rows.size());
  std::map<long long, int> index;
  for (int i = 0; i < n; ++i)
    if (!index.emplace(rows[i].id, i).second)
      throw std::runtime_error("load_cora: duplicate node id " +
                               std::to_string(rows[i].id));

  Dataset ds;
  ds.X = Mat(n, d);
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < d; ++f) ds.X(i, f) = rows[i].feats[f];
  if (row_normalize)
    for (int i = 0; i < n; ++i) {
      const double s = ds.X.row(i).sum();
      if (s > 0) ds.X.row(i) /= s;
    }

  std::map<std::string, int> class_ids;
  for (const Row& r : rows) class_ids.emplace(r.label, 0);
  int next = 0;
  for (auto& [name, id] : class_ids) {
    id = next++;
    ds.class_names.push_back(name);
  }
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) ds.labels[i] = class_ids.at(rows[i].label);

  std::ifstream cites(cites_path);
  if (!cites) throw std::runtime_error("load_cora: cannot open " + cites_path);
  EdgeList edges;
  lineno = 0;
  while (std::getline(cites, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> toks = split_tabs(line);
    if (toks.size() != 2)
      throw std::runtime_error("load_cora: malformed cites line " +
                               std::to_string(lineno));
    const long long cited = parse_id(toks[0], lineno, "cited id");
    const long long citing = parse_id(toks[1], lineno, "citing id");
    const auto a = index.find(cited);
    const auto b = index.find(citing);
    if (a == index.end() || b == index.end())
      throw std::runtime_error("load_cora: cites line " + std::to_string(lineno) +
                               " references an unknown id");
    edges.emplace_back(a->second, b->second, 1.0);
  }
  ds.g = build_graph(n, edges, false);

  ds.Y = make_label_matrix(ds.labels, std::vector<bool>(n, true),
                           static_cast<int>(ds.class_names.size()));
  ds.train_mask.assign(n, false);
  ds.val_mask.assign(n, false);
  ds.test_mask.assign(n, false);
  return ds;
}

SplitMasks make_split(const Dataset& ds, const SplitSpec& spec) {
  const int n = ds.n();
  const int c = ds.num_classes();
  if (spec.per_class_train < 1)
    throw std::invalid_argument("make_split: per_class_train must be >= 1");
  if (spec.val < 0 || spec.test < 0)
    throw std::invalid_argument("make_split: negative split sizes");
  if (spec.per_class_train * c + spec.val + spec.test > n)
    throw std::invalid_argument("make_split: split sizes exceed node count");

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Prng rng(spec.seed);
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[rng.index(i + 1)]);

  SplitMasks masks;
  masks.train.assign(n, false);
  masks.val.assign(n, false);
  masks.test.assign(n, false);

  std::vector<int> quota(c, spec.per_class_train);
  int need = spec.per_class_train * c;
  for (int idx : order) {
    if (need == 0) break;
    int& q = quota[ds.labels[idx]];
    if (q > 0) {
      --q;
      --need;
      masks.train[idx] = true;
    }
  }
  if (need > 0)
    throw std::invalid_argument("make_split: a class has too few nodes for the quota");

  int want_val = spec.val, want_test = spec.test;
  for (int idx : order) {
    if (masks.train[idx]) continue;
    if (want_val > 0) {
      masks.val[idx] = true;
      --want_val;
    } else if (want_test > 0) {
      masks.test[idx] = true;
      --want_test;
    } else {
      break;
    }
  }
  return masks;
}

std::pair<Mat, std::vector<int>> synth_union_of_subspaces(
    int dims, const std::vector<int>& subspace_dims, int points_per,
    double noise_sigma, unsigned seed) {
  if (dims < 1 || points_per < 1 || subspace_dims.empty())
    throw std::invalid_argument("synth_union_of_subspaces: bad sizes");
  int total_rank = 0;
  for (int r : subspace_dims) {
    if (r < 1 || r >= dims)
      throw std::invalid_argument("synth_union_of_subspaces: subspace dim must be in [1, dims)");
    total_rank += r;
  }
  if (total_rank > dims)
    throw std::invalid_argument(
        "synth_union_of_subspaces: subspace dims exceed the ambient dimension");

  Prng rng(seed);
  Mat Gauss(dims, dims);
  for (int i = 0; i < dims; ++i)
    for (int j = 0; j < dims; ++j) Gauss(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(Gauss);
  Mat Q = qr.householderQ() * Mat::Identity(dims, dims);

  const int k = static_cast<int>(subspace_dims.size());
  const int n = k * points_per;
  Mat X(dims, n);
  std::vector<int> labels(n);
  int col = 0, base = 0;
  for (int s = 0; s < k; ++s) {
    const int r = subspace_dims[s];
    Mat B = Q.middleCols(base, r);
    base += r;
    for (int p = 0; p < points_per; ++p, ++col) {
      Vec coeff(r);
      for (int a = 0; a < r; ++a) coeff[a] = rng.uniform(-1.0, 1.0);
      Vec x = B * coeff;
      if (noise_sigma > 0)
        for (int a = 0; a < dims; ++a) x[a] += noise_sigma * rng.normal();
      X.col(col) = x;
      labels[col] = s;
    }
  }
  return {X, labels};
}

std::pair<Graph, std::vector<int>> synth_sbm(const std::vector<int>& block_sizes,
                                             double p_in, double p_out,
                                             unsigned seed) {
  if (p_out < 0 || p_in > 1 || p_out >= p_in)
    throw std::invalid_argument("synth_sbm: need 0 <= p_out < p_in <= 1");
  int n = 0;
  for (int s : block_sizes) {
    if (s < 1) throw std::invalid_argument("synth_sbm: empty block");
    n += s;
  }
  std::vector<int> labels(n);
  int at = 0, b = 0;
  for (int s : block_sizes) {
    for (int i = 0; i < s; ++i) labels[at++] = b;
    ++b;
  }
  Prng rng(seed);
  EdgeList edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? p_in : p_out;
      if (rng.bernoulli(p)) edges.emplace_back(i, j, 1.0);
    }
  return {build_graph(n, edges, false), labels};
}

void write_metrics(const Metrics& metrics, const std::string& path) {
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(metrics.config_json);
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("write_metrics: config_json is not valid JSON");
  }
  if (!config.is_object())
    throw std::invalid_argument("write_metrics: config_json must be an object");

  nlohmann::json j;
  j["accuracy"] = {{"train", metrics.train_acc},
                   {"val", metrics.val_acc},
                   {"test", metrics.test_acc}};
  j["loss_curve"] = metrics.loss_curve;
  j["config"] = config;
  j["seed"] = metrics.seed;
  j["best_epoch"] = metrics.best_epoch;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_metrics: cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write_metrics: write failed");
}

Metrics read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_metrics: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("read_metrics: parse error: ") + e.what());
  }
  Metrics m;
  try {
    m.train_acc = j.at("accuracy").at("train").get<double>();
    m.val_acc = j.at("accuracy").at("val").get<double>();
    m.test_acc = j.at("accuracy").at("test").get<double>();
    m.loss_curve = j.at("loss_curve").get<std::vector<double>>();
    m.seed = j.at("seed").get<int>();
    if (!j.at("config").is_object())
      throw std::runtime_error("config must be an object");
    m.config_json = j.at("config").dump();
    m.best_epoch = j.value("best_epoch", 0);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("read_metrics: malformed schema: ") +
                             e.what());
  }
  return m;
}

void write_csv_matrix(const Mat& M, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv_matrix: cannot open " + path);
  out.precision(17);
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << M(i, j);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_csv_matrix: write failed");
}

Mat read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv_matrix: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (...) {
        throw std::runtime_error("read_csv_matrix: bad number at line " +
                                 std::to_string(lineno));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("read_csv_matrix: ragged row at line " +
                               std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  Mat M(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j)
      M(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  return M;
}

}  // namespace lapssl
