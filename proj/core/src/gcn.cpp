#include "lapssl/gcn.hpp"

#include <Eigen/Cholesky>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "lapssl/edge_weights.hpp"
#include "lapssl/graph.hpp"
#include "lapssl/labelprop.hpp"
#include "lapssl/rng.hpp"

namespace lapssl {

namespace {

SpMat sparse_identity(int n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

Mat row_softmax(const Mat& logits) {
  Mat probs(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double mx = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp();
    probs.row(i) = e / e.sum();
  }
  return probs;
}

int mask_count(const std::vector<bool>& mask) {
  int m = 0;
  for (bool b : mask) m += b ? 1 : 0;
  return m;
}

}  // namespace

Propagator propagation_matrix(const Graph& g, const FilterSpec& spec) {
  Propagator P;
  LaplacianSpec lspec{LaplacianKind::SymNormalized, spec.gamma};
  SpMat L = laplacian(g, lspec);
  const int n = static_cast<int>(L.rows());
  switch (spec.kind) {
    case FilterKind::Residual:
      P.sparse = SpMat(sparse_identity(n) - spec.eta * L);
      break;
    case FilterKind::Renormalized: {
      if (spec.k < 1) throw std::invalid_argument("renormalized filter needs k >= 1");
      SpMat A_hat(sparse_identity(n) - L);
      SpMat acc = A_hat;
      for (int i = 1; i < spec.k; ++i) acc = SpMat(acc * A_hat);
      P.sparse = acc;
      break;
    }
    case FilterKind::AutoRegressive: {
      if (spec.eta < 0) throw std::invalid_argument("auto-regressive filter needs eta >= 0");
      Mat M = Mat::Identity(n, n) + spec.eta * Mat(L);
      Eigen::LLT<Eigen::MatrixXd> llt(M);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("auto-regressive operator is not positive definite");
      P.dense = llt.solve(Eigen::MatrixXd::Identity(n, n));
      P.is_dense = true;
      break;
    }
  }
  return P;
}

ForwardPass gcn_forward(const GcnModel& model, const Propagator& P, const Mat& X,
                        double dropout, std::optional<unsigned> dropout_seed,
                        const Mat* PX) {
  if (X.cols() != model.theta1.rows())
    throw std::invalid_argument("feature width does not match first layer");
  if (model.theta1.cols() != model.theta2.rows())
    throw std::invalid_argument("layer widths do not chain");

  ForwardPass fwd;
  Mat A1 = PX ? *PX : P.apply(X);
  Mat Z1 = A1 * model.theta1;
  fwd.H1 = Z1.cwiseMax(0.0);

  if (dropout_seed.has_value() && dropout > 0.0) {
    if (dropout >= 1.0) throw std::invalid_argument("dropout must be < 1");
    Prng rng(*dropout_seed);
    const double keep = 1.0 - dropout;
    fwd.drop_mask = Mat(fwd.H1.rows(), fwd.H1.cols());
    for (Eigen::Index i = 0; i < fwd.drop_mask.rows(); ++i)
      for (Eigen::Index j = 0; j < fwd.drop_mask.cols(); ++j)
        fwd.drop_mask(i, j) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    fwd.H1 = fwd.H1.cwiseProduct(fwd.drop_mask);
  }

  Mat A2 = P.apply(fwd.H1);
  fwd.logits = A2 * model.theta2;
  fwd.probs = row_softmax(fwd.logits);
  return fwd;
}

LossGrads gcn_loss_and_grads(const GcnModel& model, const Propagator& P,
                             const Mat& X, const Mat& Y,
                             const std::vector<bool>& mask,
                             const TrainConfig& config,
                             std::optional<unsigned> dropout_seed,
                             const Mat* PX) {
  const int n = static_cast<int>(X.rows());
  if (static_cast<int>(mask.size()) != n)
    throw std::invalid_argument("mask size does not match node count");
  if (Y.rows() != n || Y.cols() != model.theta2.cols())
    throw std::invalid_argument("label matrix shape mismatch");
  const int m = mask_count(mask);
  if (m == 0) throw std::invalid_argument("empty training mask");

  LossGrads out;
  Mat A1 = PX ? *PX : P.apply(X);
  Mat Z1 = A1 * model.theta1;
  out.fwd.H1 = Z1.cwiseMax(0.0);

  if (dropout_seed.has_value() && config.dropout > 0.0) {
    if (config.dropout >= 1.0) throw std::invalid_argument("dropout must be < 1");
    Prng rng(*dropout_seed);
    const double keep = 1.0 - config.dropout;
    out.fwd.drop_mask = Mat(out.fwd.H1.rows(), out.fwd.H1.cols());
    for (Eigen::Index i = 0; i < out.fwd.drop_mask.rows(); ++i)
      for (Eigen::Index j = 0; j < out.fwd.drop_mask.cols(); ++j)
        out.fwd.drop_mask(i, j) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    out.fwd.H1 = out.fwd.H1.cwiseProduct(out.fwd.drop_mask);
  }

  Mat A2 = P.apply(out.fwd.H1);
  out.fwd.logits = A2 * model.theta2;

  // Stable log-softmax for both the loss and the probabilities.
  Mat logprobs(out.fwd.logits.rows(), out.fwd.logits.cols());
  for (Eigen::Index i = 0; i < logprobs.rows(); ++i) {
    double mx = out.fwd.logits.row(i).maxCoeff();
    double lse = mx + std::log((out.fwd.logits.row(i).array() - mx).exp().sum());
    logprobs.row(i) = out.fwd.logits.row(i).array() - lse;
  }
  out.fwd.probs = logprobs.array().exp();

  double data_loss = 0.0;
  Mat dlogits = Mat::Zero(n, out.fwd.logits.cols());
  for (int i = 0; i < n; ++i) {
    if (!mask[static_cast<size_t>(i)]) continue;
    data_loss -= (Y.row(i).array() * logprobs.row(i).array()).sum();
    dlogits.row(i) = (out.fwd.probs.row(i) - Y.row(i)) / static_cast<double>(m);
  }
  data_loss /= static_cast<double>(m);
  out.loss = data_loss + config.weight_decay * model.theta1.squaredNorm();

  out.d_theta2 = A2.transpose() * dlogits;
  Mat dH1 = P.apply_transpose(dlogits) * model.theta2.transpose();
  if (out.fwd.drop_mask.size() > 0) dH1 = dH1.cwiseProduct(out.fwd.drop_mask);
  Mat relu_gate = (Z1.array() > 0.0).cast<double>();
  Mat dZ1 = dH1.cwiseProduct(relu_gate);
  out.d_theta1 = A1.transpose() * dZ1 + 2.0 * config.weight_decay * model.theta1;
  return out;
}

GcnModel init_gcn(int in_dim, int hidden, int out_dim, const FilterSpec& spec,
                  unsigned seed) {
  if (in_dim < 1 || hidden < 1 || out_dim < 1)
    throw std::invalid_argument("layer dimensions must be positive");
  GcnModel model;
  model.prop = spec;
  model.init_seed = seed;
  Prng rng(seed);
  auto glorot = [&rng](int rows, int cols) {
    double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Mat W(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) W(i, j) = rng.uniform(-a, a);
    return W;
  };
  model.theta1 = glorot(in_dim, hidden);
  model.theta2 = glorot(hidden, out_dim);
  return model;
}

double masked_accuracy(const Mat& scores, const std::vector<int>& labels,
                       const std::vector<bool>& mask) {
  if (scores.rows() != static_cast<Eigen::Index>(labels.size()) ||
      labels.size() != mask.size())
    throw std::invalid_argument("scores, labels and mask sizes disagree");
  long correct = 0, total = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    if (!mask[static_cast<size_t>(i)]) continue;
    Eigen::Index best;
    scores.row(i).maxCoeff(&best);
    // Break ties toward the lowest class index.
    for (Eigen::Index c = 0; c < best; ++c) {
      if (scores(i, c) == scores(i, best)) { best = c; break; }
    }
    ++total;
    if (static_cast<int>(best) == labels[static_cast<size_t>(i)]) ++correct;
  }
  if (total == 0) throw std::invalid_argument("empty evaluation mask");
  return static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

struct AdamState {
  Mat m, v;
  explicit AdamState(const Mat& shape)
      : m(Mat::Zero(shape.rows(), shape.cols())),
        v(Mat::Zero(shape.rows(), shape.cols())) {}
  void step(Mat& theta, const Mat& grad, double lr, int t) {
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    double c1 = 1.0 - std::pow(b1, t);
    double c2 = 1.0 - std::pow(b2, t);
    Mat mhat = m / c1;
    Mat vhat = v / c2;
    theta -= lr * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps).matrix());
  }
};

unsigned epoch_dropout_seed(unsigned base, int epoch) {
  return base + 1000003u * static_cast<unsigned>(epoch + 1);
}

}  // namespace

std::pair<GcnModel, Metrics> train_gcn(const Dataset& ds, const FilterSpec& spec,
                                       const TrainConfig& config,
                                       const Propagator* P_in, const Mat* PX_in) {
  ds.validate();
  if (config.epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (config.hidden < 1) throw std::invalid_argument("hidden width must be positive");

  Propagator P_local;
  const Propagator* P = P_in;
  if (!P) {
    P_local = propagation_matrix(ds.g, spec);
    P = &P_local;
  }
  Mat PX_local;
  const Mat* PX = PX_in;
  if (!PX) {
    PX_local = P->apply(ds.X);
    PX = &PX_local;
  }

  const int d = static_cast<int>(ds.X.cols());
  const int c = ds.num_classes();
  GcnModel model = init_gcn(d, config.hidden, c, spec, config.seed);
  Mat Y = Mat::Zero(ds.n(), c);
  for (int i = 0; i < ds.n(); ++i)
    if (ds.train_mask[static_cast<size_t>(i)]) Y(i, ds.labels[static_cast<size_t>(i)]) = 1.0;

  AdamState adam1(model.theta1), adam2(model.theta2);
  Metrics metrics;
  metrics.seed = static_cast<int>(config.seed);
  metrics.loss_curve.reserve(static_cast<size_t>(config.epochs));

  GcnModel best = model;
  double best_val = -1.0;
  int best_epoch = 0;

  const bool use_dropout = config.dropout > 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::optional<unsigned> dseed;
    if (use_dropout) dseed = epoch_dropout_seed(config.seed, epoch);
    LossGrads lg =
        gcn_loss_and_grads(model, *P, ds.X, Y, ds.train_mask, config, dseed, PX);
    if (!std::isfinite(lg.loss))
      throw std::runtime_error("training loss diverged");
    metrics.loss_curve.push_back(lg.loss);

    if (config.optimizer == Optimizer::Adam) {
      adam1.step(model.theta1, lg.d_theta1, config.lr, epoch + 1);
      adam2.step(model.theta2, lg.d_theta2, config.lr, epoch + 1);
    } else {
      model.theta1 -= config.lr * lg.d_theta1;
      model.theta2 -= config.lr * lg.d_theta2;
    }

    ForwardPass eval = gcn_forward(model, *P, ds.X, 0.0, std::nullopt, PX);
    double val = masked_accuracy(eval.probs, ds.labels, ds.val_mask);
    if (val > best_val) {
      best_val = val;
      best = model;
      best_epoch = epoch;
    }
  }

  ForwardPass eval = gcn_forward(best, *P, ds.X, 0.0, std::nullopt, PX);
  metrics.train_acc = masked_accuracy(eval.probs, ds.labels, ds.train_mask);
  metrics.val_acc = masked_accuracy(eval.probs, ds.labels, ds.val_mask);
  metrics.test_acc = masked_accuracy(eval.probs, ds.labels, ds.test_mask);
  metrics.best_epoch = best_epoch;
  return {best, metrics};
}

Metrics net1_pipeline(const Dataset& ds, const FilterSpec& spec,
                      const TrainConfig& config, double lp_alpha, int knn_k,
                      const Propagator* P_in, const Mat* PX_in) {
  if (knn_k < 1) throw std::invalid_argument("knn_k must be positive");

  Propagator P_local;
  const Propagator* P = P_in;
  if (!P) {
    P_local = propagation_matrix(ds.g, spec);
    P = &P_local;
  }
  Mat PX_local;
  const Mat* PX = PX_in;
  if (!PX) {
    PX_local = P->apply(ds.X);
    PX = &PX_local;
  }

  auto [model, gcn_metrics] = train_gcn(ds, spec, config, P, PX);

  // Hidden embedding in eval mode, before the second propagation.
  Mat Z1 = (*PX) * model.theta1;
  Mat H1 = Z1.cwiseMax(0.0);

  NeighborhoodMap nbrs = knn_neighbors(H1, knn_k);
  WeightMatrix W = lle_weights_closed_form(H1, nbrs);

  const int c = ds.num_classes();
  Mat Y0 = Mat::Zero(ds.n(), c);
  for (int i = 0; i < ds.n(); ++i)
    if (ds.train_mask[static_cast<size_t>(i)]) Y0(i, ds.labels[static_cast<size_t>(i)]) = 1.0;
  Mat F = lp_closed_form(W, Y0, lp_alpha);

  Metrics metrics = gcn_metrics;
  metrics.train_acc = masked_accuracy(F, ds.labels, ds.train_mask);
  metrics.val_acc = masked_accuracy(F, ds.labels, ds.val_mask);
  metrics.test_acc = masked_accuracy(F, ds.labels, ds.test_mask);
  return metrics;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint truncated");
  return v;
}

}  // namespace

void save_checkpoint(const GcnModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os.write("LSSL", 4);
  write_pod<std::uint32_t>(os, 1u);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(model.theta1.rows()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(model.theta1.cols()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(model.theta2.cols()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(model.prop.kind));
  write_pod<double>(os, model.prop.eta);
  write_pod<std::int32_t>(os, static_cast<std::int32_t>(model.prop.k));
  write_pod<double>(os, model.prop.gamma);
  os.write(reinterpret_cast<const char*>(model.theta1.data()),
           static_cast<std::streamsize>(sizeof(double) * model.theta1.size()));
  os.write(reinterpret_cast<const char*>(model.theta2.data()),
           static_cast<std::streamsize>(sizeof(double) * model.theta2.size()));
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

GcnModel load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "LSSL", 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  auto version = read_pod<std::uint32_t>(is);
  if (version != 1u) throw std::runtime_error("unsupported checkpoint version");
  auto in_dim = read_pod<std::uint32_t>(is);
  auto hidden = read_pod<std::uint32_t>(is);
  auto out_dim = read_pod<std::uint32_t>(is);
  auto kind = read_pod<std::uint32_t>(is);
  if (kind > 2u) throw std::runtime_error("checkpoint has unknown filter kind");
  GcnModel model;
  model.prop.kind = static_cast<FilterKind>(kind);
  model.prop.eta = read_pod<double>(is);
  model.prop.k = static_cast<int>(read_pod<std::int32_t>(is));
  model.prop.gamma = read_pod<double>(is);
  if (in_dim == 0 || hidden == 0 || out_dim == 0 ||
      in_dim > (1u << 24) || hidden > (1u << 24) || out_dim > (1u << 24))
    throw std::runtime_error("checkpoint dimensions out of range");
  model.theta1 = Mat(in_dim, hidden);
  model.theta2 = Mat(hidden, out_dim);
  is.read(reinterpret_cast<char*>(model.theta1.data()),
          static_cast<std::streamsize>(sizeof(double) * model.theta1.size()));
  is.read(reinterpret_cast<char*>(model.theta2.data()),
          static_cast<std::streamsize>(sizeof(double) * model.theta2.size()));
  if (!is) throw std::runtime_error("checkpoint truncated");
  return model;
}

}  // namespace lapssl
