#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lapssl/data_io.hpp"
#include "lapssl/gcn.hpp"
#include "lapssl/rng.hpp"

using namespace lapssl;
namespace fs = std::filesystem;

namespace {

Graph single_edge() { return build_graph(2, {{0, 1, 1.0}}, false); }

Graph path3() { return build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}, false); }

Propagator identity_propagator(int n) {
  Propagator P;
  P.dense = Mat::Identity(n, n);
  P.is_dense = true;
  return P;
}

Mat random_mat(Prng& rng, int r, int c) {
  Mat M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = rng.normal();
  return M;
}

Mat row_softmax_ref(const Mat& Z) {
  Mat P = Z;
  for (int i = 0; i < Z.rows(); ++i) {
    Vec row = Z.row(i);
    const double m = row.maxCoeff();
    Vec e = (row.array() - m).exp();
    P.row(i) = e / e.sum();
  }
  return P;
}

// Two-block dataset with informative features; every mask nonempty.
Dataset blocky_dataset(double p_in, double p_out, unsigned seed,
                       double feature_noise) {
  auto [g, labels] = synth_sbm({10, 10}, p_in, p_out, seed);
  Dataset ds;
  ds.g = g;
  ds.labels = labels;
  ds.class_names = {"left", "right"};
  const int n = g.n;
  ds.X = Mat::Zero(n, 4);
  Prng rng(seed + 17);
  for (int i = 0; i < n; ++i) {
    ds.X(i, labels[static_cast<size_t>(i)]) = 1.0;
    for (int f = 0; f < 4; ++f) ds.X(i, f) += feature_noise * rng.normal();
  }
  ds.train_mask.assign(n, false);
  ds.val_mask.assign(n, false);
  ds.test_mask.assign(n, false);
  std::vector<int> seen(2, 0);
  for (int i = 0; i < n; ++i) {
    int& s = seen[labels[static_cast<size_t>(i)]];
    if (s < 3)
      ds.train_mask[i] = true;
    else if (s < 5)
      ds.val_mask[i] = true;
    else
      ds.test_mask[i] = true;
    ++s;
  }
  ds.Y = make_label_matrix(labels, ds.train_mask, 2);
  ds.validate();
  return ds;
}

double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

}  // namespace

TEST_SUITE("gcn") {

TEST_CASE("propagation_matrix") {
  SUBCASE("renormalized single edge with unit loops") {
    FilterSpec spec;
    spec.kind = FilterKind::Renormalized;
    spec.k = 1;
    spec.gamma = 1.0;
    Propagator P = propagation_matrix(single_edge(), spec);
    CHECK_FALSE(P.is_dense);
    Mat A = Mat(P.sparse);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(A(i, j) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("residual at unit strength equals the renormalized operator") {
    Graph g = path3();
    FilterSpec res;
    res.kind = FilterKind::Residual;
    res.eta = 1.0;
    res.gamma = 1.0;
    FilterSpec rnm;
    rnm.kind = FilterKind::Renormalized;
    rnm.k = 1;
    rnm.gamma = 1.0;
    Mat A = Mat(propagation_matrix(g, res).sparse);
    Mat B = Mat(propagation_matrix(g, rnm).sparse);
    CHECK((A - B).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("renormalized powers compose") {
    Graph g = path3();
    FilterSpec one;
    one.kind = FilterKind::Renormalized;
    one.k = 1;
    FilterSpec two = one;
    two.k = 2;
    Mat A = Mat(propagation_matrix(g, one).sparse);
    Mat A2 = Mat(propagation_matrix(g, two).sparse);
    CHECK((A2 - A * A).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("auto-regressive operator fixes the degree direction") {
    Graph g = path3();
    FilterSpec spec;
    spec.kind = FilterKind::AutoRegressive;
    spec.eta = 0.7;
    spec.gamma = 1.0;
    Propagator P = propagation_matrix(g, spec);
    CHECK(P.is_dense);
    Vec v = augmented_degrees(g, 1.0).cwiseSqrt();
    Mat out = P.apply(Mat(v));
    CHECK((out.col(0) - v).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("bad powers are rejected") {
    FilterSpec spec;
    spec.kind = FilterKind::Renormalized;
    spec.k = 0;
    CHECK_THROWS_AS(propagation_matrix(single_edge(), spec), std::invalid_argument);
  }
}

TEST_CASE("gcn_forward") {
  Prng rng(311);
  Graph g = path3();
  FilterSpec spec;
  spec.kind = FilterKind::Renormalized;
  Propagator P = propagation_matrix(g, spec);
  Mat X = random_mat(rng, 3, 4);

  SUBCASE("zero first layer gives uniform class probabilities") {
    GcnModel model;
    model.theta1 = Mat::Zero(4, 5);
    model.theta2 = random_mat(rng, 5, 3);
    model.prop = spec;
    ForwardPass fwd = gcn_forward(model, P, X);
    CHECK(fwd.H1.cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < 3; ++c)
        CHECK(fwd.probs(i, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("identity propagation reduces to a dense two-layer net") {
    GcnModel model = init_gcn(4, 5, 3, spec, 21);
    Propagator I = identity_propagator(3);
    ForwardPass fwd = gcn_forward(model, I, X);
    Mat H1 = (X * model.theta1).cwiseMax(0.0);
    Mat probs = row_softmax_ref(H1 * model.theta2);
    CHECK((fwd.H1 - H1).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((fwd.probs - probs).cwiseAbs().maxCoeff() <= 1e-13);
  }
  SUBCASE("evaluation mode is repeatable and rows are distributions") {
    GcnModel model = init_gcn(4, 6, 3, spec, 22);
    ForwardPass a = gcn_forward(model, P, X);
    ForwardPass b = gcn_forward(model, P, X);
    CHECK((a.probs - b.probs).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.drop_mask.size() == 0);
    for (int i = 0; i < 3; ++i)
      CHECK(a.probs.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("dropout scales kept units and is seed-stable") {
    GcnModel model = init_gcn(4, 40, 3, spec, 23);
    ForwardPass a = gcn_forward(model, P, X, 0.5, 77u);
    ForwardPass b = gcn_forward(model, P, X, 0.5, 77u);
    CHECK((a.H1 - b.H1).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.drop_mask.rows() == 3);
    REQUIRE(a.drop_mask.cols() == 40);
    int kept = 0;
    for (int i = 0; i < a.drop_mask.rows(); ++i)
      for (int j = 0; j < a.drop_mask.cols(); ++j) {
        const double v = a.drop_mask(i, j);
        CHECK((v == 0.0 || v == 2.0));
        kept += v > 0;
      }
    // binomial(120, 1/2), 3 sigma
    CHECK(std::abs(kept - 60.0) <= 3.0 * std::sqrt(120.0 * 0.25));
    ForwardPass c = gcn_forward(model, P, X, 0.5, 78u);
    CHECK((a.drop_mask - c.drop_mask).cwiseAbs().maxCoeff() > 0.0);
  }
  SUBCASE("precomputed PX shortcut changes nothing") {
    GcnModel model = init_gcn(4, 5, 3, spec, 24);
    Mat PX = P.apply(X);
    ForwardPass a = gcn_forward(model, P, X);
    ForwardPass b = gcn_forward(model, P, X, 0.0, std::nullopt, &PX);
    CHECK((a.probs - b.probs).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("full dropout is rejected") {
    GcnModel model = init_gcn(4, 5, 3, spec, 25);
    CHECK_THROWS_AS(gcn_forward(model, P, X, 1.0, 3u), std::invalid_argument);
  }
}

TEST_CASE("gcn_gradients") {
  Prng rng(331);
  Graph g = build_graph(
      6, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}, {4, 5, 1.0}, {5, 0, 1.0}, {0, 3, 1.0}},
      false);
  Mat X = random_mat(rng, 6, 4);
  std::vector<bool> mask = {true, false, true, false, true, false};
  std::vector<int> labels = {0, 0, 1, 1, 0, 1};
  Mat Y = Mat::Zero(6, 2);
  for (int i = 0; i < 6; ++i) Y(i, labels[static_cast<size_t>(i)]) = 1.0;
  TrainConfig config;
  config.dropout = 0.0;
  config.weight_decay = 5e-4;

  SUBCASE("finite differences agree for every propagation kind") {
    FilterSpec specs[3];
    specs[0].kind = FilterKind::Renormalized;
    specs[0].k = 2;
    specs[1].kind = FilterKind::Residual;
    specs[1].eta = 0.8;
    specs[2].kind = FilterKind::AutoRegressive;
    specs[2].eta = 1.3;
    for (const FilterSpec& spec : specs) {
      Propagator P = propagation_matrix(g, spec);
      GcnModel model = init_gcn(4, 3, 2, spec, 91);
      // keep clear of the ReLU kink so central differences are valid
      Mat Z1 = P.apply(X) * model.theta1;
      REQUIRE(Z1.cwiseAbs().minCoeff() > 1e-3);
      LossGrads lg = gcn_loss_and_grads(model, P, X, Y, mask, config);
      const double eps = 1e-4;
      for (int which = 0; which < 2; ++which) {
        Mat& theta = which == 0 ? model.theta1 : model.theta2;
        const Mat& grad = which == 0 ? lg.d_theta1 : lg.d_theta2;
        for (int i = 0; i < theta.rows(); ++i)
          for (int j = 0; j < theta.cols(); ++j) {
            const double keep = theta(i, j);
            theta(i, j) = keep + eps;
            const double up = gcn_loss_and_grads(model, P, X, Y, mask, config).loss;
            theta(i, j) = keep - eps;
            const double down = gcn_loss_and_grads(model, P, X, Y, mask, config).loss;
            theta(i, j) = keep;
            const double fd = (up - down) / (2 * eps);
            CHECK(relative_gap(fd, grad(i, j)) <= 1e-4);
          }
      }
    }
  }
  SUBCASE("zero output layer has closed-form gradients") {
    FilterSpec spec;
    spec.kind = FilterKind::Renormalized;
    Propagator P = propagation_matrix(g, spec);
    GcnModel model = init_gcn(4, 3, 2, spec, 92);
    model.theta2.setZero();
    LossGrads lg = gcn_loss_and_grads(model, P, X, Y, mask, config);
    // uniform probabilities, so dLogits is (1/c - Y) on masked rows / m
    Mat dlogits = Mat::Zero(6, 2);
    int m = 0;
    for (bool b : mask) m += b;
    for (int i = 0; i < 6; ++i)
      if (mask[static_cast<size_t>(i)])
        for (int c = 0; c < 2; ++c) dlogits(i, c) = (0.5 - Y(i, c)) / m;
    Mat H1 = (P.apply(X) * model.theta1).cwiseMax(0.0);
    Mat want_d2 = P.apply(H1).transpose() * dlogits;
    CHECK((lg.d_theta2 - want_d2).cwiseAbs().maxCoeff() <= 1e-12);
    // nothing flows back through a zero theta2 except the decay term
    Mat want_d1 = 2.0 * config.weight_decay * model.theta1;
    CHECK((lg.d_theta1 - want_d1).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("zero features and no decay give zero gradients") {
    FilterSpec spec;
    spec.kind = FilterKind::Renormalized;
    Propagator P = propagation_matrix(g, spec);
    GcnModel model = init_gcn(4, 3, 2, spec, 93);
    TrainConfig no_decay = config;
    no_decay.weight_decay = 0.0;
    LossGrads lg = gcn_loss_and_grads(model, P, Mat::Zero(6, 4), Y, mask, no_decay);
    CHECK(lg.d_theta1.cwiseAbs().maxCoeff() == 0.0);
    CHECK(lg.d_theta2.cwiseAbs().maxCoeff() == 0.0);
    CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("empty mask is rejected") {
    FilterSpec spec;
    spec.kind = FilterKind::Renormalized;
    Propagator P = propagation_matrix(g, spec);
    GcnModel model = init_gcn(4, 3, 2, spec, 94);
    CHECK_THROWS_AS(
        gcn_loss_and_grads(model, P, X, Y, std::vector<bool>(6, false), config),
        std::invalid_argument);
  }
}

TEST_CASE("train_gcn") {
  Dataset ds = blocky_dataset(0.5, 0.05, 1, 0.01);
  FilterSpec spec;
  spec.kind = FilterKind::Renormalized;
  TrainConfig config;
  config.hidden = 8;
  config.epochs = 25;
  config.seed = 7;

  SUBCASE("learns the two blocks and reports sane metrics") {
    auto [model, metrics] = train_gcn(ds, spec, config);
    CHECK(metrics.loss_curve.size() == 25);
    for (double v : metrics.loss_curve) CHECK(std::isfinite(v));
    CHECK(metrics.train_acc >= 0.0);
    CHECK(metrics.train_acc <= 1.0);
    CHECK(metrics.val_acc <= 1.0);
    CHECK(metrics.test_acc >= 0.7);
    CHECK(metrics.best_epoch >= 0);
    CHECK(metrics.best_epoch < 25);
    CHECK(metrics.loss_curve.front() > metrics.loss_curve.back());
    CHECK(model.theta1.rows() == 4);
    CHECK(model.theta2.cols() == 2);
  }
  SUBCASE("identical seeds give identical runs") {
    auto [m1, r1] = train_gcn(ds, spec, config);
    auto [m2, r2] = train_gcn(ds, spec, config);
    CHECK(r1.loss_curve == r2.loss_curve);
    CHECK(r1.test_acc == r2.test_acc);
    CHECK((m1.theta1 - m2.theta1).cwiseAbs().maxCoeff() == 0.0);
    TrainConfig other = config;
    other.seed = 8;
    auto [m3, r3] = train_gcn(ds, spec, other);
    CHECK(r3.loss_curve != r1.loss_curve);
  }
  SUBCASE("residual at unit strength trains like the renormalized operator") {
    FilterSpec res;
    res.kind = FilterKind::Residual;
    res.eta = 1.0;
    TrainConfig short_run = config;
    short_run.epochs = 20;
    auto [m1, r1] = train_gcn(ds, spec, short_run);
    auto [m2, r2] = train_gcn(ds, res, short_run);
    REQUIRE(r1.loss_curve.size() == r2.loss_curve.size());
    for (size_t i = 0; i < r1.loss_curve.size(); ++i)
      CHECK(std::abs(r1.loss_curve[i] - r2.loss_curve[i]) <= 1e-8);
  }
  SUBCASE("precomputed operator changes nothing") {
    Propagator P = propagation_matrix(ds.g, spec);
    Mat PX = P.apply(ds.X);
    auto [m1, r1] = train_gcn(ds, spec, config);
    auto [m2, r2] = train_gcn(ds, spec, config, &P, &PX);
    CHECK(r1.loss_curve == r2.loss_curve);
    CHECK((m1.theta2 - m2.theta2).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("plain gradient descent also runs") {
    TrainConfig sgd = config;
    sgd.optimizer = Optimizer::Sgd;
    sgd.lr = 0.3;
    auto [model, metrics] = train_gcn(ds, spec, sgd);
    for (double v : metrics.loss_curve) CHECK(std::isfinite(v));
    auto [m2, adam_metrics] = train_gcn(ds, spec, config);
    CHECK(metrics.loss_curve != adam_metrics.loss_curve);
  }
}

TEST_CASE("net1_pipeline") {
  SUBCASE("pure blocks propagate labels perfectly") {
    auto [g, labels] = synth_sbm({8, 8}, 1.0, 0.0, 4);
    Dataset ds;
    ds.g = g;
    ds.labels = labels;
    ds.class_names = {"left", "right"};
    ds.X = Mat::Zero(16, 2);
    for (int i = 0; i < 16; ++i) ds.X(i, labels[static_cast<size_t>(i)]) = 1.0;
    ds.train_mask.assign(16, true);
    ds.train_mask[7] = false;
    ds.train_mask[15] = false;
    ds.val_mask.assign(16, false);
    ds.val_mask[7] = true;
    ds.test_mask.assign(16, false);
    ds.test_mask[15] = true;
    ds.Y = make_label_matrix(labels, ds.train_mask, 2);
    ds.validate();

    FilterSpec spec;
    spec.kind = FilterKind::Renormalized;
    TrainConfig config;
    config.hidden = 4;
    config.epochs = 60;
    config.dropout = 0.0;
    config.seed = 1;
    Metrics metrics = net1_pipeline(ds, spec, config, 0.9, 3);
    CHECK(metrics.train_acc == doctest::Approx(1.0));
    CHECK(metrics.val_acc == doctest::Approx(1.0));
    CHECK(metrics.test_acc == doctest::Approx(1.0));
    CHECK(metrics.loss_curve.size() == 60);
  }
  SUBCASE("invalid neighborhood size is rejected") {
    Dataset ds = blocky_dataset(0.6, 0.1, 2, 0.01);
    FilterSpec spec;
    TrainConfig config;
    config.epochs = 1;
    CHECK_THROWS_AS(net1_pipeline(ds, spec, config, 0.9, 0), std::invalid_argument);
  }
}

TEST_CASE("masked_accuracy") {
  Mat scores(3, 2);
  scores << 0.5, 0.5,  // tie, predicts class 0
      0.2, 0.9, 1.0, 0.0;
  std::vector<int> labels = {0, 1, 1};
  SUBCASE("ties resolve to the lowest class index") {
    CHECK(masked_accuracy(scores, labels, {true, false, false}) == 1.0);
    std::vector<int> other = {1, 1, 1};
    CHECK(masked_accuracy(scores, other, {true, false, false}) == 0.0);
  }
  SUBCASE("only masked rows count") {
    CHECK(masked_accuracy(scores, labels, {true, true, false}) == 1.0);
    CHECK(masked_accuracy(scores, labels, {true, true, true}) ==
          doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("empty mask is rejected") {
    CHECK_THROWS_AS(masked_accuracy(scores, labels, {false, false, false}),
                    std::invalid_argument);
  }
}

TEST_CASE("checkpoints") {
  TrainConfig config;
  FilterSpec spec;
  spec.kind = FilterKind::AutoRegressive;
  spec.eta = 1.5;
  spec.k = 2;
  spec.gamma = 0.5;
  GcnModel model = init_gcn(5, 4, 3, spec, 9);

  const fs::path dir =
      fs::temp_directory_path() / ("lapssl_ckpt_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string path = (dir / "model.bin").string();

  SUBCASE("round trip is exact") {
    save_checkpoint(model, path);
    GcnModel back = load_checkpoint(path);
    CHECK((back.theta1 - model.theta1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.theta2 - model.theta2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.prop.kind == spec.kind);
    CHECK(back.prop.eta == spec.eta);
    CHECK(back.prop.k == spec.k);
    CHECK(back.prop.gamma == spec.gamma);
  }
  SUBCASE("wrong magic is rejected") {
    std::ofstream out(path, std::ios::binary);
    out << "JUNKJUNKJUNKJUNKJUNKJUNK";
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  }
  SUBCASE("truncated file is rejected") {
    save_checkpoint(model, path);
    fs::resize_file(path, 50);
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  }
  SUBCASE("missing file is rejected") {
    CHECK_THROWS_AS(load_checkpoint((dir / "absent.bin").string()),
                    std::runtime_error);
  }

  std::error_code ec;
  fs::remove_all(dir, ec);
}

}  // TEST_SUITE
