#include <cmath>
#include <vector>

#include "doctest.h"
#include "lapssl/prox.hpp"
#include "lapssl/rng.hpp"

using namespace lapssl;

namespace {

Mat random_mat(Prng& rng, int r, int c) {
  Mat M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = rng.normal();
  return M;
}

Vec random_vec(Prng& rng, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

// Random orthogonal matrix from a QR factorization.
Mat random_orthogonal(Prng& rng, int n) {
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  return Mat(Eigen::MatrixXd(qr.householderQ()));
}

// The analytic two-dimensional problem: A = I, b = (2, 0.1), lambda = 1.
ProxProblem analytic_problem() {
  ProxProblem prob;
  prob.A = Mat::Identity(2, 2);
  prob.b = Vec(2);
  prob.b << 2.0, 0.1;
  prob.penalty = Penalty::L1;
  prob.lambda = 1.0;
  return prob;
}

double nuclear_objective(const Mat& A, const Mat& X, double lam) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(X)};
  return lam * svd.singularValues().sum() + 0.5 * (X - A).squaredNorm();
}

}  // namespace

TEST_SUITE("prox") {

TEST_CASE("soft_threshold scalars") {
  CHECK(soft_threshold(0.5, 1.0) == doctest::Approx(0.0));
  CHECK(soft_threshold(2.0, 1.0) == doctest::Approx(1.0));
  CHECK(soft_threshold(-3.0, 1.0) == doctest::Approx(-2.0));
}

TEST_CASE("svt") {
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 3.0;
  D(1, 1) = 1.0;
  Mat out = svt(D, 2.0);
  CHECK(out(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out(1, 1) == doctest::Approx(0.0).epsilon(1e-12));

  SUBCASE("lambda zero is the identity") {
    Prng rng(157);
    Mat A = random_mat(rng, 4, 3);
    CHECK((svt(A, 0.0) - A).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("output beats random perturbations on the prox objective") {
    Prng rng(163);
    Mat A = random_mat(rng, 4, 3);
    const double lam = 0.7;
    Mat X = svt(A, lam);
    double base = nuclear_objective(A, X, lam);
    for (int trial = 0; trial < 10000; ++trial) {
      Mat P = X + 0.05 * random_mat(rng, 4, 3);
      CHECK(nuclear_objective(A, P, lam) >= base - 1e-10);
    }
  }
  SUBCASE("commutes with orthogonal transforms") {
    Prng rng(167);
    Mat A = random_mat(rng, 5, 4);
    Mat U = random_orthogonal(rng, 5), V = random_orthogonal(rng, 4);
    Mat lhs = svt(Mat(U * A * V.transpose()), 0.4);
    Mat rhs = U * svt(A, 0.4) * V.transpose();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("l21_shrink") {
  Mat Q(2, 1);
  Q << 3.0, 4.0;
  Mat out = l21_shrink(Q, 1.0);
  CHECK(out(0, 0) == doctest::Approx(2.4));
  CHECK(out(1, 0) == doctest::Approx(3.2));

  Mat small(2, 1);
  small << 0.3, 0.4;
  CHECK(l21_shrink(small, 1.0).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  Prng rng(173);
  Mat R = random_mat(rng, 3, 5);
  CHECK((l21_shrink(R, 0.0) - R).cwiseAbs().maxCoeff() < 1e-14);

  SUBCASE("column optimality vs random perturbations") {
    Mat A = random_mat(rng, 4, 3);
    const double lam = 0.6;
    Mat X = l21_shrink(A, lam);
    auto objective = [&](const Mat& W) {
      double v = 0.5 * (W - A).squaredNorm();
      for (int j = 0; j < W.cols(); ++j) v += lam * W.col(j).norm();
      return v;
    };
    double base = objective(X);
    for (int trial = 0; trial < 10000; ++trial) {
      Mat P = X + 0.05 * random_mat(rng, 4, 3);
      CHECK(objective(P) >= base - 1e-10);
    }
  }
}

TEST_CASE("soft threshold optimality and prox non-expansiveness") {
  Prng rng(179);
  SUBCASE("vector shrinkage beats random perturbations") {
    Vec a = random_vec(rng, 6);
    const double lam = 0.5;
    Vec x = soft_threshold(a, lam);
    auto objective = [&](const Vec& v) {
      return 0.5 * (v - a).squaredNorm() + lam * v.lpNorm<1>();
    };
    double base = objective(x);
    for (int trial = 0; trial < 10000; ++trial) {
      Vec p = x + 0.05 * random_vec(rng, 6);
      CHECK(objective(p) >= base - 1e-10);
    }
  }
  SUBCASE("all three prox maps are non-expansive") {
    for (int trial = 0; trial < 100; ++trial) {
      Vec a = random_vec(rng, 5), b = random_vec(rng, 5);
      CHECK((soft_threshold(a, 0.3) - soft_threshold(b, 0.3)).norm() <=
            (a - b).norm() + 1e-10);
      Mat Ma = random_mat(rng, 4, 3), Mb = random_mat(rng, 4, 3);
      CHECK((svt(Ma, 0.3) - svt(Mb, 0.3)).norm() <= (Ma - Mb).norm() + 1e-10);
      CHECK((l21_shrink(Ma, 0.3) - l21_shrink(Mb, 0.3)).norm() <=
            (Ma - Mb).norm() + 1e-10);
    }
  }
}

TEST_CASE("nesterov_sequence") {
  auto t = nesterov_sequence(50);
  REQUIRE(t.size() == 51);
  CHECK(t[0] == doctest::Approx(1.0));
  CHECK(t[1] == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
  for (int k = 0; k + 1 <= 50; ++k) {
    CHECK(std::abs(t[k + 1] * t[k + 1] - t[k + 1] - t[k] * t[k]) < 1e-12);
    CHECK(t[k] > (k + 2) / 2.0 - 1e-12);
  }
}

TEST_CASE("ista") {
  SUBCASE("analytic instance lands on (1.5, 0)") {
    auto [x, rep] = ista(analytic_problem(), Vec::Zero(2), 100, 1e-12);
    CHECK(x[0] == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(x[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(rep.converged);
  }
  SUBCASE("objective history never increases") {
    Prng rng(181);
    ProxProblem prob;
    prob.A = random_mat(rng, 20, 8);
    prob.b = random_vec(rng, 20);
    prob.penalty = Penalty::L1;
    prob.lambda = 0.5;
    auto [x, rep] = ista(prob, Vec::Zero(8), 300, 0.0);
    for (size_t i = 1; i < rep.objective_history.size(); ++i)
      CHECK(rep.objective_history[i] <= rep.objective_history[i - 1] + 1e-9);
  }
  SUBCASE("lambda zero solves least squares") {
    Prng rng(191);
    ProxProblem prob;
    prob.A = random_mat(rng, 12, 4);
    prob.b = random_vec(rng, 12);
    prob.penalty = Penalty::L1;
    prob.lambda = 0.0;
    auto [x, rep] = ista(prob, Vec::Zero(4), 20000, 1e-14);
    Eigen::MatrixXd A = Eigen::MatrixXd(prob.A);
    Eigen::VectorXd want =
        (A.transpose() * A).ldlt().solve(A.transpose() * Eigen::VectorXd(prob.b));
    CHECK((x - Vec(want)).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("zero data stays at zero") {
    ProxProblem prob;
    prob.A = Mat::Identity(3, 3);
    prob.b = Vec::Zero(3);
    prob.penalty = Penalty::L1;
    prob.lambda = 0.5;
    auto [x, rep] = ista(prob, Vec::Zero(3), 10, 1e-12);
    CHECK(x.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("fista") {
  SUBCASE("shares the analytic fixed point") {
    auto [x, rep] = fista(analytic_problem(), Vec::Zero(2), 100, 1e-12);
    CHECK(x[0] == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(x[1] == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("first step equals one ista step") {
    Prng rng(193);
    ProxProblem prob;
    prob.A = random_mat(rng, 10, 5);
    prob.b = random_vec(rng, 10);
    prob.penalty = Penalty::L1;
    prob.lambda = 0.3;
    Vec x0 = random_vec(rng, 5);
    auto [xi, ri] = ista(prob, x0, 1, 0.0);
    auto [xf, rf] = fista(prob, x0, 1, 0.0);
    CHECK((xi - xf).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("beats ista head-to-head on a random LASSO") {
    Prng rng(197);
    ProxProblem prob;
    prob.A = random_mat(rng, 50, 30);
    prob.b = random_vec(rng, 50);
    prob.penalty = Penalty::L1;
    prob.lambda = 1.0;
    auto [xi, ri] = ista(prob, Vec::Zero(30), 100, 0.0);
    auto [xf, rf] = fista(prob, Vec::Zero(30), 100, 0.0);
    CHECK(lasso_objective(prob, xf) <= lasso_objective(prob, xi) + 1e-12);
  }
  SUBCASE("objective-gap decay rate on the benchmark problem") {
    Prng rng(199);
    ProxProblem prob;
    prob.A = random_mat(rng, 60, 40);
    prob.b = random_vec(rng, 60);
    prob.penalty = Penalty::L1;
    prob.lambda = 2.0;
    auto [xstar, rs] = fista(prob, Vec::Zero(40), 30000, 0.0);
    double fstar = lasso_objective(prob, xstar);
    auto [x, rep] = fista(prob, Vec::Zero(40), 200, 0.0);
    // least-squares slope of log gap vs log k over k in [10, 200]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (int k = 10; k <= 200; ++k) {
      double gap = rep.objective_history[static_cast<size_t>(k - 1)] - fstar;
      gap = std::max(gap, 1e-15);
      double lx = std::log(static_cast<double>(k)), ly = std::log(gap);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++count;
    }
    double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    CHECK(slope <= -1.8);
  }
}

TEST_CASE("admm") {
  SUBCASE("consensus LASSO reaches the analytic point") {
    // f = |x - b|^2 (no half), g = |z|_1, constraint x - z = 0
    Vec b(2);
    b << 2.0, 0.1;
    const double lam = 1.0;
    ProxOracle x_update = [&](const Vec& v, double rho) {
      // argmin |x-b|^2 + rho/2 |x - v|^2
      return Vec((2.0 * b + rho * v) / (2.0 + rho));
    };
    ProxOracle z_update = [&](const Vec& v, double rho) {
      // argmin lam|z|_1 + rho/2 |z - (-v)|^2 ... with B = -I the prox
      // target is -v
      return soft_threshold(Vec(-v), lam / rho);
    };
    Mat A = Mat::Identity(2, 2);
    Mat B = -Mat::Identity(2, 2);
    AdmmSolution sol = admm(x_update, z_update, A, B, Vec::Zero(2), 1.0, 2000, 1e-12);
    CHECK(sol.x[0] == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(sol.x[1] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sol.report.converged);
    // converged triple is feasible
    CHECK((sol.x - sol.z).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("lambda zero converges to least squares") {
    Prng rng(211);
    Mat A = random_mat(rng, 8, 3);
    Vec b = random_vec(rng, 8);
    Eigen::MatrixXd Ad = Eigen::MatrixXd(A);
    Eigen::LDLT<Eigen::MatrixXd> gram((Ad.transpose() * Ad).eval());
    ProxOracle x_update = [&](const Vec& v, double rho) {
      // argmin |Ax-b|^2 + rho/2|x - v|^2
      Eigen::MatrixXd M = 2.0 * Ad.transpose() * Ad +
                          rho * Eigen::MatrixXd::Identity(3, 3);
      Eigen::VectorXd rhs = 2.0 * Ad.transpose() * Eigen::VectorXd(b) +
                            rho * Eigen::VectorXd(v);
      return Vec(M.ldlt().solve(rhs));
    };
    ProxOracle z_update = [&](const Vec& v, double) { return Vec(-v); };
    AdmmSolution sol = admm(x_update, z_update, Mat::Identity(3, 3),
                            -Mat::Identity(3, 3), Vec::Zero(3), 1.0, 4000, 1e-12);
    Eigen::VectorXd want = gram.solve(Ad.transpose() * Eigen::VectorXd(b));
    CHECK((sol.x - Vec(want)).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("zero data gives the zero solution") {
    ProxOracle x_update = [](const Vec& v, double rho) {
      return Vec(rho * v / (2.0 + rho));
    };
    ProxOracle z_update = [](const Vec& v, double rho) {
      return soft_threshold(Vec(-v), 1.0 / rho);
    };
    AdmmSolution sol = admm(x_update, z_update, Mat::Identity(2, 2),
                            -Mat::Identity(2, 2), Vec::Zero(2), 1.0, 500, 1e-12);
    CHECK(sol.x.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("ridge") {
  Prng rng(223);
  SUBCASE("lambda zero inverts a square system") {
    Mat A = random_mat(rng, 4, 4);
    Vec b = random_vec(rng, 4);
    Vec x = ridge(A, b, Mat::Identity(4, 4), 0.0);
    CHECK((A * x - b).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("identity halves the target") {
    Vec b = random_vec(rng, 5);
    Vec x = ridge(Mat::Identity(5, 5), b, Mat::Identity(5, 5), 1.0);
    CHECK((x - 0.5 * b).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("stationarity at the returned point") {
    Mat A = random_mat(rng, 10, 4);
    Mat L = random_mat(rng, 4, 4);
    Vec b = random_vec(rng, 10);
    const double lam = 0.7;
    Vec x = ridge(A, b, L, lam);
    // gradient of |Ax-b|^2 + lam |Lx|^2
    Vec grad = 2.0 * A.transpose() * (A * x - b) + 2.0 * lam * L.transpose() * (L * x);
    CHECK(grad.norm() < 1e-8);
  }
}

}  // TEST_SUITE
