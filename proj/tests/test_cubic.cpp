#include <doctest.h>

#include <cmath>

#include "racr/cubic.hpp"
#include "support.hpp"

using namespace racr;
using testing::cubic_value;
using testing::dense_model;
using testing::grid_min_1d;
using testing::Vector;

TEST_CASE("eval_model") {
  auto m = dense_model(Eigen::Vector2d(1, 0), Matrix::Zero(2, 2), 1.0);
  CHECK(eval_model(m.model, TangentVector(m.base, Eigen::Vector2d(-1, 0))) == doctest::Approx(-2.0 / 3.0));
  CHECK(eval_model(m.model, m.space->zero_vector(m.base)) == 0.0);

  Matrix H(2, 2);
  H << 1, 0.3, 0.3, -2;
  auto z = dense_model(Vector::Zero(2), H, 0.7);
  const TangentVector e(z.base, Eigen::Vector2d(0.4, -1.3));
  CHECK(eval_model(z.model, e) == eval_model(z.model, -e));

  auto bad = dense_model(Eigen::Vector2d(1, 0), H, 0.0);
  CHECK_THROWS_AS(eval_model(bad.model, e), ContractViolation);
}

TEST_CASE("cauchy point") {
  SUBCASE("zero curvature") {
    auto m = dense_model(Eigen::Vector2d(1, 0), Matrix::Zero(2, 2), 1.0);
    const auto c = cauchy_point(m.model);
    CHECK(c.alpha == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(c.model_value == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));
    double at = 0;
    const double best = grid_min_1d([](double a) { return -a + a * a * a / 3.0; }, 0.0, 3.0, 1e-5, &at);
    CHECK(std::abs(best - c.model_value) < 1e-9);
    CHECK(std::abs(at - c.alpha) < 1e-5);
  }
  SUBCASE("identity hessian") {
    auto m = dense_model(Eigen::Vector2d(0, 1), Matrix::Identity(2, 2), 1.0);
    const auto c = cauchy_point(m.model);
    CHECK(c.alpha == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-14));
    CHECK(c.model_value == doctest::Approx(-0.349).epsilon(1e-3));
    const double best = grid_min_1d([](double a) { return -a + a * a / 2 + a * a * a / 3.0; }, 0.0, 3.0, 1e-5);
    CHECK(std::abs(best - c.model_value) < 1e-9);
    CHECK(eval_model(m.model, c.eta) == doctest::Approx(c.model_value).epsilon(1e-14));
  }
  SUBCASE("large sigma shrinks the step") {
    const Vector g = Eigen::Vector2d(0.6, -0.8) * 2.0;
    Matrix H(2, 2);
    H << 3, 1, 1, -1;
    for (double sigma : {1e4, 1e8, 1e12}) {
      auto m = dense_model(g, H, sigma);
      const auto c = cauchy_point(m.model);
      const double gn = g.norm();
      CHECK(c.alpha * std::sqrt(sigma * gn * gn * gn) / gn == doctest::Approx(1.0).epsilon(sigma > 1e5 ? 1e-3 : 3e-2));
    }
  }
  SUBCASE("scale covariance") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
      const Vector g = testing::random_matrix(rng, 4, 1);
      const Matrix H = testing::random_symmetric(rng, 4);
      const double c = 0.1 + 3.0 * std::uniform_real_distribution<double>()(rng);
      auto a = dense_model(g, H, 0.5);
      auto b = dense_model(c * g, c * H, c * 0.5);
      const auto ca = cauchy_point(a.model);
      const auto cb = cauchy_point(b.model);
      CHECK(testing::rel_err(ca.eta.data(), cb.eta.data()) < 1e-10);
      CHECK(std::abs(cb.model_value - c * ca.model_value) <= 1e-10 * std::abs(c * ca.model_value));
    }
  }
  auto zero = dense_model(Vector::Zero(2), Matrix::Identity(2, 2), 1.0);
  CHECK_THROWS_AS(cauchy_point(zero.model), ZeroGradient);
}

TEST_CASE("lanczos against a dense eigensolver") {
  SUBCASE("diag(2, -1)") {
    Matrix H = Matrix::Zero(2, 2);
    H.diagonal() << 2, -1;
    auto m = dense_model(Eigen::Vector2d(1, 1), H, 1.0);
    const auto e = min_eig_estimate(m.model, {});
    CHECK(e.lambda == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(std::abs(std::abs(e.vector.data()(1, 0)) - 1.0) < 1e-8);
    CHECK(e.converged);
  }
  SUBCASE("identity and zero") {
    auto I = dense_model(Eigen::Vector3d(1, 0, 0), Matrix::Identity(3, 3), 1.0);
    CHECK(min_eig_estimate(I.model, {}).lambda == doctest::Approx(1.0).epsilon(1e-6));
    auto Z = dense_model(Eigen::Vector3d(1, 0, 0), Matrix::Zero(3, 3), 1.0);
    CHECK(min_eig_estimate(Z.model, {}).lambda == 0.0);
  }
  SUBCASE("random symmetric") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 50; ++t) {
      const int d = 2 + t % 9;
      const Matrix H = testing::random_symmetric(rng, d);
      auto m = dense_model(testing::random_matrix(rng, d, 1), H, 1.0);
      LanczosOptions opts;
      opts.seed = static_cast<std::uint64_t>(t);
      const auto e = min_eig_estimate(m.model, opts);
      const auto eig = testing::dense_eig(H);
      const double lmin = eig.eigenvalues()(0);
      const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
      CHECK(e.lambda >= lmin - 1e-12 * scale);
      CHECK(e.lambda <= lmin + 1e-6 * scale);
      CHECK(e.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(e.iterations <= d);
    }
  }
}

TEST_CASE("eigen point") {
  const Vector v = Eigen::Vector2d(0, 1);
  SUBCASE("orthogonal gradient") {
    Matrix H = Matrix::Zero(2, 2);
    H.diagonal() << 1, -1;
    auto m = dense_model(Eigen::Vector2d(1, 0), H, 1.0);
    const auto e = eigen_point(m.model, TangentVector(m.base, v), -1.0);
    CHECK(e.beta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e.direction == 1.0);
    CHECK(e.model_value == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
    const double best = grid_min_1d([](double b) { return -b * b / 2 + b * b * b / 3; }, 0.0, 3.0, 1e-5);
    CHECK(std::abs(best - e.model_value) < 1e-9);
  }
  SUBCASE("aligned gradient") {
    Matrix H = Matrix::Zero(2, 2);
    H.diagonal() << 1, -1;
    auto m = dense_model(Eigen::Vector2d(0, 0.5), H, 1.0);
    const auto e = eigen_point(m.model, TangentVector(m.base, v), -1.0);
    CHECK(e.direction == -1.0);
    double at = 0;
    const double best =
        grid_min_1d([](double b) { return -0.5 * b - 0.5 * b * b + b * b * b / 3; }, 0.0, 4.0, 1e-5, &at);
    CHECK(std::abs(e.beta - at) < 1e-5);
    CHECK(std::abs(e.model_value - best) < 1e-9);
    CHECK(e.model_value == doctest::Approx(eval_model(m.model, e.eta)).epsilon(1e-13));
  }
  SUBCASE("sigma to infinity") {
    auto m = dense_model(Eigen::Vector2d(0, 0.5), Matrix::Identity(2, 2), 1e12);
    CHECK(eigen_point(m.model, TangentVector(m.base, v), -1.0).beta < 1e-5);
  }
  auto m = dense_model(Eigen::Vector2d(1, 0), Matrix::Identity(2, 2), 1.0);
  CHECK_THROWS_AS(eigen_point(m.model, TangentVector(m.base, v), 0.0), std::domain_error);
}

TEST_CASE("solve_subproblem") {
  SUBCASE("positive definite: Cauchy only") {
    Matrix H(2, 2);
    H << 2, 0.5, 0.5, 1;
    auto m = dense_model(Eigen::Vector2d(1, -1), H, 1.0);
    const auto r = solve_subproblem(m.model);
    CHECK_FALSE(r.eigen_value.has_value());
    CHECK_FALSE(r.used_eigen_step);
    CHECK(r.model_value == r.cauchy_value);
    CHECK(r.lambda_min_est.value() > 0.0);
  }
  SUBCASE("indefinite 2-D against grid search") {
    Matrix H = Matrix::Zero(2, 2);
    H.diagonal() << 1, -2;
    const Vector g = Eigen::Vector2d(1, 0);
    auto m = dense_model(g, H, 1.0);
    SubsolverOptions opts;
    opts.refine_steps = 20;
    const auto r = solve_subproblem(m.model, opts);
    REQUIRE(r.eigen_value.has_value());
    CHECK(r.model_value <= r.cauchy_value);
    CHECK(r.model_value <= *r.eigen_value);
    const double global = testing::grid_min_2d(g, H, 1.0, 3.0, 1e-2);
    CHECK(r.model_value >= global - 1e-3);
    CHECK(r.model_value <= 0.95 * global);
  }
  SUBCASE("small gradient with strong negative curvature") {
    Matrix H = Matrix::Zero(3, 3);
    H.diagonal() << 1, 2, -5;
    auto m = dense_model(Eigen::Vector3d(1e-3, 0, 0), H, 1.0);
    const auto r = solve_subproblem(m.model);
    CHECK(r.used_eigen_step);
    CHECK(*r.eigen_value < r.cauchy_value);
    REQUIRE(r.nu.has_value());
    CHECK(*r.nu > 0.0);
    CHECK(*r.nu <= 1.0);
  }
  SUBCASE("zero gradient") {
    auto pd = dense_model(Vector::Zero(2), Matrix::Identity(2, 2), 1.0);
    CHECK_THROWS_AS(solve_subproblem(pd.model), ZeroGradient);
    Matrix H = Matrix::Identity(2, 2);
    H(1, 1) = -1;
    auto nc = dense_model(Vector::Zero(2), H, 1.0);
    const auto r = solve_subproblem(nc.model);
    CHECK(r.used_eigen_step);
    CHECK(r.model_value < 0.0);
  }
  SUBCASE("never worse than either candidate, refined or not") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 100; ++t) {
      const int d = 2 + t % 8;
      const Matrix H = testing::random_symmetric(rng, d);
      const Vector g = testing::random_matrix(rng, d, 1);
      const double sigma = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
      auto m = dense_model(g, H, sigma);
      SubsolverOptions opts;
      opts.lanczos.seed = static_cast<std::uint64_t>(t);
      const auto plain = solve_subproblem(m.model, opts);
      CHECK(plain.model_value <= plain.cauchy_value);
      if (plain.eigen_value) CHECK(plain.model_value <= *plain.eigen_value);
      CHECK(plain.model_value <= 0.0);
      CHECK(std::abs(cubic_value(g, H, sigma, plain.eta.data()) - plain.model_value) <=
            1e-10 * std::max(1.0, std::abs(plain.model_value)));

      opts.refine_steps = 10;
      const auto refined = solve_subproblem(m.model, opts);
      CHECK(refined.model_value <= plain.model_value);
      CHECK(std::abs(cubic_value(g, H, sigma, refined.eta.data()) - refined.model_value) <=
            1e-10 * std::max(1.0, std::abs(refined.model_value)));
    }
  }
  SUBCASE("tie prefers the Cauchy step") {
    // Both candidates are the same 1-D minimizer along e1.
    Matrix H = Matrix::Zero(2, 2);
    H.diagonal() << -1, 5;
    auto m = dense_model(Eigen::Vector2d(1, 0), H, 1.0);
    const auto r = solve_subproblem(m.model);
    REQUIRE(r.eigen_value.has_value());
    CHECK(std::abs(*r.eigen_value - r.cauchy_value) < 1e-12);
    CHECK(r.used_eigen_step == (*r.eigen_value < r.cauchy_value));
    if (!r.used_eigen_step) CHECK(r.model_value == r.cauchy_value);
  }
}
