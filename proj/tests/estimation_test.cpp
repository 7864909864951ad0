#include <doctest.h>

#include <algorithm>

#include "logb/errors.hpp"
#include "logb/estimation.hpp"
#include "oracles.hpp"

using namespace logbandit;

TEST_CASE("lambda schedule") {
  CHECK(lambda_at({2}, 1) == 1.0);
  CHECK(lambda_at({2}, 100) == doctest::Approx(2 * std::log(100.0)));
  CHECK(lambda_at({2}, 100) == doctest::Approx(9.2103).epsilon(1e-5));
  CHECK(lambda_at({5}, 1000) == doctest::Approx(34.539).epsilon(1e-5));
  CHECK_THROWS_AS(lambda_at({2}, 0), DomainError);
  double prev = 0;
  for (long t = 1; t < 5000; t += 7) {
    const double l = lambda_at({3, 1.5}, t);
    CHECK(l >= prev);
    CHECK(l >= 1.5);
    prev = l;
  }
}

TEST_CASE("history validation") {
  History h(2);
  CHECK_THROWS_AS(h.append(Vec::Unit(2, 0), 2), DomainError);
  CHECK_THROWS_AS(h.append(Vec::Unit(3, 0), 1), DomainError);
  CHECK_THROWS_AS(h.append(Vec::Unit(2, 0) * 1.5, 1), DomainError);
  h.append(Vec::Unit(2, 0), 1);
  h.append(Vec::Unit(2, 1), 0);
  h.append(Vec::Unit(2, 0), 0);
  CHECK(h.size() == 3);
  CHECK(h.distinct_count() == 2);
  CHECK(h.pull_counts()(0) == 2.0);
}

TEST_CASE("log_loss") {
  History empty(2);
  CHECK(log_loss(empty, Vec::Zero(2), 1.0) == 0.0);

  History one(2);
  one.append(Vec::Unit(2, 1), 1);
  CHECK(log_loss(one, Vec::Unit(2, 0), 0.0) == doctest::Approx(std::log(2.0)));

  History far(2);
  far.append(Vec::Unit(2, 0), 1);
  const double v = log_loss(far, (Vec(2) << 1e4, 0).finished(), 2.0);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(1e8));

  CounterRng rng(21);
  const Vec th = (Vec(3) << 1, -2, 0.5).finished();
  const History h = oracle::random_history(rng, th, 60);
  for (int i = 0; i < 10; ++i) {
    const Vec p = oracle::random_in_ball(rng, 3, 3.0);
    CHECK(log_loss(h, p, 1.3) == doctest::Approx(oracle::naive_loss(h, p, 1.3)).epsilon(1e-12));
  }
}

TEST_CASE("g_vector and gradient") {
  History empty(3);
  const Vec v = (Vec(3) << 1, 2, 3).finished();
  CHECK((g_vector(empty, v, 3.0) - 3 * v).norm() == 0.0);

  History twice(2);
  twice.append(Vec::Unit(2, 0), 1);
  twice.append(Vec::Unit(2, 0), 0);
  CHECK((g_vector(twice, Vec::Zero(2), 1.0) - Vec::Unit(2, 0)).norm() < 1e-15);

  CounterRng rng(22);
  for (int rep = 0; rep < 5; ++rep) {
    const Vec th = oracle::random_in_ball(rng, 3, 2.0);
    const History h = oracle::random_history(rng, th, 40);
    const Vec p = oracle::random_in_ball(rng, 3, 2.0);
    const double step = 1e-6;
    Vec fd(3);
    for (int i = 0; i < 3; ++i) {
      const Vec e = Vec::Unit(3, i) * step;
      fd(i) = (oracle::naive_loss(h, p + e, 0.7) - oracle::naive_loss(h, p - e, 0.7)) / (2 * step);
    }
    CHECK((g_vector(h, p, 0.7) - h.reward_weighted_sum() - fd).norm() < 1e-6);
  }
}

TEST_CASE("hessian") {
  History empty(3);
  CHECK((hessian(empty, Vec::Zero(3), 2.0) - 2 * Mat::Identity(3, 3)).norm() == 0.0);

  History one(3);
  one.append(Vec::Unit(3, 0), 1);
  Mat expect = Mat::Identity(3, 3);
  expect(0, 0) = 1.25;
  CHECK((hessian(one, Vec::Zero(3), 1.0) - expect).norm() < 1e-15);

  CounterRng rng(23);
  for (int rep = 0; rep < 5; ++rep) {
    const Vec th = oracle::random_in_ball(rng, 3, 2.0);
    const History h = oracle::random_history(rng, th, 40);
    const Vec p = oracle::random_in_ball(rng, 3, 2.0);
    const double step = 1e-4;
    Mat fd(3, 3);
    for (int i = 0; i < 3; ++i) {
      const Vec e = Vec::Unit(3, i) * step;
      fd.col(i) = (g_vector(h, p + e, 0.7) - g_vector(h, p - e, 0.7)) / (2 * step);
    }
    const Mat H = hessian(h, p, 0.7);
    CHECK((H - fd).cwiseAbs().maxCoeff() < 1e-4);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(H).eigenvalues().minCoeff() >= 0.7 - 1e-12);
  }
}

TEST_CASE("fit_mle scalar cases") {
  History sym(1);
  sym.append(Vec::Ones(1), 1);
  sym.append(Vec::Ones(1), 0);
  CHECK(std::abs(fit_mle(sym, 1.0).theta_hat(0)) < 1e-12);

  History ones(1);
  ones.append(Vec::Ones(1), 1);
  ones.append(Vec::Ones(1), 1);
  const double root = oracle::bisect([](double t) { return 2 * oracle::sigmoid(t) - 2 + t; }, 0, 2, 1e-12);
  const auto r = fit_mle(ones, 1.0);
  CHECK(r.theta_hat(0) == doctest::Approx(root).epsilon(1e-9));
  CHECK(r.theta_hat(0) == doctest::Approx(0.67483).epsilon(1e-5));
  CHECK(r.grad_norm <= 1e-9);

  History empty(3);
  CHECK(fit_mle(empty, 1.0).theta_hat.norm() == 0.0);
}

TEST_CASE("fit_mle optimality, permutation invariance and iteration budget") {
  CounterRng rng(24);
  for (int d : {2, 5, 10}) {
    const Vec th = oracle::random_in_ball(rng, d, 3.0);
    History h = oracle::random_history(rng, th, 2000);
    const double lam = lambda_at({d}, 2001);
    const auto r = fit_mle(h, lam);
    CHECK((g_vector(h, r.theta_hat, lam) - h.reward_weighted_sum()).norm() <= 1e-9);
    CHECK(r.iterations <= 30);

    std::vector<Round> rounds = h.rounds();
    std::reverse(rounds.begin(), rounds.end());
    std::swap(rounds[3], rounds[1000]);
    History p(d);
    for (const auto& rd : rounds) p.append(rd.arm, rd.reward);
    CHECK((fit_mle(p, lam).theta_hat - r.theta_hat).norm() < 1e-8);

    const auto warm = fit_mle(h, lam, {}, r.theta_hat);
    CHECK(warm.iterations <= 1);
  }
}

TEST_CASE("fit_mle reports non-convergence") {
  CounterRng rng(25);
  const History h = oracle::random_history(rng, Vec::Ones(2), 100);
  MleOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-15;
  CHECK_THROWS_AS(fit_mle(h, 1.0, opts, Vec::Ones(2) * 50.0), NonConvergence);
}

TEST_CASE("radii") {
  const double lam = 2 * std::log(101.0);
  const double g = gamma_radius(100, 2, lam, 0.1, 1.0);
  const double direct = std::sqrt(lam) * 1.5 + 2 / std::sqrt(lam) * std::log(40.0 * (1 + 100 / (32 * lam)));
  CHECK(g == doctest::Approx(direct).epsilon(1e-14));
  CHECK(g == doctest::Approx(7.18).epsilon(1e-3));
  CHECK(beta_radius(g, lam) == doctest::Approx(24.15).epsilon(1e-3));
  CHECK(beta_radius(2.0, 4.0) == 4.0);
  CHECK(beta_radius(0.0, 4.0) == 0.0);
  CHECK(gamma_radius(200, 2, 3.0, 0.5, 1.0) > gamma_radius(100, 2, 3.0, 0.5, 1.0));
  const double at_one = gamma_radius(10, 2, 3.0, 1.0, 1.0);
  CHECK(at_one == doctest::Approx(std::sqrt(3.0) * 1.5 + 2 / std::sqrt(3.0) * std::log(4 * (1 + 10 / 96.0))));
  CHECK_THROWS_AS(gamma_radius(10, 2, 3.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(gamma_radius(10, 2, 3.0, 1.5, 1.0), DomainError);
}
