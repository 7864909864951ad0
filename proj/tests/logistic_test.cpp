#include <doctest.h>

#include "logb/logistic.hpp"
#include "oracles.hpp"

using namespace logbandit;

TEST_CASE("mu_family at zero") {
  const auto v = mu_family(0.0);
  CHECK(v.mu == 0.5);
  CHECK(v.mu_dot == 0.25);
  CHECK(v.mu_ddot == 0.0);
}

TEST_CASE("mu_family at one matches finite differences") {
  const auto v = mu_family(1.0);
  CHECK(v.mu == doctest::Approx(0.7310586).epsilon(1e-7));
  CHECK(v.mu_dot == doctest::Approx(0.1966119).epsilon(1e-7));
  CHECK(v.mu_ddot == doctest::Approx(-0.0908577).epsilon(1e-6));
  const double h = 1e-6;
  CHECK(v.mu_dot == doctest::Approx((oracle::sigmoid(1 + h) - oracle::sigmoid(1 - h)) / (2 * h)).epsilon(1e-8));
  CHECK(v.mu_ddot ==
        doctest::Approx((oracle::sigmoid_dot(1 + h) - oracle::sigmoid_dot(1 - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("mu_family far in the left tail") {
  const auto v = mu_family(-40.0);
  const double e = std::exp(-40.0);
  CHECK(v.mu == doctest::Approx(e).epsilon(1e-12));
  CHECK(v.mu_dot == doctest::Approx(e).epsilon(1e-12));
  CHECK(v.mu_ddot == doctest::Approx(e).epsilon(1e-12));
  CHECK(v.mu == doctest::Approx(4.25e-18).epsilon(1e-2));
  CHECK(std::isfinite(mu_family(-1e4).mu_dot));
  CHECK(mu_family(1e4).mu == 1.0);
  CHECK(softplus(1e4) == doctest::Approx(1e4));
}

TEST_CASE("slope_alpha against quadrature") {
  CHECK(slope_alpha(0.0, 1.0) == doctest::Approx(0.2310586).epsilon(1e-7));
  CHECK(slope_alpha(-2.0, 2.0) == doctest::Approx((oracle::sigmoid(2) - oracle::sigmoid(-2)) / 4).epsilon(1e-12));
  CHECK(slope_alpha(-2.0, 2.0) == doctest::Approx(0.1903985).epsilon(1e-6));
  CHECK(slope_alpha(0.7, 0.7) == doctest::Approx(mu_dot(0.7)).epsilon(1e-14));
  logbandit::CounterRng rng(11);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.uniform(-8, 8), b = rng.uniform(-8, 8);
    const double q = oracle::simpson([&](double v) { return oracle::sigmoid_dot(a + v * (b - a)); }, 0, 1);
    CHECK(slope_alpha(a, b) == doctest::Approx(q).epsilon(1e-9));
  }
  const Vec x = (Vec(2) << 0.6, 0.8).finished();
  const Vec t1 = (Vec(2) << 1.0, -1.0).finished(), t2 = (Vec(2) << 0.5, 2.0).finished();
  CHECK(slope_alpha(x, t1, t2) == doctest::Approx(slope_alpha(x.dot(t1), x.dot(t2))));
}

TEST_CASE("slope_alpha_tilde against quadrature") {
  CHECK(slope_alpha_tilde(0.3, 0.3) == doctest::Approx(mu_dot(0.3) / 2).epsilon(1e-14));
  const double q01 = oracle::simpson([](double v) { return (1 - v) * oracle::sigmoid_dot(v); }, 0, 1);
  CHECK(std::abs(slope_alpha_tilde(0.0, 1.0) - q01) < 1e-9);
  CHECK(slope_alpha_tilde(0.0, 1e-6) == doctest::Approx(0.125).epsilon(1e-6));
  const double qs = oracle::simpson([](double v) { return (1 - v) * oracle::sigmoid_dot(1e-6 * v); }, 0, 1);
  CHECK(std::abs(slope_alpha_tilde(0.0, 1e-6) - qs) < 1e-12);
  logbandit::CounterRng rng(12);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.uniform(-8, 8), b = a + rng.uniform(-8, 8) * std::pow(10.0, -rng.uniform(0, 7));
    const double q = oracle::simpson([&](double v) { return (1 - v) * oracle::sigmoid_dot(a + v * (b - a)); }, 0, 1);
    CHECK(std::abs(slope_alpha_tilde(a, b) - q) < 1e-9);
  }
}

TEST_CASE("best_arm") {
  const auto fin = ArmSet::finite({(Vec(2) << 1, 0).finished(), (Vec(2) << 0, 1).finished()});
  auto b = best_arm(fin, (Vec(2) << 2, 1).finished());
  CHECK(b.value == 2.0);
  CHECK(b.index == std::optional<std::size_t>(0));

  auto ball = best_arm(ArmSet::unit_ball(3), (Vec(3) << 0, 3, 4).finished());
  CHECK(ball.value == doctest::Approx(5.0));
  CHECK(ball.arm(1) == doctest::Approx(0.6));
  CHECK(ball.arm(2) == doctest::Approx(0.8));

  const auto twins = ArmSet::finite({Vec::Unit(2, 0), Vec::Unit(2, 0)});
  auto t = best_arm(twins, Vec::Unit(2, 0));
  CHECK(t.index == std::optional<std::size_t>(0));
  CHECK(t.value == 1.0);
}

TEST_CASE("arm set validation") {
  CHECK_THROWS(ArmSet::finite({}));
  CHECK_THROWS(ArmSet::finite({(Vec(2) << 1, 1).finished()}));
  CHECK(ArmSet::unit_sphere(2, 720).discretization().size() == 720);
  CHECK(ArmSet::unit_ball(2).contains((Vec(2) << 0.3, 0.4).finished()));
  CHECK_FALSE(ArmSet::unit_sphere(2).contains((Vec(2) << 0.3, 0.4).finished()));
}

TEST_CASE("kappa_summary") {
  {
    ProblemInstance inst((Vec(2) << 0, 1).finished(), 1.0, ArmSet::finite({Vec::Unit(2, 0)}));
    CHECK(kappa_summary(inst).kappa_star == doctest::Approx(4.0));
  }
  {
    ProblemInstance inst(Vec::Unit(2, 0), 1.0, ArmSet::unit_sphere(2));
    const auto k = kappa_summary(inst);
    CHECK(k.kappa_star == doctest::Approx(5.0862).epsilon(1e-4));
    CHECK(k.kappa_x == doctest::Approx(5.0862).epsilon(1e-4));
    CHECK(k.kappa_star == doctest::Approx(1 / oracle::sigmoid_dot(1.0)));
  }
  {
    ProblemInstance inst(Vec::Unit(2, 0) * 3.0, 3.0, ArmSet::unit_ball(2));
    const auto k = kappa_summary(inst);
    CHECK(k.kappa_x == doctest::Approx(22.14).epsilon(1e-3));
    CHECK(k.kappa_global == doctest::Approx(k.kappa_x));
  }
}

TEST_CASE("detrimental set") {
  {
    DetrimentalSet xm(ProblemInstance(Vec::Unit(2, 0) * 2.0, 2.0, ArmSet::unit_ball(2)));
    CHECK(xm.contains((Vec(2) << -1, 0).finished()));
    CHECK_FALSE(xm.contains((Vec(2) << 0, 1).finished()));
    CHECK(xm.contains((Vec(2) << -0.5, 0).finished()));
    CHECK_FALSE(xm.contains((Vec(2) << -0.49, 0).finished()));
  }
  {
    DetrimentalSet xm(ProblemInstance(Vec::Unit(2, 0) * 3.0, 3.0,
                                      ArmSet::finite({(Vec(2) << 0, -1).finished(), (Vec(2) << -1, 0).finished()})));
    CHECK_FALSE(xm.uses_margin_rule());
    CHECK(xm.finite_members() == std::vector<std::size_t>{1});
  }
  {
    DetrimentalSet xm(ProblemInstance(Vec::Unit(2, 0), 1.0, ArmSet::unit_ball(2)));
    CHECK_FALSE(xm.contains((Vec(2) << -0.999, 0.0447).finished()));
  }
}
