#include "logb/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "logb/rng.hpp"

namespace logbandit {

namespace {

Vec random_arm(CounterRng& rng, int d, double x_bound) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  const double n = v.norm();
  if (n == 0.0) return Vec::Zero(d);
  return v * (x_bound * rng.uniform() / n);
}

struct Tally {
  LemmaSuiteResult r;
  void check(double lhs, double rhs) {
    ++r.cases;
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    const double excess = (lhs - rhs) / scale;
    r.worst_excess = std::max(r.worst_excess, excess);
    if (lhs > rhs + kLemmaSlack * scale) ++r.violations;
  }
};

}  // namespace

std::pair<double, double> elliptical_potential_check(const std::vector<Vec>& arms, const RegSchedule& sched,
                                                     double x_bound) {
  if (arms.empty()) return {0.0, 0.0};
  const int d = static_cast<int>(arms.front().size());
  Mat gram = Mat::Zero(d, d);
  double lhs = 0.0;
  const long T = static_cast<long>(arms.size());
  for (long t = 1; t <= T; ++t) {
    const Vec& x = arms[static_cast<std::size_t>(t - 1)];
    Mat v = gram;
    v.diagonal().array() += lambda_at(sched, t);
    lhs += x.dot(v.llt().solve(x));
    gram.noalias() += x * x.transpose();
  }
  const double x2 = x_bound * x_bound;
  const double rhs = 2.0 * d * (1.0 + x2) * std::log(lambda_at(sched, T) + static_cast<double>(T) * x2 / d);
  return {lhs, rhs};
}

std::pair<double, double> determinant_trace_check(const std::vector<Vec>& arms, double lambda, double x_bound) {
  if (arms.empty()) return {0.0, 0.0};
  const int d = static_cast<int>(arms.front().size());
  Mat v = lambda * Mat::Identity(d, d);
  for (const auto& x : arms) v.noalias() += x * x.transpose();
  const Mat l = v.llt().matrixL();
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  const double rhs = d * std::log(lambda + static_cast<double>(arms.size()) * x_bound * x_bound / d);
  return {logdet, rhs};
}

double exp_ratio(double x) {
  if (x < 1e-3) return 0.5 + x * (-1.0 / 6.0 + x * (1.0 / 24.0 + x * (-1.0 / 120.0 + x / 720.0)));
  return (x + std::expm1(-x)) / (x * x);
}

std::vector<LemmaSuiteResult> verify_lemmas(long cases, std::uint64_t seed) {
  std::vector<LemmaSuiteResult> out;
  auto suite = [&](const std::string& name, std::uint64_t stream, const std::function<void(CounterRng&, Tally&)>& body) {
    Tally tally;
    tally.r.name = name;
    CounterRng rng(seed, stream);
    for (long i = 0; i < cases; ++i) body(rng, tally);
    out.push_back(tally.r);
  };

  suite("self-concordance", 1, [](CounterRng& rng, Tally& t) {
    const auto v = mu_family(rng.uniform(-50.0, 50.0));
    t.check(std::abs(v.mu_ddot), v.mu_dot);
  });

  suite("slope-lower-bound", 2, [](CounterRng& rng, Tally& t) {
    const double z1 = rng.uniform(-30.0, 30.0);
    const double z2 = rng.bernoulli(0.1) ? z1 + rng.uniform(-1e-6, 1e-6) : rng.uniform(-30.0, 30.0);
    const double a = slope_alpha(z1, z2);
    const double gap = std::abs(z1 - z2);
    const double z = rng.bernoulli(0.5) ? z1 : z2;
    t.check(mu_dot(z) / (1.0 + gap), a);
  });

  suite("tilted-slope-lower-bound", 3, [](CounterRng& rng, Tally& t) {
    const double z1 = rng.uniform(-30.0, 30.0);
    const double z2 = rng.bernoulli(0.1) ? z1 + rng.uniform(-1e-3, 1e-3) : rng.uniform(-30.0, 30.0);
    t.check(mu_dot(z1) / (2.0 + std::abs(z1 - z2)), slope_alpha_tilde(z1, z2));
  });

  suite("slope-ratio", 4, [](CounterRng& rng, Tally& t) {
    const double z1 = rng.uniform(-30.0, 30.0);
    const double z2 = rng.uniform(-30.0, 30.0);
    const double gap = std::abs(z2 - z1);
    const double m1 = mu_dot(z1);
    const double m2 = mu_dot(z2);
    if (rng.bernoulli(0.5))
      t.check(m2 * std::exp(-gap), m1);
    else
      t.check(m1, m2 * std::exp(gap));
  });

  {
    Tally tally;
    tally.r.name = "exp-inequality";
    const double lo = std::log(1e-8);
    const double hi = std::log(1e3);
    for (long i = 0; i < cases; ++i) {
      const double x = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(std::max(1L, cases - 1)));
      tally.check(1.0 / (2.0 + x), exp_ratio(x));
    }
    out.push_back(tally.r);
  }

  suite("polynomial-inequality", 6, [](CounterRng& rng, Tally& t) {
    const double b = rng.bernoulli(0.1) ? 0.0 : std::exp(rng.uniform(-10.0, 10.0));
    const double c = rng.bernoulli(0.1) ? 0.0 : std::exp(rng.uniform(-10.0, 10.0));
    const double root = 0.5 * (b + std::sqrt(b * b + 4.0 * c));
    const double x = rng.bernoulli(0.05) ? root : root * rng.uniform();
    t.check(x, b + std::sqrt(c));
  });

  suite("determinant-trace", 7, [](CounterRng& rng, Tally& t) {
    const int d = 1 + static_cast<int>(rng.below(6));
    const int n = static_cast<int>(rng.below(40));
    const double x_bound = std::exp(rng.uniform(-2.0, 2.0));
    const double lambda = std::exp(rng.uniform(-3.0, 3.0));
    std::vector<Vec> arms;
    for (int i = 0; i < n; ++i) arms.push_back(random_arm(rng, d, x_bound));
    if (arms.empty()) arms.push_back(Vec::Zero(d));
    const auto [lhs, rhs] = determinant_trace_check(arms, lambda, x_bound);
    t.check(lhs, rhs);
  });

  suite("elliptical-potential", 8, [](CounterRng& rng, Tally& t) {
    const int d = 1 + static_cast<int>(rng.below(4));
    const int n = 1 + static_cast<int>(rng.below(30));
    const double x_bound = rng.uniform(0.05, 1.0);
    const RegSchedule sched{d, 1.0};
    std::vector<Vec> arms;
    for (int i = 0; i < n; ++i) arms.push_back(random_arm(rng, d, x_bound));
    const auto [lhs, rhs] = elliptical_potential_check(arms, sched, x_bound);
    t.check(lhs, rhs);
  });

  return out;
}

}  // namespace logbandit
