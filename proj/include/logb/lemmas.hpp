#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "logb/confidence.hpp"

namespace logbandit {

/// Sum over t of ||x_t||^2 in the inverse of V_t = sum_{s<t} x_s x_s^T +
/// lambda_t I, against 2d(1+X^2) log(lambda_T + T X^2 / d).
std::pair<double, double> elliptical_potential_check(const std::vector<Vec>& arms, const RegSchedule& sched,
                                                     double x_bound);

/// log det(lambda I + sum of the n outer products) against
/// d log(lambda + n X^2 / d).
std::pair<double, double> determinant_trace_check(const std::vector<Vec>& arms, double lambda, double x_bound);

/// (1/x)(1 + (e^{-x} - 1)/x) for x > 0, with a series near zero.
double exp_ratio(double x);

struct LemmaSuiteResult {
  std::string name;
  long cases = 0;
  long violations = 0;
  /// Largest relative excess of lhs over rhs seen (negative when all hold).
  double worst_excess = -1.0;
  bool pass() const { return cases > 0 && violations == 0; }
};

inline constexpr double kLemmaSlack = 1e-8;

/// Fuzzes every inequality suite with `cases` random instances drawn from a
/// stream keyed on `seed`.
std::vector<LemmaSuiteResult> verify_lemmas(long cases, std::uint64_t seed);

}  // namespace logbandit
