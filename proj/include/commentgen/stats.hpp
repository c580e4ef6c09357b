#pragma once

#include <cstddef>
#include <vector>

namespace commentgen {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);
/// Upper tail Q(a, x) = 1 - P(a, x), evaluated directly for accuracy.
double regularized_gamma_q(double a, double x);

/// Survival function of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson test of independence on an r x c table of counts. The p-value is
/// the upper tail of the chi-square distribution, the conventional reading
/// of a "two-tailed" Pearson test. Throws PreconditionError naming the row or
/// column when a marginal is zero, and on ragged or undersized tables.
ChiSquareResult chi_square_two_tailed(const std::vector<std::vector<double>>& table);

double mean(const std::vector<double>& xs);
double median(std::vector<double> xs);

}  // namespace commentgen
