#include "commentgen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "commentgen/error.hpp"

namespace commentgen {
namespace {

constexpr int kMaxIterations = 500;
constexpr double kEpsilon = 1e-15;

double gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEpsilon) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz's method for the continued fraction of Q(a, x).
double gamma_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEpsilon;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw PreconditionError("incomplete gamma needs a > 0 and x >= 0");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  check_args(a, x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_continued_fraction(a, x);
}

double chi_square_sf(double statistic, double dof) {
  if (!(dof > 0.0)) throw PreconditionError("chi-square needs dof > 0");
  if (statistic <= 0.0) return 1.0;
  return std::clamp(regularized_gamma_q(dof / 2.0, statistic / 2.0), 0.0, 1.0);
}

ChiSquareResult chi_square_two_tailed(const std::vector<std::vector<double>>& table) {
  const std::size_t rows = table.size();
  if (rows < 2) throw PreconditionError("contingency table needs at least 2 rows");
  const std::size_t cols = table.front().size();
  if (cols < 2) throw PreconditionError("contingency table needs at least 2 columns");
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (table[r].size() != cols)
      throw PreconditionError("contingency table row " + std::to_string(r) + " has " + std::to_string(table[r].size()) +
                              " cells, expected " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      double v = table[r][c];
      if (!(v >= 0.0)) throw PreconditionError("contingency counts must be non-negative");
      row_sum[r] += v;
      col_sum[c] += v;
      total += v;
    }
  }
  for (std::size_t r = 0; r < rows; ++r)
    if (row_sum[r] == 0.0) throw PreconditionError("row " + std::to_string(r) + " has a zero marginal");
  for (std::size_t c = 0; c < cols; ++c)
    if (col_sum[c] == 0.0) throw PreconditionError("column " + std::to_string(c) + " has a zero marginal");

  ChiSquareResult out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double expected = row_sum[r] * col_sum[c] / total;
      double diff = table[r][c] - expected;
      out.statistic += diff * diff / expected;
    }
  }
  out.dof = (rows - 1) * (cols - 1);
  out.p_value = chi_square_sf(out.statistic, static_cast<double>(out.dof));
  return out;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw PreconditionError("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw PreconditionError("median of an empty sample");
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

}  // namespace commentgen
