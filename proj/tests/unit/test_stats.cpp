#include "doctest.h"

#include "commentgen/error.hpp"
#include "commentgen/stats.hpp"
#include "oracles/oracles.hpp"

using namespace commentgen;

TEST_SUITE("stats") {
  TEST_CASE("2x2 fixture") {
    auto r = chi_square_two_tailed({{20, 5}, {5, 20}});
    CHECK(r.statistic == doctest::Approx(18.0).epsilon(1e-12));
    CHECK(r.dof == 1);
    CHECK(r.p_value == doctest::Approx(oracle::chi_square_sf(18.0, 1)).epsilon(1e-6));
  }

  TEST_CASE("survival function against numerical integration") {
    for (int dof : {1, 2, 3, 5}) {
      for (double x : {0.5, 1.0, 3.841, 7.0, 12.0}) {
        CHECK(chi_square_sf(x, dof) == doctest::Approx(oracle::chi_square_sf(x, dof)).epsilon(1e-7));
      }
    }
    CHECK(chi_square_sf(3.841, 1) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(regularized_gamma_p(2.0, 1.0) + regularized_gamma_q(2.0, 1.0) == doctest::Approx(1.0));
  }

  TEST_CASE("statistic is permutation invariant and p is monotone") {
    std::vector<std::vector<double>> t = {{12, 7, 3}, {4, 9, 11}};
    auto base = chi_square_two_tailed(t);
    CHECK(base.statistic == doctest::Approx(oracle::chi_square_statistic(t)));
    CHECK(base.dof == 2);
    auto swapped_rows = chi_square_two_tailed({t[1], t[0]});
    auto swapped_cols = chi_square_two_tailed({{3, 7, 12}, {11, 9, 4}});
    CHECK(swapped_rows.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
    CHECK(swapped_cols.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
    double prev = 1.0;
    for (double x = 0.0; x < 30.0; x += 0.5) {
      double p = chi_square_sf(x, 3);
      CHECK(p <= prev);
      prev = p;
    }
  }

  TEST_CASE("degenerate tables name the offending marginal") {
    try {
      chi_square_two_tailed({{0, 0}, {3, 4}});
      FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
      CHECK(std::string(e.what()).find("row 0") != std::string::npos);
    }
    try {
      chi_square_two_tailed({{0, 5}, {0, 4}});
      FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
      CHECK(std::string(e.what()).find("column 0") != std::string::npos);
    }
    CHECK_THROWS_AS(chi_square_two_tailed({{1, 2}}), PreconditionError);
    CHECK_THROWS_AS(chi_square_two_tailed({{1, 2}, {3}}), PreconditionError);
  }

  TEST_CASE("mean and median") {
    CHECK(mean({1, 2, 3, 4}) == 2.5);
    CHECK(median({4, 1, 3}) == 3);
    CHECK(median({4, 1, 3, 2}) == 2.5);
  }
}
