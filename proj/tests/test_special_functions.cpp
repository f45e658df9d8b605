#include "oracle_fixtures.hpp"
#include "support.hpp"

#include "sentshift/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace sentshift::stats;
using testsupport::rel_close;

TEST_CASE("student_t_sf matches quadrature over the df grid") {
  CHECK(oracle::kStudentT.size() >= 50);
  for (const auto &p : oracle::kStudentT) {
    INFO("t=" << p.x << " df=" << p.df);
    CHECK(rel_close(student_t_sf(p.x, p.df), p.sf, 1e-10));
  }
}

TEST_CASE("chi2_sf matches quadrature over the df grid") {
  CHECK(oracle::kChiSquare.size() >= 30);
  for (const auto &p : oracle::kChiSquare) {
    INFO("x=" << p.x << " df=" << p.df);
    CHECK(rel_close(chi2_sf(p.x, p.df), p.sf, 1e-10));
  }
}

TEST_CASE("student_t_sf symmetry and centre") {
  for (double df : {0.5, 1.0, 2.0, 5.0, 30.0, 1e6}) {
    CHECK(student_t_sf(0.0, df) == 0.5);
    for (double t : {0.01, 0.3, 1.0, 2.7, 8.0})
      CHECK(student_t_sf(t, df) + student_t_sf(-t, df) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("student_t_sf reference value at t=2 df=10") {
  CHECK(rel_close(student_t_sf(2.0, 10.0), 0.036694017385370196, 1e-10));
}

TEST_CASE("chi2_sf closed form for two degrees of freedom") {
  for (double x = 0.0; x < 200.0; x += 0.37)
    CHECK(std::fabs(chi2_sf(x, 2.0) - std::exp(-x / 2.0)) <= 1e-12);
  CHECK(chi2_sf(4.605, 2.0) == doctest::Approx(0.1).epsilon(1e-2));
  CHECK(std::fabs(chi2_sf(4.605, 2.0) - 0.1) < 1e-3);
  CHECK(chi2_sf(0.0, 3.0) == 1.0);
}

TEST_CASE("infinite df reduces to the normal tail") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(rel_close(student_t_sf(1.96, inf), normal_sf(1.96), 1e-14));
  CHECK(rel_close(normal_sf(1.96), 0.024997895148220435, 1e-12));
}

TEST_CASE("special function argument errors") {
  CHECK_THROWS_AS(student_t_sf(1.0, 0.0), StatsError);
  CHECK_THROWS_AS(student_t_sf(1.0, -3.0), StatsError);
  CHECK_THROWS_AS(chi2_sf(-1.0, 2.0), StatsError);
  CHECK_THROWS_AS(chi2_sf(1.0, 0.0), StatsError);
  try {
    student_t_sf(1.0, 0.0);
  } catch (const StatsError &e) {
    CHECK(e.kind() == StatsError::Kind::InvalidDf);
  }
}

TEST_CASE("incomplete functions at their edges") {
  CHECK(incomplete_beta(2.0, 3.0, 0.0, 1.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0, 0.0) == 1.0);
  CHECK(gamma_p(3.0, 0.0) == 0.0);
  CHECK(gamma_q(3.0, 0.0) == 1.0);
  CHECK(gamma_p(2.5, 4.0) + gamma_q(2.5, 4.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rel_close(incomplete_beta(0.5, 0.5, 0.5, 0.5), 0.5, 1e-14));
}
