#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rtevans/overdense.hpp"

using namespace rtevans;

namespace {
std::vector<double> ys_between(const Profile& p, double xi_lo, double xi_hi, int n) {
  std::vector<double> ys;
  for (int i = 0; i < n; ++i) ys.push_back(p.y_of_xi(xi_lo + (xi_hi - xi_lo) * i / (n - 1.0)));
  return ys;
}
}  // namespace

TEST(Overdense, LambdaOneIsConstant) {
  Profile p(2.0);
  const auto ys = ys_between(p, 0.01, 0.99, 15);
  const auto br = solve_plus({1.0, 1e-2, 1.0, 1.0}, p, ys);
  for (const auto& s : br.samples) {
    EXPECT_NEAR(s.U, 1.0, 1e-14);
    EXPECT_NEAR(s.V, 0.0, 1e-14);
  }
}

TEST(Overdense, FrozenAtZeroEpsilon) {
  Profile p(2.0);
  const auto br = solve_plus({1.0, 0.0, 1.3, 1.0}, p, ys_between(p, 0.1, 0.9, 5));
  for (const auto& s : br.samples) {
    EXPECT_DOUBLE_EQ(s.U, 1.0);
    EXPECT_NEAR(s.V, 0.3, 1e-15);
  }
}

TEST(Overdense, SamplesAreSortedAndMatchInput) {
  Profile p(2.0);
  const std::vector<double> ys{3.0, -1.0, 10.0};
  const auto br = solve_plus({1.0, 1e-3, 1.2, 1.0}, p, ys);
  ASSERT_EQ(br.samples.size(), 3u);
  EXPECT_EQ(br.samples[0].y, -1.0);
  EXPECT_EQ(br.samples[2].y, 10.0);
}

TEST(Overdense, FirstOrderPerturbation) {
  const double nu = 2, lambda = 1.2;
  Profile p(nu);
  const auto ys = ys_between(p, 0.5, 0.95, 10);
  for (double eps : {1e-3, 5e-4}) {
    const auto br = solve_plus({1.0, eps, lambda, 1.0}, p, ys);
    for (const auto& s : br.samples) {
      const auto c = u1_v1_closed_form(lambda, nu, p.at(s.y).xi);
      EXPECT_LE(std::abs(s.U - 1 - eps * c.u1), 20 * eps * eps) << s.y;
      EXPECT_LE(std::abs(s.V - (lambda - 1) - eps * c.v1), 20 * eps * eps) << s.y;
    }
  }
}

TEST(Overdense, ClosedFormValues) {
  const auto c = u1_v1_closed_form(1.2, 2.0, 0.8);
  EXPECT_NEAR(c.u1, -0.0635417, 1e-7);
  EXPECT_NEAR(c.v1, -0.1237500, 1e-7);
  EXPECT_EQ(u1_v1_closed_form(1.2, 2.0, 1.0).u1, 0.0);
  EXPECT_EQ(u1_v1_closed_form(1.2, 2.0, 1.0).v1, 0.0);
  EXPECT_EQ(u1_v1_closed_form(1.0, 3.0, 0.3).u1, 0.0);
  EXPECT_EQ(u1_v1_closed_form(1.0, 3.0, 0.3).v1, 0.0);
}

TEST(Overdense, SeriesBound) {
  EXPECT_DOUBLE_EQ(r_lambda(1.0), 2.0);
  EXPECT_DOUBLE_EQ(r_lambda(1.5), 3.75);
  EXPECT_DOUBLE_EQ(kUniformR, 3.75);
  for (double l = 0.5; l <= 1.5; l += 0.01) EXPECT_LE(r_lambda(l), kUniformR + 1e-15);
  EXPECT_DOUBLE_EQ(series_bound(1.5, 2), 3.75 * 3.75);
  EXPECT_THROW(series_bound(1.0, 0), ValidationError);
}

TEST(Overdense, SeriesAgreesWithIntegrationAtOrdersOneAndTwo) {
  const double nu = 2, lambda = 1.3, eps = 2e-3;
  Profile p(nu);
  const auto ys = ys_between(p, 0.3, 0.9, 7);
  const auto br = solve_plus({1.0, eps, lambda, 1.0}, p, ys);
  for (const auto& s : br.samples) {
    const double xi = p.at(s.y).xi;
    const auto s1 = series_expansion(eps, lambda, nu, xi, 1);
    const auto s2 = series_expansion(eps, lambda, nu, xi, 2);
    const double e1 = std::abs(s.U - s1.U) + std::abs(s.V - s1.V);
    const double e2 = std::abs(s.U - s2.U) + std::abs(s.V - s2.V);
    // each order gains roughly a factor zeta
    EXPECT_LT(e2, e1 * 10 * s1.zeta) << xi;
    EXPECT_LE(e1, 10 * s1.tail_bound) << xi;
    EXPECT_LE(e2, 10 * s2.tail_bound) << xi;
  }
}

TEST(Overdense, SeriesRefusesOutsideRegion) {
  const double lambda = 1.2, nu = 2;
  const double R = r_lambda(lambda);
  const double eps = 1e-2;
  const double xi_edge = std::pow(eps * R, 1 / nu);
  EXPECT_THROW(series_expansion(eps, lambda, nu, 0.99 * xi_edge), ValidationError);
  EXPECT_NO_THROW(series_expansion(eps, lambda, nu, 1.01 * xi_edge));
}

TEST(Overdense, WronskianConservedAcrossTwoSolutions) {
  const double eps = 1e-3, lambda = 1.1, nu = 2;
  Profile p(nu);
  const auto ys = ys_between(p, 0.02, 0.98, 12);
  const auto a = solve_plus_from(eps, lambda, p, ys, {1.0, lambda - 1});
  const auto b = solve_plus_from(eps, lambda, p, ys, {1.0, lambda - 1 + 0.5});
  std::vector<double> w;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double xi = p.at(a.samples[i].y).xi;
    const double du_a = a.du(i, xi), du_b = b.du(i, xi);
    w.push_back(xi * (a.u(i) * du_b - du_a * b.u(i)) / eps);
  }
  for (double x : w) EXPECT_NEAR(x, w.front(), 1e-8 * std::abs(w.front()));
}

TEST(Overdense, DecaysAndStaysPositiveOnTheRight) {
  Profile p(2.0);
  const double eps = 1e-2;
  const auto ys = ys_between(p, 0.5, 1 - 1e-9, 8);
  const auto br = solve_plus({1.0, eps, 1.3, 1.0}, p, ys);
  for (std::size_t i = 0; i < br.samples.size(); ++i) {
    EXPECT_GT(br.u(i), 0.0);
    EXPECT_NEAR(br.u(i), std::exp(-eps * br.samples[i].y), 0.1 * std::exp(-eps * br.samples[i].y));
  }
  EXPECT_NEAR(br.samples.back().U, 1.0, 1e-6);
}

TEST(Overdense, RejectsPointsRightOfStart) {
  Profile p(2.0);
  const std::vector<double> ys{100.0};
  EXPECT_THROW(solve_plus({1.0, 1e-3, 1.2, 1.0}, p, ys), ValidationError);
}
