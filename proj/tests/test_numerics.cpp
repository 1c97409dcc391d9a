#include <cmath>

#include <gtest/gtest.h>

#include "rtevans/ode.hpp"
#include "rtevans/quadrature.hpp"

using namespace rtevans;

TEST(Quadrature, PeakedIntegrand) {
  auto r = quad::gauss_kronrod([](double x) { return 1e-3 / (x * x + 1e-6); }, -1.0, 1.0);
  EXPECT_NEAR(r.value, 2.0 * std::atan(1e3), 1e-12);
}

TEST(Quadrature, SemiInfiniteExponential) {
  auto r = quad::gauss_kronrod_semi_infinite([](double x) { return std::exp(-2 * x) * x * x; }, 0.0);
  EXPECT_NEAR(r.value, 0.25, 1e-13);
}

TEST(Quadrature, GaussLegendreExpansion) {
  auto check = [](const quad::Rule& rule, int n) {
    ASSERT_EQ(static_cast<int>(rule.nodes.size()), n);
    double wsum = 0;
    for (double w : rule.weights) wsum += w;
    EXPECT_NEAR(wsum, 2.0, 1e-14);
    const int deg = 2 * n - 2;
    EXPECT_NEAR(quad::fixed([&](double x) { return std::pow(x, deg); }, rule, -1.0, 1.0), 2.0 / (deg + 1),
                1e-13);
    for (std::size_t i = 1; i < rule.nodes.size(); ++i) EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
  };
  check(quad::gauss_legendre<15>(), 15);
  check(quad::gauss_legendre<20>(), 20);
}

TEST(Ode, ExponentialForwardAndBackward) {
  auto f = [](double, const ode::State<1>& y) { return ode::State<1>{-y[0]}; };
  EXPECT_NEAR(ode::integrate<1>(f, 0.0, {1.0}, 5.0)[0], std::exp(-5.0), 1e-11);
  EXPECT_NEAR(ode::integrate<1>(f, 5.0, {std::exp(-5.0)}, 0.0)[0], 1.0, 1e-10);
}

TEST(Ode, SamplesAtRequestedTimes) {
  auto f = [](double, const ode::State<2>& y) { return ode::State<2>{y[1], -y[0]}; };
  std::vector<double> ts;
  for (double t = 0.0; t <= 10.0; t += 0.37) ts.push_back(t);
  const auto sol = ode::solve_at<2>(f, {0.0, 1.0}, ts);
  ASSERT_EQ(sol.size(), ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_NEAR(sol[i][0], std::sin(ts[i]), 1e-9);
    EXPECT_NEAR(sol[i][1], std::cos(ts[i]), 1e-9);
  }
}
