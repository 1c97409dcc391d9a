#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rtevans/ode.hpp"
#include "rtevans/profile.hpp"

using namespace rtevans;

TEST(Profile, GaugeAtOrigin) {
  for (double nu : {1.5, 2.0, 3.0, 5.0}) {
    Profile p(nu);
    EXPECT_NEAR(p.at(0.0).xi, 0.5, 1e-15);
    EXPECT_NEAR(p.y_of_xi(0.5), 0.0, 1e-15);
  }
}

TEST(Profile, RejectsNuAtMostOne) {
  EXPECT_THROW(Profile(1.0), ValidationError);
  EXPECT_THROW(Profile(0.9), ValidationError);
  EXPECT_THROW(PhysicalParams({2.0, -1.0, 1.0, 1.0}).validate(), ValidationError);
}

TEST(Profile, YOfXiMatchesHighPrecisionValues) {
  // 40-digit adaptive quadrature of 1/(eta^{nu+1}(1-eta)) from 1/2
  struct Case { double nu, xi, y; };
  const Case cases[] = {{2.0, 0.25, -9.098612288668109691395245},
                        {1.5, 0.25, -5.283423010793992863064344},
                        {3.0, 0.9, 6.678248811446873584961813},
                        {2.5, 1e-3, -12670250.45998812785141767},
                        {2.0, 1 - 1e-10, 25.52585084690008923922174}};
  for (const auto& c : cases) {
    Profile p(c.nu);
    EXPECT_NEAR(p.y_of_xi(c.xi), c.y, 1e-12 * std::max(1.0, std::abs(c.y))) << c.nu << " " << c.xi;
  }
}

TEST(Profile, YOfXiAgreesWithOdeIntegration) {
  // dy/dxi = 1/(xi^{nu+1}(1-xi)) integrated from xi = 1/2
  for (double nu : {2.0, 1.5}) {
    Profile p(nu);
    auto f = [nu](double xi, const ode::State<1>&) {
      return ode::State<1>{1.0 / (std::pow(xi, nu + 1) * (1 - xi))};
    };
    const auto y = ode::integrate<1>(f, 0.5, {0.0}, 0.25, {1e-13, 1e-14});
    EXPECT_NEAR(p.y_of_xi(0.25), y[0], 1e-8);
  }
}

TEST(Profile, RoundTrip) {
  for (double nu : {1.5, 2.0, 3.0, 5.0}) {
    Profile p(nu);
    for (double xi : {1e-8, 1e-3, 0.25, 0.5, 0.75, 0.999, 1 - 1e-9}) {
      const double y = p.y_of_xi(xi);
      EXPECT_NEAR(p.at(y).xi, xi, 1e-12 * xi) << nu << " " << xi;
    }
  }
}

TEST(Profile, TableAndSubtractionRoutesAgree) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 20.0);
  for (double nu : {1.5, 2.0, 3.7}) {
    Profile p(nu);
    for (int i = 0; i < 100; ++i) {
      const double y = u(rng);
      const double back = p.y_of_xi(p.at(y).xi);
      EXPECT_NEAR(back, y, 1e-9 * std::max(1.0, std::abs(y)));
    }
  }
}

TEST(Profile, OdeResidualAndFiniteDifference) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-50.0, 20.0);
  const double nu = 2.0;
  Profile p(nu);
  for (int i = 0; i < 100; ++i) {
    const double y = u(rng);
    const auto e = p.at(y);
    EXPECT_LE(std::abs(e.xi_dot - std::pow(e.xi, nu + 1) * (1 - e.xi)), 1e-9);
    EXPECT_DOUBLE_EQ(e.k0_scaled, e.xi_dot / e.xi);
    const double h = 1e-5;
    const double fd = (p.at(y + h).xi - p.at(y - h).xi) / (2 * h);
    EXPECT_NEAR(fd, e.xi_dot, 1e-6);
  }
}

TEST(Profile, MonotoneAndInsideUnitInterval) {
  for (double nu : {1.2, 2.0, 4.0}) {
    Profile p(nu);
    double prev = 0.0, prev_gap = 1.0;
    for (double y = -200.0; y <= 60.0; y += 0.173) {
      const auto e = p.at(y);
      // xi itself rounds to 1 on the far right, so track 1 - xi there
      ASSERT_GE(e.xi, prev);
      ASSERT_LT(e.one_minus_xi, prev_gap);
      ASSERT_GT(e.xi, 0.0);
      ASSERT_GT(e.one_minus_xi, 0.0);
      prev = e.xi;
      prev_gap = e.one_minus_xi;
    }
    EXPECT_LT(p.y_of_xi(0.1), p.y_of_xi(0.2));
  }
}

TEST(Profile, LeftAsymptote) {
  for (double nu : {1.5, 2.0, 3.0}) {
    Profile p(nu);
    const double y = -1e4 / nu;
    EXPECT_LE(std::abs(p.at(y).xi * std::pow(nu * -y, 1.0 / nu) - 1.0), 0.05);
    // far beyond the table the closed-form asymptote takes over
    const double yf = -1e300;
    EXPECT_NEAR(p.at(yf).xi * std::pow(nu * -yf, 1.0 / nu), 1.0, 1e-10);
  }
}

TEST(Profile, RightAsymptote) {
  for (double nu : {1.5, 2.0, 3.0}) {
    Profile p(nu);
    const double y9 = p.y_of_xi(0.9);
    for (double y = y9; y < y9 + 60; y += 0.5)
      EXPECT_LE(p.at(y).one_minus_xi, 2 * std::exp(-(y - y9))) << y;
  }
}

TEST(Profile, MaximumOfK0) {
  for (double nu : {1.5, 2.0, 3.0}) {
    Profile p(nu);
    const auto sc = l_eff_and_cap({nu, 1.0, 1.0, 1.0});
    double best = 0, best_xi = 0;
    for (double y = -20; y < 20; y += 1e-4) {
      const auto e = p.at(y);
      if (e.k0_scaled > best) {
        best = e.k0_scaled;
        best_xi = e.xi;
      }
    }
    EXPECT_NEAR(best, sc.k0_max, 1e-8);
    EXPECT_NEAR(best_xi, sc.xi_star, 1e-4);
  }
  EXPECT_NEAR(l_eff_and_cap({2.0, 1.0, 1.0, 1.0}).k0_max, 4.0 / 27.0, 1e-15);
}

TEST(Profile, EffectiveLengthAndCap) {
  const auto sc = l_eff_and_cap({2.0, 1.0, 1.0, 1.0});
  EXPECT_NEAR(sc.L_eff, 6.75, 1e-13);
  EXPECT_NEAR(sc.Lambda, 0.3849001794597505, 1e-13);
  EXPECT_NEAR(sc.xi_star, 2.0 / 3.0, 1e-15);
}

TEST(Profile, WeightedGradientBounded) {
  // k0 xi^{-1/2} stays bounded since k0 ~ xi^nu with nu > 1/2
  Profile p(2.0);
  double bound = 0;
  for (double y = -1e6; y < 50; y = (y < -10 ? y * 0.9 : y + 0.01)) {
    const auto e = p.at(y);
    bound = std::max(bound, e.k0_scaled / std::sqrt(e.xi));
  }
  EXPECT_TRUE(std::isfinite(bound));
  EXPECT_LT(bound, 1.0);
}
