#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mrc/geometry.hpp"
#include "oracles.hpp"

using namespace mrc;
using std::numbers::pi;

namespace {

StarSurface bumpy() { return StarSurface(PerturbedSphereShape{1.0, {{2, 0, 0.2}}}); }

StarSurface lumpy() { return StarSurface(PerturbedSphereShape{1.0, {{2, 1, 0.1}, {3, -2, 0.08}, {1, 0, 0.05}}}); }

}  // namespace

TEST(Direction, UnitVectorAndFrame) {
  for (const auto& d : oracle::random_directions(30, 11)) {
    EXPECT_NEAR(norm(d.unit()), 1.0, 1e-14);
    EXPECT_NEAR(dot(d.unit(), d.e_theta()), 0.0, 1e-14);
    EXPECT_NEAR(dot(d.unit(), d.e_phi()), 0.0, 1e-14);
    const auto back = Direction::from_vector(3.0 * d.unit());
    EXPECT_NEAR(back.theta(), d.theta(), 1e-12);
    EXPECT_NEAR(std::cos(back.phi() - d.phi()), 1.0, 1e-12);
  }
  EXPECT_THROW(Direction(-0.1, 0.0), std::domain_error);
  EXPECT_THROW(Direction::from_vector({0, 0, 0}), std::domain_error);
  EXPECT_GE(Direction(1.0, -1.0).phi(), 0.0);
  EXPECT_LT(Direction(1.0, 7.0).phi(), 2 * pi);
}

TEST(Quadrature, ConstantIntegrand) {
  const auto q = make_quadrature(6, 9);
  EXPECT_NEAR(q.integrate([](const Direction&) { return 1.0; }), 4 * pi, 1e-13);
  double s = 0.0;
  for (double w : q.weights()) s += w;
  EXPECT_NEAR(s, 4 * pi, 1e-12);
  EXPECT_EQ(q.degree(), 8);
  EXPECT_THROW(make_quadrature(1, 8), std::invalid_argument);
  EXPECT_THROW(make_quadrature(4, 3), std::invalid_argument);
}

TEST(Quadrature, Orthonormality) {
  const auto q = make_quadrature(8, 16);
  const double n32 = q.integrate([](const Direction& d) { return std::norm(sph_harm({3, 2}, d)); });
  EXPECT_NEAR(n32, 1.0, 1e-12);
  const cplx x = q.integrate([](const Direction& d) { return sph_harm({2, 1}, d) * std::conj(sph_harm({3, 1}, d)); });
  EXPECT_LT(std::abs(x), 1e-12);
}

TEST(Quadrature, GramIdentityUpToHalfDegree) {
  for (int degree : {6, 11, 20}) {
    const auto q = SphereQuadrature::for_degree(degree);
    ASSERT_GE(q.degree(), degree);
    const int L = degree / 2;
    std::vector<std::vector<cplx>> Y;
    for (const auto& d : q.nodes()) Y.push_back(sph_harm_all(L, d));
    double worst = 0.0;
    for (int a = 0; a < mode_count(L); ++a)
      for (int b = 0; b < mode_count(L); ++b) {
        cplx g = 0.0;
        for (std::size_t p = 0; p < q.size(); ++p) g += q.weights()[p] * Y[p][a] * std::conj(Y[p][b]);
        worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
      }
    EXPECT_LT(worst, 1e-12) << "degree " << degree;
  }
}

TEST(GaussLegendre, IntegratesPolynomials) {
  std::vector<double> x, w;
  gauss_legendre(7, x, w);
  for (int p = 0; p <= 13; ++p) {
    double s = 0.0;
    for (int i = 0; i < 7; ++i) s += w[i] * std::pow(x[i], p);
    EXPECT_NEAR(s, p % 2 ? 0.0 : 2.0 / (p + 1), 1e-14) << p;
  }
}

TEST(StarSurface, SphereBasics) {
  const auto s = StarSurface::sphere(2.5);
  for (const auto& d : oracle::random_directions(10, 5)) {
    EXPECT_DOUBLE_EQ(s.radius(d), 2.5);
    EXPECT_NEAR(surface_element(s, d), 6.25, 1e-14);
    const auto n = outward_normal(s, d);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(n[c], d.unit()[c], 1e-15);
  }
  const auto q = SphereQuadrature::for_degree(10);
  EXPECT_NEAR(q.integrate([&](const Direction& d) { return surface_element(s, d); }), 4 * pi * 6.25, 1e-12 * 4 * pi * 6.25);
  EXPECT_DOUBLE_EQ(s.max_radius(), 2.5);
  EXPECT_EQ(s.type_name(), "sphere");
}

TEST(StarSurface, RejectsInvalidParameters) {
  EXPECT_THROW(StarSurface::sphere(0.0), std::invalid_argument);
  EXPECT_THROW(StarSurface::sphere(-1.0), std::invalid_argument);
  EXPECT_THROW(StarSurface(PerturbedSphereShape{1.0, {{2, 0, 0.6}, {3, 1, 0.5}}}), std::invalid_argument);
  EXPECT_THROW(StarSurface(PerturbedSphereShape{1.0, {{2, 3, 0.1}}}), std::invalid_argument);
  EXPECT_THROW(StarSurface(EllipsoidShape{1.0, 0.0, 1.0}), std::invalid_argument);
}

TEST(StarSurface, PerturbedSurfaceElementClosedForm) {
  // f = 1 + 0.2 (3 cos^2 - 1)/2, f_theta = -0.6 cos sin, no phi dependence.
  const auto s = bumpy();
  for (double th : {pi / 2, 1.0, 0.3, 2.8}) {
    const double c = std::cos(th), sn = std::sin(th);
    const double f = 1.0 + 0.1 * (3 * c * c - 1);
    const double ft = -0.6 * c * sn;
    const Direction d(th, 0.77);
    EXPECT_NEAR(s.radius(d), f, 1e-15);
    EXPECT_NEAR(s.d_theta(d), ft, 1e-15);
    EXPECT_NEAR(surface_element(s, d), f * std::sqrt(f * f + ft * ft), 1e-14);
  }
  EXPECT_NEAR(surface_element(s, Direction(pi / 2, 0.0)), 0.81, 1e-14);
}

TEST(StarSurface, AxisymmetricElementIsPhiInvariant) {
  const auto s = bumpy();
  for (double th : {0.2, 1.3, 2.9}) {
    const double w0 = surface_element(s, Direction(th, 0.0));
    for (double ph : {0.5, 2.0, 5.5}) EXPECT_NEAR(surface_element(s, Direction(th, ph)), w0, 1e-13);
  }
}

TEST(StarSurface, PartialsMatchFiniteDifferences) {
  for (const auto& s : {lumpy(), StarSurface(EllipsoidShape{1.0, 0.8, 1.3})}) {
    for (const auto& d : oracle::random_directions(15, 9)) {
      const double th = d.theta(), ph = d.phi(), h = 1e-6;
      const double ft = oracle::central_difference([&](double t) { return s.radius(Direction(t, ph)); }, th, h);
      const double fp = oracle::central_difference([&](double p) { return s.radius(Direction(th, p)); }, ph, h);
      EXPECT_NEAR(s.d_theta(d), ft, 1e-8);
      EXPECT_NEAR(s.d_phi(d), fp, 1e-8);
      EXPECT_NEAR(s.d_phi_over_sin(d) * std::sin(th), fp, 1e-8);
    }
  }
}

TEST(StarSurface, EllipsoidRadialMap) {
  const auto s = StarSurface(EllipsoidShape{2.0, 3.0, 0.5});
  EXPECT_NEAR(s.radius(Direction::x_axis()), 2.0, 1e-15);
  EXPECT_NEAR(s.radius(Direction(pi / 2, pi / 2)), 3.0, 1e-14);
  EXPECT_NEAR(s.radius(Direction::z_axis()), 0.5, 1e-15);
  for (const auto& d : oracle::random_directions(10, 2)) {
    const auto x = s.point(d);
    EXPECT_NEAR(x[0] * x[0] / 4 + x[1] * x[1] / 9 + x[2] * x[2] / 0.25, 1.0, 1e-13);
  }
  EXPECT_NEAR(s.max_radius(), 3.0, 1e-12);
  EXPECT_NEAR(s.min_radius(), 0.5, 1e-12);
}

TEST(StarSurface, NormalMatchesLevelSetGradient) {
  // Gradient of F(x) = |x| - f(x/|x|) by central differences in x.
  const auto s = lumpy();
  auto F = [&](const Vec3& x) { return norm(x) - s.radius(Direction::from_vector(x)); };
  for (const auto& d : oracle::random_directions(20, 4)) {
    const auto n = outward_normal(s, d);
    EXPECT_NEAR(norm(n), 1.0, 1e-14);
    EXPECT_GT(dot(n, d.unit()), 0.0);
    const Vec3 x = s.point(d);
    Vec3 g{};
    const double h = 1e-6;
    for (int c = 0; c < 3; ++c) {
      Vec3 xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      g[c] = (F(xp) - F(xm)) / (2 * h);
    }
    const double angle = std::acos(std::min(1.0, dot(n, (1.0 / norm(g)) * g)));
    EXPECT_LT(angle, 1e-6);
  }
}

TEST(StarSurface, CustomShapeAtPoleRejectsPhiDerivative) {
  CustomShape c;
  c.f = [](const Direction& d) { return 1.0 + 0.1 * std::cos(d.phi()); };
  c.f_theta = [](const Direction&) { return 0.0; };
  c.f_phi = [](const Direction& d) { return -0.1 * std::sin(d.phi()); };
  c.max_radius = 1.1;
  c.min_radius = 0.9;
  const StarSurface s(c);
  EXPECT_THROW(surface_element(s, Direction(0.0, 1.0)), std::domain_error);
  EXPECT_NO_THROW(surface_element(s, Direction(0.5, 1.0)));
}

TEST(StarSurface, PerturbedAreaConverges) {
  // Area is a smooth integral; two quadrature orders agree tightly.
  const auto s = lumpy();
  auto area = [&](int deg) {
    return SphereQuadrature::for_degree(deg).integrate([&](const Direction& d) { return surface_element(s, d); });
  };
  EXPECT_NEAR(area(40), area(60), 1e-11);
}

TEST(FibonacciDirections, NearUniform) {
  const auto dirs = fibonacci_directions(200);
  Vec3 c{};
  for (const auto& d : dirs) c = c + (1.0 / 200) * d.unit();
  EXPECT_LT(norm(c), 1e-2);
  EXPECT_THROW(fibonacci_directions(0), std::invalid_argument);
}
