#include "doctest.h"

#include <cmath>
#include <numbers>

#include "curvflux/calculus.hpp"
#include "curvflux/errors.hpp"

namespace sf = curvflux::surfaces;
namespace cal = curvflux::calculus;
using cal::WeightSign;
using sf::Vec;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }
Vec v3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

cal::QuadratureSpec ladder(std::vector<int> levels) {
  cal::QuadratureSpec s;
  s.ladder = std::move(levels);
  return s;
}

std::vector<sf::ChartPtr> euclidean_catalog() {
  return {sf::make_flat_disk(1.0), sf::make_sphere_cap(1.0, 1.0),
          sf::make_cylinder_patch(1.0, 0.0, kPi, 0.0, 1.0), sf::make_graph_patch(sf::Polynomial2::saddle(), 0.5)};
}

std::vector<Vec> probe_grid(const sf::Chart& c) {
  std::vector<Vec> pts;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) pts.push_back(c.box().at(v2((i + 0.5) / 5, (j + 0.5) / 5)));
  return pts;
}

}  // namespace

TEST_CASE("quadrature spec validation") {
  CHECK_THROWS_AS(ladder({8, 16}).validate(), curvflux::DomainError);
  CHECK_THROWS_AS(ladder({8, 8, 16}).validate(), curvflux::DomainError);
  auto s = ladder({8, 16, 32});
  s.boundary_ladder = {4, 8};
  CHECK_THROWS_AS(s.validate(), curvflux::DomainError);
  CHECK_NOTHROW(ladder({8, 16, 32}).validate());
}

TEST_CASE("ladder analysis") {
  std::vector<double> h = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> v;
  for (double x : h) v.push_back(3.0 + 0.7 * x * x);
  const auto l = cal::analyze_integral(h, v);
  REQUIRE(l.order);
  CHECK(*l.order == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(l.extrapolated == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(l.monotone);

  std::vector<double> r;
  for (double x : h) r.push_back(-2.0 * x * x * x);
  const auto res = cal::analyze_residual(h, r);
  CHECK(*res.order == doctest::Approx(3.0));
  CHECK(res.converges_with_order(1.9));

  const auto flat = cal::analyze_residual(h, {1e-3, 1e-14, 2e-14, 1e-14}, 1e-12);
  CHECK_FALSE(flat.order);
  CHECK(flat.at_floor);
  CHECK(flat.converges_with_order(1.9));

  const auto bad = cal::analyze_residual(h, {1e-3, 2e-3, 1e-3, 5e-4});
  CHECK_FALSE(bad.monotone);
}

TEST_CASE("ordered sum is independent of thread count") {
  auto cell = [](long i) { return std::sin(0.37 * static_cast<double>(i)) * 1e-3 + 1.0 / (1.0 + i); };
  const double serial = cal::ordered_sum(97, 53, 1, cell);
  for (int t : {2, 3, 8}) CHECK(cal::ordered_sum(97, 53, t, cell) == serial);
}

TEST_CASE("surface integral oracles") {
  const double rho = 1.5;
  const auto sphere = sf::make_sphere(2, rho);
  const auto one = [](const sf::GeometryFrame&) { return 1.0; };
  const auto area = cal::surface_integral(*sphere, one, sf::WeightField::constant(), ladder({128, 256, 512, 1024}));
  CHECK(std::fabs(area.finest() / (4 * kPi * rho * rho) - 1.0) <= 1e-6);
  CHECK(*area.order == doctest::Approx(2.0).epsilon(0.01));

  const auto disk = sf::make_flat_disk(1.2);
  const auto zero = cal::surface_integral(*disk, [](const sf::GeometryFrame&) { return 0.0; },
                                          sf::WeightField::gaussian(), ladder({4, 8, 16}));
  for (double v : zero.values) CHECK(v == 0.0);

  const auto gauss = cal::surface_integral(*disk, one, sf::WeightField::gaussian(), ladder({64, 128, 256, 512}));
  CHECK(gauss.finest() == doctest::Approx(2 * kPi * (1 - std::exp(-0.72))).epsilon(1e-6));
}

TEST_CASE("boundary integral oracles") {
  const double R = 1.3;
  const auto disk = sf::make_flat_disk(R);
  const auto spec = ladder({16, 32, 64});
  const auto position = [](const sf::GeometryFrame& f) { return f.x; };
  CHECK(cal::boundary_integral(*disk, position, sf::WeightField::constant(), spec).finest() ==
        doctest::Approx(2 * kPi * R * R).epsilon(1e-12));
  const auto zero = [](const sf::GeometryFrame& f) { return Vec(Vec::Zero(f.x.size())); };
  CHECK(cal::boundary_integral(*disk, zero, sf::WeightField::gaussian(), spec).finest() == 0.0);
  const auto cap = sf::make_sphere_cap(1.0, 1.0);
  CHECK(std::fabs(cal::boundary_integral(*cap, position, sf::WeightField::constant(), spec).finest()) < 1e-13);
  CHECK_THROWS_AS(cal::boundary_integral(*sf::make_sphere(2, 1.0), position, sf::WeightField::constant(), spec),
                  curvflux::DomainError);
}

TEST_CASE("divergence theorem oracles") {
  const auto disk = sf::make_flat_disk(1.0);
  const auto spec = ladder({32, 64, 128, 256});
  const auto zero = cal::divergence_theorem_residual(*disk, [](const Vec& x) { return Vec(Vec::Zero(x.size())); },
                                                     sf::WeightField::gaussian(), ladder({4, 8, 16}));
  for (double v : zero.residual.values) CHECK(v == 0.0);

  const auto pos = cal::divergence_theorem_residual(*disk, [](const Vec& x) { return x; },
                                                    sf::WeightField::constant(), spec);
  CHECK(pos.boundary.finest() == doctest::Approx(2 * kPi).epsilon(1e-12));
  CHECK(std::fabs(pos.residual.finest()) <= 1e-6);

  // Gradient of the height function on the cap is the tangential part of e_z.
  const auto cap = sf::make_sphere_cap(1.0, 1.0);
  auto polar = ladder({128, 256, 512, 1024});
  polar.axis_scale = {1.0, 0.125};
  const auto height = cal::divergence_theorem_residual(*cap, [](const Vec&) { return v3(0, 0, 1); },
                                                       sf::WeightField::gaussian(), polar);
  CHECK(std::fabs(height.residual.finest()) <= 1e-6);
  CHECK(height.residual.converges_with_order(1.9));
  CHECK(*height.residual.order == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("pointwise weighted divergence agrees with the flux form") {
  const auto graph = sf::make_graph_patch(sf::Polynomial2::saddle(), 0.5);
  const auto X = [](const Vec& x) { return v3(std::sin(x[1]), x[0] * x[2], 1.0 + x[0]); };
  const auto w = sf::WeightField::gaussian();
  const Vec u = v2(0.13, -0.21);
  // e^{-f} sqrt(g) div_f X = d_a (sqrt(g) e^{-f} X^a), differenced directly.
  double flux = 0.0;
  for (int a = 0; a < 2; ++a) {
    const double h = 1e-4;
    auto F = [&](double d) {
      Vec v = u;
      v[a] += d;
      const auto p = sf::point_at(*graph, v);
      return p.volume_element() * std::exp(-w.f(p.x)) * p.coordinate_components(X(p.x))[a];
    };
    flux += (F(h) - F(-h)) / (2 * h);
  }
  const auto p = sf::point_at(*graph, u);
  const double pointwise = cal::weighted_divergence(*graph, X, w, u) * std::exp(-w.f(p.x)) * p.volume_element();
  CHECK(pointwise == doctest::Approx(flux).epsilon(1e-7));
  // Reversed sign flips the grad f term only.
  const double standard = cal::weighted_divergence(*graph, X, w, u, WeightSign::Standard);
  const double reversed = cal::weighted_divergence(*graph, X, w, u, WeightSign::Reversed);
  const double drift = p.coordinate_components(X(p.x)).dot(p.jacobian.transpose() * w.grad(p.x));
  CHECK(reversed - standard == doctest::Approx(2 * drift).epsilon(1e-7));
}

TEST_CASE("christoffel symbols of polar coordinates") {
  const auto disk = sf::make_flat_disk(1.0);
  const auto g = cal::christoffel(*disk, v2(0.5, 1.0));
  CHECK(g[0](1, 1) == doctest::Approx(-0.5).epsilon(1e-8));
  CHECK(g[1](0, 1) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(g[1](1, 0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::fabs(g[0](0, 0)) < 1e-8);
  CHECK_THROWS_AS(cal::christoffel(*disk, v2(1.0, 1.0)), curvflux::DomainError);
}

TEST_CASE("newton divergence trivial cases") {
  const auto disk = sf::make_flat_disk(1.0);
  const auto flat = sf::WeightField::constant();
  CHECK(cal::div_f_newton_numeric(*disk, flat, 1, v2(0.5, 1.0)).norm() < 1e-9);
  const auto sphere = sf::make_sphere(2, 2.0);
  CHECK(cal::div_f_newton_numeric(*sphere, flat, 1, v2(1.0, 2.0)).norm() < 1e-8);
  for (int k = 0; k <= 2; ++k) CHECK(cal::div_f_newton_lemma(*sphere, flat, k, v2(1.0, 2.0)).norm() < 1e-9);

  // k = 0 with Gaussian f on the plane: s x.
  const Vec u = v2(0.6, 0.4);
  const Vec x = disk->position(u);
  const auto gauss = sf::WeightField::gaussian();
  CHECK((cal::div_f_newton_lemma(*disk, gauss, 0, u, WeightSign::Reversed) - x).norm() < 1e-9);
  CHECK((cal::div_f_newton_lemma(*disk, gauss, 0, u, WeightSign::Standard) + x).norm() < 1e-9);
  CHECK((cal::div_f_newton_numeric(*disk, gauss, 0, u, WeightSign::Standard) + x).norm() < 1e-8);
}

TEST_CASE("lemma recursion matches finite differences on every catalog surface") {
  for (const auto& chart : euclidean_catalog())
    for (const auto& weight : {sf::WeightField::constant(), sf::WeightField::gaussian()})
      for (WeightSign sign : {WeightSign::Standard, WeightSign::Reversed})
        for (int k = 1; k <= 2; ++k) {
          double worst = 0.0;
          for (const Vec& u : probe_grid(*chart))
            worst = std::max(worst, (cal::div_f_newton_numeric(*chart, weight, k, u, sign) -
                                     cal::div_f_newton_lemma(*chart, weight, k, u, sign))
                                        .norm());
          INFO(chart->id(), " ", weight.name, " k=", k);
          CHECK(worst <= 1e-4);
        }
}

TEST_CASE("closed forms") {
  const auto graph = sf::make_graph_patch(sf::Polynomial2::saddle(), 0.5);
  const auto gauss = sf::WeightField::gaussian();
  double printed_gap = 0.0;
  for (const Vec& u : probe_grid(*graph)) {
    const auto one = cal::div_f_newton_closed_forms(*graph, gauss, 1, u);
    CHECK((one.printed - one.unrolled).norm() < 1e-12);
    CHECK((one.unrolled - cal::div_f_newton_lemma(*graph, gauss, 1, u)).norm() < 1e-10);
    const auto two = cal::div_f_newton_closed_forms(*graph, gauss, 2, u);
    CHECK((two.unrolled - cal::div_f_newton_lemma(*graph, gauss, 2, u)).norm() < 1e-10);
    printed_gap = std::max(printed_gap, (two.printed - two.unrolled).norm());
  }
  CHECK(printed_gap > 1e-3);
  const auto f0 = cal::div_f_newton_closed_forms(*graph, sf::WeightField::constant(), 2, v2(0.1, 0.2));
  CHECK(f0.printed.norm() < 1e-12);
  CHECK(f0.unrolled.norm() < 1e-12);
  CHECK_THROWS_AS(cal::div_f_newton_closed_forms(*graph, gauss, 0, v2(0.1, 0.2)), curvflux::DomainError);
}

TEST_CASE("trace of nabla A") {
  const auto sphere = sf::make_sphere(2, 1.0);
  const Vec us = v2(1.0, 2.0);
  const auto fs = sf::frame_at(*sphere, us);
  CHECK(std::fabs(cal::trace_nabla_A_residual(*sphere, sf::WeightField::constant(), 1, us, fs.frame.col(0))) < 1e-8);
  const auto disk = sf::make_flat_disk(1.0);
  const Vec ud = v2(0.5, 1.0);
  CHECK(std::fabs(cal::trace_nabla_A_residual(*disk, sf::WeightField::gaussian(), 2, ud, v3(1, 0, 0))) < 1e-8);
  const auto graph = sf::make_graph_patch(sf::Polynomial2::saddle(), 0.5);
  for (const Vec& u : probe_grid(*graph)) {
    const auto f = sf::frame_at(*graph, u);
    for (int k = 1; k <= 2; ++k)
      CHECK(std::fabs(cal::trace_nabla_A_residual(*graph, sf::WeightField::gaussian(), k, u, f.frame.col(0))) <=
            1e-4);
  }
  CHECK_THROWS_AS(cal::trace_nabla_A_residual(*graph, sf::WeightField::gaussian(), 1, v2(0, 0), v3(0, 0, 1)),
                  curvflux::DomainError);
}

TEST_CASE("curvature hook vanishes in space forms") {
  const auto graph = sf::make_graph_patch(sf::Polynomial2::saddle(), 0.5);
  const auto f = sf::frame_at(*graph, v2(0.2, -0.1));
  curvflux::Endomorphism<double> t(2);
  t(0, 0) = 1.3;
  t(0, 1) = t(1, 0) = 0.4;
  t(1, 1) = -2.0;
  CHECK(cal::curvature_hook(sf::AmbientSpace::euclidean(3), f, t).norm() == 0.0);
  CHECK(cal::curvature_hook(sf::AmbientSpace::sphere(3), f, t).norm() < 1e-14);
}
