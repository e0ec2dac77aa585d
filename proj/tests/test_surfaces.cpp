#include "doctest.h"

#include <cmath>
#include <numbers>

#include "curvflux/errors.hpp"
#include "curvflux/surfaces.hpp"

namespace sf = curvflux::surfaces;
using sf::Vec;

namespace {

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }
Vec v3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

/// Same immersion, no analytic jet: frames come from finite differences.
sf::ChartPtr numeric_copy(const sf::Chart& c) {
  sf::Chart::Options opt;
  opt.id = c.id() + "-numeric";
  opt.box = c.box();
  opt.ambient = c.ambient();
  opt.boundary = c.boundary();
  opt.orientation = c.orientation();
  opt.immersion = [&c](const Vec& u) { return c.position(u); };
  return std::make_shared<const sf::Chart>(opt);
}

std::vector<Vec> grid_points(const sf::Chart& c, int per_axis) {
  std::vector<Vec> pts;
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j)
      pts.push_back(c.box().at(v2((i + 0.5) / per_axis, (j + 0.5) / per_axis)));
  return pts;
}

}  // namespace

TEST_CASE("sphere has curvatures -1/rho with outward normal") {
  for (int n = 2; n <= 4; ++n) {
    const auto s = sf::make_sphere(n, 2.0);
    Vec u = s->box().center();
    u[0] = 0.7;
    const auto f = sf::frame_at(*s, u);
    CHECK((f.normal - f.x / 2.0).norm() < 1e-12);
    for (double k : f.curvatures) CHECK(k == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(f.x.norm() == doctest::Approx(2.0));
  }
}

TEST_CASE("cylinder, cap, disk and graph curvature oracles") {
  const auto cyl = sf::make_cylinder_patch(1.5, 0.0, std::numbers::pi, 0.0, 1.0);
  const auto fc = sf::frame_at(*cyl, v2(0.4, 0.3));
  CHECK(fc.curvatures[0] == doctest::Approx(-1.0 / 1.5));
  CHECK(std::fabs(fc.curvatures[1]) < 1e-12);
  CHECK(fc.normal.dot(v3(std::cos(0.4), std::sin(0.4), 0.0)) == doctest::Approx(1.0));

  const auto cap = sf::make_sphere_cap(1.0, 1.0);
  const auto fp = sf::frame_at(*cap, v2(0.5, 2.0));
  CHECK((fp.normal - fp.x).norm() < 1e-12);

  const auto disk = sf::make_flat_disk(1.0);
  const auto fd = sf::frame_at(*disk, v2(0.5, 1.0));
  CHECK((fd.normal - v3(0, 0, 1)).norm() < 1e-14);
  for (double k : fd.curvatures) CHECK(std::fabs(k) < 1e-14);

  // Saddle u1^2 - u2^2 at the origin: II = diag(2, -2), g = I.
  const auto graph = sf::make_graph_patch(sf::Polynomial2::saddle(), 0.5);
  const auto fg = sf::frame_at(*graph, v2(0.0, 0.0));
  CHECK(fg.curvatures[0] == doctest::Approx(-2.0));
  CHECK(fg.curvatures[1] == doctest::Approx(2.0));
}

TEST_CASE("principal frame reconstructs the shape operator") {
  const auto graph = sf::make_graph_patch(sf::Polynomial2{{{2, 0, 0.7}, {1, 1, 0.4}, {0, 3, -0.3}}}, 0.5);
  for (const Vec& u : grid_points(*graph, 4)) {
    const auto f = sf::frame_at(*graph, u);
    const sf::Mat gram = f.frame.transpose() * f.frame;
    CHECK((gram - sf::Mat::Identity(2, 2)).norm() < 1e-12);
    CHECK(std::fabs(f.normal.norm() - 1.0) < 1e-14);
    CHECK((f.jacobian.transpose() * f.normal).norm() < 1e-12);
    // A e_i = mu_i e_i in coordinates.
    for (int i = 0; i < 2; ++i) {
      const Vec lhs = f.shape_coords * f.frame_coords.col(i);
      CHECK((lhs - f.curvatures[i] * f.frame_coords.col(i)).norm() < 1e-8);
    }
  }
}

TEST_CASE("numeric jets agree with analytic jets") {
  for (const auto& c : {sf::make_sphere_cap(1.0, 1.0), sf::make_cylinder_patch(1.0, 0.0, 2.0, 0.0, 1.0),
                        sf::make_flat_disk(1.0), sf::make_graph_patch(sf::Polynomial2::saddle(), 0.5)}) {
    const auto num = numeric_copy(*c);
    CHECK_FALSE(num->fd_noise_flagged());
    for (const Vec& u : grid_points(*c, 3)) {
      const auto fa = sf::frame_at(*c, u);
      const auto fn = sf::frame_at(*num, u);
      CHECK((fa.normal - fn.normal).norm() < 1e-8);
      for (int i = 0; i < 2; ++i) CHECK(std::fabs(fa.curvatures[i] - fn.curvatures[i]) < 1e-6);
      CHECK((fa.metric - fn.metric).norm() < 1e-8);
    }
  }
  const auto s3 = sf::make_sphere(3, 1.0);
  Vec u(3);
  u << 0.8, 1.1, 2.0;
  const auto fa = sf::frame_at(*s3, u);
  const auto fn = sf::frame_at(*s3, u, sf::JetSource::Numeric);
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(fa.curvatures[i] - fn.curvatures[i]) < 1e-6);
}

TEST_CASE("boundary conormals") {
  const auto cap = sf::make_sphere_cap(1.0, 1.0);
  const Vec u = v2(1.0, 0.3);
  const Vec nu = sf::boundary_conormal(*cap, {0, true}, u);
  // Unit tangent along the meridian, pointing away from the pole.
  CHECK((nu - v3(std::cos(1.0) * std::cos(0.3), std::cos(1.0) * std::sin(0.3), -std::sin(1.0))).norm() < 1e-12);

  const auto cyl = sf::make_cylinder_patch(1.0, 0.0, std::numbers::pi, 0.0, 1.0);
  CHECK((sf::boundary_conormal(*cyl, {1, true}, v2(0.5, 1.0)) - v3(0, 0, 1)).norm() < 1e-12);
  CHECK((sf::boundary_conormal(*cyl, {1, false}, v2(0.5, 0.0)) - v3(0, 0, -1)).norm() < 1e-12);
  CHECK((sf::boundary_conormal(*cyl, {0, false}, v2(0.0, 0.5)) - v3(0, -1, 0)).norm() < 1e-12);

  const auto disk = sf::make_flat_disk(2.0);
  CHECK((sf::boundary_conormal(*disk, {0, true}, v2(2.0, 0.0)) - v3(1, 0, 0)).norm() < 1e-12);

  CHECK_THROWS_AS(sf::boundary_conormal(*disk, {1, true}, v2(2.0, 0.0)), curvflux::DomainError);
  CHECK_THROWS_AS(sf::boundary_conormal(*disk, {0, true}, v2(1.0, 0.0)), curvflux::DomainError);
  const auto full = sf::make_cylinder_patch(1.0, 0.0, 2 * std::numbers::pi, 0.0, 1.0);
  CHECK(full->boundary().size() == 2);
}

TEST_CASE("chart construction errors") {
  sf::Chart::Options opt;
  opt.id = "collapsed";
  opt.box = {v2(0, 0), v2(1, 1)};
  opt.immersion = [](const Vec& u) { return v3(u[0], u[0], 0.0); };
  CHECK_THROWS_AS(sf::Chart{opt}, curvflux::SingularChartError);
  opt.immersion = {};
  CHECK_THROWS_AS(sf::Chart{opt}, curvflux::DomainError);
  CHECK_THROWS_AS(sf::make_sphere_cap(1.0, 4.0), curvflux::DomainError);
  CHECK_THROWS_AS(sf::make_cylinder_patch(1.0, 1.0, 0.0, 0.0, 1.0), curvflux::DomainError);
  CHECK_THROWS_AS(sf::frame_at(*sf::make_flat_disk(1.0), v2(2.0, 0.0)), curvflux::DomainError);
  // The pole of a cap is outside the interior rank check but frames there fail.
  CHECK_THROWS_AS(sf::frame_at(*sf::make_sphere_cap(1.0, 1.0), v2(0.0, 0.0)), curvflux::SingularChartError);
}

TEST_CASE("noisy immersion is flagged") {
  sf::Chart::Options opt;
  opt.id = "noisy";
  opt.box = {v2(0, 0), v2(1, 1)};
  opt.immersion = [](const Vec& u) {
    const double wobble = 1e-9 * std::sin(1e7 * (u[0] + 2 * u[1]));
    return v3(u[0], u[1], wobble);
  };
  CHECK(sf::Chart(opt).fd_noise_flagged());
}

TEST_CASE("torus spectra") {
  const double r = 0.6;
  const auto mu = sf::hr_torus_spectrum(3, r);
  REQUIRE(mu.size() == 3);
  CHECK(mu[0] == doctest::Approx(0.8 / 0.6));
  CHECK(mu[2] == doctest::Approx(-0.6 / 0.8));
  const auto cl = sf::clifford_spectrum(2, 1, r, 0.8);
  for (int i = 0; i < 3; ++i) CHECK(cl[i] == doctest::Approx(mu[i]));
  CHECK_THROWS_AS(sf::hr_torus_spectrum(3, 1.0), curvflux::DomainError);
  CHECK_THROWS_AS(sf::clifford_spectrum(1, 1, 0.5, 0.5), curvflux::DomainError);
}

TEST_CASE("weight and conformal fields") {
  std::vector<Vec> pts = {v3(0.1, -0.4, 0.9), v3(2.0, 1.0, -3.0), v3(0, 0, 0)};
  CHECK(sf::weight_gradient_error(sf::WeightField::gaussian(), pts) < 1e-8);
  CHECK(sf::weight_gradient_error(sf::WeightField::constant(3.0), pts) < 1e-12);
  const auto bad = sf::WeightField::custom("bad", [](const Vec& x) { return x[0] * x[0]; },
                                           [](const Vec& x) { return Vec(Vec::Zero(x.size())); });
  CHECK(sf::weight_gradient_error(bad, pts) > 1.0);
  CHECK(sf::conformal_defect(sf::ConformalField::position(), pts) < 1e-8);
  CHECK(sf::conformal_defect(sf::ConformalField::constant(v3(1, 2, 3)), pts) < 1e-12);
  sf::ConformalField rotation{"rotation", [](const Vec& x) { return v3(-x[1], x[0], 0.0); },
                              [](const Vec&) { return 0.0; }, false};
  CHECK(sf::conformal_defect(rotation, pts) > 0.5);
}

TEST_CASE("polynomial derivatives") {
  const sf::Polynomial2 p{{{3, 2, 2.0}, {0, 1, -1.0}}};
  CHECK(p.value(1.5, -2.0) == doctest::Approx(2.0 * 3.375 * 4.0 + 2.0));
  CHECK(p.derivative(1.5, -2.0, 1, 0) == doctest::Approx(6.0 * 2.25 * 4.0));
  CHECK(p.derivative(1.5, -2.0, 1, 1) == doctest::Approx(12.0 * 2.25 * -2.0));
  CHECK(p.derivative(1.5, -2.0, 0, 3) == doctest::Approx(0.0));
}
