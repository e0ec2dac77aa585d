#include "curvflux/surfaces.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "curvflux/errors.hpp"

namespace curvflux::surfaces {

namespace {

constexpr double kMinMetricDet = 1e-12;
constexpr double kNoiseThreshold = 1e-5;
// Jet stencils use a wider step than the outer differences; their fourth
// order keeps truncation below roundoff at this spacing.
constexpr double kJetStepFactor = 100.0;

std::string format_point(const Vec& u) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < u.size(); ++i) os << (i ? ", " : "") << u[i];
  os << ")";
  return os.str();
}

Vec unit(int dim, int axis) {
  Vec e = Vec::Zero(dim);
  e[axis] = 1.0;
  return e;
}

/// Cofactor normal: <N, v> = det[J | v].
Vec cofactor_normal(const Mat& jac) {
  const int m = static_cast<int>(jac.rows());
  const int n = static_cast<int>(jac.cols());
  Vec out(m);
  for (int i = 0; i < m; ++i) {
    Mat minor(n, n);
    for (int r = 0, rr = 0; r < m; ++r) {
      if (r == i) continue;
      minor.row(rr++) = jac.row(r);
    }
    const double sign = ((i + n) % 2 == 0) ? 1.0 : -1.0;
    out[i] = sign * minor.determinant();
  }
  return out;
}

}  // namespace

bool ParamBox::contains(const Vec& u, double slack) const {
  if (u.size() != lo.size()) return false;
  for (int i = 0; i < u.size(); ++i) {
    const double tol = slack * (hi[i] - lo[i]);
    if (u[i] < lo[i] - tol || u[i] > hi[i] + tol) return false;
  }
  return true;
}

Chart::Chart(Options options) : opt_(std::move(options)) {
  if (!opt_.immersion) throw DomainError("Chart '" + opt_.id + "': immersion handle is required");
  const int n = opt_.box.dim();
  if (n < 1 || opt_.box.hi.size() != n) throw DomainError("Chart '" + opt_.id + "': malformed parameter box");
  for (int a = 0; a < n; ++a)
    if (!(opt_.box.hi[a] > opt_.box.lo[a])) throw DomainError("Chart '" + opt_.id + "': empty parameter box");
  if (opt_.orientation != 1 && opt_.orientation != -1)
    throw DomainError("Chart '" + opt_.id + "': orientation must be +1 or -1");
  for (const auto& face : opt_.boundary)
    if (face.axis < 0 || face.axis >= n) throw DomainError("Chart '" + opt_.id + "': boundary face axis out of range");

  steps_.resize(n);
  for (int a = 0; a < n; ++a) steps_[a] = std::max(1e-5 * (opt_.box.hi[a] - opt_.box.lo[a]), 1e-7);

  if (opt_.immersion(opt_.box.center()).size() != ambient_dim())
    throw DomainError("Chart '" + opt_.id + "': immersion dimension does not match the ambient space");

  // Jacobian rank at the 3^n sample points {1/4, 1/2, 3/4}^n.
  int samples = 1;
  for (int a = 0; a < n; ++a) samples *= 3;
  for (int s = 0; s < samples; ++s) {
    Vec t(n);
    for (int a = 0, rest = s; a < n; ++a, rest /= 3) t[a] = 0.25 * (1 + rest % 3);
    const Vec u = opt_.box.at(t);
    const Mat d1 = jet(u).d1;
    if ((d1.transpose() * d1).determinant() <= kMinMetricDet)
      throw SingularChartError("Chart '" + opt_.id + "': degenerate metric at " + format_point(u));
  }

  if (!has_analytic_jet()) {
    // Richardson probe: second derivatives with step H and 2H must agree.
    const Vec u = opt_.box.center();
    const Jet fine = jet_numeric(u);
    Chart coarse_probe = *this;
    for (double& h : coarse_probe.steps_) h *= 2.0;
    const Jet coarse = coarse_probe.jet_numeric(u);
    for (std::size_t i = 0; i < fine.d2.size(); ++i) {
      const double scale = std::max(1.0, fine.d2[i].norm());
      if ((fine.d2[i] - coarse.d2[i]).norm() > kNoiseThreshold * scale) fd_noisy_ = true;
    }
  }
}

Jet Chart::jet(const Vec& u) const {
  if (opt_.analytic_jet) return opt_.analytic_jet(u);
  return jet_numeric(u);
}

Jet Chart::jet_numeric(const Vec& u) const {
  const int n = this->n();
  const auto& x = opt_.immersion;
  Jet out;
  out.x = x(u);
  const int m = static_cast<int>(out.x.size());
  out.d1.resize(m, n);
  out.d2.assign(static_cast<std::size_t>(n) * n, Vec::Zero(m));

  std::vector<double> H(n);
  for (int a = 0; a < n; ++a) H[a] = kJetStepFactor * steps_[a];

  for (int a = 0; a < n; ++a) {
    const Vec ea = unit(n, a) * H[a];
    const Vec p1 = x(u + ea), m1 = x(u - ea), p2 = x(u + 2 * ea), m2 = x(u - 2 * ea);
    // Fourth-order central stencils.
    out.d1.col(a) = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * H[a]);
    out.d2[a * n + a] = (-p2 + 16.0 * p1 - 30.0 * out.x + 16.0 * m1 - m2) / (12.0 * H[a] * H[a]);
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      auto cross = [&](double scale) {
        const Vec ea = unit(n, a) * (H[a] * scale), eb = unit(n, b) * (H[b] * scale);
        return Vec((x(u + ea + eb) - x(u + ea - eb) - x(u - ea + eb) + x(u - ea - eb)) /
                   (4.0 * H[a] * H[b] * scale * scale));
      };
      const Vec mixed = (4.0 * cross(1.0) - cross(2.0)) / 3.0;
      out.d2[a * n + b] = mixed;
      out.d2[b * n + a] = mixed;
    }
  return out;
}

namespace {

void check_frame_point(const Chart& chart, const Vec& u) {
  if (chart.ambient().kind != AmbientKind::Euclidean)
    throw DomainError("frame_at: numerical frames are implemented for Euclidean ambient only");
  if (chart.ambient_dim() != chart.n() + 1)
    throw DomainError("frame_at: chart '" + chart.id() + "' is not a hypersurface");
  if (!chart.box().contains(u, 1e-12))
    throw DomainError("frame_at: point " + format_point(u) + " outside the parameter box of '" + chart.id() + "'");
}

void fill_first_order(const Chart& chart, const Jet& jet, const Vec& u, SurfacePoint& p) {
  p.u = u;
  p.x = jet.x;
  p.jacobian = jet.d1;
  p.metric = jet.d1.transpose() * jet.d1;
  const bool surface = jet.d1.rows() == 3 && jet.d1.cols() == 2;
  const Mat& g = p.metric;
  const double det = surface ? g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0) : g.determinant();
  if (!(det > kMinMetricDet))
    throw SingularChartError("frame_at: degenerate metric (det g = " + std::to_string(det) + ") at " +
                             format_point(u) + " on '" + chart.id() + "'");
  Vec cof;
  if (surface) {
    p.metric_inv.resize(2, 2);
    p.metric_inv << g(1, 1) / det, -g(0, 1) / det, -g(1, 0) / det, g(0, 0) / det;
    cof = Eigen::Vector3d(jet.d1.col(0).head<3>().cross(jet.d1.col(1).head<3>()));
  } else {
    p.metric_inv = g.inverse();
    cof = cofactor_normal(jet.d1);
  }
  p.normal = chart.orientation() * cof / cof.norm();
}

}  // namespace

SurfacePoint point_at(const Chart& chart, const Vec& u, JetSource source) {
  check_frame_point(chart, u);
  SurfacePoint p;
  fill_first_order(chart, source == JetSource::Numeric ? chart.jet_numeric(u) : chart.jet(u), u, p);
  return p;
}

GeometryFrame frame_at(const Chart& chart, const Vec& u, JetSource source) {
  check_frame_point(chart, u);
  const Jet jet = source == JetSource::Numeric ? chart.jet_numeric(u) : chart.jet(u);
  const int n = chart.n();

  GeometryFrame f;
  fill_first_order(chart, jet, u, f);

  f.second_form.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) f.second_form(a, b) = jet.second(a, b).dot(f.normal);
  f.second_form = 0.5 * (f.second_form + f.second_form.transpose());
  f.shape_coords = f.metric_inv * f.second_form;

  // Orthonormalize through the Cholesky factor g = L L^T and diagonalize
  // L^{-1} II L^{-T}; principal directions are L^{-T} Q in coordinates.
  const Eigen::LLT<Mat> llt(f.metric);
  const Mat l_inv = Mat(llt.matrixL()).inverse();
  Mat s = l_inv * f.second_form * l_inv.transpose();
  s = 0.5 * (s + s.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat> eig(s);
  if (eig.info() != Eigen::Success) throw ContractError("frame_at: eigensolver failed");
  f.frame_coords = l_inv.transpose() * eig.eigenvectors();
  f.frame = jet.d1 * f.frame_coords;
  f.curvatures.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + n);
  f.shape = Endomorphism<double>::diagonal(f.curvatures);
  return f;
}

double face_density(const SurfacePoint& point, int axis) {
  return std::sqrt(point.metric.determinant() * point.metric_inv(axis, axis));
}

Vec boundary_conormal(const SurfacePoint& point, const BoundaryFace& face) {
  const double gaa = point.metric_inv(face.axis, face.axis);
  if (!(gaa > 1e-14)) throw SingularChartError("boundary_conormal: ill-conditioned boundary frame");
  const Vec grad = point.jacobian * point.metric_inv.col(face.axis);
  return (face.upper ? 1.0 : -1.0) * grad / std::sqrt(gaa);
}

Vec boundary_conormal(const Chart& chart, const BoundaryFace& face, const Vec& u) {
  bool registered = false;
  for (const auto& b : chart.boundary()) registered |= (b.axis == face.axis && b.upper == face.upper);
  if (!registered) throw DomainError("boundary_conormal: face is not a registered boundary of '" + chart.id() + "'");
  const double target = face.upper ? chart.box().hi[face.axis] : chart.box().lo[face.axis];
  if (std::fabs(u[face.axis] - target) > 1e-12 * chart.box().extent()[face.axis])
    throw DomainError("boundary_conormal: point " + format_point(u) + " is not on the face");
  return boundary_conormal(point_at(chart, u), face);
}

std::vector<double> hr_torus_spectrum(int n, double r) {
  if (n < 1) throw DomainError("hr_torus_spectrum: n must be positive");
  if (!(r > 0.0 && r < 1.0)) throw DomainError("hr_torus_spectrum: r must lie in (0, 1)");
  const double s = std::sqrt(1.0 - r * r);
  std::vector<double> mu(n - 1, s / r);
  mu.push_back(-r / s);
  return mu;
}

std::vector<double> clifford_spectrum(int n1, int n2, double r1, double r2) {
  if (n1 < 1 || n2 < 1) throw DomainError("clifford_spectrum: factor dimensions must be positive");
  if (!(r1 > 0.0 && r2 > 0.0)) throw DomainError("clifford_spectrum: radii must be positive");
  if (std::fabs(r1 * r1 + r2 * r2 - 1.0) > 1e-12)
    throw DomainError("clifford_spectrum: need r1^2 + r2^2 = 1");
  std::vector<double> mu(n1, r2 / r1);
  mu.insert(mu.end(), n2, -r1 / r2);
  return mu;
}

// ---------------------------------------------------------------------------

WeightField WeightField::constant(double value) {
  return {"constant", WeightTag::Constant, [value](const Vec&) { return value; },
          [](const Vec& x) { return Vec(Vec::Zero(x.size())); }};
}

WeightField WeightField::gaussian() {
  return {"gaussian", WeightTag::Gaussian, [](const Vec& x) { return 0.5 * x.squaredNorm(); },
          [](const Vec& x) { return x; }};
}

WeightField WeightField::custom(std::string name, std::function<double(const Vec&)> f,
                                std::function<Vec(const Vec&)> grad) {
  return {std::move(name), WeightTag::Custom, std::move(f), std::move(grad)};
}

double weight_gradient_error(const WeightField& w, const std::vector<Vec>& points) {
  double worst = 0.0;
  for (const Vec& x : points) {
    const double h = 1e-5 * std::max(1.0, x.norm());
    const Vec g = w.grad(x);
    for (int i = 0; i < x.size(); ++i) {
      const Vec e = unit(static_cast<int>(x.size()), i) * h;
      const double fd = (w.f(x + e) - w.f(x - e)) / (2.0 * h);
      worst = std::max(worst, std::fabs(fd - g[i]));
    }
  }
  return worst;
}

ConformalField ConformalField::position() {
  return {"position", [](const Vec& x) { return x; }, [](const Vec&) { return 1.0; }, true};
}

ConformalField ConformalField::constant(Vec v) {
  return {"constant", [v](const Vec&) { return v; }, [](const Vec&) { return 0.0; }, true};
}

double conformal_defect(const ConformalField& field, const std::vector<Vec>& points) {
  double worst = 0.0;
  for (const Vec& x : points) {
    const int m = static_cast<int>(x.size());
    const double h = 1e-5 * std::max(1.0, x.norm());
    const double phi = field.phi(x);
    for (int j = 0; j < m; ++j) {
      const Vec e = unit(m, j) * h;
      const Vec col = (field.Y(x + e) - field.Y(x - e)) / (2.0 * h);
      for (int i = 0; i < m; ++i) worst = std::max(worst, std::fabs(col[i] - (i == j ? phi : 0.0)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

double Polynomial2::value(double u1, double u2) const { return derivative(u1, u2, 0, 0); }

double Polynomial2::derivative(double u1, double u2, int di, int dj) const {
  double total = 0.0;
  for (const auto& t : terms) {
    if (t.i < di || t.j < dj) continue;
    double coef = t.c;
    for (int s = 0; s < di; ++s) coef *= t.i - s;
    for (int s = 0; s < dj; ++s) coef *= t.j - s;
    total += coef * std::pow(u1, t.i - di) * std::pow(u2, t.j - dj);
  }
  return total;
}

Polynomial2 Polynomial2::saddle() { return Polynomial2{{{2, 0, 1.0}, {0, 2, -1.0}}}; }

namespace {

/// Builds the chart, then flips the orientation if the normal at the box
/// center points against `outward`.
ChartPtr oriented(Chart::Options opt, const std::function<Vec(const Vec&)>& outward) {
  const Chart probe(opt);
  const GeometryFrame f = frame_at(probe, probe.box().center());
  if (f.normal.dot(outward(f.x)) < 0.0) opt.orientation = -opt.orientation;
  return std::make_shared<const Chart>(std::move(opt));
}

ParamBox box2(double lo0, double hi0, double lo1, double hi1) {
  return {Eigen::Vector2d(lo0, lo1), Eigen::Vector2d(hi0, hi1)};
}

Jet make_jet(int m, int n) {
  Jet j;
  j.x = Vec::Zero(m);
  j.d1 = Mat::Zero(m, n);
  j.d2.assign(static_cast<std::size_t>(n) * n, Vec::Zero(m));
  return j;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw DomainError(std::string(what) + " must be positive");
}

}  // namespace

ChartPtr make_sphere(int n, double radius) {
  if (n < 2) throw DomainError("make_sphere: n must be at least 2");
  require_positive(radius, "make_sphere: radius");
  const double pi = std::numbers::pi;

  // Coordinate i is radius * prod_l g_il(t_l) with g in {1, sin, cos}.
  enum Factor { One, Sin, Cos };
  std::vector<std::vector<Factor>> factors(n + 1, std::vector<Factor>(n, One));
  for (int i = 0; i <= n; ++i) {
    for (int l = 0; l < std::min(i, n - 1); ++l) factors[i][l] = Sin;
    if (i <= n - 1) factors[i][i] = Cos;
    if (i == n) factors[i][n - 1] = Sin;
  }
  auto eval = [](Factor f, double t, int order) {
    if (f == One) return order == 0 ? 1.0 : 0.0;
    // Derivatives cycle sin -> cos -> -sin -> -cos.
    const double phase = (f == Cos ? 1 : 0) + order;
    return std::sin(t + phase * std::numbers::pi / 2);
  };

  Chart::Options opt;
  opt.id = "sphere";
  opt.ambient = AmbientSpace::euclidean(n + 1);
  opt.box.lo = Vec::Zero(n);
  opt.box.hi = Vec::Constant(n, pi);
  opt.box.hi[n - 1] = 2 * pi;
  opt.parameters = {{"n", n}, {"radius", radius}};
  opt.analytic_jet = [=](const Vec& t) {
    Jet j = make_jet(n + 1, n);
    for (int i = 0; i <= n; ++i) {
      std::vector<double> v0(n), v1(n), v2(n);
      for (int l = 0; l < n; ++l) {
        v0[l] = eval(factors[i][l], t[l], 0);
        v1[l] = eval(factors[i][l], t[l], 1);
        v2[l] = eval(factors[i][l], t[l], 2);
      }
      auto product = [&](int a, int b) {
        double p = radius;
        for (int l = 0; l < n; ++l) {
          if (l == a && l == b)
            p *= v2[l];
          else if (l == a || l == b)
            p *= v1[l];
          else
            p *= v0[l];
        }
        return p;
      };
      j.x[i] = product(-1, -1);
      for (int a = 0; a < n; ++a) {
        j.d1(i, a) = product(a, -1);
        for (int b = 0; b < n; ++b) j.d2[a * n + b][i] = product(a, b);
      }
    }
    return j;
  };
  auto jet_fn = opt.analytic_jet;
  opt.immersion = [jet_fn](const Vec& t) { return jet_fn(t).x; };
  return oriented(std::move(opt), [](const Vec& x) { return x; });
}

ChartPtr make_sphere_cap(double radius, double theta0) {
  require_positive(radius, "make_sphere_cap: radius");
  if (!(theta0 > 0.0 && theta0 < std::numbers::pi)) throw DomainError("make_sphere_cap: theta0 must lie in (0, pi)");
  Chart::Options opt;
  opt.id = "sphere-cap";
  opt.box = box2(0.0, theta0, 0.0, 2 * std::numbers::pi);
  opt.boundary = {{0, true}};
  opt.parameters = {{"radius", radius}, {"theta0", theta0}};
  const double r = radius;
  opt.immersion = [r](const Vec& u) {
    return Vec(Eigen::Vector3d(r * std::sin(u[0]) * std::cos(u[1]), r * std::sin(u[0]) * std::sin(u[1]),
                               r * std::cos(u[0])));
  };
  opt.analytic_jet = [r](const Vec& u) {
    const double st = std::sin(u[0]), ct = std::cos(u[0]), sp = std::sin(u[1]), cp = std::cos(u[1]);
    Jet j = make_jet(3, 2);
    j.x = r * Eigen::Vector3d(st * cp, st * sp, ct);
    j.d1.col(0) = r * Eigen::Vector3d(ct * cp, ct * sp, -st);
    j.d1.col(1) = r * Eigen::Vector3d(-st * sp, st * cp, 0.0);
    j.d2[0] = r * Eigen::Vector3d(-st * cp, -st * sp, -ct);
    j.d2[1] = j.d2[2] = r * Eigen::Vector3d(-ct * sp, ct * cp, 0.0);
    j.d2[3] = r * Eigen::Vector3d(-st * cp, -st * sp, 0.0);
    return j;
  };
  return oriented(std::move(opt), [](const Vec& x) { return x; });
}

ChartPtr make_cylinder_patch(double radius, double theta0, double theta1, double z0, double z1) {
  require_positive(radius, "make_cylinder_patch: radius");
  const double span = theta1 - theta0;
  if (!(span > 0.0 && span <= 2 * std::numbers::pi + 1e-12))
    throw DomainError("make_cylinder_patch: angular range must be non-empty and at most a full turn");
  if (!(z1 > z0)) throw DomainError("make_cylinder_patch: need z0 < z1");
  Chart::Options opt;
  opt.id = "cylinder-patch";
  opt.box = box2(theta0, theta1, z0, z1);
  opt.boundary = {{1, false}, {1, true}};
  if (span < 2 * std::numbers::pi - 1e-12) {
    opt.boundary.push_back({0, false});
    opt.boundary.push_back({0, true});
  }
  opt.parameters = {{"radius", radius}, {"theta0", theta0}, {"theta1", theta1}, {"z0", z0}, {"z1", z1}};
  const double r = radius;
  opt.immersion = [r](const Vec& u) {
    return Vec(Eigen::Vector3d(r * std::cos(u[0]), r * std::sin(u[0]), u[1]));
  };
  opt.analytic_jet = [r](const Vec& u) {
    const double c = std::cos(u[0]), s = std::sin(u[0]);
    Jet j = make_jet(3, 2);
    j.x = Eigen::Vector3d(r * c, r * s, u[1]);
    j.d1.col(0) = Eigen::Vector3d(-r * s, r * c, 0.0);
    j.d1.col(1) = Eigen::Vector3d(0.0, 0.0, 1.0);
    j.d2[0] = Eigen::Vector3d(-r * c, -r * s, 0.0);
    return j;
  };
  return oriented(std::move(opt), [](const Vec& x) { return Vec(Eigen::Vector3d(x[0], x[1], 0.0)); });
}

ChartPtr make_flat_disk(double radius) {
  require_positive(radius, "make_flat_disk: radius");
  Chart::Options opt;
  opt.id = "flat-disk";
  opt.box = box2(0.0, radius, 0.0, 2 * std::numbers::pi);
  opt.boundary = {{0, true}};
  opt.parameters = {{"radius", radius}};
  opt.immersion = [](const Vec& u) {
    return Vec(Eigen::Vector3d(u[0] * std::cos(u[1]), u[0] * std::sin(u[1]), 0.0));
  };
  opt.analytic_jet = [](const Vec& u) {
    const double c = std::cos(u[1]), s = std::sin(u[1]), r = u[0];
    Jet j = make_jet(3, 2);
    j.x = Eigen::Vector3d(r * c, r * s, 0.0);
    j.d1.col(0) = Eigen::Vector3d(c, s, 0.0);
    j.d1.col(1) = Eigen::Vector3d(-r * s, r * c, 0.0);
    j.d2[1] = j.d2[2] = Eigen::Vector3d(-s, c, 0.0);
    j.d2[3] = Eigen::Vector3d(-r * c, -r * s, 0.0);
    return j;
  };
  return oriented(std::move(opt), [](const Vec&) { return Vec(Eigen::Vector3d(0.0, 0.0, 1.0)); });
}

ChartPtr make_graph_patch(Polynomial2 height, double half_width, std::string id) {
  require_positive(half_width, "make_graph_patch: half_width");
  Chart::Options opt;
  opt.id = std::move(id);
  opt.box = box2(-half_width, half_width, -half_width, half_width);
  opt.boundary = {{0, false}, {0, true}, {1, false}, {1, true}};
  opt.parameters = {{"half_width", half_width}};
  opt.immersion = [height](const Vec& u) { return Vec(Eigen::Vector3d(u[0], u[1], height.value(u[0], u[1]))); };
  opt.analytic_jet = [height](const Vec& u) {
    Jet j = make_jet(3, 2);
    j.x = Eigen::Vector3d(u[0], u[1], height.value(u[0], u[1]));
    j.d1.col(0) = Eigen::Vector3d(1.0, 0.0, height.derivative(u[0], u[1], 1, 0));
    j.d1.col(1) = Eigen::Vector3d(0.0, 1.0, height.derivative(u[0], u[1], 0, 1));
    j.d2[0] = Eigen::Vector3d(0.0, 0.0, height.derivative(u[0], u[1], 2, 0));
    j.d2[1] = j.d2[2] = Eigen::Vector3d(0.0, 0.0, height.derivative(u[0], u[1], 1, 1));
    j.d2[3] = Eigen::Vector3d(0.0, 0.0, height.derivative(u[0], u[1], 0, 2));
    return j;
  };
  return oriented(std::move(opt), [](const Vec&) { return Vec(Eigen::Vector3d(0.0, 0.0, 1.0)); });
}

}  // namespace curvflux::surfaces
