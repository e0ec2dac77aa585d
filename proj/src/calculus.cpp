#include "curvflux/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "curvflux/errors.hpp"
#include "curvflux/newton.hpp"

namespace curvflux::calculus {

using surfaces::point_at;
using surfaces::SurfacePoint;

void QuadratureSpec::validate() const {
  if (ladder.size() < 3) throw DomainError("quadrature ladder needs at least 3 levels");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (ladder[i] < 1) throw DomainError("quadrature ladder entries must be positive");
    if (i > 0 && ladder[i] <= ladder[i - 1]) throw DomainError("quadrature ladder must be strictly increasing");
  }
  if (!boundary_ladder.empty()) {
    if (boundary_ladder.size() != ladder.size())
      throw DomainError("boundary ladder must have as many levels as the interior ladder");
    for (int c : boundary_ladder)
      if (c < 1) throw DomainError("boundary ladder entries must be positive");
  }
  for (double a : axis_scale)
    if (!(a > 0.0)) throw DomainError("axis scales must be positive");
  if (threads < 1) throw DomainError("threads must be positive");
}

std::vector<int> QuadratureSpec::cells(std::size_t level, int n, bool boundary) const {
  if (!axis_scale.empty() && static_cast<int>(axis_scale.size()) != n)
    throw DomainError("axis_scale must have one entry per parameter axis");
  const int base = boundary && !boundary_ladder.empty() ? boundary_ladder[level] : ladder[level];
  std::vector<int> out(n, base);
  if (!axis_scale.empty())
    for (int a = 0; a < n; ++a) out[a] = std::max(1, static_cast<int>(std::lround(base * axis_scale[a])));
  return out;
}

bool Ladder::converges_with_order(double p) const {
  if (at_floor) return monotone;
  return order && *order >= p;
}

namespace {

void require_same_size(const std::vector<double>& h, const std::vector<double>& v) {
  if (h.size() != v.size() || h.size() < 2) throw DomainError("ladder: need matching h and values, two or more levels");
}

double log_ratio(double a, double b) { return std::log(a / b); }

void finish_extrapolation(Ladder& l) {
  const std::size_t last = l.values.size() - 1;
  if (l.at_floor) {
    l.extrapolated = l.values[last];
    return;
  }
  const double p = l.order.value_or(2.0);
  const double r = std::pow(l.h[last - 1] / l.h[last], p);
  l.extrapolated = l.values[last] + (l.values[last] - l.values[last - 1]) / (r - 1.0);
}

}  // namespace

Ladder analyze_integral(std::vector<double> h, std::vector<double> values, double floor) {
  require_same_size(h, values);
  Ladder l;
  l.h = std::move(h);
  l.values = std::move(values);
  l.floor = floor;
  const std::size_t m = l.values.size();
  std::vector<double> diff(m, 0.0);
  for (std::size_t i = 1; i < m; ++i) diff[i] = std::fabs(l.values[i] - l.values[i - 1]);
  l.orders.assign(m, std::nullopt);
  for (std::size_t i = 2; i < m; ++i) {
    if (diff[i] > floor && diff[i] >= diff[i - 1]) l.monotone = false;
    if (diff[i] > floor && diff[i - 1] > floor) {
      l.orders[i] = log_ratio(diff[i - 1], diff[i]) / log_ratio(l.h[i - 1], l.h[i]);
      l.order = l.orders[i];
    }
  }
  l.at_floor = diff[m - 1] <= floor;
  finish_extrapolation(l);
  for (double v : l.values) l.error_estimates.push_back(std::fabs(v - l.extrapolated));
  return l;
}

Ladder analyze_residual(std::vector<double> h, std::vector<double> values, double floor) {
  require_same_size(h, values);
  Ladder l;
  l.h = std::move(h);
  l.values = std::move(values);
  l.floor = floor;
  const std::size_t m = l.values.size();
  l.orders.assign(m, std::nullopt);
  for (std::size_t i = 1; i < m; ++i) {
    const double prev = std::fabs(l.values[i - 1]), cur = std::fabs(l.values[i]);
    if (cur > floor && cur >= prev) l.monotone = false;
    if (cur > floor && prev > floor) {
      l.orders[i] = log_ratio(prev, cur) / log_ratio(l.h[i - 1], l.h[i]);
      l.order = l.orders[i];
    }
  }
  l.at_floor = std::fabs(l.values[m - 1]) <= floor;
  finish_extrapolation(l);
  for (double v : l.values) l.error_estimates.push_back(std::fabs(v));
  return l;
}

Ladder residual_of(const Ladder& a, const Ladder& b, double floor) {
  if (a.values.size() != b.values.size()) throw DomainError("residual_of: ladder length mismatch");
  std::vector<double> r(a.values.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.values[i] - b.values[i];
  return analyze_residual(a.h, r, floor);
}

double ordered_sum(long rows, int cells, int threads, const std::function<double(long)>& cell) {
  std::vector<double> row_sums(static_cast<std::size_t>(rows), 0.0);
  auto work = [&](long first, long stride) {
    for (long r = first; r < rows; r += stride) {
      double s = 0.0;
      for (int i = 0; i < cells; ++i) s += cell(r * cells + i);
      row_sums[static_cast<std::size_t>(r)] = s;
    }
  };
  const int workers = static_cast<int>(std::min<long>(threads, std::max<long>(rows, 1)));
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        try {
          work(t, workers);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  double total = 0.0;
  for (double s : row_sums) total += s;
  return total;
}

namespace {

struct Grid {
  int n = 0;
  std::vector<int> counts;
  Vec lo, h;
  long total = 1;

  Grid(const surfaces::ParamBox& box, std::vector<int> per_axis)
      : n(box.dim()), counts(std::move(per_axis)), lo(box.lo), h(box.dim()) {
    for (int a = 0; a < n; ++a) {
      h[a] = (box.hi[a] - box.lo[a]) / counts[a];
      total *= counts[a];
    }
  }
  Vec midpoint(long index) const {
    Vec u(n);
    for (int a = 0; a < n; ++a) {
      u[a] = lo[a] + (static_cast<double>(index % counts[a]) + 0.5) * h[a];
      index /= counts[a];
    }
    return u;
  }
  double cell_volume() const { return h.prod(); }
  double width() const { return h.maxCoeff(); }
  int row_length() const { return counts[0]; }
};

/// Midpoints of one face, using the grid's cells on every other axis.
struct FaceGrid {
  int n = 0;
  int axis = 0;
  std::vector<int> counts;
  Vec lo, h;
  double fixed = 0.0;
  long total = 1;

  FaceGrid(const surfaces::ParamBox& box, const surfaces::BoundaryFace& face, std::vector<int> per_axis)
      : n(box.dim()), axis(face.axis), counts(std::move(per_axis)), lo(box.lo), h(box.dim()) {
    fixed = face.upper ? box.hi[axis] : box.lo[axis];
    for (int a = 0; a < n; ++a) {
      h[a] = (box.hi[a] - box.lo[a]) / counts[a];
      if (a != axis) total *= counts[a];
    }
  }
  Vec point(long index) const {
    Vec u(n);
    for (int a = 0; a < n; ++a) {
      if (a == axis) {
        u[a] = fixed;
        continue;
      }
      u[a] = lo[a] + (static_cast<double>(index % counts[a]) + 0.5) * h[a];
      index /= counts[a];
    }
    return u;
  }
  double element() const {
    double e = 1.0;
    for (int a = 0; a < n; ++a)
      if (a != axis) e *= h[a];
    return e;
  }
  int row_length() const {
    for (int a = 0; a < n; ++a)
      if (a != axis) return counts[a];
    return 1;
  }
};

double sum_grid(const Grid& g, int threads, const std::function<double(const Vec&)>& f) {
  const int row = g.row_length();
  return ordered_sum(g.total / row, row, threads, [&](long i) { return f(g.midpoint(i)); });
}

double sum_faces(const Chart& chart, const std::vector<int>& counts, int threads,
                 const std::function<double(const Vec&, const surfaces::BoundaryFace&, double)>& f) {
  double total = 0.0;
  for (const auto& face : chart.boundary()) {
    const FaceGrid fg(chart.box(), face, counts);
    const int row = fg.row_length();
    const double element = fg.element();
    total += ordered_sum(fg.total / row, row, threads, [&](long i) { return f(fg.point(i), face, element); });
  }
  return total;
}

double integral_floor(const std::vector<double>& values) {
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::fabs(v));
  return 1e-13 * scale;
}

}  // namespace

IntegralResult surface_integral(const Chart& chart, const ScalarIntegrand& integrand, const WeightField& weight,
                                const QuadratureSpec& spec) {
  spec.validate();
  std::vector<double> hs, values;
  for (std::size_t level = 0; level < spec.ladder.size(); ++level) {
    const Grid grid(chart.box(), spec.cells(level, chart.n()));
    const double dv = grid.cell_volume();
    values.push_back(sum_grid(grid, spec.threads, [&](const Vec& u) {
      const GeometryFrame f = surfaces::frame_at(chart, u);
      return integrand(f) * std::exp(-weight.f(f.x)) * f.volume_element() * dv;
    }));
    hs.push_back(grid.width());
  }
  const double floor = integral_floor(values);
  return analyze_integral(std::move(hs), std::move(values), floor);
}

std::vector<IntegralResult> surface_integrals(const Chart& chart, const std::function<Vec(const GeometryFrame&)>& integrands,
                                              int count, const WeightField& weight, const QuadratureSpec& spec) {
  spec.validate();
  std::vector<double> hs;
  std::vector<std::vector<double>> values(count);
  for (std::size_t level = 0; level < spec.ladder.size(); ++level) {
    const Grid grid(chart.box(), spec.cells(level, chart.n()));
    const double dv = grid.cell_volume();
    // Evaluate once per cell, then reduce each component in the fixed order.
    std::vector<double> buffer(static_cast<std::size_t>(grid.total) * count);
    const int row = grid.row_length();
    ordered_sum(grid.total / row, row, spec.threads, [&](long i) {
      const GeometryFrame f = surfaces::frame_at(chart, grid.midpoint(i));
      const Vec v = integrands(f);
      if (v.size() != count) throw ContractError("surface_integrals: integrand returned the wrong count");
      const double w = std::exp(-weight.f(f.x)) * f.volume_element() * dv;
      for (int j = 0; j < count; ++j) buffer[static_cast<std::size_t>(i) * count + j] = v[j] * w;
      return 0.0;
    });
    for (int j = 0; j < count; ++j)
      values[j].push_back(ordered_sum(grid.total / row, row, 1, [&](long i) {
        return buffer[static_cast<std::size_t>(i) * count + j];
      }));
    hs.push_back(grid.width());
  }
  std::vector<IntegralResult> out;
  for (auto& v : values) out.push_back(analyze_integral(hs, v, integral_floor(v)));
  return out;
}

IntegralResult boundary_integral(const Chart& chart, const VectorIntegrand& field, const WeightField& weight,
                                 const QuadratureSpec& spec) {
  spec.validate();
  if (chart.boundary().empty()) throw DomainError("boundary_integral: chart '" + chart.id() + "' has no boundary");
  std::vector<double> hs, values;
  for (std::size_t level = 0; level < spec.ladder.size(); ++level) {
    const auto cells = spec.cells(level, chart.n(), true);
    values.push_back(sum_faces(chart, cells, spec.threads, [&](const Vec& u, const surfaces::BoundaryFace& face,
                                                              double element) {
      const GeometryFrame f = surfaces::frame_at(chart, u);
      const Vec nu = surfaces::boundary_conormal(f, face);
      return field(f).dot(nu) * std::exp(-weight.f(f.x)) * surfaces::face_density(f, face.axis) * element;
    }));
    hs.push_back(Grid(chart.box(), cells).width());
  }
  const double floor = integral_floor(values);
  return analyze_integral(std::move(hs), std::move(values), floor);
}

namespace {

void require_stencil(const Chart& chart, const Vec& u, const char* what) {
  for (int a = 0; a < chart.n(); ++a) {
    const double h = chart.step(a);
    if (u[a] - h < chart.box().lo[a] || u[a] + h > chart.box().hi[a])
      throw DomainError(std::string(what) + ": finite-difference stencil leaves the parameter box");
  }
}

Vec shifted(const Vec& u, int axis, double delta) {
  Vec v = u;
  v[axis] += delta;
  return v;
}

/// Christoffel symbols from the metric at u +- h_b e_b.
std::vector<Mat> christoffel_from(const Mat& g_inv, const std::vector<Mat>& dg) {
  const int n = static_cast<int>(g_inv.rows());
  std::vector<Mat> gamma(n, Mat::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += g_inv(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
        gamma[a](b, c) = 0.5 * s;
      }
  return gamma;
}

}  // namespace

std::vector<Mat> christoffel(const Chart& chart, const Vec& u) {
  require_stencil(chart, u, "christoffel");
  const int n = chart.n();
  std::vector<Mat> dg(n);
  for (int b = 0; b < n; ++b) {
    const double h = chart.step(b);
    dg[b] = (point_at(chart, shifted(u, b, h)).metric - point_at(chart, shifted(u, b, -h)).metric) / (2 * h);
  }
  return christoffel_from(point_at(chart, u).metric_inv, dg);
}

double weighted_divergence(const Chart& chart, const AmbientField& X, const WeightField& weight, const Vec& u,
                           WeightSign sign) {
  require_stencil(chart, u, "weighted_divergence");
  const double s = sign_value(sign);
  const int n = chart.n();
  const SurfacePoint p0 = point_at(chart, u);
  auto density = [&](const SurfacePoint& p) { return Vec(std::exp(s * weight.f(p.x)) * p.coordinate_components(X(p.x))); };
  const Vec F0 = density(p0);
  double div = 0.0;
  std::vector<Mat> dg(n);
  for (int a = 0; a < n; ++a) {
    const double h = chart.step(a);
    const SurfacePoint plus = point_at(chart, shifted(u, a, h)), minus = point_at(chart, shifted(u, a, -h));
    div += (density(plus)[a] - density(minus)[a]) / (2 * h);
    dg[a] = (plus.metric - minus.metric) / (2 * h);
  }
  // Contracted symbols Gamma^a_{ab} = tr(g^{-1} d_b g) / 2.
  for (int b = 0; b < n; ++b) div += 0.5 * (p0.metric_inv * dg[b]).trace() * F0[b];
  return std::exp(-s * weight.f(p0.x)) * div;
}

DivergenceAudit divergence_theorem_residual(const Chart& chart, const AmbientField& X, const WeightField& weight,
                                            const QuadratureSpec& spec) {
  spec.validate();
  std::vector<double> hs, inner, outer;
  for (std::size_t level = 0; level < spec.ladder.size(); ++level) {
    const Grid grid(chart.box(), spec.cells(level, chart.n()));
    const double dv = grid.cell_volume();
    // e^{-f} sqrt(g) div_f X = d_a (sqrt(g) e^{-f} X^a): the contracted
    // symbols Gamma^a_{ab} = d_b log sqrt(g) folded into the difference.
    inner.push_back(sum_grid(grid, spec.threads, [&](const Vec& u) {
      require_stencil(chart, u, "divergence_theorem_residual");
      double div = 0.0;
      for (int a = 0; a < chart.n(); ++a) {
        const double h = chart.step(a);
        auto flux = [&](double delta) {
          const SurfacePoint p = point_at(chart, shifted(u, a, delta));
          return p.volume_element() * std::exp(-weight.f(p.x)) * p.coordinate_components(X(p.x))[a];
        };
        div += (flux(h) - flux(-h)) / (2 * h);
      }
      return div * dv;
    }));
    outer.push_back(sum_faces(chart, spec.cells(level, chart.n(), true), spec.threads,
                              [&](const Vec& u, const surfaces::BoundaryFace& face, double element) {
                                const SurfacePoint p = point_at(chart, u);
                                const Vec nu = surfaces::boundary_conormal(p, face);
                                return X(p.x).dot(nu) * std::exp(-weight.f(p.x)) *
                                       surfaces::face_density(p, face.axis) * element;
                              }));
    hs.push_back(grid.width());
  }
  double scale = 1.0;
  for (std::size_t i = 0; i < inner.size(); ++i) scale = std::max({scale, std::fabs(inner[i]), std::fabs(outer[i])});
  DivergenceAudit audit;
  audit.interior = analyze_integral(hs, inner, integral_floor(inner));
  audit.boundary = analyze_integral(hs, outer, integral_floor(outer));
  audit.residual = residual_of(audit.interior, audit.boundary, 1e-9 * scale);
  return audit;
}

double unit_sup_scale(const Chart& chart, const AmbientField& X, int samples_per_axis) {
  const Grid grid(chart.box(), std::vector<int>(chart.n(), samples_per_axis));
  double sup = 0.0;
  for (long i = 0; i < grid.total; ++i) {
    const SurfacePoint p = point_at(chart, grid.midpoint(i));
    const Vec c = p.coordinate_components(X(p.x));
    sup = std::max(sup, std::sqrt(c.dot(p.metric * c)));
  }
  return sup > 0.0 ? 1.0 / sup : 1.0;
}

// ---------------------------------------------------------------------------

double normal_weight_derivative(const WeightField& weight, const GeometryFrame& frame) {
  return weight.grad(frame.x).dot(frame.normal);
}

Mat newton_coordinates(const GeometryFrame& frame, double mu0, int k) {
  const auto chain = newton::newton_chain(mu0, frame.shape, k);
  const Mat t = to_eigen(chain.T[k]);
  const Mat& p = frame.frame_coords;
  return p * t * p.transpose() * frame.metric;
}

Vec curvature_hook(const surfaces::AmbientSpace& ambient, const GeometryFrame& frame, const Endomorphism<double>& T) {
  const int n = frame.n();
  const double c = ambient.curvature;
  const Vec& N = frame.normal;
  Vec sum = Vec::Zero(N.size());
  for (int i = 0; i < n; ++i) {
    const Vec ei = frame.frame.col(i);
    Vec tei = Vec::Zero(N.size());
    for (int j = 0; j < n; ++j) tei += T(j, i) * frame.frame.col(j);
    // Rbar(X, Y) Z = c (<Y, Z> X - <X, Z> Y)
    sum += c * (tei.dot(ei) * N - N.dot(ei) * tei);
  }
  return frame.tangential(sum);
}

Vec div_f_newton_numeric(const Chart& chart, const WeightField& weight, int k, const Vec& u, WeightSign sign) {
  require_stencil(chart, u, "div_f_newton_numeric");
  const double s = sign_value(sign);
  const int n = chart.n();
  auto weighted_newton = [&](const GeometryFrame& f) {
    return Mat(std::exp(s * weight.f(f.x)) * newton_coordinates(f, normal_weight_derivative(weight, f), k));
  };
  const GeometryFrame f0 = surfaces::frame_at(chart, u);
  const Mat W0 = weighted_newton(f0);
  const std::vector<Mat> gamma = christoffel(chart, u);

  Vec div = Vec::Zero(n);  // covector (div W)_b = nabla_a W^a_b
  for (int a = 0; a < n; ++a) {
    const double h = chart.step(a);
    const Mat dW =
        (weighted_newton(surfaces::frame_at(chart, shifted(u, a, h))) -
         weighted_newton(surfaces::frame_at(chart, shifted(u, a, -h)))) / (2 * h);
    div += dW.row(a).transpose();
  }
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a)
      for (int d = 0; d < n; ++d) div[b] += gamma[a](a, d) * W0(d, b) - gamma[d](a, b) * W0(a, d);
  return std::exp(-s * weight.f(f0.x)) * (f0.jacobian * (f0.metric_inv * div));
}

namespace {

/// Frame components of the tangential gradients of f and mu0 at u.
struct WeightGradients {
  GeometryFrame frame;
  double mu0 = 0.0;
  Vec grad_f;
  Vec grad_mu0;
};

WeightGradients weight_gradients(const Chart& chart, const WeightField& weight, const Vec& u, const char* what) {
  require_stencil(chart, u, what);
  WeightGradients w;
  w.frame = surfaces::frame_at(chart, u);
  w.mu0 = normal_weight_derivative(weight, w.frame);
  const int n = chart.n();
  Vec df(n), dmu(n);
  for (int a = 0; a < n; ++a) {
    const double h = chart.step(a);
    const SurfacePoint plus = point_at(chart, shifted(u, a, h)), minus = point_at(chart, shifted(u, a, -h));
    df[a] = (weight.f(plus.x) - weight.f(minus.x)) / (2 * h);
    dmu[a] = (weight.grad(plus.x).dot(plus.normal) - weight.grad(minus.x).dot(minus.normal)) / (2 * h);
  }
  // <grad phi, e_i> = d phi (e_i) = d_a phi P^a_i.
  w.grad_f = w.frame.frame_coords.transpose() * df;
  w.grad_mu0 = w.frame.frame_coords.transpose() * dmu;
  return w;
}

Vec apply(const Endomorphism<double>& t, const Vec& v) {
  return to_eigen(t) * v;
}

}  // namespace

Vec div_f_newton_lemma(const Chart& chart, const WeightField& weight, int k, const Vec& u, WeightSign sign) {
  const WeightGradients w = weight_gradients(chart, weight, u, "div_f_newton_lemma");
  const double s = sign_value(sign);
  const auto chain = newton::newton_chain(w.mu0, w.frame.shape, k);
  const Vec curv = Eigen::Map<const Vec>(w.frame.curvatures.data(), w.frame.n());
  Vec d = s * w.grad_f;
  for (int j = 1; j <= k; ++j) {
    const Vec hook = w.frame.frame_components(curvature_hook(chart.ambient(), w.frame, chain.T[j - 1]));
    d = s * chain.sigma[j] * w.grad_f + chain.sigma[j - 1] * w.grad_mu0 - curv.cwiseProduct(d) - hook;
  }
  return w.frame.frame * d;
}

ClosedForms div_f_newton_closed_forms(const Chart& chart, const WeightField& weight, int k, const Vec& u,
                                      WeightSign sign) {
  if (k < 1) throw DomainError("div_f_newton_closed_forms: need k >= 1");
  const WeightGradients w = weight_gradients(chart, weight, u, "div_f_newton_closed_forms");
  const double s = sign_value(sign);
  const auto chain = newton::newton_chain(w.mu0, w.frame.shape, k);
  const Vec base = s * apply(chain.T[k], w.grad_f);
  return {w.frame.frame * (base + chain.sigma[k - 1] * w.grad_mu0),
          w.frame.frame * (base + apply(chain.T[k - 1], w.grad_mu0))};
}

double trace_nabla_A_residual(const Chart& chart, const WeightField& weight, int k, const Vec& u, const Vec& v) {
  if (k < 1 || k > chart.n()) throw DomainError("trace_nabla_A_residual: need 1 <= k <= n");
  require_stencil(chart, u, "trace_nabla_A_residual");
  const int n = chart.n();
  const GeometryFrame f0 = surfaces::frame_at(chart, u);
  if (std::fabs(v.dot(f0.normal)) > 1e-8 * std::max(1.0, v.norm()))
    throw DomainError("trace_nabla_A_residual: direction is not tangent");
  const Vec vc = f0.coordinate_components(v);
  const double mu0 = normal_weight_derivative(weight, f0);
  const std::vector<Mat> gamma = christoffel(chart, u);

  auto sigma_at = [&](const GeometryFrame& f, double m, int order) {
    return sympoly::sigma_inf_closed(sympoly::Spectrum<double>(m, f.curvatures), order);
  };
  Mat nabla_v = Mat::Zero(n, n);
  double v_sigma = 0.0, v_mu0 = 0.0;
  for (int c = 0; c < n; ++c) {
    const double h = chart.step(c);
    const GeometryFrame plus = surfaces::frame_at(chart, shifted(u, c, h));
    const GeometryFrame minus = surfaces::frame_at(chart, shifted(u, c, -h));
    const double mu_p = normal_weight_derivative(weight, plus), mu_m = normal_weight_derivative(weight, minus);
    Mat gamma_c(n, n);
    for (int a = 0; a < n; ++a)
      for (int d = 0; d < n; ++d) gamma_c(a, d) = gamma[a](c, d);
    const Mat dM = (plus.shape_coords - minus.shape_coords) / (2 * h);
    nabla_v += vc[c] * (dM + gamma_c * f0.shape_coords - f0.shape_coords * gamma_c);
    v_sigma += vc[c] * (sigma_at(plus, mu_p, k) - sigma_at(minus, mu_m, k)) / (2 * h);
    v_mu0 += vc[c] * (mu_p - mu_m) / (2 * h);
  }
  const double lhs = (newton_coordinates(f0, mu0, k - 1) * nabla_v).trace();
  return lhs - (v_sigma - sigma_at(f0, mu0, k - 1) * v_mu0);
}

}  // namespace curvflux::calculus
