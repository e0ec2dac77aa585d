#include "curvflux/fluxlab.hpp"

#include <cmath>
#include <sstream>

#include "curvflux/errors.hpp"
#include "curvflux/newton.hpp"
#include "curvflux/scalar.hpp"

namespace curvflux::fluxlab {

using surfaces::GeometryFrame;

namespace {

std::vector<Vec> sample_parameters(const surfaces::Chart& chart, int per_axis) {
  const int n = chart.n();
  long total = 1;
  for (int a = 0; a < n; ++a) total *= per_axis;
  std::vector<Vec> out;
  for (long i = 0; i < total; ++i) {
    Vec t(n);
    long rest = i;
    for (int a = 0; a < n; ++a, rest /= per_axis) t[a] = (static_cast<double>(rest % per_axis) + 0.5) / per_axis;
    out.push_back(chart.box().at(t));
  }
  return out;
}

std::vector<Vec> sample_positions(const surfaces::Chart& chart, int per_axis) {
  std::vector<Vec> out;
  for (const Vec& u : sample_parameters(chart, per_axis)) out.push_back(chart.position(u));
  return out;
}

/// Diagonal of T_k(mu0, A) in the principal frame, plus sigma_0..sigma_{k+1}.
newton::NewtonChain<double> chain_at(const GeometryFrame& f, double mu0, int k) {
  return newton::newton_chain(mu0, f.shape, k);
}

Vec apply_newton(const GeometryFrame& f, const newton::NewtonChain<double>& chain, int k, const Vec& v) {
  const Vec comps = f.frame_components(v);
  return f.frame * (to_eigen(chain.T[k]) * comps);
}

Ladder sum_ladders(const std::vector<const Ladder*>& terms) {
  std::vector<double> v(terms.front()->values.size(), 0.0);
  for (const Ladder* t : terms)
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += t->values[i];
  return calculus::analyze_integral(terms.front()->h, v);
}

}  // namespace

void FluxCase::validate() const {
  if (!chart) throw DomainError("flux case '" + id + "': missing chart");
  const int n = chart->n();
  if (k < 1 || k > n - 1) throw DomainError("flux case '" + id + "': need 1 <= k <= n-1");
  if (chart->boundary().empty()) throw DomainError("flux case '" + id + "': chart has no boundary");
  spec.validate();
  const double defect = surfaces::conformal_defect(Y, sample_positions(*chart, 4));
  if (defect > 1e-6) throw PreconditionError("flux case '" + id + "': field Y is not closed conformal");
}

ResidualReport flux_report(const FluxCase& c) {
  c.validate();
  const surfaces::Chart& chart = *c.chart;
  const int n = chart.n();
  const int k = c.k;
  const double cprev_printed = n * binomial<double>(n, k - 1);
  const double cprev_trace = binomial<double>(n, k - 1);
  const double cmean = (n - k) * binomial<double>(n, k);

  ResidualReport r;
  r.case_id = c.id;
  r.lhs = calculus::boundary_integral(
      chart,
      [&](const GeometryFrame& f) {
        const auto chain = chain_at(f, calculus::normal_weight_derivative(c.weight, f), k);
        return apply_newton(f, chain, k, c.Y.Y(f.x));
      },
      c.weight, c.spec);

  const auto interior = calculus::surface_integrals(
      chart,
      [&](const GeometryFrame& f) {
        const double mu0 = calculus::normal_weight_derivative(c.weight, f);
        const auto chain = chain_at(f, mu0, k);
        const Vec y = c.Y.Y(f.x);
        const double phi = c.Y.phi(f.x);
        const Vec div = calculus::div_f_newton_lemma(chart, c.weight, k, f.u);
        const double h_prev = chain.sigma[k - 1] / binomial<double>(n, k - 1);
        const double h_k = chain.sigma[k] / binomial<double>(n, k);
        double trace_at = 0.0;
        for (int i = 0; i < n; ++i) trace_at += f.curvatures[i] * chain.T[k](i, i);
        Vec out(5);
        out << div.dot(f.tangential(y)), cmean * phi * h_k, cprev_printed * phi * mu0 * h_prev,
            cprev_trace * phi * mu0 * h_prev, f.normal.dot(y) * trace_at;
        return out;
      },
      5, c.weight, c.spec);
  r.rhs_divergence = interior[0];
  r.rhs_mean = interior[1];
  r.rhs_prev_printed = interior[2];
  r.rhs_prev_trace = interior[3];
  r.correction = interior[4];

  for (const Ladder* l : {&r.lhs, &r.rhs_divergence, &r.rhs_mean, &r.rhs_prev_printed, &r.rhs_prev_trace,
                          &r.correction})
    r.scale = std::max(r.scale, std::fabs(l->finest()));
  const double floor = 1e-9 * std::max(1.0, r.scale);
  r.residual_paper =
      calculus::residual_of(r.lhs, sum_ladders({&r.rhs_divergence, &r.rhs_mean, &r.rhs_prev_printed}), floor);
  r.residual_corrected = calculus::residual_of(
      r.lhs, sum_ladders({&r.rhs_divergence, &r.rhs_mean, &r.rhs_prev_trace, &r.correction}), floor);
  return r;
}

VolumeReport volume_recovery(const FluxCase& c) {
  c.validate();
  const surfaces::Chart& chart = *c.chart;
  const int n = chart.n();
  const int k = c.k;
  const auto params = sample_parameters(chart, 16);
  for (const Vec& u : params) {
    const Vec x = chart.position(u);
    if (c.weight.grad(x).norm() > 0.0) throw PreconditionError("volume_recovery: weight must be constant");
    if (std::fabs(c.Y.phi(x) - 1.0) > 1e-12) throw PreconditionError("volume_recovery: Y must be homothetic with phi = 1");
  }
  double h_min = INFINITY, h_max = -INFINITY;
  for (const Vec& u : params) {
    const GeometryFrame f = surfaces::frame_at(chart, u);
    const double h = newton::weighted_mean_curvature(0.0, f.shape, k);
    h_min = std::min(h_min, h);
    h_max = std::max(h_max, h);
  }
  if (h_max - h_min > 1e-8 * std::max(1.0, std::fabs(h_max)))
    throw PreconditionError("volume_recovery: H_k is not constant on '" + chart.id() + "'");
  const double hk = 0.5 * (h_min + h_max);
  if (std::fabs(hk) <= 1e-8) throw PreconditionError("volume_recovery: H_k vanishes on '" + chart.id() + "'");

  VolumeReport v;
  v.mean_curvature = hk;
  v.coefficient = (n - k) * binomial<double>(n, k);
  const auto unweighted = surfaces::WeightField::constant();
  const Ladder flux = calculus::boundary_integral(
      chart,
      [&](const GeometryFrame& f) { return apply_newton(f, chain_at(f, 0.0, k), k, c.Y.Y(f.x)); }, unweighted,
      c.spec);
  std::vector<double> rec;
  for (double x : flux.values) rec.push_back(x / (v.coefficient * hk));
  v.recovered = calculus::analyze_integral(flux.h, rec);
  v.area = calculus::surface_integral(chart, [](const GeometryFrame&) { return 1.0; }, unweighted, c.spec);
  v.gap = calculus::residual_of(v.recovered, v.area, 1e-12 * std::fabs(v.area.finest()));
  v.relative_error = std::fabs(v.gap.finest()) / std::fabs(v.area.finest());
  return v;
}

// ---------------------------------------------------------------------------

double el_residual(double mu0, const std::vector<double>& curvatures, double f, double support, double c) {
  const sympoly::Spectrum<double> s(mu0, curvatures);
  const double n = static_cast<double>(curvatures.size());
  return -2 * sympoly::sigma_inf_closed(s, 2) + 2 * support * sympoly::sigma_inf_closed(s, 1) - 2 * f +
         support * support + n * (1 + c);
}

ElField el_residual_gaussian(const surfaces::Chart& chart, const WeightField& weight, double c, int cells) {
  if (weight.tag != surfaces::WeightTag::Gaussian)
    throw PreconditionError("el_residual_gaussian: weight must be f = |x|^2 / 2");
  if (cells < 1) throw DomainError("el_residual_gaussian: cells must be positive");
  ElField out;
  double cell_volume = chart.box().extent().prod();
  for (int a = 0; a < chart.n(); ++a) cell_volume /= cells;
  double l2 = 0.0;
  for (const Vec& u : sample_parameters(chart, cells)) {
    const GeometryFrame f = surfaces::frame_at(chart, u);
    const double support = f.x.dot(f.normal);
    const double r = el_residual(calculus::normal_weight_derivative(weight, f), f.curvatures, weight.f(f.x), support, c);
    out.samples.push_back(r);
    out.sup = std::max(out.sup, std::fabs(r));
    l2 += r * r * f.volume_element() * cell_volume;
  }
  out.l2 = std::sqrt(l2);
  return out;
}

double el_sphere_residual(int n, double rho) {
  if (n < 1) throw DomainError("el_sphere_residual: n must be positive");
  if (!(rho > 0.0)) throw DomainError("el_sphere_residual: radius must be positive");
  return el_residual(rho, std::vector<double>(n, -1.0 / rho), 0.5 * rho * rho, rho, 0.0);
}

double el_hr_torus_residual(int n, double r) { return el_residual(0.0, surfaces::hr_torus_spectrum(n, r), 0.5, 0.0, 1.0); }

ScanResult scan_roots(const std::function<double(double)>& g, double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) throw DomainError("scan_roots: need points >= 2 and lo < hi");
  ScanResult s;
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    s.x.push_back(x);
    s.values.push_back(g(x));
  }
  for (int i = 0; i + 1 < points; ++i) {
    double a = s.x[i], b = s.x[i + 1], ga = s.values[i];
    if (ga == 0.0) {
      s.roots.push_back(a);
      continue;
    }
    if (s.values[i + 1] == 0.0 || ga * s.values[i + 1] > 0.0) continue;
    for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
      const double m = 0.5 * (a + b), gm = g(m);
      if (std::fabs(gm) <= 1e-12) {
        a = b = m;
        break;
      }
      if ((gm < 0) == (ga < 0)) {
        a = m;
        ga = gm;
      } else {
        b = m;
      }
    }
    s.roots.push_back(0.5 * (a + b));
  }
  if (s.values.back() == 0.0) s.roots.push_back(s.x.back());
  return s;
}

// ---------------------------------------------------------------------------

double torus_sigma1(int n, double r) {
  if (n < 1) throw DomainError("torus_sigma1: n must be positive");
  if (!(r > 0.0 && r < 1.0)) throw DomainError("torus_sigma1: r must lie in (0, 1)");
  return (n * (1 - r * r) - 1) / (r * std::sqrt(1 - r * r));
}

TorusRoot torus_root_solve(int n, double t) {
  if (n < 2) throw DomainError("torus_root_solve: n must be at least 2");
  const double lo = 1e-4, hi = 1 - 1e-4;
  const int pieces = 64;
  auto g = [&](double r) { return torus_sigma1(n, r) - t; };
  for (int i = 0; i < pieces; ++i) {
    double a = lo + (hi - lo) * i / pieces, b = lo + (hi - lo) * (i + 1) / pieces;
    double ga = g(a);
    const double gb = g(b);
    if (ga * gb > 0.0) continue;
    TorusRoot root{0.0, 0.0, a, b};
    double best = ga == 0.0 ? a : b;
    for (int it = 0; it < 400; ++it) {
      const double m = 0.5 * (a + b), gm = g(m);
      if (std::fabs(gm) < std::fabs(g(best))) best = m;
      if (std::fabs(gm) <= 1e-10 || b - a <= 0.0) break;
      if ((gm < 0) == (ga < 0)) {
        a = m;
        ga = gm;
      } else {
        b = m;
      }
      if (m == a && m == b) break;
    }
    root.r = best;
    root.residual = g(best);
    if (std::fabs(root.residual) > 1e-10) {
      std::ostringstream os;
      os << "torus_root_solve: bisection stalled at |g| = " << std::fabs(root.residual);
      throw RootNotFound(os.str());
    }
    return root;
  }
  std::ostringstream os;
  os << "torus_root_solve: no sign change of sigma_1 - " << t << " in (1e-4, 1 - 1e-4) for n = " << n;
  throw RootNotFound(os.str());
}

TorusRoot torus_root_solve(int n) { return torus_root_solve(n, 1 + std::sqrt(2.0 * n + 3)); }

SphereElAudit sphere_el_audit(int n) {
  if (n < 2) throw DomainError("sphere_el_audit: n must be at least 2");
  SphereElAudit a;
  a.n = n;
  // x^2 - 4x - (2n + 1) = 0: x = 2 +- sqrt(2n + 5).
  const int q = 2 * n + 5;
  const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(q))));
  a.discriminant_square = s * s == q;
  if (a.discriminant_square) {
    a.quadratic[0] = 2 + s;
    a.quadratic[1] = 2 - s;
    a.quadratic_exact[0] = std::to_string(2 + s);
    a.quadratic_exact[1] = std::to_string(2 - s);
  } else {
    a.quadratic[0] = 2 + std::sqrt(static_cast<double>(q));
    a.quadratic[1] = 2 - std::sqrt(static_cast<double>(q));
    a.quadratic_exact[0] = "2+sqrt(" + std::to_string(q) + ")";
    a.quadratic_exact[1] = "2-sqrt(" + std::to_string(q) + ")";
  }
  const double p = std::sqrt(2.0 * n + 3);
  a.printed[0] = 2 + p;
  a.printed[1] = 2 - p;
  for (int i = 0; i < 2; ++i) a.difference[i] = a.printed[i] - a.quadratic[i];

  const char* labels[4] = {"quadratic+", "quadratic-", "printed+", "printed-"};
  const double values[4] = {a.quadratic[0], a.quadratic[1], a.printed[0], a.printed[1]};
  for (int i = 0; i < 4; ++i) {
    Candidate cand;
    cand.label = labels[i];
    cand.value = values[i];
    try {
      cand.torus = torus_root_solve(n, values[i] - 1);
    } catch (const RootNotFound& e) {
      cand.torus_note = e.what();
    }
    a.candidates.push_back(cand);
  }
  return a;
}

// ---------------------------------------------------------------------------

NewtonDivergenceAudit newton_divergence_audit(const surfaces::Chart& chart, const WeightField& weight, int k,
                                              calculus::WeightSign sign, int probes) {
  NewtonDivergenceAudit a;
  a.k = k;
  a.sign = sign;
  for (const Vec& u : sample_parameters(chart, probes)) {
    const Vec lemma = calculus::div_f_newton_lemma(chart, weight, k, u, sign);
    a.numeric_vs_lemma =
        std::max(a.numeric_vs_lemma, (calculus::div_f_newton_numeric(chart, weight, k, u, sign) - lemma).norm());
    if (k < 1) continue;
    const auto forms = calculus::div_f_newton_closed_forms(chart, weight, k, u, sign);
    a.unrolled_vs_lemma = std::max(a.unrolled_vs_lemma, (forms.unrolled - lemma).norm());
    a.printed_vs_lemma = std::max(a.printed_vs_lemma, (forms.printed - lemma).norm());
    a.printed_vs_unrolled = std::max(a.printed_vs_unrolled, (forms.printed - forms.unrolled).norm());
    const GeometryFrame f = surfaces::frame_at(chart, u);
    for (int i = 0; i < chart.n(); ++i)
      a.trace_nabla_A =
          std::max(a.trace_nabla_A, std::fabs(calculus::trace_nabla_A_residual(chart, weight, k, u, f.frame.col(i))));
  }
  return a;
}

ShrinkerPin shrinker_pin(int n, int probes) {
  if (n < 2) throw DomainError("shrinker_pin: n must be at least 2");
  ShrinkerPin pin;
  pin.n = n;
  pin.radius = std::sqrt(static_cast<double>(n));
  const auto exact = Endomorphism<double>::diagonal(std::vector<double>(n, -1.0 / pin.radius));
  pin.analytic = std::fabs(newton::weighted_mean_curvature(pin.radius, exact, 1));

  const auto sphere = surfaces::make_sphere(n, pin.radius);
  const auto gauss = surfaces::WeightField::gaussian();
  for (const Vec& u : sample_parameters(*sphere, probes)) {
    const GeometryFrame f = surfaces::frame_at(*sphere, u, surfaces::JetSource::Numeric);
    const double mu0 = calculus::normal_weight_derivative(gauss, f);
    pin.numeric = std::max(pin.numeric, std::fabs(newton::weighted_mean_curvature(mu0, f.shape, 1)));
    if (pin.curvatures.empty()) pin.curvatures = f.curvatures;
  }
  return pin;
}

}  // namespace curvflux::fluxlab
