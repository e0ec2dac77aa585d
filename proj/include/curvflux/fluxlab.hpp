#pragma once

// End-to-end audits: the weighted flux identity, volume recovery, the
// Gaussian Euler-Lagrange residual and the H(r)-torus root analysis.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "curvflux/calculus.hpp"

namespace curvflux::fluxlab {

using calculus::Ladder;
using calculus::QuadratureSpec;
using surfaces::ChartPtr;
using surfaces::ConformalField;
using surfaces::Vec;
using surfaces::WeightField;

struct FluxCase {
  std::string id;
  ChartPtr chart;
  WeightField weight;
  ConformalField Y;
  int k = 1;
  QuadratureSpec spec;

  /// 1 <= k <= n-1, registered boundary, Y conformal to 1e-6.
  void validate() const;
};

struct ResidualReport {
  std::string case_id;
  Ladder lhs;               // boundary integral of <nu, T_k Y^T> e^{-f}
  Ladder rhs_divergence;    // int <div_f T_k, Y^T> dv_f
  Ladder rhs_mean;          // c_k int phi H_k dv_f
  Ladder rhs_prev_printed;  // n C(n,k-1) int phi mu0 H_{k-1} dv_f
  Ladder rhs_prev_trace;    // C(n,k-1) int phi mu0 H_{k-1} dv_f
  Ladder correction;        // int <N, Y> tr(A T_k) dv_f
  Ladder residual_paper;      // lhs - (divergence + mean + prev_printed)
  Ladder residual_corrected;  // lhs - (divergence + mean + prev_trace + correction)
  double scale = 0.0;         // max |term| at the finest level

  double relative(const Ladder& l) const { return std::fabs(l.finest()) / std::max(scale, 1e-300); }
};

ResidualReport flux_report(const FluxCase& c);

struct VolumeReport {
  Ladder recovered;  // (1 / (c_k H_k)) * boundary integral of <T_k nu, Y>
  Ladder area;
  Ladder gap;        // recovered - area
  double mean_curvature = 0.0;
  double coefficient = 0.0;  // c_k
  double relative_error = 0.0;
};

/// Requires f constant, phi == 1, and H_k a nonzero constant (to 1e-8).
VolumeReport volume_recovery(const FluxCase& c);

// ---------------------------------------------------------------------------
// Gaussian Euler-Lagrange residual

/// -2 sigma_2 + 2 mu sigma_1 - 2 f + mu^2 + n (1 + c) with sigma_j taken at
/// mu0 and the given spectrum.
double el_residual(double mu0, const std::vector<double>& curvatures, double f, double support, double c);

struct ElField {
  double sup = 0.0;
  double l2 = 0.0;
  std::vector<double> samples;  // residual on the midpoint grid, row-major
};

/// Residual over a chart in R^{n+1} with f = |x|^2 / 2 (mu = mu0 = <x, N>).
ElField el_residual_gaussian(const surfaces::Chart& chart, const WeightField& weight, double c, int cells);

/// Round sphere of radius rho about the origin in R^{n+1}.
double el_sphere_residual(int n, double rho);
/// H(r)-torus in the unit sphere S^{n+1}: mu0 = mu = 0, f = 1/2, c = 1.
double el_hr_torus_residual(int n, double r);

struct ScanResult {
  std::vector<double> x;
  std::vector<double> values;
  std::vector<double> roots;  // bisection refinements of sign changes
};
/// Uniform scan with sign-change roots refined to |g| <= 1e-12 or width 1e-14.
ScanResult scan_roots(const std::function<double(double)>& g, double lo, double hi, int points);

// ---------------------------------------------------------------------------
// Torus root analysis

/// (n (1 - r^2) - 1) / (r sqrt(1 - r^2)).
double torus_sigma1(int n, double r);

struct TorusRoot {
  double r = 0.0;
  double residual = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};
/// Bisection on torus_sigma1(n, r) - t over the first sign-changing bracket
/// among 64 uniform subintervals of (1e-4, 1 - 1e-4).
TorusRoot torus_root_solve(int n, double t);
/// Default target 1 + sqrt(2n + 3).
TorusRoot torus_root_solve(int n);

struct Candidate {
  std::string label;
  double value = 0.0;
  std::optional<TorusRoot> torus;  // torus_root_solve(n, value - 1)
  std::string torus_note;
};

struct SphereElAudit {
  int n = 0;
  double mu0 = 0.0;  // the example carries no weight data
  bool discriminant_square = false;
  std::string quadratic_exact[2];  // exact roots when the discriminant is a square
  double quadratic[2] = {0.0, 0.0};
  double printed[2] = {0.0, 0.0};
  double difference[2] = {0.0, 0.0};  // printed - quadratic
  std::vector<Candidate> candidates;
};

SphereElAudit sphere_el_audit(int n);

// ---------------------------------------------------------------------------
// Pointwise audits

struct NewtonDivergenceAudit {
  int k = 0;
  calculus::WeightSign sign = calculus::WeightSign::Standard;
  double numeric_vs_lemma = 0.0;    // sup |numeric - lemma|
  double unrolled_vs_lemma = 0.0;   // sup |closed form (b) - lemma|
  double printed_vs_lemma = 0.0;    // sup |closed form (a) - lemma|
  double printed_vs_unrolled = 0.0;
  double trace_nabla_A = 0.0;       // sup over probes and frame directions
};

/// Sup errors over a probes x probes midpoint grid.
NewtonDivergenceAudit newton_divergence_audit(const surfaces::Chart& chart, const WeightField& weight, int k,
                                              calculus::WeightSign sign, int probes = 5);

struct ShrinkerPin {
  int n = 0;
  double radius = 0.0;
  double analytic = 0.0;       // |H_{1,f}| from the exact spectrum
  double numeric = 0.0;        // sup over probes through finite-difference jets
  std::vector<double> curvatures;  // numeric principal curvatures at the first probe
};

/// Sphere of radius sqrt(n) in R^{n+1} with f = |x|^2 / 2.
ShrinkerPin shrinker_pin(int n, int probes = 4);

}  // namespace curvflux::fluxlab
