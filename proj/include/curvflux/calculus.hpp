#pragma once

// Quadrature over charts and their boundaries, refinement ladders, and the
// tangential calculus of the weighted Newton transformations.

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "curvflux/surfaces.hpp"

namespace curvflux::calculus {

using surfaces::Chart;
using surfaces::GeometryFrame;
using surfaces::Mat;
using surfaces::Vec;
using surfaces::WeightField;

/// Which weighted divergence: Standard is e^{f} div(e^{-f} .), Reversed is
/// e^{-f} div(e^{f} .). The value is the sign s multiplying grad f.
enum class WeightSign { Standard = -1, Reversed = 1 };

inline double sign_value(WeightSign s) { return static_cast<double>(static_cast<int>(s)); }

/// Midpoint tensor grid rule over a refinement ladder of per-axis cell counts.
struct QuadratureSpec {
  std::vector<int> ladder{32, 64, 128, 256};
  /// Per-axis counts along boundary faces; empty means "same as ladder".
  std::vector<int> boundary_ladder;
  /// Optional per-axis multipliers of the ladder counts (periodic axes
  /// converge spectrally and need far fewer cells).
  std::vector<double> axis_scale;
  int threads = 1;

  void validate() const;
  /// Cells per axis at a level, interior or boundary ladder.
  std::vector<int> cells(std::size_t level, int n, bool boundary = false) const;
};

/// Values over a ladder with convergence diagnostics.
///
/// Integral ladders estimate errors from successive differences; residual
/// ladders (target 0) use |value| directly. Differences or residuals at or
/// below `floor` count as converged and are excluded from order estimates.
struct Ladder {
  std::vector<double> h;
  std::vector<double> values;
  std::vector<double> error_estimates;
  std::vector<std::optional<double>> orders;  // per level, from the previous one
  std::optional<double> order;                // finest order above the floor
  double extrapolated = 0.0;
  double floor = 0.0;
  bool monotone = true;
  bool at_floor = false;

  double finest() const { return values.back(); }
  /// order >= p, or the ladder reached the floor while monotone.
  bool converges_with_order(double p) const;
};

Ladder analyze_integral(std::vector<double> h, std::vector<double> values, double floor = 0.0);
Ladder analyze_residual(std::vector<double> h, std::vector<double> values, double floor = 0.0);

/// Elementwise a - b for ladders of equal length, analysed as a residual.
Ladder residual_of(const Ladder& a, const Ladder& b, double floor);

using IntegralResult = Ladder;
using ScalarIntegrand = std::function<double(const GeometryFrame&)>;
using VectorIntegrand = std::function<Vec(const GeometryFrame&)>;
using AmbientField = std::function<Vec(const Vec&)>;

/// Sum of cell(i) over the cells * rows grid in fixed order: each row of
/// `cells` consecutive indices is summed serially, then rows in order. The
/// result does not depend on `threads`.
double ordered_sum(long rows, int cells, int threads, const std::function<double(long)>& cell);

/// sum over cells of integrand * e^{-f} * sqrt(det g) * cell volume.
IntegralResult surface_integral(const Chart& chart, const ScalarIntegrand& integrand, const WeightField& weight,
                                const QuadratureSpec& spec);
/// Several integrands sharing one frame evaluation per cell; `integrands`
/// returns `count` values.
std::vector<IntegralResult> surface_integrals(const Chart& chart, const std::function<Vec(const GeometryFrame&)>& integrands,
                                              int count, const WeightField& weight, const QuadratureSpec& spec);
/// Sum over registered faces of <field, nu> e^{-f} ds.
IntegralResult boundary_integral(const Chart& chart, const VectorIntegrand& field, const WeightField& weight,
                                 const QuadratureSpec& spec);

struct DivergenceAudit {
  Ladder interior;  // int div_f X dv_f
  Ladder boundary;  // sum of <X, nu> ds_f
  Ladder residual;  // interior - boundary
};

/// Divergence theorem for the tangential projection of an ambient field.
DivergenceAudit divergence_theorem_residual(const Chart& chart, const AmbientField& X, const WeightField& weight,
                                            const QuadratureSpec& spec);

/// Scale factor making sup |X^T| over a sample grid equal to 1.
double unit_sup_scale(const Chart& chart, const AmbientField& X, int samples_per_axis = 16);

/// Gamma[a](b, c) = Gamma^a_{bc} from central differences of the metric.
std::vector<Mat> christoffel(const Chart& chart, const Vec& u);

/// Weighted divergence of the tangential field X at u (coordinate form with
/// Christoffel symbols), as e^{-s f} div(e^{s f} X).
double weighted_divergence(const Chart& chart, const AmbientField& X, const WeightField& weight, const Vec& u,
                           WeightSign sign = WeightSign::Standard);

/// Mixed coordinate components T^a_b of T_k(mu0, A) at a frame.
Mat newton_coordinates(const GeometryFrame& frame, double mu0, int k);

/// mu0 = <grad f, N>.
double normal_weight_derivative(const WeightField& weight, const GeometryFrame& frame);

/// Weighted divergence of T_k by finite differences of e^{s f} T_k.
Vec div_f_newton_numeric(const Chart& chart, const WeightField& weight, int k, const Vec& u,
                         WeightSign sign = WeightSign::Standard);
/// Weighted divergence of T_k by the inductive formula
/// D_0 = s grad f, D_k = s sigma_k grad f + sigma_{k-1} grad mu0 - A D_{k-1} - R_k.
Vec div_f_newton_lemma(const Chart& chart, const WeightField& weight, int k, const Vec& u,
                       WeightSign sign = WeightSign::Standard);

struct ClosedForms {
  Vec printed;   // s T_k grad f + sigma_{k-1} grad mu0
  Vec unrolled;  // s T_k grad f + T_{k-1} grad mu0
};
ClosedForms div_f_newton_closed_forms(const Chart& chart, const WeightField& weight, int k, const Vec& u,
                                      WeightSign sign = WeightSign::Standard);

/// tr(T_{k-1} nabla_v A) - (v(sigma_k) - sigma_{k-1} v(mu0)) for a tangent
/// ambient vector v at u.
double trace_nabla_A_residual(const Chart& chart, const WeightField& weight, int k, const Vec& u, const Vec& v);

/// Tangential part of sum_i Rbar(N, T e_i) e_i for the space form with
/// curvature c; T is given in the principal frame. Zero in every space form.
Vec curvature_hook(const surfaces::AmbientSpace& ambient, const GeometryFrame& frame, const Endomorphism<double>& T);

}  // namespace curvflux::calculus
