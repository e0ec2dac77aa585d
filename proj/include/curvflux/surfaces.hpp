#pragma once

// Parametric hypersurface patches, their fundamental forms, and the ambient
// fields (weights, conformal fields) the integral audits run against.
//
// Sign convention: A X = -(D_X N)^T, so II_ab = <d_a d_b x, N> and the
// shape operator in coordinates is g^{-1} II. Outward normals on round
// spheres therefore give principal curvatures -1/rho.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvflux/endomorphism.hpp"

namespace curvflux::surfaces {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class AmbientKind { Euclidean, Sphere };

/// R^m (c = 0) or the unit sphere S^m in R^{m+1} (c = 1).
struct AmbientSpace {
  AmbientKind kind = AmbientKind::Euclidean;
  int dim = 3;
  double curvature = 0.0;

  static AmbientSpace euclidean(int m) { return {AmbientKind::Euclidean, m, 0.0}; }
  static AmbientSpace sphere(int m) { return {AmbientKind::Sphere, m, 1.0}; }
  int embedding_dim() const { return kind == AmbientKind::Euclidean ? dim : dim + 1; }
};

/// Axis-aligned parameter box U.
struct ParamBox {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  Vec extent() const { return hi - lo; }
  Vec center() const { return 0.5 * (lo + hi); }
  /// Point at fractional coordinates t in [0,1]^n.
  Vec at(const Vec& t) const { return lo + extent().cwiseProduct(t); }
  bool contains(const Vec& u, double slack = 0.0) const;
};

/// Position and parameter derivatives up to second order at one point.
/// `d1` is (ambient dim) x n; `d2[a * n + b]` is d_a d_b x.
struct Jet {
  Vec x;
  Mat d1;
  std::vector<Vec> d2;

  const Vec& second(int a, int b) const { return d2[static_cast<std::size_t>(a) * d1.cols() + b]; }
};

/// A face {u_axis = lo} or {u_axis = hi} of the parameter box that maps to
/// a genuine boundary piece of M. Degenerate faces (poles) and periodic seams
/// are simply not registered.
struct BoundaryFace {
  int axis = 0;
  bool upper = true;
};

using ImmersionFn = std::function<Vec(const Vec&)>;
using JetFn = std::function<Jet(const Vec&)>;

/// Immutable immersed patch u -> x(u) of an n-dimensional hypersurface.
///
/// The immersion must be evaluable on a neighbourhood of the closed box;
/// finite-difference stencils may step slightly outside it near faces.
class Chart {
 public:
  struct Options {
    std::string id;
    AmbientSpace ambient = AmbientSpace::euclidean(3);
    ParamBox box;
    ImmersionFn immersion;
    JetFn analytic_jet;  // optional
    std::vector<BoundaryFace> boundary;
    int orientation = 1;  // multiplies the cofactor normal det[d_1 x, ..., d_n x, .]
    std::map<std::string, double> parameters;
  };

  explicit Chart(Options options);

  const std::string& id() const { return opt_.id; }
  const AmbientSpace& ambient() const { return opt_.ambient; }
  const ParamBox& box() const { return opt_.box; }
  int n() const { return opt_.box.dim(); }
  int ambient_dim() const { return opt_.ambient.embedding_dim(); }
  const std::vector<BoundaryFace>& boundary() const { return opt_.boundary; }
  int orientation() const { return opt_.orientation; }
  const std::map<std::string, double>& parameters() const { return opt_.parameters; }
  bool has_analytic_jet() const { return static_cast<bool>(opt_.analytic_jet); }

  /// Outer finite-difference step along an axis: max(1e-5 * extent, 1e-7).
  double step(int axis) const { return steps_[axis]; }
  /// True when the construction-time Richardson probe saw second-derivative
  /// noise above 1e-5 in the numeric jet.
  bool fd_noise_flagged() const { return fd_noisy_; }

  Vec position(const Vec& u) const { return opt_.immersion(u); }
  /// Analytic jet when one is registered, numeric otherwise.
  Jet jet(const Vec& u) const;
  /// Fourth-order finite-difference jet from the immersion alone.
  Jet jet_numeric(const Vec& u) const;

 private:
  Options opt_;
  std::vector<double> steps_;
  bool fd_noisy_ = false;
};

using ChartPtr = std::shared_ptr<const Chart>;

enum class JetSource { Auto, Numeric };

/// First-order data at one parameter point: no curvature, no frame.
struct SurfacePoint {
  Vec u;
  Vec x;
  Mat jacobian;
  Mat metric;
  Mat metric_inv;
  Vec normal;

  double volume_element() const { return std::sqrt(metric.determinant()); }
  /// Coordinate components of the tangential part of v.
  Vec coordinate_components(const Vec& v) const { return metric_inv * (jacobian.transpose() * v); }
};

/// Differential data at one parameter point, in a principal orthonormal frame.
struct GeometryFrame : SurfacePoint {
  Mat frame;         // principal unit tangents e_i as columns
  Mat frame_coords;  // coordinate coefficients: e_i = jacobian * frame_coords.col(i)
  Mat second_form;
  Mat shape_coords;  // g^{-1} II, mixed coordinate components of A
  Endomorphism<double> shape;  // A in the principal frame (diagonal)
  std::vector<double> curvatures;

  int n() const { return static_cast<int>(u.size()); }
  /// Components <v, e_i> in the principal frame.
  Vec frame_components(const Vec& v) const { return frame.transpose() * v; }
  Vec tangential(const Vec& v) const { return v - normal.dot(v) * normal; }
};

/// Metric and unit normal at u (closed box).
SurfacePoint point_at(const Chart& chart, const Vec& u, JetSource source = JetSource::Auto);

/// Fundamental forms, normal and principal frame at u (closed box).
GeometryFrame frame_at(const Chart& chart, const Vec& u, JetSource source = JetSource::Auto);

/// Outward unit conormal along a registered boundary face at u.
Vec boundary_conormal(const Chart& chart, const BoundaryFace& face, const Vec& u);
/// Same, from already computed point data.
Vec boundary_conormal(const SurfacePoint& point, const BoundaryFace& face);
/// Boundary measure density sqrt(det g * g^{aa}) on a face of axis a.
double face_density(const SurfacePoint& point, int axis);

/// Principal curvatures of the H(r)-torus S^{n-1}(r) x S^1(sqrt(1-r^2)) in S^{n+1}.
std::vector<double> hr_torus_spectrum(int n, double r);
/// Principal curvatures of S^{n1}(r1) x S^{n2}(r2) in S^{n1+n2+1}.
std::vector<double> clifford_spectrum(int n1, int n2, double r1, double r2);

// ---------------------------------------------------------------------------
// Ambient fields

enum class WeightTag { Constant, Gaussian, Custom };

struct WeightField {
  std::string name;
  WeightTag tag = WeightTag::Constant;
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;

  static WeightField constant(double value = 0.0);
  /// f = |x|^2 / 2.
  static WeightField gaussian();
  static WeightField custom(std::string name, std::function<double(const Vec&)> f,
                            std::function<Vec(const Vec&)> grad);
};

/// Largest deviation of `grad` from central differences of `f` over points.
double weight_gradient_error(const WeightField& w, const std::vector<Vec>& points);

/// Ambient field Y with D_V Y = phi V.
struct ConformalField {
  std::string name;
  std::function<Vec(const Vec&)> Y;
  std::function<double(const Vec&)> phi;
  bool closed = true;

  /// Y = x, phi = 1.
  static ConformalField position();
  /// Y = v, phi = 0.
  static ConformalField constant(Vec v);
};

/// max |DY(x) - phi(x) I| over points, with DY from central differences.
double conformal_defect(const ConformalField& field, const std::vector<Vec>& points);

// ---------------------------------------------------------------------------
// Catalog

/// Sum of c * u1^i * u2^j.
struct Polynomial2 {
  struct Term {
    int i = 0;
    int j = 0;
    double c = 0.0;
  };
  std::vector<Term> terms;

  double value(double u1, double u2) const;
  /// Partial derivative of order (di, dj).
  double derivative(double u1, double u2, int di, int dj) const;
  /// u1^2 - u2^2.
  static Polynomial2 saddle();
};

/// Round n-sphere of radius rho in R^{n+1}, hyperspherical coordinates,
/// outward normal, no boundary.
ChartPtr make_sphere(int n, double radius);
/// Cap {theta <= theta0} of S^2(rho) in R^3, outward normal, rim at theta0.
ChartPtr make_sphere_cap(double radius, double theta0);
/// Cylinder patch of radius rho over [theta0, theta1] x [z0, z1], outward
/// normal. Angular faces are registered unless the range is a full turn.
ChartPtr make_cylinder_patch(double radius, double theta0, double theta1, double z0, double z1);
/// Disk of radius R in the plane z = 0, polar coordinates, normal +e_z.
ChartPtr make_flat_disk(double radius);
/// Graph z = h(u1, u2) over [-a, a]^2, upward normal.
ChartPtr make_graph_patch(Polynomial2 height, double half_width, std::string id = "graph-patch");

}  // namespace curvflux::surfaces
