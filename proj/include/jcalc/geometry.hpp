#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "jcalc/common.hpp"

namespace jcalc::geom {

/// Stolz domain B_gamma: interior of the convex hull of the point 1 and the
/// disc D(0, sin gamma). Membership is decided from the signed hull gap
/// min_{t in [0,1]} |z - (1-t)| - t sin(gamma), which is convex in t.
struct StolzDomain {
  double gamma;

  explicit StolzDomain(double g);
  double hull_gap(Complex z) const;  // < 0 strictly inside, 0 on the boundary
  bool contains(Complex z) const;
  bool contains_closure(Complex z, double tol = kMembershipTol) const;
};

/// Open sector of half-angle omega around the positive real axis.
struct Sector {
  double omega;

  explicit Sector(double w);
  bool contains(Complex z) const;
  bool contains_closure(Complex z, double tol = kMembershipTol) const;
};

/// Delta_gamma = 1 - B_gamma (vertex at 0, disc bulge around 1).
struct ShiftedStolz {
  double gamma;

  explicit ShiftedStolz(double g);
  bool contains(Complex z) const;
  bool contains_closure(Complex z, double tol = kMembershipTol) const;
};

/// D(-i cot theta, 1/sin theta) union D(i cot theta, 1/sin theta),
/// theta in (pi/2, pi). Symmetric under conjugation, contains the unit disc.
struct DiscUnionDomain {
  double theta;

  explicit DiscUnionDomain(double t);
  Complex upper_center() const;
  double radius() const;
  bool contains(Complex z) const;
  bool contains_closure(Complex z, double tol = kMembershipTol) const;
};

enum class PieceKind { Segment, Arc, LogRay };

struct ContourPiece {
  PieceKind kind = PieceKind::Segment;
  Complex start{0.0, 0.0};
  Complex end{0.0, 0.0};
  // Arc data
  Complex center{0.0, 0.0};
  double radius = 0.0;
  double phi0 = 0.0;
  double phi1 = 0.0;
  // LogRay data: lambda = exp(t) exp(i sign * nu), t in [t0, t1];
  // direction = +1 traverses increasing t.
  double nu = 0.0;
  int ray_sign = +1;
  double t0 = 0.0, t1 = 0.0;
  int direction = +1;
  // node index range [node_begin, node_end) in the owning contour
  int node_begin = 0;
  int node_end = 0;
};

struct Truncation {
  double t_min = 0.0;
  double t_max = 0.0;
  double tail_bound = 0.0;
};

/// Oriented quadrature contour. Weights carry the dlambda factor, so any
/// path integral is integrate(f) = sum_k w_k f(node_k).
struct Contour {
  std::vector<ContourPiece> pieces;
  std::vector<Complex> nodes;
  std::vector<Complex> weights;
  std::optional<Truncation> truncation;

  Complex integrate(const std::function<Complex(Complex)>& f) const {
    Complex acc(0.0, 0.0);
    for (size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * f(nodes[k]);
    return acc;
  }
  Contour reversed() const;
  double min_distance(std::span<const Complex> points) const;
};

bool stolz_contains(const StolzDomain& d, Complex z);
bool sector_contains(const Sector& d, Complex z);

struct MinimalAngleResult {
  double alpha = 0.0;          // smallest angle whose closed Stolz domain holds all points
  bool ritt_compatible = true; // false if some point escapes every closed B_beta
  bool at_lower_bracket = false;  // alpha is the 0+ bracket convention
};

MinimalAngleResult minimal_stolz_angle(std::span<const Complex> points);

/// Counterclockwise boundary of B_beta itself: tangent segment from the
/// vertex 1 to sin(beta) e^{i(pi/2-beta)}, far arc of |z| = sin(beta), tangent
/// segment back to 1. This is the contour of the Ritt calculus integral.
Contour stolz_boundary_contour(double beta, int nodes_per_panel = 12, int corner_levels = 6);

/// Gamma_1 part of the shifted-domain boundary: straight segments
/// cos(beta) e^{i beta} -> 0 -> cos(beta) e^{-i beta}.
Contour transfer_gamma1(double beta, int nodes_per_panel = 12, int corner_levels = 6);

/// Gamma_2 part: arc around 1 of radius sin(beta) from cos(beta) e^{-i beta}
/// to cos(beta) e^{i beta}, counterclockwise.
Contour transfer_gamma2(double beta, int nodes_per_panel = 12, int corner_levels = 6);

/// Full counterclockwise boundary of Delta_beta = 1 - B_beta, i.e. the
/// teardrop Gamma_1 + Gamma_2 with corner at 0 and arc around 1.
Contour shifted_stolz_boundary_contour(double beta, int nodes_per_panel = 12,
                                       int corner_levels = 6);

struct SectorDecay {
  double c = 1.0;
  double s = 1.0;
};

/// Truncated boundary of Sigma_nu, counterclockwise (upper ray incoming,
/// lower ray outgoing), reparametrized as r = e^t with trapezoid nodes.
/// The truncation window is chosen so that the certified tail of
/// integral |f| |dlambda| / |lambda| with |f| <= c |z|^s / (1+|z|^{2s})
/// stays below target_tail.
Contour sector_boundary_contour(double nu, const SectorDecay& decay, double target_tail,
                                double nodes_per_unit_t = 24.0);

/// Boundary samples of a domain for sup-norm estimation; includes endpoints.
std::vector<Complex> stolz_boundary_samples(const StolzDomain& d, int count);
std::vector<Complex> sector_boundary_samples(const Sector& d, int count, double r_min = 1e-6,
                                             double r_max = 1e6);
std::vector<Complex> shifted_stolz_boundary_samples(const ShiftedStolz& d, int count);
std::vector<Complex> disc_union_boundary_samples(const DiscUnionDomain& d, int count);

}  // namespace jcalc::geom
