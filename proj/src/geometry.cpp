#include "jcalc/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace jcalc::geom {

namespace {

void check_angle(double a, double lo, double hi, const char* what) {
  if (!(a > lo) || !(a < hi)) {
    throw PreconditionError(std::string(what) + " out of range");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Domains

StolzDomain::StolzDomain(double g) : gamma(g) { check_angle(g, 0.0, kPi / 2, "stolz gamma"); }

double StolzDomain::hull_gap(Complex z) const {
  const double s = std::sin(gamma);
  auto gap = [&](double t) { return std::abs(z - Complex(1.0 - t, 0.0)) - t * s; };
  // gap is convex in t; Brent handles the kink at t = |1 - z| when z is real.
  auto res = brent_minimize(gap, 0.0, 1.0);
  double best = std::min({res.value, gap(0.0), gap(1.0)});
  return best;
}

bool StolzDomain::contains(Complex z) const {
  if (z == Complex(1.0, 0.0)) return false;  // vertex of the open hull
  return hull_gap(z) < 0.0;
}

bool StolzDomain::contains_closure(Complex z, double tol) const { return hull_gap(z) <= tol; }

Sector::Sector(double w) : omega(w) { check_angle(w, 0.0, kPi, "sector omega"); }

bool Sector::contains(Complex z) const {
  if (z == Complex(0.0, 0.0)) return false;
  return std::abs(std::arg(z)) < omega;
}

bool Sector::contains_closure(Complex z, double tol) const {
  if (std::abs(z) <= tol) return true;
  return std::abs(std::arg(z)) <= omega + tol;
}

ShiftedStolz::ShiftedStolz(double g) : gamma(g) { check_angle(g, 0.0, kPi / 2, "stolz gamma"); }

bool ShiftedStolz::contains(Complex z) const {
  return StolzDomain(gamma).contains(Complex(1.0, 0.0) - z);
}

bool ShiftedStolz::contains_closure(Complex z, double tol) const {
  return StolzDomain(gamma).contains_closure(Complex(1.0, 0.0) - z, tol);
}

DiscUnionDomain::DiscUnionDomain(double t) : theta(t) {
  check_angle(t, kPi / 2, kPi, "disc-union theta");
}

Complex DiscUnionDomain::upper_center() const {
  return Complex(0.0, -1.0 / std::tan(theta));  // -i cot(theta), upper half plane
}

double DiscUnionDomain::radius() const { return 1.0 / std::sin(theta); }

bool DiscUnionDomain::contains(Complex z) const {
  const double r = radius();
  return std::abs(z - upper_center()) < r || std::abs(z - std::conj(upper_center())) < r;
}

bool DiscUnionDomain::contains_closure(Complex z, double tol) const {
  const double r = radius() + tol;
  return std::abs(z - upper_center()) <= r || std::abs(z - std::conj(upper_center())) <= r;
}

bool stolz_contains(const StolzDomain& d, Complex z) { return d.contains(z); }
bool sector_contains(const Sector& d, Complex z) { return d.contains(z); }

MinimalAngleResult minimal_stolz_angle(std::span<const Complex> points) {
  if (points.empty()) throw PreconditionError("minimal_stolz_angle: empty point list");
  const double alpha_lo_bracket = 1e-9;
  const double alpha_hi = kPi / 2 - 1e-9;
  auto all_inside = [&](double alpha) {
    StolzDomain d(alpha);
    for (Complex z : points)
      if (!d.contains_closure(z)) return false;
    return true;
  };
  MinimalAngleResult res;
  if (!all_inside(alpha_hi)) {
    res.ritt_compatible = false;
    res.alpha = kPi / 2;
    return res;
  }
  if (all_inside(alpha_lo_bracket)) {
    res.alpha = alpha_lo_bracket;
    res.at_lower_bracket = true;
    return res;
  }
  double lo = alpha_lo_bracket, hi = alpha_hi;
  while (hi - lo > 1e-10) {
    double mid = 0.5 * (lo + hi);
    if (all_inside(mid)) hi = mid; else lo = mid;
  }
  res.alpha = hi;
  return res;
}

// ---------------------------------------------------------------------------
// Contours

Contour Contour::reversed() const {
  Contour out = *this;
  std::reverse(out.nodes.begin(), out.nodes.end());
  std::reverse(out.weights.begin(), out.weights.end());
  for (auto& w : out.weights) w = -w;
  // piece metadata left as-is apart from node ranges, which are recomputed
  int total = static_cast<int>(nodes.size());
  std::reverse(out.pieces.begin(), out.pieces.end());
  for (auto& p : out.pieces) {
    int b = p.node_begin, e = p.node_end;
    p.node_begin = total - e;
    p.node_end = total - b;
    std::swap(p.start, p.end);
  }
  return out;
}

double Contour::min_distance(std::span<const Complex> points) const {
  double best = std::numeric_limits<double>::infinity();
  for (Complex p : points)
    for (Complex z : nodes) best = std::min(best, std::abs(z - p));
  return best;
}

namespace {

// Dyadic panels of [0,1]: geometric shrink toward refined ends.
std::vector<std::pair<double, double>> dyadic_panels(bool refine_start, bool refine_end,
                                                     int levels) {
  std::vector<double> cuts{0.0, 1.0};
  if (refine_start && refine_end) {
    for (int k = 1; k <= levels; ++k) {
      cuts.push_back(std::ldexp(0.5, -k));        // 0.5 * 2^-k
      cuts.push_back(1.0 - std::ldexp(0.5, -k));
    }
    cuts.push_back(0.5);
  } else if (refine_start) {
    for (int k = 1; k <= levels; ++k) cuts.push_back(std::ldexp(1.0, -k));
  } else if (refine_end) {
    for (int k = 1; k <= levels; ++k) cuts.push_back(1.0 - std::ldexp(1.0, -k));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<std::pair<double, double>> panels;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) panels.emplace_back(cuts[i], cuts[i + 1]);
  return panels;
}

void append_segment(Contour& c, Complex a, Complex b, int m, int levels, bool refine_start,
                    bool refine_end) {
  ContourPiece piece;
  piece.kind = PieceKind::Segment;
  piece.start = a;
  piece.end = b;
  piece.node_begin = static_cast<int>(c.nodes.size());
  const auto& gl = gauss_legendre(m);
  for (auto [u0, u1] : dyadic_panels(refine_start, refine_end, levels)) {
    double half = 0.5 * (u1 - u0), mid = 0.5 * (u0 + u1);
    for (int i = 0; i < m; ++i) {
      double u = mid + half * gl.nodes[i];
      c.nodes.push_back(a + (b - a) * u);
      c.weights.push_back((b - a) * half * gl.weights[i]);
    }
  }
  piece.node_end = static_cast<int>(c.nodes.size());
  c.pieces.push_back(piece);
}

void append_arc(Contour& c, Complex center, double radius, double phi0, double phi1, int m,
                int levels, bool refine_start, bool refine_end) {
  ContourPiece piece;
  piece.kind = PieceKind::Arc;
  piece.center = center;
  piece.radius = radius;
  piece.phi0 = phi0;
  piece.phi1 = phi1;
  piece.start = center + std::polar(radius, phi0);
  piece.end = center + std::polar(radius, phi1);
  piece.node_begin = static_cast<int>(c.nodes.size());
  const auto& gl = gauss_legendre(m);
  for (auto [u0, u1] : dyadic_panels(refine_start, refine_end, levels)) {
    double half = 0.5 * (u1 - u0), mid = 0.5 * (u0 + u1);
    for (int i = 0; i < m; ++i) {
      double u = mid + half * gl.nodes[i];
      double phi = phi0 + (phi1 - phi0) * u;
      Complex z = center + std::polar(radius, phi);
      // dlambda = i r e^{i phi} dphi
      c.nodes.push_back(z);
      c.weights.push_back(Complex(0.0, 1.0) * std::polar(radius, phi) * (phi1 - phi0) * half *
                          gl.weights[i]);
    }
  }
  piece.node_end = static_cast<int>(c.nodes.size());
  c.pieces.push_back(piece);
}

}  // namespace

Contour stolz_boundary_contour(double beta, int nodes_per_panel, int corner_levels) {
  check_angle(beta, 0.0, kPi / 2, "stolz beta");
  if (nodes_per_panel < 4) throw PreconditionError("stolz_boundary_contour: need >= 4 nodes");
  const double s = std::sin(beta);
  const Complex vertex(1.0, 0.0);
  const Complex p_up = std::polar(s, kPi / 2 - beta);    // upper tangent point
  const Complex p_dn = std::conj(p_up);                  // lower tangent point
  Contour c;
  // counterclockwise: up the page at the rightmost point 1
  append_segment(c, vertex, p_up, nodes_per_panel, corner_levels, true, false);
  append_arc(c, Complex(0.0, 0.0), s, kPi / 2 - beta, 3 * kPi / 2 + beta, nodes_per_panel,
             corner_levels / 2, false, false);
  append_segment(c, p_dn, vertex, nodes_per_panel, corner_levels, false, true);
  return c;
}

Contour transfer_gamma1(double beta, int nodes_per_panel, int corner_levels) {
  check_angle(beta, 0.0, kPi / 2, "transfer beta");
  const Complex e_up = std::polar(std::cos(beta), beta);
  const Complex e_dn = std::conj(e_up);
  Contour c;
  append_segment(c, e_up, Complex(0.0, 0.0), nodes_per_panel, corner_levels, false, true);
  append_segment(c, Complex(0.0, 0.0), e_dn, nodes_per_panel, corner_levels, true, false);
  return c;
}

Contour transfer_gamma2(double beta, int nodes_per_panel, int corner_levels) {
  check_angle(beta, 0.0, kPi / 2, "transfer beta");
  Contour c;
  // from cos(beta) e^{-i beta} to cos(beta) e^{i beta} around 1, through 1 + sin(beta)
  append_arc(c, Complex(1.0, 0.0), std::sin(beta), -(kPi / 2 + beta), kPi / 2 + beta,
             nodes_per_panel, corner_levels / 2, false, false);
  return c;
}

Contour shifted_stolz_boundary_contour(double beta, int nodes_per_panel, int corner_levels) {
  Contour g1 = transfer_gamma1(beta, nodes_per_panel, corner_levels);
  Contour g2 = transfer_gamma2(beta, nodes_per_panel, corner_levels);
  Contour c = g1;
  int offset = static_cast<int>(c.nodes.size());
  c.nodes.insert(c.nodes.end(), g2.nodes.begin(), g2.nodes.end());
  c.weights.insert(c.weights.end(), g2.weights.begin(), g2.weights.end());
  for (auto p : g2.pieces) {
    p.node_begin += offset;
    p.node_end += offset;
    c.pieces.push_back(p);
  }
  return c;
}

Contour sector_boundary_contour(double nu, const SectorDecay& decay, double target_tail,
                                double nodes_per_unit_t) {
  check_angle(nu, 0.0, kPi, "sector nu");
  if (!(decay.s > 0.0) || !(decay.c > 0.0))
    throw PreconditionError("sector_boundary_contour: decay certificate required");
  if (!(target_tail > 0.0)) throw PreconditionError("sector_boundary_contour: bad tail target");
  // Each ray end contributes at most (c/s) e^{-s |t|} to int |f| dt, and the
  // calculus integrand carries |dlambda|/|lambda| = dt. Split target over the
  // four ray ends with a safety factor of 4.
  const double per_end = target_tail / 16.0;
  double t_abs = std::log(decay.c / (decay.s * per_end)) / decay.s;
  t_abs = std::max(t_abs, 2.0);
  const double t_min = -t_abs, t_max = t_abs;
  int n = std::max(16, static_cast<int>(std::ceil((t_max - t_min) * nodes_per_unit_t)));
  const double h = (t_max - t_min) / n;

  Contour c;
  c.truncation = Truncation{t_min, t_max,
                            4.0 * (decay.c / decay.s) *
                                (std::exp(decay.s * t_min) + std::exp(-decay.s * t_max)) /
                                (2.0 * kPi)};
  auto add_ray = [&](int sign, int direction) {
    ContourPiece piece;
    piece.kind = PieceKind::LogRay;
    piece.nu = nu;
    piece.ray_sign = sign;
    piece.t0 = t_min;
    piece.t1 = t_max;
    piece.direction = direction;
    piece.node_begin = static_cast<int>(c.nodes.size());
    const Complex phase = std::polar(1.0, sign * nu);
    for (int i = 0; i <= n; ++i) {
      double t = (direction > 0) ? t_min + i * h : t_max - i * h;
      double w = (i == 0 || i == n) ? 0.5 * h : h;  // trapezoid
      Complex z = std::exp(t) * phase;
      c.nodes.push_back(z);
      c.weights.push_back(static_cast<double>(direction) * w * z);  // dlambda = z dt
    }
    piece.node_end = static_cast<int>(c.nodes.size());
    piece.start = c.nodes[piece.node_begin];
    piece.end = c.nodes.back();
    c.pieces.push_back(piece);
  };
  add_ray(+1, -1);  // upper ray, incoming (t decreasing)
  add_ray(-1, +1);  // lower ray, outgoing
  return c;
}

// ---------------------------------------------------------------------------
// Boundary samplers

std::vector<Complex> stolz_boundary_samples(const StolzDomain& d, int count) {
  Contour c = stolz_boundary_contour(d.gamma, 8, 4);
  std::vector<Complex> out;
  out.reserve(count + 4);
  const double s = std::sin(d.gamma);
  const Complex vertex(1.0, 0.0);
  const Complex p_up = std::polar(s, kPi / 2 - d.gamma);
  int per = std::max(2, count / 3);
  for (int i = 0; i <= per; ++i) {
    double u = static_cast<double>(i) / per;
    out.push_back(vertex + (p_up - vertex) * u);
    out.push_back(std::conj(vertex + (p_up - vertex) * u));
  }
  for (int i = 0; i <= per; ++i) {
    double u = static_cast<double>(i) / per;
    double phi = (kPi / 2 - d.gamma) + u * (kPi + 2 * d.gamma);
    out.push_back(std::polar(s, phi));
  }
  return out;
}

std::vector<Complex> sector_boundary_samples(const Sector& d, int count, double r_min,
                                             double r_max) {
  std::vector<Complex> out;
  int per = std::max(2, count / 2);
  for (int i = 0; i <= per; ++i) {
    double t = std::log(r_min) + (std::log(r_max) - std::log(r_min)) * i / per;
    out.push_back(std::polar(std::exp(t), d.omega));
    out.push_back(std::polar(std::exp(t), -d.omega));
  }
  return out;
}

std::vector<Complex> shifted_stolz_boundary_samples(const ShiftedStolz& d, int count) {
  auto base = stolz_boundary_samples(StolzDomain(d.gamma), count);
  for (auto& z : base) z = Complex(1.0, 0.0) - z;
  return base;
}

std::vector<Complex> disc_union_boundary_samples(const DiscUnionDomain& d, int count) {
  std::vector<Complex> out;
  const double r = d.radius();
  const Complex cu = d.upper_center();
  const Complex cl = std::conj(cu);
  int per = std::max(4, count / 2);
  for (int i = 0; i < per; ++i) {
    double phi = 2.0 * kPi * i / per;
    Complex zu = cu + std::polar(r, phi);
    Complex zl = cl + std::polar(r, phi);
    // keep only points on the boundary of the union
    if (std::abs(zu - cl) >= r - 1e-14) out.push_back(zu);
    if (std::abs(zl - cu) >= r - 1e-14) out.push_back(zl);
  }
  return out;
}

}  // namespace jcalc::geom
