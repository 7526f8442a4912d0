#pragma once

#include <map>
#include <vector>

#include "jcalc/common.hpp"
#include "jcalc/geometry.hpp"
#include "jcalc/operators.hpp"

namespace jcalc::shiftn {

/// Polynomial in the commuting left shifts on l_p(Z^n), finitely supported
/// coefficients indexed by multi-exponents.
struct ShiftPolynomial {
  int n = 1;
  std::map<std::vector<int>, Complex> coeffs;

  static ShiftPolynomial univariate(std::vector<Complex> c);
  static ShiftPolynomial bivariate(const std::vector<std::vector<Complex>>& rows);

  Complex torus_value(std::span<const double> theta) const;
  double l1_norm() const;  // sum |coeffs|: Young upper bound for every p
  int max_degree() const;
};

/// Exact p = 2 norm: sup over the n-torus of |P(e^{i theta})| by dense grid
/// plus coordinate-wise refinement.
double shift_norm_p2(const ShiftPolynomial& p, int grid_per_axis = 1024);

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
};

/// lower = max(torus sup, window ascent); upper = l1 coefficient bound.
Bracket shift_norm_bracket(const ShiftPolynomial& poly, double p, int window = 48,
                           int iterations = 60, int restarts = 6, uint64_t seed = 41);

struct WindowNormResult {
  double value = 0.0;   // ascent lower bound for the compressed operator norm
  VectorXcd arg_max;    // maximizing window vector
};

/// Operator p -> p norm of the convolution compressed to {-W..W}^n,
/// estimated by a duality-map power ascent with random and structured
/// restarts. Monotone objective; warm starts keep window sweeps monotone.
WindowNormResult truncated_window_norm(const ShiftPolynomial& poly, double p, int window,
                                       int iterations = 60, int restarts = 6, uint64_t seed = 41,
                                       const VectorXcd* warm_start = nullptr,
                                       int warm_window = 0);

/// Monotone window sweep (each window warm-started from the previous one).
std::vector<double> window_sweep(const ShiftPolynomial& poly, double p,
                                 const std::vector<int>& windows, int iterations = 60,
                                 int restarts = 6, uint64_t seed = 41);

/// Vector p -> p operator norm of a dense matrix: exact for p in {1, 2, inf},
/// duality-map ascent lower bound otherwise.
double matrix_pnorm(const MatrixXcd& a, double p, int iterations = 60, int restarts = 6,
                    uint64_t seed = 43);

struct PPolyRatioReport {
  std::vector<double> ratio_vs_lower;  // ||P(T)|| / bracket.lower
  std::vector<double> ratio_vs_upper;
  double k_lower = 0.0;  // max ratio against the upper bracket end
  double k_upper = 0.0;  // max ratio against the lower bracket end
  int maximizer = -1;
};

/// Candidate interval for the p-polynomial-boundedness constant of a tuple,
/// over a polynomial family (norms of P(T) measured in the vector p-norm).
PPolyRatioReport p_poly_ratio(const ops::CommutingTuple& tuple,
                              std::span<const ShiftPolynomial> family, double p);

/// Boundary-sampled sup of |P| over the n-fold product of the two-disc
/// domain D_theta.
double dtheta_sup(const ShiftPolynomial& poly, double theta, int samples_per_axis = 2048);

}  // namespace jcalc::shiftn
