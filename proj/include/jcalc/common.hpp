#pragma once

#include <complex>
#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace jcalc {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kMembershipTol = 1e-12;

/// Violated input contract (bad angles, dimension mismatch, pole on spectrum, ...).
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A computation that ran but failed its numerical quality gate.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline Complex random_unit_disc(Rng& rng) {
  // rejection-free polar sample, uniform in area
  double r = std::sqrt(uniform(rng, 0.0, 1.0));
  double phi = uniform(rng, 0.0, 2.0 * kPi);
  return std::polar(r, phi);
}

inline MatrixXcd random_matrix(Rng& rng, int n) {
  MatrixXcd m(n, n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

/// Largest singular value.
double operator_norm(const MatrixXcd& m);

/// Schatten-q norm of the singular value vector; q = inf -> operator norm.
double schatten_norm(const MatrixXcd& m, double q);

/// Condition number estimate via extreme singular values.
double condition_number(const MatrixXcd& m);

// ---------------------------------------------------------------------------
// Gauss-Legendre rules (Newton iteration on Legendre polynomials, cached).

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

const GaussLegendre& gauss_legendre(int n);

// ---------------------------------------------------------------------------
// Bounded scalar minimization (Brent: golden section + parabolic steps).

struct BrentResult {
  double x;
  double value;
};

template <class F>
BrentResult brent_minimize(F&& f, double a, double b, double tol = 1e-13, int max_iter = 200) {
  const double gold = 0.3819660112501051;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    double m = 0.5 * (a + b);
    double tol1 = tol * std::abs(x) + 1e-15;
    double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      double etmp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etmp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (m > x) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = gold * e;
    }
    double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0) ? tol1 : -tol1);
    double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw; w = x; fw = fx; x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) { v = w; fv = fw; w = u; fw = fu; }
      else if (fu <= fv || v == x || v == w) { v = u; fv = fu; }
    }
  }
  return {x, fx};
}

}  // namespace jcalc
