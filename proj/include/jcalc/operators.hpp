#pragma once

#include <optional>
#include <vector>

#include "jcalc/common.hpp"
#include "jcalc/geometry.hpp"

namespace jcalc::ops {

/// Finite-dimensional stand-in for a bounded operator.
struct MatrixOperator {
  MatrixXcd entries;

  MatrixOperator() = default;
  explicit MatrixOperator(MatrixXcd m) : entries(std::move(m)) {
    if (entries.rows() != entries.cols()) throw PreconditionError("operator must be square");
    if (!entries.allFinite()) throw PreconditionError("operator entries must be finite");
  }
  int dim() const { return static_cast<int>(entries.rows()); }
  double norm() const { return operator_norm(entries); }
  bool is_diagonal() const;
};

struct CommutingTuple {
  std::vector<MatrixOperator> ops;
  double commutator_tol = 1e-10;

  int arity() const { return static_cast<int>(ops.size()); }
  int dim() const { return ops.empty() ? 0 : ops.front().dim(); }
};

struct SpectralData {
  std::vector<Complex> eigenvalues;
  MatrixXcd eigenvectors;
  double inverse_condition = 0.0;  // kappa(V)
  bool diagonalizable = false;
};

SpectralData spectrum(const MatrixOperator& T);

/// (lambda I - T)^{-1} with one step of iterative refinement; rejects results
/// whose residual ||(lambda I - T) R - I|| exceeds 1e-10.
MatrixOperator resolvent(const MatrixOperator& T, Complex lambda);

struct SamplingWindow {
  double radius_min = 1e-4;
  double radius_max = 3.0;
  int radial = 40;
  int angular = 64;
};

struct RittReport {
  double alpha_min = 0.0;
  bool alpha_at_bracket = false;
  double resolvent_constant = 0.0;   // sup |1-lambda| ||R(lambda,T)|| over the sampled window
  double far_field_bound = 0.0;      // Neumann bound for |lambda - 1| > window radius
  double power_sup = 0.0;            // sup_{n <= N} ||T^n||
  double diff_sup = 0.0;             // sup_{n <= N} n ||T^n - T^{n-1}||
  double diff_sup_half_window = 0.0; // same sup over n <= N/2, for stabilization
  double diff_slope = 0.0;           // least-squares slope of n||T^n - T^{n-1}|| on the window tail
  int power_window = 0;
  int samples = 0;
  bool spectrum_ok = false;
  bool stabilized = false;
  bool verdict = false;
};

struct SectorialReport {
  double omega_min = 0.0;
  double resolvent_constant = 0.0;  // sup |z| ||R(z,A)|| over the sampled window
  int samples = 0;
  bool spectrum_ok = false;
  bool verdict = false;
};

RittReport ritt_classify(const MatrixOperator& T, double beta, int boundary_samples = 2048,
                         int power_window = 2048);

SectorialReport sectorial_classify(const MatrixOperator& A, double nu, int samples = 2048,
                                   double r_min = 1e-6, double r_max = 1e6);

struct CommutingReport {
  double max_normalized_commutator = 0.0;
  bool pass = false;
};

CommutingReport verify_commuting(const CommutingTuple& tuple);

struct ErgodicDecomposition {
  MatrixXcd p_ker;  // projection onto Ker(I-T) along Ran(I-T)
  MatrixXcd p_ran;
  int kernel_rank = 0;
};

/// Mean-ergodic splitting; requires the eigenvalue 1 (if present) to be
/// semisimple. Throws NumericalError otherwise.
ErgodicDecomposition mean_ergodic_decompose(const MatrixOperator& T, double tol = 1e-9);

CommutingTuple scale_tuple(const CommutingTuple& tuple, double r);

/// Schur form reordered so the eigenvalues selected by `in_cluster` occupy the
/// leading block. Returns (Q, U) with A = Q U Q*.
std::pair<MatrixXcd, MatrixXcd> ordered_schur(const MatrixXcd& a,
                                              const std::function<bool(Complex)>& in_cluster);

}  // namespace jcalc::ops
