#pragma once

#include <vector>

#include "jcalc/common.hpp"
#include "jcalc/operators.hpp"

namespace jcalc::rad {

/// Sign-pattern source for Rademacher averages: exact 2^K enumeration up to
/// K = 14 levels, seeded Monte Carlo beyond.
struct SignEnumeration {
  enum class Mode { Exact, MonteCarlo };
  Mode mode = Mode::Exact;
  uint64_t seed = 17;
  int samples = 8192;
  bool hilbert_shortcut = true;  // use the Pythagorean formula at p = 2, q = 2

  static constexpr int kExactMax = 14;
};

/// (E || sum_k eps_k x_k ||_base^p)^{1/p}; the ambient base norm is
/// Schatten-q of the entries (q = 2 is Frobenius, i.e. Euclidean for column
/// vectors).
double rad_norm(std::span<const MatrixXcd> xs, double p, const SignEnumeration& en,
                double base_q = 2.0);

struct RBoundEstimate {
  double lower_bound = 0.0;   // certified lower bound for the R-bound constant
  int best_length = 0;
  bool exact_singleton = false;  // singleton search hit the top singular pair
};

/// Lower bound for the R-boundedness constant of a finite family: maximize
/// rad(T_k x_k) / rad(x_k) over sampled finite sequences (repetition allowed)
/// and structured singleton candidates. Never an upper bound.
RBoundEstimate r_bounded_constant(std::span<const ops::MatrixOperator> family, int trials,
                                  const SignEnumeration& en, double p = 2.0, double base_q = 2.0,
                                  int max_length = 6, uint64_t seed = 29);

struct RRittEstimate {
  double lower_bound = 0.0;
  int lambda_count = 0;
};

/// Sampled R-Ritt diagnostic: r_bounded_constant over resolvent families
/// {(1-lambda) R(lambda, T)} with lambda outside closure(B_beta).
RRittEstimate r_ritt_sample(const ops::MatrixOperator& T, double beta, int lambda_samples,
                            const SignEnumeration& en, int trials = 64, uint64_t seed = 31);

struct PropertyAnReport {
  double c_estimate = 0.0;      // max sampled ratio
  double worst_ratio = 0.0;
  double norm_identity_error = 0.0;  // enumeration vs Pythagorean tensor norm
  int trials = 0;
};

/// Finite-sample test of the multilinear pairing inequality on C^d: ratio of
/// |sum alpha <x, x*>| to sup|alpha| times the two tensor Rademacher norms.
PropertyAnReport property_an_test(int d, int n, int k, int trials, const SignEnumeration& en,
                                  uint64_t seed = 37);

/// L^2(Omega^n, C^d) norm of sum over multi-indices of tensor-sign terms,
/// by explicit enumeration over the n * k sign levels.
double tensor_rad_norm_enumerated(const std::vector<VectorXcd>& entries, int n, int k);

}  // namespace jcalc::rad
