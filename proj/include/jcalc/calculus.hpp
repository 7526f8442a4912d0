#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "jcalc/common.hpp"
#include "jcalc/geometry.hpp"
#include "jcalc/operators.hpp"
#include "jcalc/symbols.hpp"

namespace jcalc::fc {

struct QuadratureOptions {
  int nodes_per_panel = 12;
  int corner_levels = 6;
  double refine_target = 1e-9;   // agreement between successive refinements
  int max_refine_rounds = 3;
  double sector_tail = 1e-11;
  double sector_nodes_per_unit_t = 22.0;
  bool check_angles = false;     // recompute at perturbed contour angles
  double angle_perturbation = 0.05;
};

struct CalculusRequest {
  ops::CommutingTuple tuple;
  sym::Symbol symbol;
  std::vector<double> contour_angles;  // beta_i (Ritt) or nu_i (sectorial)
  std::vector<double> domain_angles;   // gamma_i (Ritt) or theta_i (sectorial)
  QuadratureOptions quadrature;
};

struct CalcResult {
  ops::MatrixOperator value;
  double refine_delta = 0.0;       // relative change under the last refinement
  double angle_delta = 0.0;        // change under contour-angle perturbation (if checked)
  std::vector<int> node_counts;    // per variable
  std::vector<double> angles_used; // possibly widened from the request
};

/// Joint Ritt calculus: (1/2pi i)^n contour integral of
/// phi(lambda) prod R(lambda_i, T_i) over the product of Stolz boundaries.
CalcResult calc_ritt(const CalculusRequest& req);

/// Joint sectorial calculus over truncated sector boundaries.
CalcResult calc_sectorial(const CalculusRequest& req);

/// Exact multivariate Horner evaluation of a polynomial in a commuting tuple.
ops::MatrixOperator poly_eval(const sym::Symbol& poly, const ops::CommutingTuple& tuple);

struct JointDiagonalization {
  MatrixXcd v;
  MatrixXcd v_inv;
  std::vector<std::vector<Complex>> eigenvalues;  // [operator][k]
  double condition = 0.0;
};

/// Common eigenbasis from a seeded random linear combination of the tuple.
JointDiagonalization joint_diagonalize(const ops::CommutingTuple& tuple, uint64_t seed = 11,
                                       double offdiag_tol = 1e-8);

/// Ground-truth route: V diag(f(joint eigenvalues)) V^{-1}.
ops::MatrixOperator spectral_oracle(const sym::Symbol& symbol, const ops::CommutingTuple& tuple,
                                    uint64_t seed = 11);

/// Extended-class evaluation: top term + lower-arity terms on sub-tuples + cI.
CalcResult calc_extended(const sym::ExtendedSymbol& esym, const CalculusRequest& base_request);

struct LimitCheckReport {
  std::vector<double> r_grid;
  std::vector<double> deviations;  // ||phi(rT) - phi(T)||
  bool monotone_ish = false;
  bool pass = false;
  double final_deviation = 0.0;
};

LimitCheckReport limit_check_r_to_1(const CalculusRequest& req, std::vector<double> r_grid,
                                    double final_tol = 1e-6);

struct SectorialApproxResult {
  ops::MatrixOperator a_eps;
  double deviation = 0.0;  // ||f(A_eps) - f(A)||
};

/// A_eps = (A + eps I)(I + eps A)^{-1} and the calculus deviation for f.
SectorialApproxResult sectorial_approximation(const ops::MatrixOperator& a, double eps,
                                              const sym::Symbol& f, double nu, double theta,
                                              const QuadratureOptions& opts = {});

struct ApproxSweepReport {
  std::vector<double> eps_grid;
  std::vector<double> deviations;
  bool monotone_decreasing = false;
  bool pass = false;  // monotone and final < 1e-6
};

ApproxSweepReport sectorial_approximation_sweep(const ops::MatrixOperator& a,
                                                const sym::Symbol& f, double nu, double theta,
                                                std::vector<double> eps_grid = {1e-1, 1e-2, 1e-3,
                                                                                1e-4, 1e-5, 1e-6},
                                                const QuadratureOptions& opts = {});

struct BoundEstimate {
  double k_est = 0.0;
  int maximizer = -1;
  std::vector<double> ratios;
};

enum class CalcMode { Ritt, Sectorial };

/// max over the family of ||phi(T)|| / sup_norm(phi, domain). Polynomial
/// symbols without certificates are evaluated exactly; certified symbols go
/// through the contour calculus.
BoundEstimate calculus_bound_estimate(const ops::CommutingTuple& tuple,
                                      std::span<const sym::Symbol> family,
                                      std::span<const sym::SpectralDomain> domains, CalcMode mode,
                                      const std::vector<double>& contour_angles,
                                      const std::vector<double>& domain_angles,
                                      const QuadratureOptions& opts = {}, int sup_samples = 400);

}  // namespace jcalc::fc
