#pragma once

#include <array>
#include <vector>

#include "jcalc/calculus.hpp"
#include "jcalc/common.hpp"
#include "jcalc/geometry.hpp"
#include "jcalc/operators.hpp"
#include "jcalc/symbols.hpp"

namespace jcalc::transfer {

/// Contour apparatus for one symbol phi in H0-inf of prod B_{gamma_i}:
/// per-variable teardrop boundaries of Delta_{beta_i} split into the two
/// straight segments through 0 (gamma1) and the arc around 1 (gamma2), plus
/// the weighted values of f(z) = phi(1 - z) on the tensor node grid.
struct TransferContext {
  int n = 1;
  std::vector<double> gamma;
  std::vector<double> beta;
  double theta = 0.0;  // sector half-angle for the auxiliary function
  sym::Symbol phi;     // Stolz-side symbol, StolzType certificate
  sym::Symbol f;       // Delta-side pullback, |f| <= c1 prod |z_i|^s
  double c1 = 1.0;
  double s = 1.0;

  std::vector<geom::Contour> full;  // gamma1 nodes first, then gamma2
  std::vector<int> split;           // first gamma2 node index per variable
  std::vector<int> total;
  std::vector<Complex> wf;          // flattened weight * f tensor, row-major

  Complex wf_at(std::span<const int> idx) const;
};

TransferContext build_transfer_context(const sym::Symbol& phi, std::vector<double> gamma,
                                       std::vector<double> beta, double theta,
                                       int nodes_per_panel = 12, int corner_levels = 6);

/// f_{j_1...j_n}(z): iterated Cauchy integral of f over the selected teardrop
/// pieces (j_i = 1 segments, j_i = 2 arc). Valid for z off the contours.
Complex eval_piece(const TransferContext& ctx, std::span<const int> piece_index,
                   std::span<const Complex> z);

/// Auxiliary function g(z) = sum of the substituted pieces F_{j_1...j_n}(z).
Complex eval_g(const TransferContext& ctx, std::span<const Complex> z);

/// g on a tensor grid (n == 2), via one matrix triple product.
MatrixXcd eval_g_grid(const TransferContext& ctx, const std::vector<Complex>& a,
                      const std::vector<Complex>& b);

/// |f(z) - sum of all 2^n pieces| at an interior point of prod Delta_{beta_i}.
double cauchy_residual(const TransferContext& ctx, std::span<const Complex> z);

struct GDecayRegime {
  std::array<bool, 2> small{true, true};  // per variable: small (|z|<1/4) vs large (|z|>4)
  double ratio = 0.0;          // max |g| / prod min(|z_i|^s, |z_i|^{-1})
  double ratio_refined = 0.0;  // same on a doubled grid
  bool stabilized = false;
};

struct GDecayReport {
  std::vector<GDecayRegime> regimes;
  bool pass = false;
};

/// Decay of g in the 2^n small/large regimes on log-spaced sector grids.
GDecayReport check_g_decay(const TransferContext& ctx, int points_per_decade = 40,
                           double stabilization_tol = 0.05);

struct GSupnormReport {
  std::vector<double> ratios;          // per symbol: sup|g| / sup|f|
  std::vector<double> ratios_refined;  // doubled sampling density
  double max_ratio = 0.0;
  double max_ratio_refined = 0.0;
  double relative_change = 0.0;
  bool pass = false;
};

/// Lemma-style uniform control: the ratio sup|g| / sup|f| over a family of
/// certified symbols, sampled on distinguished boundaries, with a
/// density-doubling stabilization check (estimates the constant K).
GSupnormReport check_g_supnorm(std::span<const sym::Symbol> phis, std::vector<double> gamma,
                               std::vector<double> beta, double theta, int samples = 200,
                               double stabilization_tol = 0.02);

struct ForwardReport {
  double mismatch = 0.0;     // ||f(A) - phi(T)||
  double f_of_a_norm = 0.0;
  bool pass = false;         // mismatch <= 1e-7 (1 + ||f(A)||)
};

/// Forward direction: f certified on prod Sigma_{gamma_i}; A_i = I - T_i;
/// compares calc_sectorial(f, A) against calc_ritt(pullback f, T).
ForwardReport transfer_forward(const sym::Symbol& f_sector, const ops::CommutingTuple& T,
                               const std::vector<double>& gamma,
                               const fc::QuadratureOptions& opts = {});

struct ReverseReport {
  ops::MatrixOperator assembled;
  double mismatch = 0.0;            // ||assembled - phi(T)||
  double phi_of_t_norm = 0.0;
  double cauchy_residual_max = 0.0; // over sampled interior points
  bool pass = false;                // mismatch <= 1e-6 (1 + ||phi(T)||)
};

/// Reverse direction at n = 2: the operator pieces f_{i,j}(A_1, A_2) built
/// from the auxiliary functions and Dunford arc integrals, summed and
/// compared against the direct Ritt calculus of phi on T_i = I - A_i.
ReverseReport assemble_reverse_n2(const TransferContext& ctx, const ops::MatrixOperator& a1,
                                  const ops::MatrixOperator& a2,
                                  const fc::QuadratureOptions& opts = {},
                                  int cauchy_samples = 100, uint64_t seed = 23);

}  // namespace jcalc::transfer
