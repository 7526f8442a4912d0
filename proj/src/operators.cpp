#include "jcalc/operators.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace jcalc::ops {

bool MatrixOperator::is_diagonal() const {
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      if (i != j && entries(i, j) != Complex(0.0, 0.0)) return false;
  return true;
}

SpectralData spectrum(const MatrixOperator& T) {
  SpectralData out;
  if (T.is_diagonal()) {
    out.eigenvalues.resize(T.dim());
    for (int i = 0; i < T.dim(); ++i) out.eigenvalues[i] = T.entries(i, i);
    out.eigenvectors = MatrixXcd::Identity(T.dim(), T.dim());
    out.inverse_condition = 1.0;
    out.diagonalizable = true;
    return out;
  }
  Eigen::ComplexEigenSolver<MatrixXcd> es(T.entries, true);
  if (es.info() != Eigen::Success) throw NumericalError("spectrum: eigensolver failed");
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + T.dim());
  out.eigenvectors = es.eigenvectors();
  out.inverse_condition = condition_number(out.eigenvectors);
  out.diagonalizable = out.inverse_condition < 1e8;
  return out;
}

MatrixOperator resolvent(const MatrixOperator& T, Complex lambda) {
  const int n = T.dim();
  MatrixXcd shifted = lambda * MatrixXcd::Identity(n, n) - T.entries;
  Eigen::PartialPivLU<MatrixXcd> lu(shifted);
  MatrixXcd r = lu.solve(MatrixXcd::Identity(n, n));
  MatrixXcd residual = shifted * r - MatrixXcd::Identity(n, n);
  r -= lu.solve(residual);  // one refinement pass
  residual = shifted * r - MatrixXcd::Identity(n, n);
  if (operator_norm(residual) > 1e-10)
    throw NumericalError("resolvent: lambda too close to the spectrum");
  return MatrixOperator(std::move(r));
}

namespace {

double diag_resolvent_norm(const MatrixXcd& diag_op, Complex lambda) {
  double best = 0.0;
  for (int i = 0; i < diag_op.rows(); ++i)
    best = std::max(best, 1.0 / std::abs(lambda - diag_op(i, i)));
  return best;
}

double resolvent_norm(const MatrixOperator& T, Complex lambda, bool diagonal) {
  if (diagonal) return diag_resolvent_norm(T.entries, lambda);
  const int n = T.dim();
  MatrixXcd shifted = lambda * MatrixXcd::Identity(n, n) - T.entries;
  return 1.0 / Eigen::JacobiSVD<MatrixXcd>(shifted).singularValues()(n - 1);
}

struct PowerSweep {
  double power_sup = 0.0;
  double diff_sup = 0.0;
  double diff_sup_half = 0.0;
  double slope = 0.0;
};

PowerSweep power_sweep(const MatrixOperator& T, int window) {
  PowerSweep out;
  const bool diagonal = T.is_diagonal();
  const int n = T.dim();
  MatrixXcd power = MatrixXcd::Identity(n, n);
  MatrixXcd prev;
  // slope of k ||T^k - T^{k-1}|| fitted on the trailing half of the window
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int fit_count = 0;
  for (int k = 1; k <= window; ++k) {
    prev = power;
    if (diagonal) {
      for (int i = 0; i < n; ++i) power(i, i) *= T.entries(i, i);
    } else {
      power = T.entries * power;
    }
    double pn = diagonal ? power.diagonal().cwiseAbs().maxCoeff() : operator_norm(power);
    double dn = diagonal ? (power.diagonal() - prev.diagonal()).cwiseAbs().maxCoeff()
                         : operator_norm(power - prev);
    out.power_sup = std::max(out.power_sup, pn);
    double weighted = k * dn;
    out.diff_sup = std::max(out.diff_sup, weighted);
    if (k <= window / 2) out.diff_sup_half = std::max(out.diff_sup_half, weighted);
    if (k > window / 2) {
      sx += k; sy += weighted; sxx += double(k) * k; sxy += double(k) * weighted;
      ++fit_count;
    }
  }
  double denom = fit_count * sxx - sx * sx;
  out.slope = denom != 0.0 ? (fit_count * sxy - sx * sy) / denom : 0.0;
  return out;
}

}  // namespace

RittReport ritt_classify(const MatrixOperator& T, double beta, int boundary_samples,
                         int power_window) {
  if (!(beta > 0.0) || !(beta < kPi / 2)) throw PreconditionError("ritt_classify: bad beta");
  RittReport rep;
  rep.power_window = power_window;

  SpectralData sd = spectrum(T);
  auto angle = geom::minimal_stolz_angle(sd.eigenvalues);
  rep.alpha_min = angle.alpha;
  rep.alpha_at_bracket = angle.at_lower_bracket;
  rep.spectrum_ok = angle.ritt_compatible;
  if (!rep.spectrum_ok) {
    rep.verdict = false;
    return rep;
  }
  if (!(beta > rep.alpha_min))
    throw PreconditionError("ritt_classify: beta must exceed the spectral Stolz angle");

  // lambda sweep on circles around 1 covering |lambda - 1| <= 3, restricted to
  // the complement of closure(B_beta)
  const bool diagonal = T.is_diagonal();
  geom::StolzDomain domain(beta);
  SamplingWindow win;
  win.radial = std::max(8, boundary_samples / 64);
  win.angular = std::max(16, boundary_samples / win.radial);
  const double r_lo = std::log(1e-4), r_hi = std::log(3.0);
  for (int i = 0; i <= win.radial; ++i) {
    double r = std::exp(r_lo + (r_hi - r_lo) * i / win.radial);
    for (int j = 0; j < win.angular; ++j) {
      double phi = 2.0 * kPi * j / win.angular;
      Complex lambda = Complex(1.0, 0.0) + std::polar(r, phi);
      if (domain.contains_closure(lambda, 1e-9)) continue;
      double dist_spec = std::numeric_limits<double>::infinity();
      for (Complex ev : sd.eigenvalues) dist_spec = std::min(dist_spec, std::abs(lambda - ev));
      if (dist_spec < 1e-12) continue;
      double value = r * resolvent_norm(T, lambda, diagonal);
      rep.resolvent_constant = std::max(rep.resolvent_constant, value);
      ++rep.samples;
    }
  }
  // Neumann far field: |1-lambda| ||R|| <= (|lambda| + 1) / (|lambda| - ||T||)
  double tnorm = T.norm();
  double far_r = 1.0 + 3.0;  // |lambda| >= 4 - something; use |lambda| >= 3 - 1
  if (far_r > tnorm + 0.5) {
    rep.far_field_bound = (far_r + 1.0) / (far_r - tnorm);
  } else {
    rep.far_field_bound = std::numeric_limits<double>::infinity();
  }

  PowerSweep sweep = power_sweep(T, power_window);
  rep.power_sup = sweep.power_sup;
  rep.diff_sup = sweep.diff_sup;
  rep.diff_sup_half_window = sweep.diff_sup_half;
  rep.diff_slope = sweep.slope;
  rep.stabilized = std::abs(rep.diff_sup - rep.diff_sup_half_window) <=
                   1e-6 * std::max(1.0, rep.diff_sup);
  rep.verdict = rep.spectrum_ok && rep.alpha_min < kPi / 2 - 1e-9 && rep.stabilized &&
                std::isfinite(rep.power_sup) && std::isfinite(rep.diff_sup);
  return rep;
}

SectorialReport sectorial_classify(const MatrixOperator& A, double nu, int samples, double r_min,
                                   double r_max) {
  if (!(nu > 0.0) || !(nu < kPi)) throw PreconditionError("sectorial_classify: bad nu");
  SectorialReport rep;
  SpectralData sd = spectrum(A);
  geom::Sector sector(nu);
  rep.omega_min = 0.0;
  rep.spectrum_ok = true;
  for (Complex ev : sd.eigenvalues) {
    if (std::abs(ev) <= 1e-14) continue;  // 0 sits in every closed sector
    rep.omega_min = std::max(rep.omega_min, std::abs(std::arg(ev)));
  }
  if (rep.omega_min >= kPi - 1e-12) rep.spectrum_ok = false;
  if (rep.omega_min < 1e-9) rep.omega_min = 1e-9;  // 0+ bracket convention
  if (!rep.spectrum_ok || rep.omega_min >= nu) {
    rep.verdict = false;
    return rep;
  }

  const bool diagonal = A.is_diagonal();
  int radial = std::max(8, samples / 64);
  int angular = std::max(8, samples / radial);
  for (int i = 0; i <= radial; ++i) {
    double r = std::exp(std::log(r_min) + (std::log(r_max) - std::log(r_min)) * i / radial);
    for (int j = 0; j < angular; ++j) {
      // angles strictly outside the closed sector, both half-planes
      double frac = (j + 0.5) / angular;
      double phi = nu + 1e-6 + frac * (kPi - nu - 1e-6);
      for (double sign : {1.0, -1.0}) {
        Complex z = std::polar(r, sign * phi);
        double dist_spec = std::numeric_limits<double>::infinity();
        for (Complex ev : sd.eigenvalues) dist_spec = std::min(dist_spec, std::abs(z - ev));
        if (dist_spec < 1e-12) continue;
        double value = r * resolvent_norm(A, z, diagonal);
        rep.resolvent_constant = std::max(rep.resolvent_constant, value);
        ++rep.samples;
      }
    }
  }
  rep.verdict = rep.spectrum_ok && std::isfinite(rep.resolvent_constant);
  return rep;
}

CommutingReport verify_commuting(const CommutingTuple& tuple) {
  CommutingReport rep;
  const int n = tuple.arity();
  for (int i = 0; i < n; ++i)
    if (tuple.ops[i].dim() != tuple.dim())
      throw PreconditionError("verify_commuting: dimension mismatch");
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto& a = tuple.ops[i].entries;
      const auto& b = tuple.ops[j].entries;
      double na = operator_norm(a), nb = operator_norm(b);
      double c = operator_norm(a * b - b * a);
      double normalized = (na > 0 && nb > 0) ? c / (na * nb) : c;
      rep.max_normalized_commutator = std::max(rep.max_normalized_commutator, normalized);
    }
  }
  rep.pass = rep.max_normalized_commutator <= tuple.commutator_tol;
  return rep;
}

std::pair<MatrixXcd, MatrixXcd> ordered_schur(const MatrixXcd& a,
                                              const std::function<bool(Complex)>& in_cluster) {
  Eigen::ComplexSchur<MatrixXcd> schur(a, true);
  if (schur.info() != Eigen::Success) throw NumericalError("ordered_schur: factorization failed");
  MatrixXcd u = schur.matrixT();
  MatrixXcd q = schur.matrixU();
  const int n = static_cast<int>(a.rows());
  // bubble cluster eigenvalues to the top-left with unitary adjacent swaps
  for (int target = 0; target < n; ++target) {
    int src = -1;
    for (int k = target; k < n; ++k) {
      if (in_cluster(u(k, k))) {
        src = k;
        break;
      }
    }
    if (src < 0) break;
    for (int k = src; k > target; --k) {
      // swap diagonal entries (k-1, k) of the triangular factor
      Complex t11 = u(k - 1, k - 1), t12 = u(k - 1, k), t22 = u(k, k);
      // Givens rotation zeroing the second component of [t12, t22 - t11]
      double x_norm = std::hypot(std::abs(t12), std::abs(t22 - t11));
      if (x_norm < 1e-300) continue;  // identical eigenvalues; nothing to do
      Complex c_ = t12 / x_norm;
      Complex s_ = (t22 - t11) / x_norm;
      MatrixXcd g = MatrixXcd::Identity(n, n);
      g(k - 1, k - 1) = std::conj(c_);
      g(k - 1, k) = std::conj(s_);
      g(k, k - 1) = -s_;
      g(k, k) = c_;
      u = g * u * g.adjoint();
      q = q * g.adjoint();
      u(k, k - 1) = Complex(0.0, 0.0);  // clear rounding residue below the diagonal
    }
  }
  return {q, u};
}

ErgodicDecomposition mean_ergodic_decompose(const MatrixOperator& T, double tol) {
  const int n = T.dim();
  const double scale = std::max(1.0, T.norm());
  auto near_one = [&](Complex ev) { return std::abs(ev - Complex(1.0, 0.0)) <= tol * scale; };
  auto [q, u] = ordered_schur(T.entries, near_one);
  int k = 0;
  while (k < n && near_one(u(k, k))) ++k;
  ErgodicDecomposition out;
  out.kernel_rank = k;
  if (k == 0) {
    out.p_ker = MatrixXcd::Zero(n, n);
    out.p_ran = MatrixXcd::Identity(n, n);
    return out;
  }
  MatrixXcd u11 = u.topLeftCorner(k, k);
  if (operator_norm(u11 - MatrixXcd::Identity(k, k)) > 1e-8 * scale)
    throw NumericalError("mean_ergodic_decompose: eigenvalue 1 is not semisimple");
  if (k == n) {
    out.p_ker = MatrixXcd::Identity(n, n);
    out.p_ran = MatrixXcd::Zero(n, n);
    return out;
  }
  // spectral projection: P = Q [I X; 0 0] Q* with X - X U22 = U12
  MatrixXcd u12 = u.topRightCorner(k, n - k);
  MatrixXcd u22 = u.bottomRightCorner(n - k, n - k);
  MatrixXcd rhs = u12.transpose();  // solve (I - U22)^T X^T = U12^T
  MatrixXcd lhs = (MatrixXcd::Identity(n - k, n - k) - u22).transpose();
  MatrixXcd x = lhs.partialPivLu().solve(rhs).transpose();
  MatrixXcd p = MatrixXcd::Zero(n, n);
  p.topLeftCorner(k, k) = MatrixXcd::Identity(k, k);
  p.topRightCorner(k, n - k) = x;
  out.p_ker = q * p * q.adjoint();
  out.p_ran = MatrixXcd::Identity(n, n) - out.p_ker;
  // sanity: idempotent and T-invariant
  if (operator_norm(out.p_ker * out.p_ker - out.p_ker) > 1e-10 * std::max(1.0, operator_norm(out.p_ker)) ||
      operator_norm(T.entries * out.p_ker - out.p_ker) > 1e-8 * scale)
    throw NumericalError("mean_ergodic_decompose: projection validation failed");
  return out;
}

CommutingTuple scale_tuple(const CommutingTuple& tuple, double r) {
  if (!(r > 0.0) || !(r < 1.0)) throw PreconditionError("scale_tuple: r must lie in (0,1)");
  CommutingTuple out = tuple;
  for (auto& op : out.ops) op.entries *= r;
  return out;
}

}  // namespace jcalc::ops
