#include "jcalc/dilation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace jcalc::dil {

RadVector RadVector::shifted(int m) const {
  RadVector out(base_dim, levels_k);
  for (int k = -levels_k; k <= levels_k; ++k) {
    int src = k + m;
    if (src >= -levels_k && src <= levels_k) out.level(k) = level(src);
  }
  return out;
}

MatrixXcd matrix_sqrt(const MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::ComplexEigenSolver<MatrixXcd> es(a, true);
  if (es.info() == Eigen::Success && condition_number(es.eigenvectors()) < 1e8) {
    VectorXcd d(n);
    for (int i = 0; i < n; ++i) {
      Complex ev = es.eigenvalues()(i);
      if (ev.real() < 0.0 && std::abs(ev.imag()) < 1e-14 * std::abs(ev.real()))
        throw PreconditionError("matrix_sqrt: spectrum touches the branch cut");
      d(i) = std::sqrt(ev);
    }
    MatrixXcd v = es.eigenvectors();
    return v * d.asDiagonal() * v.partialPivLu().solve(MatrixXcd::Identity(n, n));
  }
  // Schur triangular recurrence (Bjorck-Hammarling)
  Eigen::ComplexSchur<MatrixXcd> schur(a, true);
  if (schur.info() != Eigen::Success) throw NumericalError("matrix_sqrt: Schur failed");
  const MatrixXcd& u = schur.matrixT();
  MatrixXcd s = MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Complex ev = u(i, i);
    if (ev.real() < 0.0 && std::abs(ev.imag()) < 1e-14 * std::abs(ev.real()))
      throw PreconditionError("matrix_sqrt: spectrum touches the branch cut");
    s(i, i) = std::sqrt(ev);
  }
  for (int diag = 1; diag < n; ++diag) {
    for (int i = 0; i + diag < n; ++i) {
      int j = i + diag;
      Complex acc = u(i, j);
      for (int k = i + 1; k < j; ++k) acc -= s(i, k) * s(k, j);
      Complex denom = s(i, i) + s(j, j);
      if (std::abs(denom) < 1e-300) throw NumericalError("matrix_sqrt: confluent zero diagonal");
      s(i, j) = acc / denom;
    }
  }
  return schur.matrixU() * s * schur.matrixU().adjoint();
}

MatrixXcd principal_sqrt_I_minus_T(const ops::MatrixOperator& T) {
  const int n = T.dim();
  const MatrixXcd eye = MatrixXcd::Identity(n, n);
  auto sd = ops::spectrum(T);
  bool has_one = false;
  for (Complex ev : sd.eigenvalues) {
    Complex mu = Complex(1.0, 0.0) - ev;  // eigenvalue of I - T
    if (std::abs(mu) <= 1e-9 * std::max(1.0, T.norm())) {
      has_one = true;
      continue;
    }
    if (mu.real() < 0.0 && std::abs(mu.imag()) < 1e-14 * std::abs(mu.real()))
      throw PreconditionError("principal_sqrt_I_minus_T: sigma(I-T) meets (-inf, 0]");
  }
  if (!has_one) return matrix_sqrt(eye - T.entries);
  // project out the semisimple kernel of I - T, take the root on the range
  auto split = ops::mean_ergodic_decompose(T);
  // sqrt of (I - T) + P_ker is invertible and commutes with the projections;
  // removing P_ker afterwards leaves the root supported on Ran(I - T)
  MatrixXcd shifted = eye - T.entries + split.p_ker;
  MatrixXcd root = matrix_sqrt(shifted);
  return root * split.p_ran;
}

namespace {

MatrixXcd fractional_power_i_minus_t(const ops::MatrixOperator& T, double alpha) {
  if (alpha == 1.0) return MatrixXcd::Identity(T.dim(), T.dim()) - T.entries;
  if (alpha == 0.5) return principal_sqrt_I_minus_T(T);
  const int n = T.dim();
  auto sd = ops::spectrum(T);
  if (!sd.diagonalizable)
    throw NumericalError("fractional power: defective matrix, alpha not in {1/2, 1}");
  VectorXcd d(n);
  for (int i = 0; i < n; ++i) {
    Complex mu = Complex(1.0, 0.0) - sd.eigenvalues[i];
    d(i) = std::abs(mu) <= 1e-12 ? Complex(0.0, 0.0) : std::pow(mu, alpha);
  }
  return sd.eigenvectors * d.asDiagonal() *
         sd.eigenvectors.partialPivLu().solve(MatrixXcd::Identity(n, n));
}

}  // namespace

SquareFunctionResult square_function_norm(const ops::MatrixOperator& T, const VectorXcd& x,
                                          double alpha, int K) {
  if (!(alpha > 0.0)) throw PreconditionError("square_function_norm: alpha must be positive");
  if (x.size() != T.dim()) throw PreconditionError("square_function_norm: dimension mismatch");
  SquareFunctionResult out;
  auto sd = ops::spectrum(T);
  double scale = std::max(1.0, T.norm());
  for (Complex ev : sd.eigenvalues)
    if (std::abs(ev - Complex(1.0, 0.0)) > 1e-9 * scale)
      out.spectral_radius_ran = std::max(out.spectral_radius_ran, std::abs(ev));
  MatrixXcd g = fractional_power_i_minus_t(T, alpha);
  VectorXcd y = g * x;
  double acc = 0.0;
  for (int k = 0; k <= K; ++k) {
    double w = std::pow(k + 1.0, 2.0 * alpha - 1.0);
    acc += w * y.squaredNorm();
    y = T.entries * y;
  }
  out.value = std::sqrt(acc);
  out.convergent = out.spectral_radius_ran < 1.0 - 1e-12;
  if (out.convergent) {
    double tail = 0.0;
    for (int k = K + 1; k <= 16 * (K + 1) + 4096; ++k) {
      double term = std::pow(k + 1.0, 2.0 * alpha - 1.0) * y.squaredNorm();
      tail += term;
      y = T.entries * y;
      if (term < 1e-300) break;
    }
    out.tail_bound = std::sqrt(tail);
  } else {
    out.tail_bound = std::numeric_limits<double>::infinity();
  }
  return out;
}

VectorXcd DilationSystem::apply_u(const VectorXcd& v, int m) const {
  VectorXcd out = VectorXcd::Zero(big_dim);
  out.head(dim) = v.head(dim);  // identity on the direct summand
  for (int k = -K; k <= K; ++k) {
    int src = k + m;
    if (src < -K || src > K) continue;
    out.segment(level_offset(k), dim) = v.segment(level_offset(src), dim);
  }
  return out;
}

MatrixXcd DilationSystem::q_u_j1(int m) const {
  MatrixXcd out(dim, dim);
  for (int c = 0; c < dim; ++c) {
    VectorXcd e = VectorXcd::Zero(dim);
    e(c) = 1.0;
    out.col(c) = apply_q(apply_u(j1_map * e, m));
  }
  return out;
}

DilationSystem build_dilation(const ops::MatrixOperator& T, int K) {
  if (K < 1) throw PreconditionError("build_dilation: K >= 1 required");
  DilationSystem sys;
  sys.T = T;
  sys.K = K;
  sys.dim = T.dim();
  sys.big_dim = sys.dim * (2 * K + 2);

  auto sd = ops::spectrum(T);
  double scale = std::max(1.0, T.norm());
  for (Complex ev : sd.eigenvalues) {
    if (std::abs(ev + Complex(1.0, 0.0)) <= 1e-9 * scale)
      throw PreconditionError("build_dilation: -1 in the spectrum, Theta not invertible");
    if (std::abs(ev - Complex(1.0, 0.0)) > 1e-9 * scale)
      sys.rho_ran = std::max(sys.rho_ran, std::abs(ev));
  }
  auto angle = geom::minimal_stolz_angle(sd.eigenvalues);
  if (!angle.ritt_compatible) throw PreconditionError("build_dilation: T is not Ritt");
  double beta = 0.5 * (angle.alpha + kPi / 2);
  auto ritt = ops::ritt_classify(T, beta, 1024, 1024);
  if (!ritt.verdict) throw PreconditionError("build_dilation: Ritt classification failed");
  sys.power_sup = std::max(1.0, ritt.power_sup);

  auto split = ops::mean_ergodic_decompose(T);  // throws if 1 not semisimple
  sys.p_ker = split.p_ker;
  sys.p_ran = split.p_ran;
  sys.sqrt_i_minus_t = principal_sqrt_I_minus_T(T);
  const MatrixXcd eye = MatrixXcd::Identity(sys.dim, sys.dim);
  sys.theta = sys.p_ker + (eye + T.entries) * sys.p_ran;

  sys.j_map = MatrixXcd::Zero(sys.big_dim, sys.dim);
  sys.jtilde_map = MatrixXcd::Zero(sys.big_dim, sys.dim);
  sys.j_map.topRows(sys.dim) = sys.p_ker;
  sys.jtilde_map.topRows(sys.dim) = sys.p_ker.adjoint();
  MatrixXcd m_k = sys.sqrt_i_minus_t * sys.p_ran;  // T^k sqrt(I-T) P_ran, k = 0
  for (int k = 0; k <= K; ++k) {
    sys.j_map.middleRows(sys.level_offset(k), sys.dim) = m_k;
    sys.jtilde_map.middleRows(sys.level_offset(k), sys.dim) = m_k.adjoint();
    m_k = T.entries * m_k;
  }
  sys.j1_map = sys.j_map * sys.theta;
  return sys;
}

DilationReport verify_dilation(const DilationSystem& sys, int m_max, int trials, uint64_t seed) {
  if (m_max > sys.K) throw PreconditionError("verify_dilation: m_max must not exceed K");
  DilationReport rep;
  const int d = sys.dim;
  const double eps = std::numeric_limits<double>::epsilon();
  rep.numerical_floor =
      64.0 * eps * (sys.K + 1.0) * sys.power_sup * sys.power_sup * std::sqrt(double(d));

  // exact deficit operators T^{2K-m+2} P_ran
  std::vector<MatrixXcd> deficits(m_max + 1);
  {
    // T^{2K+2-m_max} by binary exponentiation, then multiply up
    MatrixXcd base = MatrixXcd::Identity(d, d);
    MatrixXcd sq = sys.T.entries;
    long e = 2L * sys.K + 2 - m_max;
    while (e > 0) {
      if (e & 1) base = base * sq;
      sq = sq * sq;
      e >>= 1;
    }
    for (int m = m_max; m >= 0; --m) {
      deficits[m] = base * sys.p_ran;
      if (m > 0) base = sys.T.entries * base;
    }
  }

  Rng rng(seed);
  MatrixXcd t_power = MatrixXcd::Identity(d, d);
  for (int m = 0; m <= m_max; ++m) {
    DilationCheck chk;
    chk.m = m;
    MatrixXcd quj = sys.q_u_j1(m);
    chk.observed = operator_norm(t_power - quj);
    chk.identity_residual = operator_norm(t_power - quj - deficits[m]);
    chk.tail = operator_norm(deficits[m]) + rep.numerical_floor;

    for (int t = 0; t < trials; ++t) {
      VectorXcd x(d), y(d);
      std::normal_distribution<double> g(0.0, 1.0);
      for (int i = 0; i < d; ++i) {
        x(i) = Complex(g(rng), g(rng));
        y(i) = Complex(g(rng), g(rng));
      }
      // <U^m J1 x, Jtilde y> = <x0, y0> + <T^m x1, y1>
      VectorXcd lhs_vec = sys.apply_u(sys.j1_map * x, m);
      Complex lhs = (sys.jtilde_map * y).dot(lhs_vec);
      VectorXcd x0 = sys.p_ker * x, x1 = sys.p_ran * x;
      VectorXcd y0 = sys.p_ker.adjoint() * y, y1 = sys.p_ran.adjoint() * y;
      Complex rhs = y0.dot(x0) + y1.dot(t_power * x1);
      double res = std::abs(lhs - rhs) / (1.0 + x.norm() * y.norm());
      chk.pairing_residual = std::max(chk.pairing_residual, res);
    }
    chk.pass = chk.observed <= chk.tail &&
               chk.identity_residual <= rep.numerical_floor &&
               chk.pairing_residual <= chk.tail;
    rep.checks.push_back(chk);
    t_power = sys.T.entries * t_power;
  }
  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                         [](const DilationCheck& c) { return c.pass; });
  return rep;
}

IntertwineReport intertwine_check(const DilationSystem& sys, const ops::MatrixOperator& S) {
  if (S.dim() != sys.dim) throw PreconditionError("intertwine_check: dimension mismatch");
  double comm = operator_norm(S.entries * sys.T.entries - sys.T.entries * S.entries);
  if (comm > 1e-10 * std::max(1.0, S.norm() * sys.T.norm()))
    throw PreconditionError("intertwine_check: S does not commute with T");
  IntertwineReport rep;
  rep.s_norm = S.norm();
  MatrixXcd lhs = sys.j1_map * S.entries;
  MatrixXcd rhs(sys.big_dim, sys.dim);
  rhs.topRows(sys.dim) = S.entries * sys.j1_map.topRows(sys.dim);
  for (int k = -sys.K; k <= sys.K; ++k)
    rhs.middleRows(sys.level_offset(k), sys.dim) =
        S.entries * sys.j1_map.middleRows(sys.level_offset(k), sys.dim);
  rep.mismatch = operator_norm(lhs - rhs);
  rep.pass = rep.mismatch <= 1e-8 * std::max(1.0, rep.s_norm);
  return rep;
}

JointDilation::JointDilation(const ops::CommutingTuple& tuple, int K, long dim_cap) {
  if (tuple.arity() < 1) throw PreconditionError("joint_dilation: empty tuple");
  auto comm = ops::verify_commuting(tuple);
  if (!comm.pass) throw PreconditionError("joint_dilation: tuple is not commuting");
  arity_ = tuple.arity();
  base_dim_ = tuple.dim();
  levels_ = K;
  head_ = build_dilation(tuple.ops.front(), K);
  if (arity_ > 1) {
    ops::CommutingTuple rest;
    rest.ops.assign(tuple.ops.begin() + 1, tuple.ops.end());
    rest.commutator_tol = tuple.commutator_tol;
    rest_ = std::make_unique<JointDilation>(rest, K, dim_cap);
    big_dim_ = static_cast<long>(2 * K + 2) * rest_->big_dim();
  } else {
    big_dim_ = head_.big_dim;
  }
  if (big_dim_ > dim_cap)
    throw PreconditionError("joint_dilation: memory budget exceeded, dimension " +
                            std::to_string(big_dim_));
}

VectorXcd JointDilation::apply_j(const VectorXcd& x) const {
  VectorXcd head_image = head_.j1_map * x;  // (2K+2) base slots
  if (!rest_) return head_image;
  const long slot = rest_->big_dim();
  VectorXcd out = VectorXcd::Zero(big_dim_);
  for (int s = 0; s < 2 * levels_ + 2; ++s)
    out.segment(static_cast<long>(s) * slot, slot) =
        rest_->apply_j(head_image.segment(static_cast<long>(s) * base_dim_, base_dim_));
  return out;
}

VectorXcd JointDilation::apply_q(const VectorXcd& v) const {
  if (!rest_) return head_.apply_q(v);
  const long slot = rest_->big_dim();
  VectorXcd collapsed(static_cast<long>(2 * levels_ + 2) * base_dim_);
  for (int s = 0; s < 2 * levels_ + 2; ++s)
    collapsed.segment(static_cast<long>(s) * base_dim_, base_dim_) =
        rest_->apply_q(v.segment(static_cast<long>(s) * slot, slot));
  return head_.apply_q(collapsed);
}

VectorXcd JointDilation::apply_u(int j, const VectorXcd& v, int power) const {
  if (power == 0) return v;
  if (!rest_) {
    if (j != 0) throw PreconditionError("joint_dilation: shift index out of range");
    return head_.apply_u(v, power);
  }
  const long slot = rest_->big_dim();
  if (j == 0) {
    // permute the Rademacher slots; slot 0 is the direct summand
    VectorXcd out = VectorXcd::Zero(big_dim_);
    out.segment(0, slot) = v.segment(0, slot);
    for (int k = -levels_; k <= levels_; ++k) {
      int src = k + power;
      if (src < -levels_ || src > levels_) continue;
      out.segment(static_cast<long>(1 + k + levels_) * slot, slot) =
          v.segment(static_cast<long>(1 + src + levels_) * slot, slot);
    }
    return out;
  }
  VectorXcd out(big_dim_);
  for (int s = 0; s < 2 * levels_ + 2; ++s)
    out.segment(static_cast<long>(s) * slot, slot) =
        rest_->apply_u(j - 1, v.segment(static_cast<long>(s) * slot, slot), power);
  return out;
}

JointDilationReport verify_joint_dilation(const JointDilation& jd,
                                          const ops::CommutingTuple& tuple, int index_budget,
                                          int trials, uint64_t seed) {
  const int n = tuple.arity();
  const int d = tuple.dim();
  const int K = jd.levels();
  if (index_budget > K) throw PreconditionError("verify_joint_dilation: budget exceeds K");
  JointDilationReport rep;

  // powers T_j^i for i <= budget and deficit norms ||T_j^{2K-i+2} P_ran_j||
  std::vector<std::vector<MatrixXcd>> powers(n);
  std::vector<std::vector<double>> deficit_norm(n);
  for (int j = 0; j < n; ++j) {
    auto split = ops::mean_ergodic_decompose(tuple.ops[j]);
    powers[j].push_back(MatrixXcd::Identity(d, d));
    for (int i = 1; i <= index_budget; ++i)
      powers[j].push_back(tuple.ops[j].entries * powers[j].back());
    MatrixXcd base = MatrixXcd::Identity(d, d);
    MatrixXcd sq = tuple.ops[j].entries;
    long e = 2L * K + 2 - index_budget;
    while (e > 0) {
      if (e & 1) base = base * sq;
      sq = sq * sq;
      e >>= 1;
    }
    deficit_norm[j].assign(index_budget + 1, 0.0);
    for (int i = index_budget; i >= 0; --i) {
      deficit_norm[j][i] = operator_norm(base * split.p_ran);
      if (i > 0) base = tuple.ops[j].entries * base;
    }
  }

  const double eps = std::numeric_limits<double>::epsilon();
  const double floor = 256.0 * eps * (K + 1.0) * n * std::sqrt(double(d));

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<VectorXcd> probes(trials);
  for (auto& x : probes) {
    x = VectorXcd(d);
    for (int i = 0; i < d; ++i) x(i) = Complex(gauss(rng), gauss(rng));
    x /= x.norm();
  }

  std::vector<int> idx(n, 0);
  std::function<void(int, int)> walk = [&](int pos, int remaining) {
    if (pos == n) {
      JointCheck chk;
      chk.index = idx;
      double with_tail = 1.0, main = 1.0;
      for (int j = 0; j < n; ++j) {
        double tn = operator_norm(powers[j][idx[j]]);
        main *= tn;
        with_tail *= tn + deficit_norm[j][idx[j]];
      }
      chk.tail = (with_tail - main) + floor;
      MatrixXcd ref = MatrixXcd::Identity(d, d);
      for (int j = 0; j < n; ++j) ref = ref * powers[j][idx[j]];
      for (const auto& x : probes) {
        VectorXcd v = jd.apply_j(x);
        for (int j = 0; j < n; ++j)
          if (idx[j] > 0) v = jd.apply_u(j, v, idx[j]);
        VectorXcd got = jd.apply_q(v);
        chk.observed = std::max(chk.observed, (got - ref * x).norm());
      }
      chk.pass = chk.observed <= chk.tail;
      rep.checks.push_back(chk);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      idx[pos] = v;
      walk(pos + 1, remaining - v);
    }
    idx[pos] = 0;
  };
  walk(0, index_budget);
  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                         [](const JointCheck& c) { return c.pass; });
  return rep;
}

}  // namespace jcalc::dil
