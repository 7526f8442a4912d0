#pragma once

#include <memory>
#include <vector>

#include "jcalc/common.hpp"
#include "jcalc/operators.hpp"

namespace jcalc::dil {

/// Element of the truncated Rademacher block: one coefficient vector per
/// level k in {-K..K}. At p = 2 the levels are orthonormal, so the norm is
/// the Pythagorean sum and the pairing is level-wise.
struct RadVector {
  int base_dim = 0;
  int levels_k = 0;  // K
  VectorXcd coeffs;  // stacked levels -K..K, (2K+1) * base_dim entries

  RadVector() = default;
  RadVector(int d, int k) : base_dim(d), levels_k(k) {
    coeffs = VectorXcd::Zero((2 * k + 1) * d);
  }
  Eigen::VectorBlock<VectorXcd> level(int k) {
    return coeffs.segment((k + levels_k) * base_dim, base_dim);
  }
  Eigen::VectorBlock<const VectorXcd> level(int k) const {
    return coeffs.segment((k + levels_k) * base_dim, base_dim);
  }
  double norm() const { return coeffs.norm(); }
  Complex pairing(const RadVector& other) const { return other.coeffs.dot(coeffs); }
  /// coefficient shift: new level k holds the old level k + m
  RadVector shifted(int m) const;
};

/// Principal square root of I - T. An eigenvalue 1 of T (zero of I - T) is
/// allowed only when semisimple; that kernel is projected out. Uses the
/// eigenbasis when well conditioned, a Schur triangular recurrence otherwise.
MatrixXcd principal_sqrt_I_minus_T(const ops::MatrixOperator& T);

/// Principal square root of a general matrix with spectrum off (-inf, 0].
MatrixXcd matrix_sqrt(const MatrixXcd& a);

struct SquareFunctionResult {
  double value = 0.0;       // truncated square-function norm at p = 2
  double tail_bound = 0.0;  // geometric continuation of the series
  double spectral_radius_ran = 0.0;
  bool convergent = true;
};

/// ||x||_{T,alpha} at p = 2: (sum_{k<=K} (k+1)^{2 alpha - 1}
/// ||T^k (I-T)^alpha x||^2)^{1/2}.
SquareFunctionResult square_function_norm(const ops::MatrixOperator& T, const VectorXcd& x,
                                          double alpha, int K);

/// Truncated loose-dilation factorization T^m ~ Q U^m J_1 on
/// C^d + Rad levels {-K..K}.
struct DilationSystem {
  ops::MatrixOperator T;
  int K = 0;
  int dim = 0;      // base dimension d
  int big_dim = 0;  // d (2K + 2)
  MatrixXcd p_ker, p_ran;
  MatrixXcd sqrt_i_minus_t;  // kernel projected out
  MatrixXcd theta;           // P_ker + (I + T) P_ran
  MatrixXcd j_map;           // J, big_dim x d
  MatrixXcd j1_map;          // J Theta
  MatrixXcd jtilde_map;      // adjoint-side embedding
  double rho_ran = 0.0;          // spectral radius of T on Ran(I - T)
  double power_sup = 0.0;        // sup_k ||T^k|| over the classification window
  bool u_entrywise_nonnegative = true;  // the shift matrix is 0/1 by construction

  VectorXcd apply_u(const VectorXcd& v, int m) const;  // coefficient shift by m
  VectorXcd apply_q(const VectorXcd& v) const { return jtilde_map.adjoint() * v; }
  MatrixXcd q_u_j1(int m) const;  // the d x d composite Q U^m J_1

  int block0_offset() const { return 0; }
  int level_offset(int k) const { return dim + (k + K) * dim; }
};

DilationSystem build_dilation(const ops::MatrixOperator& T, int K);

struct DilationCheck {
  int m = 0;
  double observed = 0.0;        // ||T^m - Q U^m J_1||
  double tail = 0.0;            // ||T^{2K-m+2} P_ran|| + numerical floor
  double identity_residual = 0.0;  // vs the exact truncated-sum identity
  double pairing_residual = 0.0;   // worst pairing-identity mismatch over trials
  bool pass = false;
};

struct DilationReport {
  std::vector<DilationCheck> checks;
  double numerical_floor = 0.0;
  bool pass = false;
};

DilationReport verify_dilation(const DilationSystem& sys, int m_max, int trials = 16,
                               uint64_t seed = 5);

struct IntertwineReport {
  double mismatch = 0.0;  // ||J_1 S - (S + I x S) J_1||
  double s_norm = 0.0;
  bool pass = false;      // mismatch <= 1e-8 ||S||
};

IntertwineReport intertwine_check(const DilationSystem& sys, const ops::MatrixOperator& S);

/// Recursive joint dilation: the head system dilates T_1 over the base space
/// and the tail handles (T_2...T_n) inside every Rademacher slot.
class JointDilation {
 public:
  JointDilation(const ops::CommutingTuple& tuple, int K, long dim_cap = 2'000'000);

  int arity() const { return arity_; }
  int base_dim() const { return base_dim_; }
  long big_dim() const { return big_dim_; }
  int levels() const { return levels_; }

  VectorXcd apply_j(const VectorXcd& x) const;
  VectorXcd apply_q(const VectorXcd& v) const;
  VectorXcd apply_u(int j, const VectorXcd& v, int power) const;

 private:
  int arity_ = 1;
  int base_dim_ = 0;
  long big_dim_ = 0;
  int levels_ = 0;  // K
  DilationSystem head_;
  std::unique_ptr<JointDilation> rest_;
};

struct JointCheck {
  std::vector<int> index;
  double observed = 0.0;
  double tail = 0.0;
  bool pass = false;
};

struct JointDilationReport {
  std::vector<JointCheck> checks;
  bool pass = false;
};

/// Verifies prod T_j^{i_j} x = Q prod U_j^{i_j} J x over all multi-indices
/// with |i| <= index_budget on random test vectors.
JointDilationReport verify_joint_dilation(const JointDilation& jd,
                                          const ops::CommutingTuple& tuple, int index_budget,
                                          int trials = 8, uint64_t seed = 9);

}  // namespace jcalc::dil
