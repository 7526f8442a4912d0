#pragma once

#include <map>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "jcalc/common.hpp"
#include "jcalc/geometry.hpp"

namespace jcalc::sym {

using SpectralDomain =
    std::variant<geom::StolzDomain, geom::Sector, geom::ShiftedStolz, geom::DiscUnionDomain>;

bool domain_contains_closure(const SpectralDomain& d, Complex z, double tol = kMembershipTol);
std::vector<Complex> domain_boundary_samples(const SpectralDomain& d, int count);

enum class DecayFlavor { SectorType, StolzType };

/// H0-infinity decay certificate. Sector flavor bounds |f| by
/// c * prod |z_i|^s / (1 + |z_i|^{2s}); Stolz flavor by c * prod |1 - z_i|^s.
struct DecayCertificate {
  DecayFlavor flavor = DecayFlavor::SectorType;
  double c = 1.0;
  double s = 1.0;

  double bound(std::span<const Complex> z) const;
};

/// Dense multivariate polynomial, coefficients indexed row-major by
/// (i_1, ..., i_n) with per-variable degrees.
struct PolynomialData {
  std::vector<int> degrees;        // size n
  std::vector<Complex> coeffs;     // size prod (degrees[i]+1), row-major

  int arity() const { return static_cast<int>(degrees.size()); }
  Complex eval(std::span<const Complex> z) const;
};

/// Rational with a separable denominator prod_i q_i(z_i); poles are the
/// per-variable roots of the q_i.
struct RationalData {
  PolynomialData num;
  std::vector<std::vector<Complex>> den;    // univariate coefficients per variable
  std::vector<std::vector<Complex>> poles;  // declared roots per variable
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

enum class ExprOp { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Exp };

struct ExprNode {
  ExprOp op = ExprOp::Const;
  Complex value{0.0, 0.0};  // Const
  int index = 0;            // Var
  int exponent = 0;         // Pow
  ExprPtr a, b;
};

Complex eval_expr(const ExprNode& node, std::span<const Complex> z);

/// An evaluable holomorphic symbol in n variables, with an optional decay
/// certificate. The callable kind backs internally-built evaluators (the
/// transfer module's auxiliary functions); it is not serializable.
class Symbol {
 public:
  using Callable = std::function<Complex(std::span<const Complex>)>;

  static Symbol polynomial(PolynomialData p, std::optional<DecayCertificate> cert = {});
  static Symbol rational(RationalData r, std::optional<DecayCertificate> cert = {});
  static Symbol closed_form(int arity, ExprPtr expr, std::optional<DecayCertificate> cert = {});
  static Symbol callable(int arity, Callable fn, std::optional<DecayCertificate> cert = {});

  // univariate/bivariate convenience factories used all over the tests
  static Symbol poly1(std::vector<Complex> coeffs, std::optional<DecayCertificate> cert = {});
  static Symbol poly2(const std::vector<std::vector<Complex>>& rows,
                      std::optional<DecayCertificate> cert = {});

  int arity() const { return arity_; }
  const std::optional<DecayCertificate>& certificate() const { return cert_; }
  void set_certificate(std::optional<DecayCertificate> cert) { cert_ = std::move(cert); }

  bool is_polynomial() const { return std::holds_alternative<PolynomialData>(data_); }
  bool is_rational() const { return std::holds_alternative<RationalData>(data_); }
  const PolynomialData* poly_data() const { return std::get_if<PolynomialData>(&data_); }
  const RationalData* rational_data() const { return std::get_if<RationalData>(&data_); }
  const ExprPtr* expr_data() const;

  Complex eval(std::span<const Complex> z) const;
  Complex operator()(Complex z) const { return eval(std::span<const Complex>(&z, 1)); }
  Complex operator()(Complex z1, Complex z2) const {
    Complex buf[2] = {z1, z2};
    return eval(std::span<const Complex>(buf, 2));
  }

  /// Values on a tensor grid; out(i, j) = f(a_i, b_j) for arity 2, a column
  /// vector for arity 1. Uses a fast path for polynomial/separable-rational.
  MatrixXcd eval_grid(const std::vector<Complex>& a, const std::vector<Complex>& b = {}) const;

  /// Minimum distance from z to any declared pole coordinate (rational only;
  /// infinity otherwise).
  double pole_distance(std::span<const Complex> z) const;

 private:
  int arity_ = 1;
  std::variant<PolynomialData, RationalData, ExprPtr, Callable> data_;
  std::optional<DecayCertificate> cert_;
};

/// g = f + sum over proper subsets of lower-arity terms + constant, the
/// extended (unital) symbol class. Subset keys list the omitted variables.
struct ExtendedSymbol {
  Symbol top;
  std::map<std::vector<int>, Symbol> lower;
  Complex constant{0.0, 0.0};

  int arity() const { return top.arity(); }
  Complex eval(std::span<const Complex> z) const;
};

Symbol pullback_one_minus(const Symbol& f);

struct SupNormResult {
  double value = 0.0;
  std::vector<Complex> arg_max;
  int samples_per_variable = 0;
};

/// Sup of |f| over the product domain, estimated on the distinguished
/// boundary (product of 1-D boundaries) with local refinement at the argmax.
SupNormResult sup_norm(const Symbol& f, std::span<const SpectralDomain> domains,
                       int samples_per_variable = 400);

struct DecayReport {
  bool pass = false;
  double max_ratio = 0.0;
  std::vector<Complex> worst_point;
  int samples = 0;
};

/// Spot-check |f(z)| <= cert.bound(z) on random interior samples of the
/// product domain. PASS iff max ratio <= 1 + 1e-9.
DecayReport verify_decay(const Symbol& f, const DecayCertificate& cert,
                         std::span<const SpectralDomain> domains, int samples, uint64_t seed = 7);

/// Roots of a univariate polynomial via the companion matrix.
std::vector<Complex> polynomial_roots(std::span<const Complex> coeffs);

/// Random interior point of a domain (rejection from a cover).
Complex sample_domain_interior(const SpectralDomain& d, Rng& rng);

}  // namespace jcalc::sym
