#include "jcalc/symbols.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace jcalc::sym {

bool domain_contains_closure(const SpectralDomain& d, Complex z, double tol) {
  return std::visit([&](const auto& dom) { return dom.contains_closure(z, tol); }, d);
}

std::vector<Complex> domain_boundary_samples(const SpectralDomain& d, int count) {
  return std::visit(
      [&](const auto& dom) -> std::vector<Complex> {
        using T = std::decay_t<decltype(dom)>;
        if constexpr (std::is_same_v<T, geom::StolzDomain>)
          return geom::stolz_boundary_samples(dom, count);
        else if constexpr (std::is_same_v<T, geom::Sector>)
          return geom::sector_boundary_samples(dom, count);
        else if constexpr (std::is_same_v<T, geom::ShiftedStolz>)
          return geom::shifted_stolz_boundary_samples(dom, count);
        else
          return geom::disc_union_boundary_samples(dom, count);
      },
      d);
}

double DecayCertificate::bound(std::span<const Complex> z) const {
  double b = c;
  for (Complex zi : z) {
    if (flavor == DecayFlavor::SectorType) {
      double m = std::pow(std::abs(zi), s);
      b *= m / (1.0 + m * m);
    } else {
      b *= std::pow(std::abs(Complex(1.0, 0.0) - zi), s);
    }
  }
  return b;
}

Complex PolynomialData::eval(std::span<const Complex> z) const {
  const int n = arity();
  if (static_cast<int>(z.size()) != n) throw PreconditionError("polynomial eval: arity mismatch");
  // nested Horner, recursing over the leading variable
  struct Rec {
    const PolynomialData& p;
    std::span<const Complex> z;
    Complex run(int var, int offset, int stride_prod) const {
      int d = p.degrees[var];
      int stride = stride_prod / (d + 1);
      if (var == p.arity() - 1) {
        Complex acc = p.coeffs[offset + d];
        for (int i = d - 1; i >= 0; --i) acc = acc * z[var] + p.coeffs[offset + i];
        return acc;
      }
      Complex acc = run(var + 1, offset + d * stride, stride);
      for (int i = d - 1; i >= 0; --i) acc = acc * z[var] + run(var + 1, offset + i * stride, stride);
      return acc;
    }
  };
  int total = 1;
  for (int d : degrees) total *= d + 1;
  if (static_cast<int>(coeffs.size()) != total)
    throw PreconditionError("polynomial eval: coefficient tensor size mismatch");
  return Rec{*this, z}.run(0, 0, total);
}

Complex eval_expr(const ExprNode& node, std::span<const Complex> z) {
  switch (node.op) {
    case ExprOp::Const: return node.value;
    case ExprOp::Var: return z[node.index];
    case ExprOp::Add: return eval_expr(*node.a, z) + eval_expr(*node.b, z);
    case ExprOp::Sub: return eval_expr(*node.a, z) - eval_expr(*node.b, z);
    case ExprOp::Mul: return eval_expr(*node.a, z) * eval_expr(*node.b, z);
    case ExprOp::Div: {
      Complex den = eval_expr(*node.b, z);
      if (std::abs(den) < 1e-300) throw NumericalError("closed-form eval: division blow-up");
      return eval_expr(*node.a, z) / den;
    }
    case ExprOp::Neg: return -eval_expr(*node.a, z);
    case ExprOp::Pow: {
      Complex base = eval_expr(*node.a, z);
      Complex acc(1.0, 0.0);
      int e = node.exponent;
      Complex b = e >= 0 ? base : Complex(1.0, 0.0) / base;
      for (int k = 0; k < std::abs(e); ++k) acc *= b;
      return acc;
    }
    case ExprOp::Exp: return std::exp(eval_expr(*node.a, z));
  }
  throw PreconditionError("closed-form eval: bad node");
}

const ExprPtr* Symbol::expr_data() const { return std::get_if<ExprPtr>(&data_); }

Symbol Symbol::polynomial(PolynomialData p, std::optional<DecayCertificate> cert) {
  Symbol s;
  s.arity_ = p.arity();
  s.data_ = std::move(p);
  s.cert_ = std::move(cert);
  return s;
}

Symbol Symbol::rational(RationalData r, std::optional<DecayCertificate> cert) {
  Symbol s;
  s.arity_ = r.num.arity();
  if (r.den.size() != static_cast<size_t>(s.arity_))
    throw PreconditionError("rational symbol: need one denominator factor per variable");
  s.data_ = std::move(r);
  s.cert_ = std::move(cert);
  return s;
}

Symbol Symbol::closed_form(int arity, ExprPtr expr, std::optional<DecayCertificate> cert) {
  Symbol s;
  s.arity_ = arity;
  s.data_ = std::move(expr);
  s.cert_ = std::move(cert);
  return s;
}

Symbol Symbol::callable(int arity, Callable fn, std::optional<DecayCertificate> cert) {
  Symbol s;
  s.arity_ = arity;
  s.data_ = std::move(fn);
  s.cert_ = std::move(cert);
  return s;
}

Symbol Symbol::poly1(std::vector<Complex> coeffs, std::optional<DecayCertificate> cert) {
  PolynomialData p;
  p.degrees = {static_cast<int>(coeffs.size()) - 1};
  p.coeffs = std::move(coeffs);
  return polynomial(std::move(p), std::move(cert));
}

Symbol Symbol::poly2(const std::vector<std::vector<Complex>>& rows,
                     std::optional<DecayCertificate> cert) {
  PolynomialData p;
  int d1 = static_cast<int>(rows.size()) - 1;
  int d2 = static_cast<int>(rows.front().size()) - 1;
  p.degrees = {d1, d2};
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != d2 + 1)
      throw PreconditionError("poly2: ragged coefficient rows");
    p.coeffs.insert(p.coeffs.end(), row.begin(), row.end());
  }
  return polynomial(std::move(p), std::move(cert));
}

namespace {

Complex eval_univariate(std::span<const Complex> coeffs, Complex z) {
  Complex acc = coeffs.empty() ? Complex(0, 0) : coeffs.back();
  for (int i = static_cast<int>(coeffs.size()) - 2; i >= 0; --i) acc = acc * z + coeffs[i];
  return acc;
}

}  // namespace

Complex Symbol::eval(std::span<const Complex> z) const {
  if (static_cast<int>(z.size()) != arity_) throw PreconditionError("symbol eval: arity mismatch");
  if (auto* p = std::get_if<PolynomialData>(&data_)) return p->eval(z);
  if (auto* r = std::get_if<RationalData>(&data_)) {
    if (pole_distance(z) <= 1e-12) throw NumericalError("symbol eval: too close to a pole");
    Complex den(1.0, 0.0);
    for (int i = 0; i < arity_; ++i) den *= eval_univariate(r->den[i], z[i]);
    return r->num.eval(z) / den;
  }
  if (auto* e = std::get_if<ExprPtr>(&data_)) return eval_expr(**e, z);
  return std::get<Callable>(data_)(z);
}

MatrixXcd Symbol::eval_grid(const std::vector<Complex>& a, const std::vector<Complex>& b) const {
  const bool bivariate = arity_ == 2;
  if (!bivariate && arity_ != 1) throw PreconditionError("eval_grid supports arity 1 or 2");
  if (bivariate && b.empty()) throw PreconditionError("eval_grid: missing second axis");

  auto vander = [](const std::vector<Complex>& xs, int deg) {
    MatrixXcd v(static_cast<int>(xs.size()), deg + 1);
    for (int i = 0; i < v.rows(); ++i) {
      Complex acc(1.0, 0.0);
      for (int j = 0; j <= deg; ++j) {
        v(i, j) = acc;
        acc *= xs[i];
      }
    }
    return v;
  };

  const PolynomialData* num = poly_data();
  const RationalData* rat = rational_data();
  if (rat) num = &rat->num;
  if (num) {
    if (!bivariate) {
      MatrixXcd v = vander(a, num->degrees[0]);
      Eigen::Map<const VectorXcd> coef(num->coeffs.data(), num->coeffs.size());
      MatrixXcd out = v * coef;
      if (rat) {
        for (int i = 0; i < out.rows(); ++i)
          out(i, 0) /= eval_univariate(rat->den[0], a[i]);
      }
      return out;
    }
    int d1 = num->degrees[0], d2 = num->degrees[1];
    Eigen::Map<const MatrixXcd> coef_rowmajor(num->coeffs.data(), d2 + 1, d1 + 1);
    MatrixXcd out = vander(a, d1) * coef_rowmajor.transpose() * vander(b, d2).transpose();
    if (rat) {
      VectorXcd qa(a.size()), qb(b.size());
      for (size_t i = 0; i < a.size(); ++i) qa(i) = eval_univariate(rat->den[0], a[i]);
      for (size_t j = 0; j < b.size(); ++j) qb(j) = eval_univariate(rat->den[1], b[j]);
      for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) /= qa(i) * qb(j);
    }
    return out;
  }

  // generic fallback
  if (!bivariate) {
    MatrixXcd out(static_cast<int>(a.size()), 1);
    for (size_t i = 0; i < a.size(); ++i) out(i, 0) = (*this)(a[i]);
    return out;
  }
  MatrixXcd out(static_cast<int>(a.size()), static_cast<int>(b.size()));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out(i, j) = (*this)(a[i], b[j]);
  return out;
}

double Symbol::pole_distance(std::span<const Complex> z) const {
  auto* r = std::get_if<RationalData>(&data_);
  if (!r) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < arity_; ++i)
    for (Complex p : r->poles[i]) best = std::min(best, std::abs(z[i] - p));
  return best;
}

Complex ExtendedSymbol::eval(std::span<const Complex> z) const {
  Complex acc = top.eval(z) + constant;
  for (const auto& [omitted, f] : lower) {
    std::vector<Complex> sub;
    sub.reserve(z.size() - omitted.size());
    for (int i = 0; i < static_cast<int>(z.size()); ++i)
      if (!std::binary_search(omitted.begin(), omitted.end(), i)) sub.push_back(z[i]);
    acc += f.eval(sub);
  }
  return acc;
}

namespace {

// composes a univariate coefficient list with z -> 1 - z
std::vector<Complex> compose_one_minus_1d(std::span<const Complex> coeffs) {
  std::vector<Complex> out(coeffs.size(), Complex(0, 0));
  // out = sum_k c_k (1-z)^k, expanded by Pascal recursion
  std::vector<Complex> pw{Complex(1.0, 0.0)};  // (1-z)^0
  for (size_t k = 0; k < coeffs.size(); ++k) {
    for (size_t j = 0; j < pw.size(); ++j) out[j] += coeffs[k] * pw[j];
    // pw <- pw * (1 - z)
    std::vector<Complex> next(pw.size() + 1, Complex(0, 0));
    for (size_t j = 0; j < pw.size(); ++j) {
      next[j] += pw[j];
      next[j + 1] -= pw[j];
    }
    pw = std::move(next);
  }
  return out;
}

PolynomialData compose_one_minus(const PolynomialData& p) {
  // substitute z_i -> 1 - z_i one variable at a time
  PolynomialData cur = p;
  int n = p.arity();
  for (int var = 0; var < n; ++var) {
    PolynomialData next = cur;
    std::fill(next.coeffs.begin(), next.coeffs.end(), Complex(0, 0));
    // strides
    std::vector<int> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * (cur.degrees[i + 1] + 1);
    int total = stride[0] * (cur.degrees[0] + 1);
    int dv = cur.degrees[var];
    // iterate over all multi-indices with the var-th index zeroed, then
    // transform the 1-D slice along var
    std::vector<Complex> slice(dv + 1), tf;
    for (int base = 0; base < total; ++base) {
      int idx_v = (base / stride[var]) % (dv + 1);
      if (idx_v != 0) continue;
      for (int k = 0; k <= dv; ++k) slice[k] = cur.coeffs[base + k * stride[var]];
      tf = compose_one_minus_1d(slice);
      for (int k = 0; k <= dv; ++k) next.coeffs[base + k * stride[var]] = tf[k];
    }
    cur = std::move(next);
  }
  return cur;
}

std::optional<DecayCertificate> pullback_certificate(const std::optional<DecayCertificate>& c) {
  if (!c) return std::nullopt;
  DecayCertificate out = *c;
  // sector bound C prod |z|^s/(1+|z|^{2s}) <= C prod |z|^s becomes the Stolz
  // bound c prod |1-lambda|^s under z = 1 - lambda (and conversely).
  out.flavor = c->flavor == DecayFlavor::SectorType ? DecayFlavor::StolzType
                                                    : DecayFlavor::SectorType;
  return out;
}

}  // namespace

Symbol pullback_one_minus(const Symbol& f) {
  auto cert = pullback_certificate(f.certificate());
  if (const auto* p = f.poly_data()) {
    return Symbol::polynomial(compose_one_minus(*p), cert);
  }
  if (const auto* r = f.rational_data()) {
    RationalData out;
    out.num = compose_one_minus(r->num);
    out.den.resize(r->den.size());
    out.poles.resize(r->poles.size());
    for (size_t i = 0; i < r->den.size(); ++i)
      out.den[i] = compose_one_minus_1d(r->den[i]);
    for (size_t i = 0; i < r->poles.size(); ++i) {
      out.poles[i].reserve(r->poles[i].size());
      for (Complex p : r->poles[i]) out.poles[i].push_back(Complex(1.0, 0.0) - p);
    }
    return Symbol::rational(std::move(out), cert);
  }
  if (const auto* e = f.expr_data()) {
    // wrap variables: var_i -> 1 - var_i
    struct Wrap {
      static ExprPtr run(const ExprPtr& node) {
        auto out = std::make_shared<ExprNode>(*node);
        if (node->op == ExprOp::Var) {
          auto one = std::make_shared<ExprNode>();
          one->op = ExprOp::Const;
          one->value = Complex(1.0, 0.0);
          auto sub = std::make_shared<ExprNode>();
          sub->op = ExprOp::Sub;
          sub->a = one;
          sub->b = node;
          return sub;
        }
        if (node->a) out->a = run(node->a);
        if (node->b) out->b = run(node->b);
        return out;
      }
    };
    return Symbol::closed_form(f.arity(), Wrap::run(*e), cert);
  }
  // callable
  int n = f.arity();
  Symbol base = f;
  return Symbol::callable(
      n,
      [base, n](std::span<const Complex> z) {
        std::vector<Complex> w(n);
        for (int i = 0; i < n; ++i) w[i] = Complex(1.0, 0.0) - z[i];
        return base.eval(w);
      },
      cert);
}

SupNormResult sup_norm(const Symbol& f, std::span<const SpectralDomain> domains,
                       int samples_per_variable) {
  const int n = f.arity();
  if (static_cast<int>(domains.size()) != n)
    throw PreconditionError("sup_norm: domain count must match arity");
  if (const auto* r = f.rational_data()) {
    for (int i = 0; i < n; ++i)
      for (Complex p : r->poles[i])
        if (domain_contains_closure(domains[i], p))
          throw PreconditionError("sup_norm: pole inside the closed domain");
  }
  std::vector<std::vector<Complex>> grids(n);
  for (int i = 0; i < n; ++i)
    grids[i] = domain_boundary_samples(domains[i], samples_per_variable);

  SupNormResult res;
  res.samples_per_variable = samples_per_variable;
  res.arg_max.assign(n, Complex(0, 0));
  if (n == 1) {
    MatrixXcd vals = f.eval_grid(grids[0]);
    for (int i = 0; i < vals.rows(); ++i) {
      double m = std::abs(vals(i, 0));
      if (m > res.value) {
        res.value = m;
        res.arg_max[0] = grids[0][i];
      }
    }
  } else if (n == 2) {
    MatrixXcd vals = f.eval_grid(grids[0], grids[1]);
    for (int i = 0; i < vals.rows(); ++i)
      for (int j = 0; j < vals.cols(); ++j) {
        double m = std::abs(vals(i, j));
        if (m > res.value) {
          res.value = m;
          res.arg_max[0] = grids[0][i];
          res.arg_max[1] = grids[1][j];
        }
      }
  } else {
    // odometer over the product grid
    std::vector<size_t> idx(n, 0);
    std::vector<Complex> z(n);
    while (true) {
      for (int i = 0; i < n; ++i) z[i] = grids[i][idx[i]];
      double m = std::abs(f.eval(z));
      if (m > res.value) {
        res.value = m;
        res.arg_max = z;
      }
      int i = n - 1;
      while (i >= 0 && ++idx[i] == grids[i].size()) idx[i--] = 0;
      if (i < 0) break;
    }
  }

  // local refinement: coordinate-wise line search between the argmax's grid
  // neighbours (two rounds)
  for (int round = 0; round < 2; ++round) {
    for (int v = 0; v < n; ++v) {
      const auto& g = grids[v];
      size_t best_k = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < g.size(); ++k) {
        double d = std::abs(g[k] - res.arg_max[v]);
        if (d < best_d) {
          best_d = d;
          best_k = k;
        }
      }
      size_t lo = best_k > 0 ? best_k - 1 : best_k;
      size_t hi = best_k + 1 < g.size() ? best_k + 1 : best_k;
      std::vector<Complex> z = res.arg_max;
      auto neg_mod = [&](double t) {
        z[v] = g[lo] + (g[hi] - g[lo]) * t;
        return -std::abs(f.eval(z));
      };
      auto r = brent_minimize(neg_mod, 0.0, 1.0, 1e-12, 60);
      if (-r.value > res.value) {
        res.value = -r.value;
        res.arg_max[v] = g[lo] + (g[hi] - g[lo]) * r.x;
      }
      z[v] = res.arg_max[v];
    }
  }
  return res;
}

Complex sample_domain_interior(const SpectralDomain& d, Rng& rng) {
  return std::visit(
      [&](const auto& dom) -> Complex {
        using T = std::decay_t<decltype(dom)>;
        for (int tries = 0; tries < 4096; ++tries) {
          Complex z;
          if constexpr (std::is_same_v<T, geom::StolzDomain>) {
            // hull parameter sample: disc of radius t sin(gamma) at 1 - t
            double t = uniform(rng, 0.0, 1.0);
            z = Complex(1.0 - t, 0.0) +
                t * std::sin(dom.gamma) * random_unit_disc(rng);
          } else if constexpr (std::is_same_v<T, geom::Sector>) {
            double t = uniform(rng, -6.0, 3.0);  // log-radius spread
            double phi = uniform(rng, -dom.omega, dom.omega);
            z = std::polar(std::exp(t), phi);
          } else if constexpr (std::is_same_v<T, geom::ShiftedStolz>) {
            double t = uniform(rng, 0.0, 1.0);
            z = Complex(1.0, 0.0) -
                (Complex(1.0 - t, 0.0) + t * std::sin(dom.gamma) * random_unit_disc(rng));
          } else {
            z = dom.upper_center() + dom.radius() * random_unit_disc(rng);
            if (uniform(rng, 0.0, 1.0) < 0.5) z = std::conj(z);
          }
          bool inside = std::visit([&](const auto& dd) { return dd.contains(z); }, d);
          if (inside) return z;
        }
        throw NumericalError("sample_domain_interior: rejection sampling failed");
      },
      d);
}

DecayReport verify_decay(const Symbol& f, const DecayCertificate& cert,
                         std::span<const SpectralDomain> domains, int samples, uint64_t seed) {
  const int n = f.arity();
  if (static_cast<int>(domains.size()) != n)
    throw PreconditionError("verify_decay: domain count must match arity");
  Rng rng(seed);
  DecayReport rep;
  rep.samples = samples;
  std::vector<Complex> z(n);
  for (int k = 0; k < samples; ++k) {
    for (int i = 0; i < n; ++i) z[i] = sample_domain_interior(domains[i], rng);
    double b = cert.bound(z);
    double v = std::abs(f.eval(z));
    double ratio = b > 0 ? v / b : (v > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.worst_point = z;
    }
  }
  rep.pass = rep.max_ratio <= 1.0 + 1e-9;
  return rep;
}

std::vector<Complex> polynomial_roots(std::span<const Complex> coeffs) {
  // strip trailing zeros
  int deg = static_cast<int>(coeffs.size()) - 1;
  while (deg > 0 && std::abs(coeffs[deg]) == 0.0) --deg;
  if (deg < 1) return {};
  MatrixXcd comp = MatrixXcd::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coeffs[i] / coeffs[deg];
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = Complex(1.0, 0.0);
  Eigen::ComplexEigenSolver<MatrixXcd> es(comp, false);
  std::vector<Complex> roots(deg);
  for (int i = 0; i < deg; ++i) roots[i] = es.eigenvalues()(i);
  return roots;
}

}  // namespace jcalc::sym
