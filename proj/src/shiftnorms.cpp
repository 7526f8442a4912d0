#include "jcalc/shiftnorms.hpp"

#include <algorithm>
#include <cmath>

namespace jcalc::shiftn {

ShiftPolynomial ShiftPolynomial::univariate(std::vector<Complex> c) {
  ShiftPolynomial p;
  p.n = 1;
  for (size_t i = 0; i < c.size(); ++i)
    if (c[i] != Complex(0.0, 0.0)) p.coeffs[{static_cast<int>(i)}] = c[i];
  return p;
}

ShiftPolynomial ShiftPolynomial::bivariate(const std::vector<std::vector<Complex>>& rows) {
  ShiftPolynomial p;
  p.n = 2;
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j)
      if (rows[i][j] != Complex(0.0, 0.0))
        p.coeffs[{static_cast<int>(i), static_cast<int>(j)}] = rows[i][j];
  return p;
}

Complex ShiftPolynomial::torus_value(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != n)
    throw PreconditionError("torus_value: arity mismatch");
  Complex acc(0.0, 0.0);
  for (const auto& [m, c] : coeffs) {
    double phase = 0.0;
    for (int j = 0; j < n; ++j) phase += m[j] * theta[j];
    acc += c * std::polar(1.0, phase);
  }
  return acc;
}

double ShiftPolynomial::l1_norm() const {
  double acc = 0.0;
  for (const auto& [m, c] : coeffs) acc += std::abs(c);
  return acc;
}

int ShiftPolynomial::max_degree() const {
  int deg = 0;
  for (const auto& [m, c] : coeffs)
    for (int e : m) deg = std::max(deg, e);
  return deg;
}

double shift_norm_p2(const ShiftPolynomial& p, int grid_per_axis) {
  if (p.coeffs.empty()) return 0.0;
  std::vector<double> theta(p.n, 0.0);
  std::vector<double> best_theta(p.n, 0.0);
  double best = 0.0;
  if (p.n == 1) {
    for (int i = 0; i < grid_per_axis; ++i) {
      theta[0] = 2.0 * kPi * i / grid_per_axis;
      double v = std::abs(p.torus_value(theta));
      if (v > best) {
        best = v;
        best_theta = theta;
      }
    }
  } else if (p.n == 2) {
    int g = std::max(64, static_cast<int>(std::sqrt(double(grid_per_axis) * grid_per_axis / 4)));
    for (int i = 0; i < g; ++i) {
      theta[0] = 2.0 * kPi * i / g;
      for (int j = 0; j < g; ++j) {
        theta[1] = 2.0 * kPi * j / g;
        double v = std::abs(p.torus_value(theta));
        if (v > best) {
          best = v;
          best_theta = theta;
        }
      }
    }
  } else {
    throw PreconditionError("shift_norm_p2: n <= 2 supported");
  }
  // coordinate-wise refinement around the arg-max
  std::vector<double> t = best_theta;
  for (int round = 0; round < 3; ++round) {
    for (int v = 0; v < p.n; ++v) {
      double step = 2.0 * kPi / grid_per_axis * std::pow(0.5, round);
      auto neg = [&](double x) {
        std::vector<double> tt = t;
        tt[v] = x;
        return -std::abs(p.torus_value(tt));
      };
      auto res = brent_minimize(neg, t[v] - 2 * step, t[v] + 2 * step, 1e-14, 80);
      if (-res.value > best) {
        best = -res.value;
        t[v] = res.x;
      }
    }
  }
  return best;
}

namespace {

struct WindowConv {
  const ShiftPolynomial& poly;
  int w;         // window half-width
  int side;      // 2w + 1
  long size;     // side^n

  explicit WindowConv(const ShiftPolynomial& p, int window)
      : poly(p), w(window), side(2 * window + 1) {
    size = 1;
    for (int j = 0; j < p.n; ++j) size *= side;
  }
  long flat(std::span<const int> idx) const {
    long f = 0;
    for (int j = 0; j < poly.n; ++j) f = f * side + (idx[j] + w);
    return f;
  }
  // y_i = sum_m c_m x_{i - m}, indices kept inside the window
  VectorXcd apply(const VectorXcd& x, bool adjoint) const {
    VectorXcd y = VectorXcd::Zero(size);
    std::vector<int> idx(poly.n, -w), src(poly.n);
    while (true) {
      long fi = flat(idx);
      for (const auto& [m, c] : poly.coeffs) {
        bool ok = true;
        for (int j = 0; j < poly.n; ++j) {
          src[j] = adjoint ? idx[j] + m[j] : idx[j] - m[j];
          if (src[j] < -w || src[j] > w) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        Complex cc = adjoint ? std::conj(c) : c;
        y(fi) += cc * x(flat(src));
      }
      int j = poly.n - 1;
      while (j >= 0 && ++idx[j] > w) idx[j--] = -w;
      if (j < 0) break;
    }
    return y;
  }
};

double vec_pnorm(const VectorXcd& v, double p) {
  if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
  double acc = 0.0;
  for (int i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v(i)), p);
  return std::pow(acc, 1.0 / p);
}

// duality map for the vector p-norm, J_p(v)_i = |v_i|^{p-1} sgn(v_i)
VectorXcd dual_map(const VectorXcd& v, double p) {
  VectorXcd out(v.size());
  if (std::isinf(p)) {
    // subgradient: point mass at (one) maximal coordinate
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < v.size(); ++i)
      if (std::abs(v(i)) > best) {
        best = std::abs(v(i));
        arg = i;
      }
    out.setZero();
    out(arg) = best > 0 ? v(arg) / best : Complex(1.0, 0.0);
    return out;
  }
  for (int i = 0; i < v.size(); ++i) {
    double a = std::abs(v(i));
    out(i) = a > 0 ? std::pow(a, p - 1.0) * (v(i) / a) : Complex(0.0, 0.0);
  }
  return out;
}

template <class Apply, class ApplyAdj>
double pnorm_ascent(long dim, double p, const Apply& apply, const ApplyAdj& apply_adj,
                    int iterations, int restarts, uint64_t seed,
                    const VectorXcd* warm = nullptr) {
  const double q = std::isinf(p) ? 1.0 : (p == 1.0 ? std::numeric_limits<double>::infinity()
                                                   : p / (p - 1.0));
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  double best = 0.0;
  auto run = [&](VectorXcd x) {
    double nx = vec_pnorm(x, p);
    if (nx <= 0.0) return;
    x /= nx;
    double prev = 0.0;
    for (int it = 0; it < iterations; ++it) {
      VectorXcd y = apply(x);
      double gamma = vec_pnorm(y, p);
      best = std::max(best, gamma);
      if (gamma <= 0.0) return;
      VectorXcd z = apply_adj(dual_map(y / gamma, p));
      double nz = vec_pnorm(z, q);
      if (nz <= 0.0) return;
      x = dual_map(z / nz, q);
      double nxp = vec_pnorm(x, p);
      if (nxp <= 0.0) return;
      x /= nxp;
      if (std::abs(gamma - prev) <= 1e-12 * std::max(1.0, gamma)) break;
      prev = gamma;
    }
    VectorXcd y = apply(x);
    best = std::max(best, vec_pnorm(y, p));
  };

  if (warm && warm->size() == dim) run(*warm);
  VectorXcd delta = VectorXcd::Zero(dim);
  delta(dim / 2) = 1.0;
  run(delta);
  run(VectorXcd::Ones(dim));
  for (int r = 0; r < restarts; ++r) {
    VectorXcd x(dim);
    for (long i = 0; i < dim; ++i) x(i) = Complex(g(rng), g(rng));
    run(x);
  }
  return best;
}

}  // namespace

WindowNormResult truncated_window_norm(const ShiftPolynomial& poly, double p, int window,
                                       int iterations, int restarts, uint64_t seed,
                                       const VectorXcd* warm_start, int warm_window) {
  if (!(p >= 1.0) && !std::isinf(p))
    throw PreconditionError("truncated_window_norm: p in [1, inf] required");
  WindowConv conv(poly, window);
  if (conv.size > 4'000'000) throw PreconditionError("truncated_window_norm: window too large");

  VectorXcd warm_embedded;
  const VectorXcd* warm_ptr = nullptr;
  if (warm_start && warm_window > 0 && warm_window <= window) {
    WindowConv small(poly, warm_window);
    warm_embedded = VectorXcd::Zero(conv.size);
    std::vector<int> idx(poly.n, -warm_window);
    while (true) {
      warm_embedded(conv.flat(idx)) = (*warm_start)(small.flat(idx));
      int j = poly.n - 1;
      while (j >= 0 && ++idx[j] > warm_window) idx[j--] = -warm_window;
      if (j < 0) break;
    }
    warm_ptr = &warm_embedded;
  }

  // ascent with maximizer tracking (window sweeps reuse the arg-max)
  WindowNormResult res;
  res.arg_max = VectorXcd::Zero(conv.size);
  auto apply = [&](const VectorXcd& x) { return conv.apply(x, false); };
  auto apply_adj = [&](const VectorXcd& x) { return conv.apply(x, true); };
  struct Recorder {
    double best = 0.0;
    VectorXcd best_x;
    void offer(const VectorXcd& x, double value) {
      if (value > best) {
        best = value;
        best_x = x;
      }
    }
  } rec;

  const double q = std::isinf(p) ? 1.0 : (p == 1.0 ? std::numeric_limits<double>::infinity()
                                                   : p / (p - 1.0));
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  auto run = [&](VectorXcd x) {
    double nx = vec_pnorm(x, p);
    if (nx <= 0.0) return;
    x /= nx;
    double prev = 0.0;
    for (int it = 0; it < iterations; ++it) {
      VectorXcd y = apply(x);
      double gamma = vec_pnorm(y, p);
      rec.offer(x, gamma);
      if (gamma <= 0.0) return;
      VectorXcd z = apply_adj(dual_map(y / gamma, p));
      double nz = vec_pnorm(z, q);
      if (nz <= 0.0) return;
      x = dual_map(z / nz, q);
      double nxp = vec_pnorm(x, p);
      if (nxp <= 0.0) return;
      x /= nxp;
      if (std::abs(gamma - prev) <= 1e-12 * std::max(1.0, gamma)) break;
      prev = gamma;
    }
    VectorXcd y = apply(x);
    rec.offer(x, vec_pnorm(y, p));
  };
  if (warm_ptr) run(*warm_ptr);
  VectorXcd delta = VectorXcd::Zero(conv.size);
  delta(conv.size / 2) = 1.0;
  run(delta);
  run(VectorXcd::Ones(conv.size));
  for (int r = 0; r < restarts; ++r) {
    VectorXcd x(conv.size);
    for (long i = 0; i < conv.size; ++i) x(i) = Complex(g(rng), g(rng));
    run(x);
  }
  res.value = rec.best;
  if (rec.best_x.size() == conv.size) res.arg_max = rec.best_x;
  return res;
}

std::vector<double> window_sweep(const ShiftPolynomial& poly, double p,
                                 const std::vector<int>& windows, int iterations, int restarts,
                                 uint64_t seed) {
  std::vector<double> out;
  VectorXcd warm;
  int prev_w = 0;
  for (int w : windows) {
    WindowNormResult r =
        truncated_window_norm(poly, p, w, iterations, restarts, seed,
                              warm.size() > 0 ? &warm : nullptr, prev_w);
    out.push_back(r.value);
    warm = r.arg_max;
    prev_w = w;
  }
  return out;
}

Bracket shift_norm_bracket(const ShiftPolynomial& poly, double p, int window, int iterations,
                           int restarts, uint64_t seed) {
  if (!(p >= 1.0) && !std::isinf(p))
    throw PreconditionError("shift_norm_bracket: p in [1, inf] required");
  Bracket b;
  b.upper = poly.l1_norm();
  double torus = shift_norm_p2(poly);
  double win = truncated_window_norm(poly, p, window, iterations, restarts, seed).value;
  b.lower = std::min(std::max(torus, win), b.upper);
  return b;
}

double matrix_pnorm(const MatrixXcd& a, double p, int iterations, int restarts, uint64_t seed) {
  const long n = a.cols();
  if (p == 2.0) return operator_norm(a);
  if (p == 1.0) {
    double best = 0.0;
    for (long j = 0; j < n; ++j) best = std::max(best, a.col(j).cwiseAbs().sum());
    return best;
  }
  if (std::isinf(p)) {
    double best = 0.0;
    for (long i = 0; i < a.rows(); ++i) best = std::max(best, a.row(i).cwiseAbs().sum());
    return best;
  }
  auto apply = [&](const VectorXcd& x) -> VectorXcd { return a * x; };
  auto apply_adj = [&](const VectorXcd& x) -> VectorXcd { return a.adjoint() * x; };
  return pnorm_ascent(n, p, apply, apply_adj, iterations, restarts, seed);
}

PPolyRatioReport p_poly_ratio(const ops::CommutingTuple& tuple,
                              std::span<const ShiftPolynomial> family, double p) {
  if (family.empty()) throw PreconditionError("p_poly_ratio: empty family");
  PPolyRatioReport rep;
  const int d = tuple.dim();
  for (const auto& poly : family) {
    if (poly.n != tuple.arity()) throw PreconditionError("p_poly_ratio: arity mismatch");
    MatrixXcd pt = MatrixXcd::Zero(d, d);
    for (const auto& [m, c] : poly.coeffs) {
      MatrixXcd term = MatrixXcd::Identity(d, d);
      for (int j = 0; j < poly.n; ++j)
        for (int e = 0; e < m[j]; ++e) term = term * tuple.ops[j].entries;
      pt += c * term;
    }
    double num = matrix_pnorm(pt, p);
    Bracket b = shift_norm_bracket(poly, p);
    rep.ratio_vs_lower.push_back(b.lower > 0 ? num / b.lower : 0.0);
    rep.ratio_vs_upper.push_back(b.upper > 0 ? num / b.upper : 0.0);
    if (rep.ratio_vs_lower.back() > rep.k_upper) {
      rep.k_upper = rep.ratio_vs_lower.back();
      rep.maximizer = static_cast<int>(rep.ratio_vs_lower.size()) - 1;
    }
    rep.k_lower = std::max(rep.k_lower, rep.ratio_vs_upper.back());
  }
  return rep;
}

double dtheta_sup(const ShiftPolynomial& poly, double theta, int samples_per_axis) {
  geom::DiscUnionDomain dom(theta);
  auto boundary = geom::disc_union_boundary_samples(dom, samples_per_axis);
  double best = 0.0;
  if (poly.n == 1) {
    for (Complex z : boundary) {
      Complex acc(0.0, 0.0);
      for (const auto& [m, c] : poly.coeffs) acc += c * std::pow(z, m[0]);
      best = std::max(best, std::abs(acc));
    }
    return best;
  }
  if (poly.n != 2) throw PreconditionError("dtheta_sup: n <= 2 supported");
  // precompute per-axis powers for the tensor max
  int deg = poly.max_degree();
  MatrixXcd powers(static_cast<int>(boundary.size()), deg + 1);
  for (size_t i = 0; i < boundary.size(); ++i) {
    Complex acc(1.0, 0.0);
    for (int e = 0; e <= deg; ++e) {
      powers(static_cast<int>(i), e) = acc;
      acc *= boundary[i];
    }
  }
  for (size_t i = 0; i < boundary.size(); ++i)
    for (size_t j = 0; j < boundary.size(); ++j) {
      Complex acc(0.0, 0.0);
      for (const auto& [m, c] : poly.coeffs)
        acc += c * powers(static_cast<int>(i), m[0]) * powers(static_cast<int>(j), m[1]);
      best = std::max(best, std::abs(acc));
    }
  return best;
}

}  // namespace jcalc::shiftn
