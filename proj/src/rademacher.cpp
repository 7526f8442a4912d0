#include "jcalc/rademacher.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace jcalc::rad {

namespace {

double base_norm(const MatrixXcd& m, double q) {
  if (q == 2.0) return m.norm();  // Frobenius
  return schatten_norm(m, q);
}

double mean_pth_root(const std::vector<double>& norms, double p) {
  double acc = 0.0;
  for (double v : norms) acc += std::pow(v, p);
  return std::pow(acc / norms.size(), 1.0 / p);
}

}  // namespace

double rad_norm(std::span<const MatrixXcd> xs, double p, const SignEnumeration& en,
                double base_q) {
  if (xs.empty()) return 0.0;
  if (!(p >= 1.0)) throw PreconditionError("rad_norm: p >= 1 required");
  const int k = static_cast<int>(xs.size());
  for (const auto& x : xs)
    if (x.rows() != xs[0].rows() || x.cols() != xs[0].cols())
      throw PreconditionError("rad_norm: inconsistent dimensions");

  if (p == 2.0 && base_q == 2.0 && en.hilbert_shortcut) {
    double acc = 0.0;
    for (const auto& x : xs) acc += x.squaredNorm();
    return std::sqrt(acc);
  }

  if (en.mode == SignEnumeration::Mode::Exact) {
    if (k > SignEnumeration::kExactMax)
      throw PreconditionError("rad_norm: too many levels for exact enumeration");
    const long patterns = 1L << k;
    std::vector<double> norms;
    norms.reserve(patterns);
    MatrixXcd acc(xs[0].rows(), xs[0].cols());
    for (long s = 0; s < patterns; ++s) {
      acc.setZero();
      for (int i = 0; i < k; ++i) acc += (((s >> i) & 1) ? -1.0 : 1.0) * xs[i];
      norms.push_back(base_norm(acc, base_q));
    }
    return mean_pth_root(norms, p);
  }

  Rng rng(en.seed);
  std::vector<double> norms;
  norms.reserve(en.samples);
  MatrixXcd acc(xs[0].rows(), xs[0].cols());
  for (int s = 0; s < en.samples; ++s) {
    acc.setZero();
    for (int i = 0; i < k; ++i)
      acc += (rng() & 1 ? -1.0 : 1.0) * xs[i];
    norms.push_back(base_norm(acc, base_q));
  }
  return mean_pth_root(norms, p);
}

RBoundEstimate r_bounded_constant(std::span<const ops::MatrixOperator> family, int trials,
                                  const SignEnumeration& en, double p, double base_q,
                                  int max_length, uint64_t seed) {
  if (family.empty()) throw PreconditionError("r_bounded_constant: empty family");
  const int d = family[0].dim();
  for (const auto& t : family)
    if (t.dim() != d) throw PreconditionError("r_bounded_constant: common dimension required");

  RBoundEstimate est;
  auto consider = [&](const std::vector<int>& picks, const std::vector<MatrixXcd>& xs) {
    std::vector<MatrixXcd> txs(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) txs[i] = family[picks[i]].entries * xs[i];
    double den = rad_norm(xs, p, en, base_q);
    if (den <= 0.0) return;
    double ratio = rad_norm(txs, p, en, base_q) / den;
    if (ratio > est.lower_bound) {
      est.lower_bound = ratio;
      est.best_length = static_cast<int>(xs.size());
    }
  };

  // structured singletons: top right-singular vector of each member
  for (size_t f = 0; f < family.size(); ++f) {
    Eigen::JacobiSVD<MatrixXcd> svd(family[f].entries, Eigen::ComputeFullV);
    std::vector<MatrixXcd> xs{svd.matrixV().col(0)};
    consider({static_cast<int>(f)}, xs);
  }
  if (!family.empty()) {
    // singleton search is exact at p = 2 on a Hilbert base
    double top = 0.0;
    for (const auto& t : family) top = std::max(top, t.norm());
    if (p == 2.0 && base_q == 2.0 && est.lower_bound >= top - 1e-9) est.exact_singleton = true;
  }

  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> pick_len(1, std::min<int>(max_length, SignEnumeration::kExactMax));
  std::uniform_int_distribution<int> pick_member(0, static_cast<int>(family.size()) - 1);
  for (int t = 0; t < trials; ++t) {
    int len = pick_len(rng);
    std::vector<int> picks(len);
    std::vector<MatrixXcd> xs(len);
    for (int i = 0; i < len; ++i) {
      picks[i] = pick_member(rng);
      VectorXcd v(d);
      for (int r = 0; r < d; ++r) v(r) = Complex(g(rng), g(rng));
      xs[i] = v;
    }
    consider(picks, xs);
  }
  return est;
}

RRittEstimate r_ritt_sample(const ops::MatrixOperator& T, double beta, int lambda_samples,
                            const SignEnumeration& en, int trials, uint64_t seed) {
  auto ritt = ops::ritt_classify(T, beta, 512, 512);
  if (!ritt.verdict) throw PreconditionError("r_ritt_sample: T is not Ritt");
  geom::StolzDomain domain(beta);
  auto sd = ops::spectrum(T);
  std::vector<ops::MatrixOperator> family;
  int radial = std::max(2, lambda_samples / 16);
  int angular = std::max(8, lambda_samples / radial);
  for (int i = 0; i <= radial && static_cast<int>(family.size()) < lambda_samples; ++i) {
    double r = std::exp(std::log(1e-3) + (std::log(2.5) - std::log(1e-3)) * i / radial);
    for (int j = 0; j < angular && static_cast<int>(family.size()) < lambda_samples; ++j) {
      Complex lambda = Complex(1.0, 0.0) + std::polar(r, 2.0 * kPi * j / angular);
      if (domain.contains_closure(lambda, 1e-9)) continue;
      double dist = std::numeric_limits<double>::infinity();
      for (Complex ev : sd.eigenvalues) dist = std::min(dist, std::abs(lambda - ev));
      if (dist < 1e-8) continue;
      family.push_back(ops::MatrixOperator(
          (Complex(1.0, 0.0) - lambda) * ops::resolvent(T, lambda).entries));
    }
  }
  if (family.empty()) throw NumericalError("r_ritt_sample: no admissible lambda samples");
  RRittEstimate out;
  out.lambda_count = static_cast<int>(family.size());
  out.lower_bound = r_bounded_constant(family, trials, en, 2.0, 2.0, 4, seed).lower_bound;
  return out;
}

double tensor_rad_norm_enumerated(const std::vector<VectorXcd>& entries, int n, int k) {
  // entries indexed row-major over (i_1, ..., i_n) in [0,k)^n
  long expected = 1;
  for (int j = 0; j < n; ++j) expected *= k;
  if (static_cast<long>(entries.size()) != expected)
    throw PreconditionError("tensor_rad_norm_enumerated: size mismatch");
  if (n * k > SignEnumeration::kExactMax + 2)
    throw PreconditionError("tensor_rad_norm_enumerated: enumeration budget exceeded");
  const int d = static_cast<int>(entries[0].size());
  const long patterns = 1L << (n * k);  // signs: bit (j*k + i) = eps_i(omega_j)
  double acc = 0.0;
  VectorXcd sum(d);
  for (long s = 0; s < patterns; ++s) {
    sum.setZero();
    for (long flat = 0; flat < expected; ++flat) {
      long rest = flat;
      double sign = 1.0;
      for (int j = n - 1; j >= 0; --j) {
        int ij = static_cast<int>(rest % k);
        rest /= k;
        if ((s >> (j * k + ij)) & 1) sign = -sign;
      }
      sum += sign * entries[flat];
    }
    acc += sum.squaredNorm();
  }
  return std::sqrt(acc / patterns);
}

PropertyAnReport property_an_test(int d, int n, int k, int trials, const SignEnumeration& en,
                                  uint64_t seed) {
  if (n * k > SignEnumeration::kExactMax + 2)
    throw PreconditionError("property_an_test: enumeration budget exceeded");
  (void)en;
  PropertyAnReport rep;
  rep.trials = trials;
  long count = 1;
  for (int j = 0; j < n; ++j) count *= k;
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    std::vector<Complex> alpha(count);
    std::vector<VectorXcd> xs(count), ys(count);
    double sup_alpha = 0.0;
    for (long i = 0; i < count; ++i) {
      alpha[i] = Complex(g(rng), g(rng));
      sup_alpha = std::max(sup_alpha, std::abs(alpha[i]));
      xs[i] = VectorXcd(d);
      ys[i] = VectorXcd(d);
      for (int r = 0; r < d; ++r) {
        xs[i](r) = Complex(g(rng), g(rng));
        ys[i](r) = Complex(g(rng), g(rng));
      }
    }
    Complex pairing(0.0, 0.0);
    double x_sq = 0.0, y_sq = 0.0;
    for (long i = 0; i < count; ++i) {
      pairing += alpha[i] * ys[i].dot(xs[i]);
      x_sq += xs[i].squaredNorm();
      y_sq += ys[i].squaredNorm();
    }
    // tensor Rademacher characters are orthonormal in L^2(Omega^n)
    double nx = std::sqrt(x_sq), ny = std::sqrt(y_sq);
    double nx_enum = tensor_rad_norm_enumerated(xs, n, k);
    double ny_enum = tensor_rad_norm_enumerated(ys, n, k);
    rep.norm_identity_error = std::max(
        {rep.norm_identity_error, std::abs(nx - nx_enum), std::abs(ny - ny_enum)});
    double denom = sup_alpha * nx_enum * ny_enum;
    if (denom <= 0.0) continue;
    double ratio = std::abs(pairing) / denom;
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
  }
  rep.c_estimate = rep.worst_ratio;
  return rep;
}

}  // namespace jcalc::rad
