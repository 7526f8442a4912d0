#include "jcalc/calculus.hpp"

#include <algorithm>
#include <cmath>

namespace jcalc::fc {

namespace {

const Complex kTwoPiI(0.0, 2.0 * kPi);

std::vector<MatrixXcd> resolvent_grid(const ops::MatrixOperator& T,
                                      const std::vector<Complex>& nodes) {
  const int d = T.dim();
  std::vector<MatrixXcd> out;
  out.reserve(nodes.size());
  const MatrixXcd eye = MatrixXcd::Identity(d, d);
  for (Complex z : nodes) {
    Eigen::PartialPivLU<MatrixXcd> lu(z * eye - T.entries);
    out.push_back(lu.solve(eye));
  }
  return out;
}

/// Tensor-product contour quadrature of f(z) prod R(z_i, T_i), divided by
/// (2 pi i)^n. Accumulation runs variable-by-variable so the cost is
/// O(nodes^n d^2 + nodes d^3) for n = 2.
MatrixXcd tensor_calculus(const std::vector<geom::Contour>& contours,
                          const sym::Symbol& symbol,
                          const ops::CommutingTuple& tuple) {
  const int n = tuple.arity();
  const int d = tuple.dim();
  if (n == 1) {
    auto r = resolvent_grid(tuple.ops[0], contours[0].nodes);
    MatrixXcd vals = symbol.eval_grid(contours[0].nodes);
    MatrixXcd acc = MatrixXcd::Zero(d, d);
    for (size_t k = 0; k < contours[0].nodes.size(); ++k)
      acc += contours[0].weights[k] * vals(static_cast<int>(k), 0) * r[k];
    return acc / kTwoPiI;
  }
  if (n == 2) {
    auto r1 = resolvent_grid(tuple.ops[0], contours[0].nodes);
    auto r2 = resolvent_grid(tuple.ops[1], contours[1].nodes);
    MatrixXcd vals = symbol.eval_grid(contours[0].nodes, contours[1].nodes);
    MatrixXcd acc = MatrixXcd::Zero(d, d);
    MatrixXcd inner(d, d);
    for (size_t j = 0; j < contours[0].nodes.size(); ++j) {
      inner.setZero();
      for (size_t k = 0; k < contours[1].nodes.size(); ++k)
        inner += contours[1].weights[k] * vals(static_cast<int>(j), static_cast<int>(k)) * r2[k];
      acc += contours[0].weights[j] * (r1[j] * inner);
    }
    return acc / (kTwoPiI * kTwoPiI);
  }
  // general n: odometer recursion with cached resolvents
  std::vector<std::vector<MatrixXcd>> r(n);
  for (int i = 0; i < n; ++i) r[i] = resolvent_grid(tuple.ops[i], contours[i].nodes);
  std::vector<size_t> idx(n, 0);
  std::vector<Complex> z(n);
  MatrixXcd acc = MatrixXcd::Zero(d, d);
  while (true) {
    Complex w(1.0, 0.0);
    for (int i = 0; i < n; ++i) {
      z[i] = contours[i].nodes[idx[i]];
      w *= contours[i].weights[idx[i]];
    }
    MatrixXcd prod = r[0][idx[0]];
    for (int i = 1; i < n; ++i) prod = prod * r[i][idx[i]];
    acc += w * symbol.eval(z) * prod;
    int i = n - 1;
    while (i >= 0 && ++idx[i] == contours[i].nodes.size()) idx[i--] = 0;
    if (i < 0) break;
  }
  Complex denom(1.0, 0.0);
  for (int i = 0; i < n; ++i) denom *= kTwoPiI;
  return acc / denom;
}

struct ContourBuilder {
  std::function<geom::Contour(double angle, int nodes_per_panel, int corner_levels)> make;
};

void validate_tuple(const ops::CommutingTuple& tuple) {
  auto rep = ops::verify_commuting(tuple);
  if (!rep.pass) throw PreconditionError("calculus: tuple is not commuting within tolerance");
}

/// Shared engine for both calculi. Widens contour angles away from the
/// spectrum if needed, then refines until two successive rules agree.
CalcResult run_calculus(const CalculusRequest& req, const ContourBuilder& builder,
                        bool angle_must_exceed_spectrum, sym::DecayFlavor required_flavor) {
  const auto& opts = req.quadrature;
  const int n = req.tuple.arity();
  if (req.symbol.arity() != n)
    throw PreconditionError("calculus: symbol arity must match the tuple");
  if (static_cast<int>(req.contour_angles.size()) != n ||
      static_cast<int>(req.domain_angles.size()) != n)
    throw PreconditionError("calculus: need one contour and one domain angle per variable");
  if (!req.symbol.certificate() || req.symbol.certificate()->flavor != required_flavor)
    throw PreconditionError("calculus: symbol lacks the required decay certificate");
  validate_tuple(req.tuple);

  std::vector<std::vector<Complex>> spectra(n);
  std::vector<double> min_angle(n, 0.0);
  for (int i = 0; i < n; ++i) {
    spectra[i] = ops::spectrum(req.tuple.ops[i]).eigenvalues;
    if (angle_must_exceed_spectrum) {
      auto ma = geom::minimal_stolz_angle(spectra[i]);
      if (!ma.ritt_compatible)
        throw PreconditionError("calc_ritt: spectrum escapes every closed Stolz domain");
      min_angle[i] = ma.alpha;
    } else {
      for (Complex ev : spectra[i])
        if (std::abs(ev) > 1e-14) min_angle[i] = std::max(min_angle[i], std::abs(std::arg(ev)));
    }
  }

  std::vector<double> angles = req.contour_angles;
  for (int i = 0; i < n; ++i) {
    if (!(angles[i] > min_angle[i]) || !(angles[i] < req.domain_angles[i]))
      throw PreconditionError("calculus: contour angle must sit between spectrum and domain");
  }

  // widen any contour that runs too close to the spectrum
  auto build_all = [&](int m, int levels) {
    std::vector<geom::Contour> cs(n);
    for (int i = 0; i < n; ++i) cs[i] = builder.make(angles[i], m, levels);
    return cs;
  };
  for (int attempt = 0; attempt < 5; ++attempt) {
    auto probe = build_all(6, 2);
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      if (probe[i].min_distance(spectra[i]) < 1e-3) {
        ok = false;
        double limit = req.domain_angles[i] - 1e-3;
        angles[i] = std::min(limit, angles[i] + 0.05);
      }
    }
    if (ok) break;
    if (attempt == 4) throw NumericalError("calculus: contour collides with the spectrum");
  }

  CalcResult res;
  res.angles_used = angles;
  int m = opts.nodes_per_panel;
  int levels = opts.corner_levels;
  auto coarse_rule = [&](int mm, int ll) {
    return tensor_calculus(build_all(mm, std::max(1, ll)), req.symbol, req.tuple);
  };
  MatrixXcd coarse = coarse_rule(m, levels - 1);
  MatrixXcd fine = coarse_rule(m, levels);
  double delta = operator_norm(fine - coarse) / (1.0 + operator_norm(fine));
  int rounds = 0;
  while (delta > opts.refine_target && rounds < opts.max_refine_rounds) {
    coarse = fine;
    m += 4;
    ++levels;
    fine = coarse_rule(m, levels);
    delta = operator_norm(fine - coarse) / (1.0 + operator_norm(fine));
    ++rounds;
  }
  res.refine_delta = delta;
  auto final_contours = build_all(m, levels);
  res.node_counts.resize(n);
  for (int i = 0; i < n; ++i) res.node_counts[i] = static_cast<int>(final_contours[i].nodes.size());
  res.value = ops::MatrixOperator(fine);

  if (opts.check_angles) {
    std::vector<double> perturbed = angles;
    for (int i = 0; i < n; ++i) {
      double up = angles[i] + opts.angle_perturbation;
      double dn = angles[i] - opts.angle_perturbation;
      perturbed[i] = (up < req.domain_angles[i] - 1e-3) ? up
                     : (dn > min_angle[i] + 1e-3)       ? dn
                                                        : angles[i];
    }
    std::vector<geom::Contour> cs(n);
    for (int i = 0; i < n; ++i) cs[i] = builder.make(perturbed[i], m, levels);
    MatrixXcd alt = tensor_calculus(cs, req.symbol, req.tuple);
    res.angle_delta = operator_norm(alt - fine) / (1.0 + operator_norm(fine));
  }
  return res;
}

}  // namespace

CalcResult calc_ritt(const CalculusRequest& req) {
  ContourBuilder builder;
  builder.make = [](double beta, int m, int levels) {
    return geom::stolz_boundary_contour(beta, m, levels);
  };
  return run_calculus(req, builder, true, sym::DecayFlavor::StolzType);
}

CalcResult calc_sectorial(const CalculusRequest& req) {
  const auto& cert = req.symbol.certificate();
  if (!cert) throw PreconditionError("calc_sectorial: certificate required");
  geom::SectorDecay decay{cert->c, cert->s};
  double tail = req.quadrature.sector_tail;
  double density = req.quadrature.sector_nodes_per_unit_t;
  ContourBuilder builder;
  builder.make = [decay, tail, density](double nu, int m, int levels) {
    // trapezoid density scales with the refinement level so the shared
    // refinement loop is effective for sector contours too
    double boost = density * (1.0 + 0.35 * (levels - 1)) * (m / 12.0);
    return geom::sector_boundary_contour(nu, decay, tail, boost);
  };
  return run_calculus(req, builder, false, sym::DecayFlavor::SectorType);
}

ops::MatrixOperator poly_eval(const sym::Symbol& poly, const ops::CommutingTuple& tuple) {
  const auto* p = poly.poly_data();
  if (!p) throw PreconditionError("poly_eval: polynomial symbol required");
  if (p->arity() != tuple.arity()) throw PreconditionError("poly_eval: arity mismatch");
  validate_tuple(tuple);
  const int d = tuple.dim();
  const MatrixXcd eye = MatrixXcd::Identity(d, d);

  struct Rec {
    const sym::PolynomialData& p;
    const ops::CommutingTuple& tuple;
    const MatrixXcd& eye;
    MatrixXcd run(int var, int offset, int stride_prod) const {
      int deg = p.degrees[var];
      int stride = stride_prod / (deg + 1);
      const MatrixXcd& t = tuple.ops[var].entries;
      if (var == p.arity() - 1) {
        MatrixXcd acc = p.coeffs[offset + deg] * eye;
        for (int i = deg - 1; i >= 0; --i) acc = acc * t + p.coeffs[offset + i] * eye;
        return acc;
      }
      MatrixXcd acc = run(var + 1, offset + deg * stride, stride);
      for (int i = deg - 1; i >= 0; --i) acc = acc * t + run(var + 1, offset + i * stride, stride);
      return acc;
    }
  };
  int total = 1;
  for (int deg : p->degrees) total *= deg + 1;
  return ops::MatrixOperator(Rec{*p, tuple, eye}.run(0, 0, total));
}

JointDiagonalization joint_diagonalize(const ops::CommutingTuple& tuple, uint64_t seed,
                                       double offdiag_tol) {
  validate_tuple(tuple);
  const int n = tuple.arity();
  const int d = tuple.dim();
  Rng rng(seed);
  for (int attempt = 0; attempt < 6; ++attempt) {
    MatrixXcd combo = MatrixXcd::Zero(d, d);
    for (int i = 0; i < n; ++i)
      combo += Complex(uniform(rng, 0.25, 1.0), uniform(rng, 0.25, 1.0)) * tuple.ops[i].entries;
    Eigen::ComplexEigenSolver<MatrixXcd> es(combo, true);
    if (es.info() != Eigen::Success) continue;
    JointDiagonalization jd;
    jd.v = es.eigenvectors();
    // normalize columns for conditioning
    for (int c = 0; c < d; ++c) jd.v.col(c) /= jd.v.col(c).norm();
    jd.condition = condition_number(jd.v);
    if (jd.condition >= 1e8) continue;
    jd.v_inv = jd.v.partialPivLu().solve(MatrixXcd::Identity(d, d));
    jd.eigenvalues.assign(n, std::vector<Complex>(d));
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      MatrixXcd m = jd.v_inv * tuple.ops[i].entries * jd.v;
      double scale = std::max(1.0, operator_norm(tuple.ops[i].entries));
      for (int r = 0; r < d && ok; ++r)
        for (int c = 0; c < d; ++c) {
          if (r == c) continue;
          if (std::abs(m(r, c)) > offdiag_tol * scale) {
            ok = false;
            break;
          }
        }
      for (int k = 0; k < d; ++k) jd.eigenvalues[i][k] = m(k, k);
    }
    if (ok) return jd;
  }
  throw NumericalError("joint_diagonalize: no common diagonalizer found");
}

ops::MatrixOperator spectral_oracle(const sym::Symbol& symbol, const ops::CommutingTuple& tuple,
                                    uint64_t seed) {
  auto jd = joint_diagonalize(tuple, seed);
  const int n = tuple.arity();
  const int d = tuple.dim();
  if (symbol.arity() != n) throw PreconditionError("spectral_oracle: arity mismatch");
  VectorXcd diag(d);
  std::vector<Complex> z(n);
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < n; ++i) z[i] = jd.eigenvalues[i][k];
    if (symbol.pole_distance(z) <= 1e-12)
      throw PreconditionError("spectral_oracle: symbol pole meets the joint spectrum");
    diag(k) = symbol.eval(z);
  }
  return ops::MatrixOperator(jd.v * diag.asDiagonal() * jd.v_inv);
}

CalcResult calc_extended(const sym::ExtendedSymbol& esym, const CalculusRequest& base) {
  const int n = esym.arity();
  if (base.tuple.arity() != n) throw PreconditionError("calc_extended: arity mismatch");
  CalculusRequest top_req = base;
  top_req.symbol = esym.top;
  CalcResult out = calc_ritt(top_req);
  MatrixXcd acc = out.value.entries;
  for (const auto& [omitted, f] : esym.lower) {
    CalculusRequest sub = base;
    sub.symbol = f;
    sub.tuple.ops.clear();
    sub.contour_angles.clear();
    sub.domain_angles.clear();
    for (int i = 0; i < n; ++i) {
      if (std::binary_search(omitted.begin(), omitted.end(), i)) continue;
      sub.tuple.ops.push_back(base.tuple.ops[i]);
      sub.contour_angles.push_back(base.contour_angles[i]);
      sub.domain_angles.push_back(base.domain_angles[i]);
    }
    CalcResult part = calc_ritt(sub);
    acc += part.value.entries;
    out.refine_delta = std::max(out.refine_delta, part.refine_delta);
  }
  acc += esym.constant * MatrixXcd::Identity(base.tuple.dim(), base.tuple.dim());
  out.value = ops::MatrixOperator(acc);
  return out;
}

LimitCheckReport limit_check_r_to_1(const CalculusRequest& req, std::vector<double> r_grid,
                                    double final_tol) {
  LimitCheckReport rep;
  std::sort(r_grid.begin(), r_grid.end());
  rep.r_grid = r_grid;
  MatrixXcd reference = calc_ritt(req).value.entries;
  for (double r : r_grid) {
    CalculusRequest scaled = req;
    scaled.tuple = ops::scale_tuple(req.tuple, r);
    rep.deviations.push_back(operator_norm(calc_ritt(scaled).value.entries - reference));
  }
  rep.monotone_ish = true;
  for (size_t i = 0; i + 1 < rep.deviations.size(); ++i)
    if (rep.deviations[i + 1] > rep.deviations[i] * 1.1 + 1e-12) rep.monotone_ish = false;
  rep.final_deviation = rep.deviations.empty() ? 0.0 : rep.deviations.back();
  rep.pass = rep.monotone_ish && rep.final_deviation <= final_tol;
  return rep;
}

SectorialApproxResult sectorial_approximation(const ops::MatrixOperator& a, double eps,
                                              const sym::Symbol& f, double nu, double theta,
                                              const QuadratureOptions& opts) {
  const int d = a.dim();
  const MatrixXcd eye = MatrixXcd::Identity(d, d);
  SectorialApproxResult out;
  if (eps == 0.0) {
    out.a_eps = a;
    out.deviation = 0.0;
    return out;
  }
  MatrixXcd denom = eye + eps * a.entries;
  Eigen::PartialPivLU<MatrixXcd> lu(denom);
  double rcond = 1.0 / condition_number(denom);
  if (!(rcond > 1e-14)) throw PreconditionError("sectorial_approximation: I + eps A singular");
  out.a_eps = ops::MatrixOperator((a.entries + eps * eye) * lu.solve(eye));

  CalculusRequest req;
  req.symbol = f;
  req.contour_angles = {nu};
  req.domain_angles = {theta};
  req.quadrature = opts;
  req.tuple.ops = {a};
  MatrixXcd fa = calc_sectorial(req).value.entries;
  req.tuple.ops = {out.a_eps};
  MatrixXcd fae = calc_sectorial(req).value.entries;
  out.deviation = operator_norm(fae - fa);
  return out;
}

ApproxSweepReport sectorial_approximation_sweep(const ops::MatrixOperator& a,
                                                const sym::Symbol& f, double nu, double theta,
                                                std::vector<double> eps_grid,
                                                const QuadratureOptions& opts) {
  ApproxSweepReport rep;
  std::sort(eps_grid.rbegin(), eps_grid.rend());  // large eps first
  rep.eps_grid = eps_grid;
  for (double eps : eps_grid)
    rep.deviations.push_back(sectorial_approximation(a, eps, f, nu, theta, opts).deviation);
  rep.monotone_decreasing = true;
  for (size_t i = 0; i + 1 < rep.deviations.size(); ++i)
    if (rep.deviations[i + 1] >= rep.deviations[i]) rep.monotone_decreasing = false;
  rep.pass = rep.monotone_decreasing && !rep.deviations.empty() && rep.deviations.back() < 1e-6;
  return rep;
}

BoundEstimate calculus_bound_estimate(const ops::CommutingTuple& tuple,
                                      std::span<const sym::Symbol> family,
                                      std::span<const sym::SpectralDomain> domains, CalcMode mode,
                                      const std::vector<double>& contour_angles,
                                      const std::vector<double>& domain_angles,
                                      const QuadratureOptions& opts, int sup_samples) {
  if (family.empty()) throw PreconditionError("calculus_bound_estimate: empty family");
  BoundEstimate out;
  for (size_t i = 0; i < family.size(); ++i) {
    const sym::Symbol& phi = family[i];
    double num;
    if (phi.is_polynomial() && !phi.certificate()) {
      num = poly_eval(phi, tuple).norm();
    } else {
      CalculusRequest req{tuple, phi, contour_angles, domain_angles, opts};
      num = (mode == CalcMode::Ritt ? calc_ritt(req) : calc_sectorial(req)).value.norm();
    }
    double den = sym::sup_norm(phi, domains, sup_samples).value;
    double ratio = den > 0 ? num / den : 0.0;
    out.ratios.push_back(ratio);
    if (ratio > out.k_est) {
      out.k_est = ratio;
      out.maximizer = static_cast<int>(i);
    }
  }
  return out;
}

}  // namespace jcalc::fc
