#include "jcalc/transfer.hpp"

#include <algorithm>
#include <cmath>

namespace jcalc::transfer {

namespace {

const Complex kTwoPiI(0.0, 2.0 * kPi);

std::vector<MatrixXcd> resolvent_grid(const MatrixXcd& a, const std::vector<Complex>& nodes) {
  const int d = static_cast<int>(a.rows());
  const MatrixXcd eye = MatrixXcd::Identity(d, d);
  std::vector<MatrixXcd> out;
  out.reserve(nodes.size());
  for (Complex z : nodes) out.push_back((z * eye - a).partialPivLu().solve(eye));
  return out;
}

Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
wf_matrix(const TransferContext& ctx) {
  return {ctx.wf.data(), ctx.total[0], ctx.total[1]};
}

// g-kernel for one variable: plain Cauchy kernel on the segment nodes,
// substituted kernel 1/(lambda (1+z)) on the arc nodes.
Complex g_kernel(const TransferContext& ctx, int var, int a, Complex z) {
  Complex lambda = ctx.full[var].nodes[a];
  if (a < ctx.split[var]) return Complex(1.0, 0.0) / (lambda - z);
  return Complex(1.0, 0.0) / (lambda * (Complex(1.0, 0.0) + z));
}

}  // namespace

Complex TransferContext::wf_at(std::span<const int> idx) const {
  int flat = 0;
  for (int i = 0; i < n; ++i) flat = flat * total[i] + idx[i];
  return wf[flat];
}

TransferContext build_transfer_context(const sym::Symbol& phi, std::vector<double> gamma,
                                       std::vector<double> beta, double theta,
                                       int nodes_per_panel, int corner_levels) {
  TransferContext ctx;
  ctx.n = phi.arity();
  if (static_cast<int>(gamma.size()) != ctx.n || static_cast<int>(beta.size()) != ctx.n)
    throw PreconditionError("transfer: need one gamma and one beta per variable");
  for (int i = 0; i < ctx.n; ++i)
    if (!(theta < beta[i]) || !(beta[i] < gamma[i]) || !(gamma[i] < kPi / 2))
      throw PreconditionError("transfer: angle chain theta < beta_i < gamma_i < pi/2 violated");
  if (!phi.certificate() || phi.certificate()->flavor != sym::DecayFlavor::StolzType)
    throw PreconditionError("transfer: phi needs a Stolz-type decay certificate");
  ctx.gamma = std::move(gamma);
  ctx.beta = std::move(beta);
  ctx.theta = theta;
  ctx.phi = phi;
  ctx.f = sym::pullback_one_minus(phi);
  ctx.c1 = phi.certificate()->c;
  ctx.s = phi.certificate()->s;

  ctx.full.resize(ctx.n);
  ctx.split.resize(ctx.n);
  ctx.total.resize(ctx.n);
  for (int i = 0; i < ctx.n; ++i) {
    geom::Contour g1 = geom::transfer_gamma1(ctx.beta[i], nodes_per_panel, corner_levels);
    geom::Contour g2 = geom::transfer_gamma2(ctx.beta[i], nodes_per_panel, corner_levels);
    // the teardrop closes up at cos(beta) e^{+-i beta}
    if (std::abs(g1.pieces.front().start - g2.pieces.back().end) > 1e-14 ||
        std::abs(g1.pieces.back().end - g2.pieces.front().start) > 1e-14)
      throw NumericalError("transfer: teardrop contour fails to close");
    ctx.split[i] = static_cast<int>(g1.nodes.size());
    geom::Contour full = g1;
    int offset = ctx.split[i];
    full.nodes.insert(full.nodes.end(), g2.nodes.begin(), g2.nodes.end());
    full.weights.insert(full.weights.end(), g2.weights.begin(), g2.weights.end());
    for (auto p : g2.pieces) {
      p.node_begin += offset;
      p.node_end += offset;
      full.pieces.push_back(p);
    }
    ctx.full[i] = std::move(full);
    ctx.total[i] = static_cast<int>(ctx.full[i].nodes.size());
  }

  // weighted f values on the tensor node grid
  if (ctx.n == 1) {
    MatrixXcd vals = ctx.f.eval_grid(ctx.full[0].nodes);
    ctx.wf.resize(ctx.total[0]);
    for (int a = 0; a < ctx.total[0]; ++a) ctx.wf[a] = ctx.full[0].weights[a] * vals(a, 0);
  } else if (ctx.n == 2) {
    MatrixXcd vals = ctx.f.eval_grid(ctx.full[0].nodes, ctx.full[1].nodes);
    ctx.wf.resize(static_cast<size_t>(ctx.total[0]) * ctx.total[1]);
    for (int a = 0; a < ctx.total[0]; ++a)
      for (int b = 0; b < ctx.total[1]; ++b)
        ctx.wf[static_cast<size_t>(a) * ctx.total[1] + b] =
            ctx.full[0].weights[a] * ctx.full[1].weights[b] * vals(a, b);
  } else {
    size_t count = 1;
    for (int i = 0; i < ctx.n; ++i) count *= ctx.total[i];
    if (count > (size_t{1} << 24))
      throw PreconditionError("transfer: node tensor too large; reduce nodes for n >= 3");
    ctx.wf.resize(count);
    std::vector<int> idx(ctx.n, 0);
    std::vector<Complex> z(ctx.n);
    size_t flat = 0;
    while (true) {
      Complex w(1.0, 0.0);
      for (int i = 0; i < ctx.n; ++i) {
        z[i] = ctx.full[i].nodes[idx[i]];
        w *= ctx.full[i].weights[idx[i]];
      }
      ctx.wf[flat++] = w * ctx.f.eval(z);
      int i = ctx.n - 1;
      while (i >= 0 && ++idx[i] == ctx.total[i]) idx[i--] = 0;
      if (i < 0) break;
    }
  }
  return ctx;
}

Complex eval_piece(const TransferContext& ctx, std::span<const int> piece_index,
                   std::span<const Complex> z) {
  const int n = ctx.n;
  if (static_cast<int>(piece_index.size()) != n || static_cast<int>(z.size()) != n)
    throw PreconditionError("eval_piece: arity mismatch");
  std::vector<int> lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    if (piece_index[i] != 1 && piece_index[i] != 2)
      throw PreconditionError("eval_piece: piece indices are 1 or 2");
    lo[i] = piece_index[i] == 1 ? 0 : ctx.split[i];
    hi[i] = piece_index[i] == 1 ? ctx.split[i] : ctx.total[i];
    for (int a = lo[i]; a < hi[i]; ++a)
      if (std::abs(ctx.full[i].nodes[a] - z[i]) < 1e-6)
        throw PreconditionError("eval_piece: z sits on a contour");
  }
  if (n == 2) {
    auto wfm = wf_matrix(ctx);
    Complex acc(0.0, 0.0);
    for (int a = lo[0]; a < hi[0]; ++a) {
      Complex ka = Complex(1.0, 0.0) / (ctx.full[0].nodes[a] - z[0]);
      Complex inner(0.0, 0.0);
      for (int b = lo[1]; b < hi[1]; ++b)
        inner += wfm(a, b) / (ctx.full[1].nodes[b] - z[1]);
      acc += ka * inner;
    }
    return acc / (kTwoPiI * kTwoPiI);
  }
  // generic odometer over the selected ranges
  std::vector<int> idx(lo);
  Complex acc(0.0, 0.0);
  while (true) {
    Complex k(1.0, 0.0);
    for (int i = 0; i < n; ++i) k /= (ctx.full[i].nodes[idx[i]] - z[i]);
    acc += ctx.wf_at(idx) * k;
    int i = n - 1;
    while (i >= 0 && ++idx[i] == hi[i]) {
      idx[i] = lo[i];
      --i;
    }
    if (i < 0) break;
  }
  Complex denom(1.0, 0.0);
  for (int i = 0; i < n; ++i) denom *= kTwoPiI;
  return acc / denom;
}

Complex eval_g(const TransferContext& ctx, std::span<const Complex> z) {
  const int n = ctx.n;
  if (static_cast<int>(z.size()) != n) throw PreconditionError("eval_g: arity mismatch");
  for (int i = 0; i < n; ++i)
    if (std::abs(z[i] + Complex(1.0, 0.0)) < 1e-9)
      throw PreconditionError("eval_g: z = -1 is a pole of the auxiliary denominators");
  if (n == 2) {
    auto wfm = wf_matrix(ctx);
    VectorXcd u(ctx.total[0]), v(ctx.total[1]);
    for (int a = 0; a < ctx.total[0]; ++a) u(a) = g_kernel(ctx, 0, a, z[0]);
    for (int b = 0; b < ctx.total[1]; ++b) v(b) = g_kernel(ctx, 1, b, z[1]);
    Complex acc = u.transpose() * (wfm * v);
    return acc / (kTwoPiI * kTwoPiI);
  }
  std::vector<int> idx(n, 0);
  Complex acc(0.0, 0.0);
  while (true) {
    Complex k(1.0, 0.0);
    for (int i = 0; i < n; ++i) k *= g_kernel(ctx, i, idx[i], z[i]);
    acc += ctx.wf_at(idx) * k;
    int i = n - 1;
    while (i >= 0 && ++idx[i] == ctx.total[i]) idx[i--] = 0;
    if (i < 0) break;
  }
  Complex denom(1.0, 0.0);
  for (int i = 0; i < n; ++i) denom *= kTwoPiI;
  return acc / denom;
}

MatrixXcd eval_g_grid(const TransferContext& ctx, const std::vector<Complex>& a,
                      const std::vector<Complex>& b) {
  if (ctx.n != 2) throw PreconditionError("eval_g_grid: n == 2 only");
  auto wfm = wf_matrix(ctx);
  MatrixXcd u(static_cast<int>(a.size()), ctx.total[0]);
  MatrixXcd v(static_cast<int>(b.size()), ctx.total[1]);
  for (size_t p = 0; p < a.size(); ++p)
    for (int k = 0; k < ctx.total[0]; ++k) u(static_cast<int>(p), k) = g_kernel(ctx, 0, k, a[p]);
  for (size_t p = 0; p < b.size(); ++p)
    for (int k = 0; k < ctx.total[1]; ++k) v(static_cast<int>(p), k) = g_kernel(ctx, 1, k, b[p]);
  return (u * wfm * v.transpose()) / (kTwoPiI * kTwoPiI);
}

double cauchy_residual(const TransferContext& ctx, std::span<const Complex> z) {
  // summing the plain Cauchy kernels over all pieces collapses to one
  // contraction over the full contours
  const int n = ctx.n;
  Complex acc(0.0, 0.0);
  if (n == 2) {
    auto wfm = wf_matrix(ctx);
    VectorXcd u(ctx.total[0]), v(ctx.total[1]);
    for (int a = 0; a < ctx.total[0]; ++a)
      u(a) = Complex(1.0, 0.0) / (ctx.full[0].nodes[a] - z[0]);
    for (int b = 0; b < ctx.total[1]; ++b)
      v(b) = Complex(1.0, 0.0) / (ctx.full[1].nodes[b] - z[1]);
    acc = u.transpose() * (wfm * v);
    acc /= (kTwoPiI * kTwoPiI);
  } else {
    std::vector<int> idx(n, 0);
    while (true) {
      Complex k(1.0, 0.0);
      for (int i = 0; i < n; ++i) k /= (ctx.full[i].nodes[idx[i]] - z[i]);
      acc += ctx.wf_at(idx) * k;
      int i = n - 1;
      while (i >= 0 && ++idx[i] == ctx.total[i]) idx[i--] = 0;
      if (i < 0) break;
    }
    Complex denom(1.0, 0.0);
    for (int i = 0; i < n; ++i) denom *= kTwoPiI;
    acc /= denom;
  }
  return std::abs(acc - ctx.f.eval(z));
}

namespace {

std::vector<Complex> regime_axis(const TransferContext& ctx, bool small, int points_per_decade) {
  const double lo = small ? 1e-3 : 4.0;
  const double hi = small ? 0.25 : 1e3;
  int count = std::max(4, static_cast<int>(std::log10(hi / lo) * points_per_decade));
  std::vector<double> angles{0.0, ctx.theta * 0.45, -ctx.theta * 0.45, ctx.theta * 0.85,
                             -ctx.theta * 0.85};
  std::vector<Complex> out;
  out.reserve(static_cast<size_t>(count + 1) * angles.size());
  for (int i = 0; i <= count; ++i) {
    double r = lo * std::pow(hi / lo, static_cast<double>(i) / count);
    for (double psi : angles) out.push_back(std::polar(r, psi));
  }
  return out;
}

double regime_ratio(const TransferContext& ctx, const std::vector<std::vector<Complex>>& axes) {
  auto weight = [&](Complex z) {
    double r = std::abs(z);
    return std::min(std::pow(r, ctx.s), 1.0 / r);
  };
  double worst = 0.0;
  if (ctx.n == 2) {
    MatrixXcd g = eval_g_grid(ctx, axes[0], axes[1]);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) {
        double denom = weight(axes[0][i]) * weight(axes[1][j]);
        worst = std::max(worst, std::abs(g(i, j)) / denom);
      }
    return worst;
  }
  std::vector<int> idx(ctx.n, 0);
  std::vector<Complex> z(ctx.n);
  while (true) {
    double denom = 1.0;
    for (int i = 0; i < ctx.n; ++i) {
      z[i] = axes[i][idx[i]];
      denom *= weight(z[i]);
    }
    worst = std::max(worst, std::abs(eval_g(ctx, z)) / denom);
    int i = ctx.n - 1;
    while (i >= 0 && ++idx[i] == static_cast<int>(axes[i].size())) idx[i--] = 0;
    if (i < 0) break;
  }
  return worst;
}

}  // namespace

GDecayReport check_g_decay(const TransferContext& ctx, int points_per_decade,
                           double stabilization_tol) {
  GDecayReport rep;
  const int n = ctx.n;
  for (int mask = 0; mask < (1 << n); ++mask) {
    GDecayRegime regime;
    std::vector<std::vector<Complex>> axes(n), axes2(n);
    for (int i = 0; i < n; ++i) {
      bool small = (mask >> i) & 1;
      if (i < 2) regime.small[i] = small;
      axes[i] = regime_axis(ctx, small, points_per_decade);
      axes2[i] = regime_axis(ctx, small, 2 * points_per_decade);
    }
    regime.ratio = regime_ratio(ctx, axes);
    regime.ratio_refined = regime_ratio(ctx, axes2);
    double scale = std::max({regime.ratio, regime.ratio_refined, 1e-300});
    regime.stabilized = std::abs(regime.ratio - regime.ratio_refined) <= stabilization_tol * scale;
    rep.regimes.push_back(regime);
  }
  rep.pass = std::all_of(rep.regimes.begin(), rep.regimes.end(),
                         [](const GDecayRegime& r) { return r.stabilized; });
  return rep;
}

namespace {

std::vector<Complex> sector_sup_axis(double theta, int samples) {
  // distinguished boundary of Sigma_theta, log radii in |t| <= 14
  std::vector<Complex> out;
  out.reserve(2 * samples + 2);
  for (int i = 0; i <= samples; ++i) {
    double t = -14.0 + 28.0 * i / samples;
    out.push_back(std::polar(std::exp(t), theta));
    out.push_back(std::polar(std::exp(t), -theta));
  }
  return out;
}

double sup_g(const TransferContext& ctx, int samples) {
  auto axis = sector_sup_axis(ctx.theta, samples);
  double best = 0.0;
  if (ctx.n == 2) {
    MatrixXcd g = eval_g_grid(ctx, axis, axis);
    best = g.cwiseAbs().maxCoeff();
  } else if (ctx.n == 1) {
    std::vector<Complex> z(1);
    for (Complex p : axis) {
      z[0] = p;
      best = std::max(best, std::abs(eval_g(ctx, z)));
    }
  } else {
    throw PreconditionError("sup_g: n <= 2");
  }
  return best;
}

}  // namespace

GSupnormReport check_g_supnorm(std::span<const sym::Symbol> phis, std::vector<double> gamma,
                               std::vector<double> beta, double theta, int samples,
                               double stabilization_tol) {
  if (phis.size() < 10)
    throw PreconditionError("check_g_supnorm: need a family of at least 10 symbols");
  GSupnormReport rep;
  for (const auto& phi : phis) {
    TransferContext ctx = build_transfer_context(phi, gamma, beta, theta);
    std::vector<sym::SpectralDomain> doms;
    for (double g : gamma) doms.emplace_back(geom::StolzDomain(g));
    // sup |f| over prod Delta_gamma equals sup |phi| over prod B_gamma
    double f_sup = sym::sup_norm(phi, doms, samples).value;
    double f_sup2 = sym::sup_norm(phi, doms, 2 * samples).value;
    if (f_sup <= 0.0) throw PreconditionError("check_g_supnorm: zero symbol in the family");
    rep.ratios.push_back(sup_g(ctx, samples) / f_sup);
    rep.ratios_refined.push_back(sup_g(ctx, 2 * samples) / f_sup2);
  }
  rep.max_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  rep.max_ratio_refined =
      *std::max_element(rep.ratios_refined.begin(), rep.ratios_refined.end());
  rep.relative_change =
      std::abs(rep.max_ratio - rep.max_ratio_refined) / std::max(rep.max_ratio, 1e-300);
  rep.pass = rep.relative_change < stabilization_tol;
  return rep;
}

ForwardReport transfer_forward(const sym::Symbol& f_sector, const ops::CommutingTuple& T,
                               const std::vector<double>& gamma,
                               const fc::QuadratureOptions& opts) {
  const int n = T.arity();
  if (f_sector.arity() != n || static_cast<int>(gamma.size()) != n)
    throw PreconditionError("transfer_forward: arity mismatch");
  if (!f_sector.certificate() || f_sector.certificate()->flavor != sym::DecayFlavor::SectorType)
    throw PreconditionError("transfer_forward: f needs a sector-type certificate");

  ops::CommutingTuple A = T;
  std::vector<double> nu(n), beta(n);
  for (int i = 0; i < n; ++i) {
    const int d = T.ops[i].dim();
    A.ops[i] = ops::MatrixOperator(MatrixXcd::Identity(d, d) - T.ops[i].entries);
    double omega = 0.0;
    for (Complex ev : ops::spectrum(A.ops[i]).eigenvalues)
      if (std::abs(ev) > 1e-14) omega = std::max(omega, std::abs(std::arg(ev)));
    if (!(omega < gamma[i]))
      throw PreconditionError("transfer_forward: A_i not sectorial of type below gamma_i");
    nu[i] = 0.5 * (omega + gamma[i]);
    double alpha = geom::minimal_stolz_angle(ops::spectrum(T.ops[i]).eigenvalues).alpha;
    beta[i] = 0.5 * (alpha + gamma[i]);
  }

  fc::CalculusRequest sec_req{A, f_sector, nu, gamma, opts};
  MatrixXcd fa = fc::calc_sectorial(sec_req).value.entries;

  fc::CalculusRequest ritt_req{T, sym::pullback_one_minus(f_sector), beta, gamma, opts};
  MatrixXcd pt = fc::calc_ritt(ritt_req).value.entries;

  ForwardReport rep;
  rep.f_of_a_norm = operator_norm(fa);
  rep.mismatch = operator_norm(fa - pt);
  rep.pass = rep.mismatch <= 1e-7 * (1.0 + rep.f_of_a_norm);
  return rep;
}

ReverseReport assemble_reverse_n2(const TransferContext& ctx, const ops::MatrixOperator& a1,
                                  const ops::MatrixOperator& a2,
                                  const fc::QuadratureOptions& opts, int cauchy_samples,
                                  uint64_t seed) {
  if (ctx.n != 2) throw PreconditionError("assemble_reverse_n2: n == 2 contexts only");
  if (a1.dim() != a2.dim()) throw PreconditionError("assemble_reverse_n2: dimension mismatch");
  const int d = a1.dim();
  const MatrixXcd eye = MatrixXcd::Identity(d, d);
  const ops::MatrixOperator* as[2] = {&a1, &a2};

  double omega_max = 0.0;
  for (const auto* a : as)
    for (Complex ev : ops::spectrum(*a).eigenvalues)
      if (std::abs(ev) > 1e-14) omega_max = std::max(omega_max, std::abs(std::arg(ev)));
  if (!(omega_max < ctx.theta))
    throw PreconditionError("assemble_reverse_n2: A_i not sectorial of type below theta");
  const double theta_prime = 0.5 * (omega_max + ctx.theta);

  // one sector rule shared by every auxiliary-function evaluation
  geom::SectorDecay decay{10.0 * std::max(1.0, ctx.c1), std::min(ctx.s, 1.0)};
  geom::Contour sec = geom::sector_boundary_contour(theta_prime, decay, opts.sector_tail,
                                                    opts.sector_nodes_per_unit_t);
  for (const auto* a : as)
    if (sec.min_distance(ops::spectrum(*a).eigenvalues) < 1e-6)
      throw NumericalError("assemble_reverse_n2: sector contour meets the spectrum");

  // kernel operators per tuple slot
  std::vector<MatrixXcd> kres[2];   // curly-K on the segment nodes  ~ R(lambda, A_i)
  std::vector<MatrixXcd> rarc[2];   // direct resolvents on the arc nodes
  MatrixXcd cop[2];                 // ~ (I + A_i)^{-1} through the same sector rule
  for (int i = 0; i < 2; ++i) {
    auto rsec = resolvent_grid(as[i]->entries, sec.nodes);
    cop[i] = MatrixXcd::Zero(d, d);
    for (size_t c = 0; c < sec.nodes.size(); ++c)
      cop[i] += sec.weights[c] / (Complex(1.0, 0.0) + sec.nodes[c]) * rsec[c];
    cop[i] /= kTwoPiI;
    kres[i].assign(ctx.split[i], MatrixXcd::Zero(d, d));
    for (int a = 0; a < ctx.split[i]; ++a) {
      Complex lambda = ctx.full[i].nodes[a];
      for (size_t c = 0; c < sec.nodes.size(); ++c)
        kres[i][a] += sec.weights[c] / (lambda - sec.nodes[c]) * rsec[c];
      kres[i][a] /= kTwoPiI;
    }
    rarc[i].reserve(ctx.total[i] - ctx.split[i]);
    for (int a = ctx.split[i]; a < ctx.total[i]; ++a)
      rarc[i].push_back((ctx.full[i].nodes[a] * eye - as[i]->entries).partialPivLu().solve(eye));
  }

  auto wfm = wf_matrix(ctx);
  const auto& n1 = ctx.full[0].nodes;
  const auto& n2 = ctx.full[1].nodes;
  const int s1 = ctx.split[0], t1 = ctx.total[0];
  const int s2 = ctx.split[1], t2 = ctx.total[1];
  const Complex norm2 = kTwoPiI * kTwoPiI;

  // f_{2,2}(0,0)
  Complex f22_00(0.0, 0.0);
  for (int a = s1; a < t1; ++a)
    for (int b = s2; b < t2; ++b) f22_00 += wfm(a, b) / (n1[a] * n2[b]);
  f22_00 /= norm2;

  // g(A1, A2): kernel-separated (JO) quadrature of the auxiliary function
  MatrixXcd g_op = MatrixXcd::Zero(d, d);
  {
    MatrixXcd inner(d, d);
    MatrixXcd arc_accum = MatrixXcd::Zero(d, d);
    for (int a = 0; a < t1; ++a) {
      inner.setZero();
      Complex arc_coeff(0.0, 0.0);
      for (int b = 0; b < s2; ++b) inner += wfm(a, b) * kres[1][b];
      for (int b = s2; b < t2; ++b) arc_coeff += wfm(a, b) / n2[b];
      inner += arc_coeff * cop[1];
      if (a < s1) {
        g_op += kres[0][a] * inner;
      } else {
        arc_accum += inner / n1[a];
      }
    }
    g_op += cop[0] * arc_accum;
    g_op /= norm2;
  }

  // gtilde(A_1) = [f_{1,2}(., 0) + f_{2,2}(0,0)/(1+.)](A_1), then strip the
  // direct correction to get f_{1,2}(A_1, 0); mirrored for f_{2,1}(0, A_2)
  MatrixXcd inv1 = (eye + a1.entries).partialPivLu().solve(eye);
  MatrixXcd inv2 = (eye + a2.entries).partialPivLu().solve(eye);
  MatrixXcd f12_a1_0 = MatrixXcd::Zero(d, d);
  {
    MatrixXcd gt = MatrixXcd::Zero(d, d);
    for (int a = 0; a < s1; ++a) {
      Complex coeff(0.0, 0.0);
      for (int b = s2; b < t2; ++b) coeff += wfm(a, b) / n2[b];
      gt += coeff * kres[0][a];
    }
    gt /= norm2;
    gt += f22_00 * cop[0];
    f12_a1_0 = gt - f22_00 * inv1;
  }
  MatrixXcd f21_0_a2 = MatrixXcd::Zero(d, d);
  {
    MatrixXcd gt = MatrixXcd::Zero(d, d);
    for (int b = 0; b < s2; ++b) {
      Complex coeff(0.0, 0.0);
      for (int a = s1; a < t1; ++a) coeff += wfm(a, b) / n1[a];
      gt += coeff * kres[1][b];
    }
    gt /= norm2;
    gt += f22_00 * cop[1];
    f21_0_a2 = gt - f22_00 * inv2;
  }

  MatrixXcd f11_op =
      g_op - inv2 * f12_a1_0 - inv1 * f21_0_a2 - f22_00 * (inv1 * inv2);

  // f_{1,2}(A_1, A_2): outer Dunford integral over the arc in variable 2 of
  // g^{lambda_2}(A_1), minus the scalar-in-lambda_1 Dunford correction
  MatrixXcd f12_op = MatrixXcd::Zero(d, d);
  {
    MatrixXcd m_corr = MatrixXcd::Zero(d, d);  // sum_b S2(b) Rarc2[b]
    for (int b = s2; b < t2; ++b) {
      MatrixXcd p = MatrixXcd::Zero(d, d);
      for (int a = 0; a < s1; ++a) p += wfm(a, b) * kres[0][a];
      f12_op += p * rarc[1][b - s2];
      Complex s2b(0.0, 0.0);
      for (int a = s1; a < t1; ++a) s2b += wfm(a, b) / n1[a];
      m_corr += s2b * rarc[1][b - s2];
    }
    f12_op += cop[0] * m_corr - m_corr;
    f12_op /= norm2;
  }
  MatrixXcd f21_op = MatrixXcd::Zero(d, d);
  {
    MatrixXcd m_corr = MatrixXcd::Zero(d, d);
    for (int a = s1; a < t1; ++a) {
      MatrixXcd p = MatrixXcd::Zero(d, d);
      for (int b = 0; b < s2; ++b) p += wfm(a, b) * kres[1][b];
      f21_op += rarc[0][a - s1] * p;
      Complex s1a(0.0, 0.0);
      for (int b = s2; b < t2; ++b) s1a += wfm(a, b) / n2[b];
      m_corr += s1a * rarc[0][a - s1];
    }
    f21_op += m_corr * cop[1] - m_corr;
    f21_op /= norm2;
  }

  MatrixXcd f22_op = MatrixXcd::Zero(d, d);
  for (int a = s1; a < t1; ++a)
    for (int b = s2; b < t2; ++b) f22_op += wfm(a, b) * (rarc[0][a - s1] * rarc[1][b - s2]);
  f22_op /= norm2;

  ReverseReport rep;
  rep.assembled = ops::MatrixOperator(f11_op + f12_op + f21_op + f22_op);

  // reference: the direct Ritt calculus of phi on T_i = I - A_i
  ops::CommutingTuple T;
  T.ops.emplace_back(MatrixXcd(eye - a1.entries));
  T.ops.emplace_back(MatrixXcd(eye - a2.entries));
  fc::CalculusRequest req{T, ctx.phi, ctx.beta, ctx.gamma, opts};
  MatrixXcd phi_t = fc::calc_ritt(req).value.entries;
  rep.phi_of_t_norm = operator_norm(phi_t);
  rep.mismatch = operator_norm(rep.assembled.entries - phi_t);

  // Cauchy reconstruction residuals on interior points of prod Delta_beta
  Rng rng(seed);
  std::vector<Complex> z(2);
  for (int k = 0; k < cauchy_samples; ++k) {
    for (int i = 0; i < 2; ++i) {
      sym::SpectralDomain dom = geom::ShiftedStolz(ctx.beta[i] * 0.85);
      Complex zi = sym::sample_domain_interior(dom, rng);
      // stay clear of the contour
      int guard = 0;
      while (ctx.full[i].min_distance(std::span<const Complex>(&zi, 1)) < 2e-3 && guard++ < 64)
        zi = sym::sample_domain_interior(dom, rng);
      z[i] = zi;
    }
    rep.cauchy_residual_max = std::max(rep.cauchy_residual_max, cauchy_residual(ctx, z));
  }

  rep.pass = rep.mismatch <= 1e-6 * (1.0 + rep.phi_of_t_norm) && rep.cauchy_residual_max <= 1e-8;
  return rep;
}

}  // namespace jcalc::transfer
