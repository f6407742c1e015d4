#include "qpr/kam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qpr {

namespace {

constexpr double INF = std::numeric_limits<double>::infinity();

double errsum(const MatrixFunction& M) {
  double s = 0;
  for (const auto& e : M.m) s += e.err;
  return s;
}

double axis_norm(const MatrixFunction& M, int samples = 128) {
  double best = 0;
  for (int s = 0; s < samples; ++s)
    best = std::max(best, M.eval(Complex((double)s / samples, 0)).norm2());
  return best;
}

AnalyticFunction constant_like(const AnalyticFunction& f, double v) {
  return AnalyticFunction::constant(Complex(v, 0), f.L, f.h);
}

// 2 pi frac(n * rho) with exact rational reduction of the double rho
double reduced_angle_of_rho(const BigInt& n, double rho) {
  Rational f = frac(Rational(n) * Rational(rho));
  return TWO_PI * f.get_d();
}

// exact ||2 n rho||_T for double rho
double torus_2q_rho(const BigInt& n, double rho) {
  return torus_dist(Rational(2 * n) * Rational(rho)).get_d();
}

// err amplification bound for Birkhoff sums: 2 / min_{1<=l<=band} ||l alpha||
double birkhoff_err_amp(const ContinuedFraction& cf, int band) {
  int best = -1;
  for (int k = 0; k < (int)cf.q.size(); ++k) {
    if (cf.q[k] <= band) best = k;
  }
  if (best < 0) return -1;
  // best-approximation: min over l <= band is attained at the largest q_k <= band
  Rational d = cf.qk_dist(best);
  double dd = d.get_d();
  if (dd <= 0) {
    if (best == 0) return -1;
    dd = cf.qk_dist(best - 1).get_d(); // surrogate tail: back off one level
  }
  if (dd <= 0) return -1;
  return 2.0 / dd;
}

} // namespace

std::string to_string(KamStatus s) {
  switch (s) {
    case KamStatus::converged: return "converged";
    case KamStatus::stalled: return "stalled";
    case KamStatus::precondition_failed: return "precondition_failed";
  }
  return "?";
}

long double log_U(const SelectedSubsequence& seq, int k,
                  const DiophantineParams& params) {
  long double lq = log_big(seq.Q[k]);
  long double lqb = log_big(seq.Qbar[k]);
  long double t1 = lqb - (long double)params.b * lq;
  long double T1 = t1 > 700 ? 1e300L : expl(t1);
  long double t2 = (long double)params.a * lqb;
  long double T2 = t2 > 700 ? 1e300L : expl(t2);
  return -(T1 + T2);
}

EllipticResult elliptic_normalize(const MatrixFunction& A,
                                  const AnalyticFunction& theta, int max_iter,
                                  const KamConfig& cfg) {
  const double h = A.h;
  const int L = A.L;
  EllipticResult res;
  EllipticReport& rep = res.report;

  if (A.norm_upper(h) >= 2 * cfg.D) throw DomainError("not in elliptic domain");
  rep.r2 = dist_id_upper(MatrixFunction::rot_of(theta * 2.0), h);

  MatrixFunction Acur = A;
  AnalyticFunction th = theta;
  MatrixFunction B = MatrixFunction::identity(L, h);

  MatrixFunction E = mul(Acur, MatrixFunction::rot_of(th * (-1.0)));
  double dist = dist_id_upper(E, h);
  rep.initial_dist = dist;
  if (dist >= cfg.el_eps * std::max(1.0, rep.r2 * rep.r2))
    throw DomainError("not in elliptic domain");

  double prev = INF;
  int grew = 0;
  int it = 0;
  for (; it < max_iter; ++it) {
    if (dist < cfg.stop_floor) break;
    // residual indistinguishable from the arithmetic budget of E itself
    if (dist <= 2 * E.err_sum() + cfg.stop_floor) break;
    if (it > 0 && dist >= prev) {
      if (prev < 1e-8) break; // converged to the arithmetic floor
      if (++grew >= 2) throw DomainError("normalization diverged");
    } else {
      grew = 0;
    }
    if (it > 0 && dist > 0.25 * prev && dist < 1e-8) break; // floor stall
    prev = dist;

    MatrixFunction v;
    try {
      v = log_near_id(E);
    } catch (const DomainError&) {
      throw DomainError(it == 0 ? "not in elliptic domain"
                                : "normalization diverged");
    }
    AnalyticFunction x = (v.a() - v.d()) * 0.5;
    AnalyticFunction y = (v.b() + v.c()) * 0.5;
    AnalyticFunction z = (v.c() - v.b()) * 0.5;

    MatrixFunction R2 = MatrixFunction::rot_of(th * 2.0);
    AnalyticFunction cos2 = R2.a();
    AnalyticFunction sin2 = R2.c();
    AnalyticFunction den = constant_like(cos2, 2.0) - cos2 * 2.0; // 2 - 2cos
    AnalyticFunction rec;
    try {
      rec = reciprocal(den);
    } catch (const DomainError&) {
      throw DomainError(it == 0 ? "not in elliptic domain"
                                : "normalization diverged");
    }
    AnalyticFunction cm1 = cos2 - constant_like(cos2, 1.0);
    AnalyticFunction xt = mul(rec, mul(cm1, x) + mul(sin2, y));
    AnalyticFunction yt = mul(rec, mul(cm1, y) - mul(sin2, x));

    MatrixFunction w(L, h);
    w.a() = xt;
    w.b() = yt;
    w.c() = yt;
    w.d() = xt * (-1.0);
    MatrixFunction Ew = exp_traceless(w);
    MatrixFunction Ewm = exp_traceless(w * (-1.0));
    Acur = mul(Ew, mul(Acur, Ewm));
    th += z;
    if (theta.real_symmetric) th.symmetrize();
    B = mul(Ew, B);

    E = mul(Acur, MatrixFunction::rot_of(th * (-1.0)));
    dist = dist_id_upper(E, h);
  }

  rep.iterations = it;
  rep.final_dist = dist;
  if (theta.real_symmetric && A.real_symmetric()) B.symmetrize();
  rep.B_dist = dist_id_upper(B, h);
  rep.bound_ratio =
      rep.initial_dist > 0
          ? rep.B_dist * std::max(1e-30, rep.r2 * rep.r2) / rep.initial_dist
          : 0;
  res.B = B;
  res.theta_prime = th;
  return res;
}

CtStepResult ct_step(double bar_alpha, const MatrixFunction& bar_A,
                     const AnalyticFunction& bar_phi, double delta, double hcur,
                     const KamConfig& cfg) {
  CtStepResult out;
  CtStepReport& rep = out.report;
  const double h = std::min(hcur, bar_A.h);
  MatrixFunction A = bar_A.restrict_to(h);
  AnalyticFunction phi = bar_phi.restrict_to(h);

  AnalyticFunction dev = phi - constant_like(phi, phi.mean().real());
  if (dev.norm_upper(h) > cfg.D)
    throw DomainError("CT preconditions violated: phi deviation");
  rep.rho_inv = inv_norm_rot_minus_id(phi * 2.0, h);
  if (!std::isfinite(rep.rho_inv))
    throw DomainError("CT preconditions violated: rho");
  RotationForm f0 = to_rotation_form(A, phi);
  rep.xi0 = f0.xi.norm_upper(h);

  if (cfg.adaptive) {
    if (rep.xi0 > cfg.el_eps ||
        std::pow(rep.rho_inv, 4.0) * rep.xi0 > 1.0)
      throw DomainError("CT preconditions violated");
  } else {
    if (rep.rho_inv >= std::pow(cfg.eps0, -0.25) || rep.xi0 >= cfg.eps0)
      throw DomainError("CT preconditions violated");
  }

  const double rho = 1.0 / rep.rho_inv;
  const double aa = std::max(std::abs(bar_alpha), 1e-300);
  rep.N_formula = (int)std::floor(delta * h * rho * rho / (cfg.c1 * aa));
  rep.target_formula =
      cfg.c0 * std::exp(-h * delta * rho * rho / (cfg.c0 * aa)) * rep.xi0;
  if (!cfg.adaptive && rep.N_formula < 1)
    throw DomainError("CT preconditions violated: empty inner budget");
  const int N = cfg.adaptive ? cfg.max_inner : rep.N_formula;
  const int Nsched = std::max(N, 1);
  const double inner_target =
      std::max(cfg.stop_floor, 0.01 * cfg.tol_residual * rho);

  MatrixFunction B = MatrixFunction::identity(A.L, h);
  MatrixFunction Acur = A;
  AnalyticFunction phicur = phi;
  double xi_prev = rep.xi0;

  for (int i = 0; i < N; ++i) {
    const double h_i = h * std::exp(-delta * (i + 1) / (3.0 * Nsched));
    EllipticResult el;
    try {
      el = elliptic_normalize(Acur.restrict_to(h_i), phicur.restrict_to(h_i),
                              40, cfg);
    } catch (const DomainError& e) {
      if (i == 0)
        throw DomainError(std::string("CT preconditions violated: ") +
                          e.what());
      rep.stop_note = e.what();
      break; // keep the progress made so far
    }
    AnalyticFunction phinext = el.theta_prime;
    // stage boundary: the computed coefficients are the candidate
    MatrixFunction Bi = el.B;
    Bi.reset_err();
    phinext.reset_err();
    MatrixFunction Anext =
        mul(mul(shift(Bi, bar_alpha), Bi.adjugate()),
            MatrixFunction::rot_of(phinext));
    Anext.reset_err();
    RotationForm f = to_rotation_form(Anext, phinext);
    const double xin = f.xi.norm_upper(h_i);
    const double ratio = xi_prev > 0 ? xin / xi_prev : 0;
    rep.inner.push_back({i, h_i, xin, el.report.B_dist, ratio});
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (!cfg.adaptive && ratio > 1.0 / cfg.c2)
      throw DomainError("contraction lost at step " + std::to_string(i));
    B = mul(Bi, B);
    B.reset_err();
    Acur = Anext;
    phicur = phinext;
    xi_prev = xin;
    if (cfg.adaptive && (xin <= inner_target || ratio > 0.7)) break;
  }

  rep.N_used = (int)rep.inner.size();
  const double hend = h * std::exp(-delta / 3.0);
  out.B = B.restrict_to(std::min(B.h, hend));
  out.phi = phicur.restrict_to(out.B.h);
  // one-shot certificate of the returned conjugation against the input:
  // A_N = B(x+bar alpha) bar_A B(x)^{-1}, inverse via adjugate/det
  {
    AnalyticFunction detB = out.B.det();
    AnalyticFunction rdet = reciprocal(detB);
    MatrixFunction Acand = scalar_mul(
        mul(shift(out.B, bar_alpha),
            mul(A.restrict_to(out.B.h), out.B.adjugate())),
        rdet);
    out.A = Acand;
    RotationForm fN = to_rotation_form(Acand, out.phi);
    rep.xi_final = fN.xi.norm_upper(out.B.h);
  }
  return out;
}

RotExtract rot_extract(const MatrixFunction& M, double hp) {
  MatrixFunction K = M - qsym(M); // exactly of the form p id + q J
  AnalyticFunction p = (K.a() + K.d()) * 0.5;
  AnalyticFunction q = (K.c() - K.b()) * 0.5;
  AnalyticFunction u = p + q * Complex(0, 1);
  AnalyticFunction w = p + q * Complex(0, -1);
  AnalyticFunction lu, lw;
  try {
    lu = log_near_const(u);
    lw = log_near_const(w);
  } catch (const DomainError&) {
    throw DomainError("degenerate symmetrization");
  }
  RotExtract out;
  out.phi = (lu - lw) * Complex(0, -0.5);
  if (M.real_symmetric()) out.phi.symmetrize();
  out.phi = out.phi.restrict_to(std::min(out.phi.h, hp));
  out.qsym_norm = qsym(M).norm_upper(hp);
  return out;
}

CtCommutingResult ct_commuting(const MatrixFunction& B, const Frequency& alpha,
                               const MatrixFunction& A,
                               const AnalyticFunction& phi, double bar_alpha,
                               const MatrixFunction& bar_A, double rho_inv,
                               double delta, double hcur, const KamConfig& cfg) {
  CtCommutingResult out;
  CtCommutingReport& rep = out.report;
  const double h2 = hcur * std::exp(-2.0 * delta / 3.0);
  const double h3 = hcur * std::exp(-delta);
  const double ad = alpha.approx;

  // commutation of (alpha, A) and (bar alpha, bar A) on a real grid
  {
    const int G = cfg.grid;
    double defect = 0;
    for (int s = 0; s < G; ++s) {
      double x = (double)s / G;
      Mat2 lhs = bar_A.eval(Complex(x, 0));
      lhs = A.eval(Complex(x + bar_alpha, 0)) * lhs;
      Mat2 rhs = A.eval(Complex(x, 0));
      rhs = bar_A.eval(Complex(x + ad, 0)) * rhs;
      defect = std::max(defect, (lhs - rhs).norm2());
    }
    rep.commutation_defect = defect;
    const double na = axis_norm(A), nb = axis_norm(bar_A);
    const double scale = std::max(1.0, na * nb);
    const double slack = 10 * (errsum(A) * nb + errsum(bar_A) * na);
    if (defect > 1e-10 * scale + slack) throw DomainError("not commuting");
  }

  AnalyticFunction rdetB = reciprocal(B.det());
  MatrixFunction At = scalar_mul(
      mul(shift(B, ad), mul(A.restrict_to(B.h), B.adjugate())), rdetB);
  MatrixFunction Lq = qsym(At);
  rep.L_norm = Lq.norm_upper(h3);

  AnalyticFunction psi = shift(phi, ad) + phi;
  rep.rotated_sum_inv = inv_norm_rot_minus_id(psi, h2);
  if (!cfg.adaptive && !(rep.rotated_sum_inv < 3 * rho_inv))
    throw DomainError("CT preconditions violated: rotated sum");

  // bound-chain diagnostics of the proof, over strips between h2 and h3
  MatrixFunction L1 = shift(Lq, bar_alpha) - Lq;
  MatrixFunction L2 = qsym(mul(At, MatrixFunction::rot_of(phi)) -
                           mul(MatrixFunction::rot_of(shift(phi, ad)), At));
  for (int j = 0; j <= 3; ++j) {
    double hn = h2 * std::pow(h3 / h2, j / 3.0);
    rep.L_levels.push_back(Lq.norm_upper(hn));
    rep.L1_levels.push_back(L1.norm_upper(hn));
    rep.L2_levels.push_back(L2.norm_upper(hn));
  }
  const double rho = 1.0 / rho_inv;
  const double aa = std::max(std::abs(bar_alpha), 1e-300);
  rep.chain_bound =
      cfg.c0 * std::exp(-hcur * delta * rho * rho / (cfg.c0 * aa));

  RotExtract ex = rot_extract(At.restrict_to(h3), h3);
  out.phi2 = ex.phi;
  out.A2 = At.restrict_to(h3);
  RotationForm f = to_rotation_form(out.A2, out.phi2);
  rep.residual = f.xi.norm_upper(h3);
  return out;
}

AqResult aq_iterate(const RotationForm& form, const Frequency& alpha,
                    const ContinuedFraction& cf, const SelectedSubsequence& seq,
                    int k, double h_target, const KamConfig& cfg) {
  if (k + 1 >= seq.size()) throw DomainError("ladder exhausted");
  const DiophantineParams params = cfg.dioph();
  AqResult out;
  AqReport& rep = out.report;
  out.Q = seq.Q[k + 1];

  const double hin = form.xi.h;
  AnalyticFunction dev_in =
      form.phi - constant_like(form.phi, form.phi.mean().real());
  if (dev_in.norm_upper(hin) > cfg.D)
    throw DomainError("Aq preconditions violated: phi deviation");
  rep.U_k = (double)expl(std::max(log_U(seq, k, params), (long double)-700));
  const double xi_in = form.xi.norm_upper(hin);
  if (!cfg.adaptive && xi_in > rep.U_k)
    throw DomainError("Aq preconditions violated: xi exceeds U_k");

  const double amp = birkhoff_err_amp(cf, 64 * form.phi.L);
  OrbitComposeResult orb;
  orb = iterate_rotation_form(form, alpha, out.Q, amp);
  rep.claim_bound = orb.claim_bound;

  AnalyticFunction phiQ =
      orb.dev + constant_like(orb.dev, orb.mean_angle);
  phiQ = phiQ.restrict_to(std::min(phiQ.h, h_target));
  MatrixFunction xiQ = orb.xi.restrict_to(std::min(orb.xi.h, h_target));

  rep.phi_dev = orb.dev.norm_upper(h_target);
  rep.phi_ok = rep.phi_dev <= cfg.D;
  rep.inv2 = inv_norm_rot_minus_id(phiQ * 2.0, h_target);
  {
    long double lq = log_big(seq.Q[k + 1]);
    long double lqb = log_big(seq.Qbar[k + 1]);
    double t1 = (double)expl(-(long double)params.tau * lq);
    double t2 = (double)expl(-(long double)params.nu * lqb);
    rep.rho_k = params.eps > 0 ? params.eps / (4.0 * (t1 + t2)) : 0;
  }
  rep.rho_ok = rep.inv2 < rep.rho_k;
  rep.xi_norm = xiQ.norm_upper(h_target);
  rep.xi_ok = rep.xi_norm <= std::sqrt(rep.U_k);
  if (!cfg.adaptive) {
    if (!rep.phi_ok)
      throw DomainError("Aq contract violated (phi deviation exceeds D)");
    if (!rep.rho_ok)
      throw DomainError("Aq contract violated (rotation gap above rho_k)");
    if (!rep.xi_ok)
      throw DomainError("Aq contract violated (xi above sqrt U_k)");
  }

  out.bar_alpha = alpha.signed_rep(out.Q);
  out.formQ = RotationForm{phiQ, xiQ};
  return out;
}

KamState inductive_step(const KamState& state, const Cocycle& cocycle,
                        const ContinuedFraction& cf,
                        const SelectedSubsequence& seq, const KamConfig& cfg,
                        KamStepRecord* record) {
  const int k = state.k;
  if (k + 1 >= seq.size()) throw DomainError("ladder exhausted");
  const DiophantineParams params = cfg.dioph();
  if (!cfg.adaptive) {
    if (seq.Qbar[k] < BigInt((long)cfg.T_threshold))
      throw DomainError("inductive preconditions violated: Qbar_k below T");
    const double xi = state.form.xi.norm_upper(state.h_k);
    if (std::log(std::max(xi, 1e-300)) > (double)log_U(seq, k, params))
      throw DomainError("inductive preconditions violated: xi above U_k");
  }

  const double eta_next = cfg.eta / ((k + 1.0) * (k + 1.0));
  const double h_mid = state.h_k * (1.0 - eta_next);
  const double h_next = h_mid * (1.0 - eta_next);
  const double delta = -std::log1p(-eta_next);

  AqResult aq =
      aq_iterate(state.form, cocycle.alpha, cf, seq, k, h_mid, cfg);
  MatrixFunction barA = aq.formQ.reconstruct();
  CtStepResult ct = ct_step(aq.bar_alpha, barA, aq.formQ.phi, delta, h_mid, cfg);
  MatrixFunction Ak = state.form.reconstruct().restrict_to(h_mid);
  CtCommutingResult cc =
      ct_commuting(ct.B, cocycle.alpha, Ak, ct.phi, aq.bar_alpha, barA,
                   ct.report.rho_inv, delta, h_mid, cfg);

  KamState next;
  next.k = k + 1;
  next.h_k = h_next;
  next.form = to_rotation_form(cc.A2.restrict_to(h_next),
                               cc.phi2.restrict_to(h_next));
  next.B_accum = mul(ct.B, state.B_accum).restrict_to(h_next);
  next.residual_history = state.residual_history;
  const double xi_next = next.form.xi.norm_upper(h_next);
  next.residual_history.push_back(xi_next);
  // stage boundary: the accumulated conjugacy and the new form are the
  // candidates the next step works from; the driver re-certifies at the end
  next.B_accum.reset_err();
  next.form.phi.reset_err();
  next.form.xi.reset_err();

  const double B_dist = dist_id_upper(ct.B, ct.B.h);
  const double U_k = (double)expl(std::max(log_U(seq, k, params),
                                           (long double)-700));
  const double U_next = (double)expl(std::max(log_U(seq, k + 1, params),
                                              (long double)-700));
  AnalyticFunction devn =
      next.form.phi - constant_like(next.form.phi, next.form.phi.mean().real());
  const double phin_dev = devn.norm_upper(h_next);
  if (!cfg.adaptive) {
    if (B_dist > std::pow(U_k, 0.25))
      throw DomainError("inductive contract violated (B distance)");
    if (xi_next > U_next)
      throw DomainError("inductive contract violated (xi above U_{k+1})");
    if (phin_dev > cfg.D - eta_next)
      throw DomainError("inductive contract violated (phi deviation)");
  }

  if (record) {
    record->k = k + 1;
    record->Q = seq.Q[k + 1].get_str();
    record->Qbar = seq.Qbar[k + 1].get_str();
    record->h = h_next;
    record->xi_norm = xi_next;
    record->B_dist = B_dist;
    record->N_inner = ct.report.N_used;
    record->claim_bound = aq.report.claim_bound;
  }
  return next;
}

double conjugacy_residual_cert(const MatrixFunction& B, const Frequency& alpha,
                               const MatrixFunction& A,
                               const AnalyticFunction& phi, double hp) {
  MatrixFunction num =
      mul(shift(B, alpha.approx), mul(A.restrict_to(B.h), B.adjugate()));
  AnalyticFunction detB = B.det();
  MatrixFunction scaled = scalar_mul(MatrixFunction::rot_of(phi), detB);
  double n = (num - scaled).norm_upper(hp);
  double dmin = certified_min_modulus(detB, hp);
  if (dmin <= 0) return INF;
  return n / dmin;
}

double conjugacy_residual_grid(const MatrixFunction& B, double alpha,
                               const MatrixFunction& A,
                               const AnalyticFunction& phi, int samples) {
  double worst = 0;
  for (int s = 0; s < samples; ++s) {
    double x = (double)s / samples;
    Mat2 Bx = B.eval(Complex(x, 0));
    Mat2 Bxa = B.eval(Complex(x + alpha, 0));
    Mat2 Ax = A.eval(Complex(x, 0));
    Complex det = Bx.det();
    Mat2 Binv{Bx.d / det, -Bx.b / det, -Bx.c / det, Bx.a / det};
    Mat2 conj = Bxa * Ax * Binv;
    double ph = phi.eval(Complex(x, 0)).real();
    Mat2 R{Complex(std::cos(ph), 0), Complex(-std::sin(ph), 0),
           Complex(std::sin(ph), 0), Complex(std::cos(ph), 0)};
    worst = std::max(worst, (conj - R).norm2());
  }
  return worst;
}

namespace {

struct BootstrapOutcome {
  bool ok = false;
  KamState state;
  KamStepRecord record;
  std::string reason;
};

// Predicted inner-loop contraction factor for a bootstrap at denominator Q:
// kappa ~ c0 2 pi ||Q alpha|| / (2 sin(pi ||2 Q rho||))^2. Only meaningful
// as an admission heuristic in adaptive mode.
double bootstrap_kappa(const Cocycle& c, const BigInt& Q, double rho,
                       double sigma, const KamConfig& cfg) {
  const double t = torus_2q_rho(Q, rho);
  const double t_eff = std::max(t - 2 * Q.get_d() * sigma, 0.0);
  if (t_eff <= 0) return INF;
  const double gap = 2.0 * std::sin(M_PI * std::min(t_eff, 0.5));
  if (gap <= 0) return INF;
  const double aa = std::abs(c.alpha.signed_rep(Q));
  return cfg.c0 * TWO_PI * aa / (gap * gap);
}

BootstrapOutcome try_bootstrap(const Cocycle& c, const ContinuedFraction& cf,
                               const SelectedSubsequence& seq, int n0,
                               double rho, double sigma, double delta0,
                               const KamConfig& cfg) {
  BootstrapOutcome out;
  const double h = c.h();
  const DiophantineParams params = cfg.dioph();
  const BigInt& Q = seq.Q[n0];
  if (log_big(Q) > 34.5) { // ~1e15: past double-exactness of orbit shifts
    out.reason = "bootstrap denominator too large";
    return out;
  }
  if (cfg.adaptive) {
    // err-budget feasibility of the certified fibered product
    const double levels = std::ceil(log_big(Q) / 0.6931);
    const double growth = 2.0 * std::max(1.5, c.A.norm_upper(h));
    if (levels * std::log(growth) >
        std::log(1e-3 * cfg.el_eps) - std::log(1e-15)) {
      out.reason = "bootstrap error budget infeasible";
      return out;
    }
    if (bootstrap_kappa(c, Q, rho, sigma, cfg) > 0.5) {
      out.reason = "bootstrap contraction not predicted";
      return out;
    }
  }
  MatrixFunction Abar;
  try {
    Abar = iterate(c, Q);
  } catch (const DomainError& e) {
    out.reason = e.what();
    return out;
  }
  const double angle = reduced_angle_of_rho(Q, rho);
  AnalyticFunction phibar =
      AnalyticFunction::constant(Complex(angle, 0), c.L(), h);
  RotationForm f0 = to_rotation_form(Abar, phibar);
  const double xi0 = f0.xi.norm_upper(h);

  const double t = torus_2q_rho(Q, rho);
  const double t_eff = std::max(t - 2 * Q.get_d() * sigma, 0.0);
  if (t_eff <= 0) {
    out.reason = "bootstrap admission: ||2 Q rho|| indistinguishable from 0";
    return out;
  }
  const double inv_const = 2.0 / t_eff;
  if (!cfg.adaptive) {
    long double lq = log_big(Q);
    const double eps1 =
        std::min(cfg.eps0, std::pow(params.eps / 4.0 *
                                        (double)expl(-(long double)params.tau * lq),
                                    4.0));
    if (!(xi0 < eps1)) {
      out.reason = "bootstrap admission: xi0 above eps1";
      return out;
    }
    if (!(inv_const <= std::pow(xi0, -0.25) / 2)) {
      out.reason = "bootstrap admission: rotation gap too small";
      return out;
    }
  }

  const double bar_alpha = c.alpha.signed_rep(Q);
  try {
    CtStepResult ct = ct_step(bar_alpha, Abar, phibar, delta0, h, cfg);
    CtCommutingResult cc =
        ct_commuting(ct.B, c.alpha, c.A, ct.phi, bar_alpha, Abar,
                     ct.report.rho_inv, delta0, h, cfg);
    const double hb = h * std::exp(-delta0);
    if (!cfg.adaptive) {
      long double lu = log_U(seq, n0, params);
      if (std::log(std::max(cc.report.residual, 1e-300)) > (double)lu) {
        out.reason = "bootstrap residual above U_{n0}";
        return out;
      }
    }
    out.state.k = n0;
    out.state.h_k = hb;
    out.state.form = to_rotation_form(cc.A2.restrict_to(hb),
                                      cc.phi2.restrict_to(hb));
    out.state.B_accum = ct.B.restrict_to(hb);
    out.state.residual_history = {xi0, cc.report.residual};
    out.state.B_accum.reset_err();
    out.state.form.phi.reset_err();
    out.state.form.xi.reset_err();
    out.record.k = n0;
    out.record.Q = Q.get_str();
    out.record.Qbar = seq.Qbar[n0].get_str();
    out.record.h = hb;
    out.record.xi_norm = cc.report.residual;
    out.record.B_dist = dist_id_upper(ct.B, ct.B.h);
    out.record.N_inner = ct.report.N_used;
    out.record.note = "bootstrap";
    out.ok = true;
  } catch (const DomainError& e) {
    out.reason = e.what();
  }
  return out;
}

} // namespace

KamResult reduce_to_rotations(const Cocycle& c, const KamConfig& cfg) {
  KamResult res;
  const double h = c.h();
  const DiophantineParams params = cfg.dioph();

  auto fail = [&](KamStatus st, const std::string& why) {
    res.status = st;
    res.fail_reason = why;
    return res;
  };

  if (!c.A.real_symmetric())
    return fail(KamStatus::precondition_failed, "cocycle not real-symmetric");
  if (c.homotopy_class != 0)
    return fail(KamStatus::precondition_failed, "homotopy class nonzero");
  if (c.det_defect > 1e-8)
    return fail(KamStatus::precondition_failed, "determinant defect");
  if (h <= cfg.h_star)
    return fail(KamStatus::precondition_failed, "strip below h_star");

  // closeness to a constant rotation
  Mat2 mbar = {c.A.a().mean(), c.A.b().mean(), c.A.c().mean(), c.A.d().mean()};
  const double theta_star =
      std::atan2(mbar.c.real() - mbar.b.real(), mbar.a.real() + mbar.d.real());
  const double dist0 =
      (c.A - MatrixFunction::rotation(theta_star, c.L(), h)).norm_upper(h);
  if (dist0 > cfg.admission)
    return fail(KamStatus::precondition_failed,
                "not close to a constant rotation");

  // expansion and ladder
  ContinuedFraction cf;
  if (c.alpha.cf) {
    cf = *c.alpha.cf;
  } else {
    CfResult cr = expand_cf(c.alpha.value, cfg.max_q);
    cf = cr.cf;
    if (cr.status != CfStatus::ok && cf.depth() < 8)
      return fail(KamStatus::precondition_failed,
                  "rational or precision exhausted");
  }
  if (cf.depth() < 2)
    return fail(KamStatus::precondition_failed, "insufficient depth");
  SelectedSubsequence seq;
  try {
    seq = select_q(cf, params, cfg.adaptive ? cfg.bridge_exponent : 0.0);
  } catch (const DomainError& e) {
    return fail(KamStatus::precondition_failed, e.what());
  }

  // rotation number with acceleration
  RotOptions ro;
  ro.n_iter = cfg.rho_iters;
  ro.accel = &cf;
  ro.accel_q_cap = cfg.rho_accel_cap;
  RotResult rr;
  try {
    rr = rotation_number(c, ro);
  } catch (const DomainError& e) {
    return fail(KamStatus::precondition_failed, e.what());
  }
  res.rho = rr.rho;
  res.rho_sigma = std::max(rr.uncertainty, 1e-14);

  // arithmetic certificate
  const int depth_cap = std::min(cf.depth() - 1, 64);
  RhoConditionReport cert =
      check_rho_condition(cf, rr.rho, params, depth_cap, res.rho_sigma);
  res.cert_fail_index = cert.first_fail;
  res.cert_indeterminate_index = cert.first_indeterminate;
  res.cert_pass = cert.first_fail < 0;
  if (cert.first_fail >= 0)
    return fail(KamStatus::precondition_failed,
                "rho condition violated at i=" +
                    std::to_string(cert.first_fail));
  if (!cfg.adaptive && cert.first_indeterminate >= 0 &&
      cert.first_indeterminate <= depth_cap)
    res.cert_pass = false; // formula mode treats indeterminate as not certified

  // early exit: already a cocycle of rotations
  if (dist0 <= cfg.tol_residual) {
    try {
      RotExtract ex = rot_extract(c.A, h);
      res.B = MatrixFunction::identity(c.L(), h);
      res.phi = ex.phi;
      res.final_residual = conjugacy_residual_cert(res.B, c.alpha, c.A,
                                                   res.phi, h);
      res.final_h = h;
      res.B_dist_id = 0;
      if (res.final_residual <= cfg.tol_residual) {
        res.status = KamStatus::converged;
        return res;
      }
    } catch (const DomainError&) {
      // fall through to the full scheme
    }
  }

  // strip budget
  const double delta_total = std::log(h / (h - cfg.h_star));
  const double delta0 = 0.4 * delta_total;

  // bootstrap index n0. Formula mode follows the section-5 rule literally
  // (first k with Qbar_k >= T, and Q_{n0} <= T^{A^4}); adaptive mode scans
  // the ladder from below and admits the first rung whose predicted
  // contraction and certified error budget work out.
  const BigInt T((long)cfg.T_threshold);
  int n0 = -1;
  if (cfg.adaptive) {
    for (int k = 0; k < seq.size(); ++k) {
      if (seq.Q[k] > 1) {
        n0 = k;
        break;
      }
    }
  } else {
    for (int k = 0; k < seq.size(); ++k) {
      if (seq.Qbar[k] >= T) {
        n0 = k;
        break;
      }
    }
    if (n0 >= 0) {
      const double A4 = std::pow(params.calA, 4.0);
      if (big_gt_pow(seq.Q[n0], T, A4))
        return fail(KamStatus::precondition_failed, "Q_{n0} exceeds T^{A^4}");
    }
  }
  if (n0 < 0)
    return fail(KamStatus::precondition_failed,
                "no usable ladder entry for the bootstrap");

  BootstrapOutcome boot;
  std::string last_reason = "bootstrap failed";
  for (int k = n0; k < seq.size(); ++k) {
    boot = try_bootstrap(c, cf, seq, k, rr.rho, res.rho_sigma, delta0, cfg);
    if (boot.ok) break;
    last_reason = boot.reason;
    if (!cfg.adaptive) break; // the section-5 n0 is prescribed
  }
  if (!boot.ok) return fail(KamStatus::precondition_failed, last_reason);
  res.history.push_back(boot.record);

  // inductive loop
  KamState state = boot.state;
  int no_gain = 0;
  std::string stop_reason;
  KamStatus final_status = KamStatus::stalled;
  for (int guard = 0; guard < cfg.max_outer; ++guard) {
    const double xi = state.form.xi.norm_upper(state.h_k);
    if (xi <= cfg.tol_residual) {
      final_status = KamStatus::converged;
      break;
    }
    if (state.k + 1 >= seq.size()) {
      stop_reason = "ladder exhausted";
      break;
    }
    const double eta_next = cfg.eta / ((state.k + 1.0) * (state.k + 1.0));
    if (state.h_k * (1.0 - eta_next) * (1.0 - eta_next) < h - cfg.h_star) {
      stop_reason = "strip budget exhausted";
      break;
    }
    KamStepRecord rec;
    KamState next;
    try {
      next = inductive_step(state, c, cf, seq, cfg, &rec);
    } catch (const DomainError& e) {
      stop_reason = e.what();
      break;
    }
    res.history.push_back(rec);
    const double xi_next = next.form.xi.norm_upper(next.h_k);
    if (xi_next > xi / 10.0) {
      if (++no_gain >= 2) {
        state = next;
        stop_reason = "residual reduction below x10 twice";
        break;
      }
    } else {
      no_gain = 0;
    }
    state = next;
  }
  if (final_status != KamStatus::converged &&
      state.form.xi.norm_upper(state.h_k) <= cfg.tol_residual)
    final_status = KamStatus::converged;

  res.B = state.B_accum;
  res.phi = state.form.phi;
  res.final_h = state.h_k;
  res.B_dist_id = dist_id_upper(res.B, state.h_k);
  res.final_residual =
      conjugacy_residual_cert(res.B, c.alpha, c.A, res.phi, state.h_k);
  if (final_status == KamStatus::converged &&
      res.final_residual > cfg.tol_residual) {
    // the certified end-to-end residual is the binding contract
    final_status = KamStatus::stalled;
    stop_reason = "certified conjugacy residual above tolerance";
  }
  res.status = final_status;
  res.fail_reason = stop_reason;
  return res;
}

}  // namespace qpr
