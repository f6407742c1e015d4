#include "qpr/cocycle.hpp"

#include <algorithm>
#include <cmath>

namespace qpr {

namespace {

Rational rational_of_ld(long double x) {
  int ex = 0;
  long double m = frexpl(x, &ex); // x = m 2^ex, |m| in [0.5, 1)
  long double scaled = ldexpl(m, 63);
  BigInt mant((double)(long long)(scaled >= 0 ? scaled + 0.5L : scaled - 0.5L));
  Rational r(mant);
  int e2 = ex - 63;
  if (e2 > 0)
    r *= Rational(BigInt(1) << e2);
  else if (e2 < 0)
    r /= Rational(BigInt(1) << (-e2));
  return r;
}

} // namespace

double reduced_mean_angle(double phi0, const BigInt& n) {
  long double t = (long double)phi0 / 6.283185307179586476925286766559L;
  Rational r = rational_of_ld(t);
  Rational f = frac(Rational(n) * r);
  return TWO_PI * f.get_d();
}

Cocycle make_cocycle(const Frequency& alpha, const MatrixFunction& A) {
  Cocycle c;
  c.alpha = alpha;
  c.A = A;
  AnalyticFunction d = A.det();
  d -= AnalyticFunction::constant(Complex(1, 0), A.L, A.h);
  c.det_defect = d.norm_upper(A.h);
  c.homotopy_class = homotopy_degree(A);
  return c;
}

Cocycle schrodinger(const AnalyticFunction& v, double E,
                    const Frequency& alpha) {
  if (!v.real_symmetric) throw DomainError("schrodinger: v must be real");
  MatrixFunction A(v.L, v.h);
  AnalyticFunction Ec = AnalyticFunction::constant(Complex(E, 0), v.L, v.h);
  A.a() = Ec - v;
  A.b() = AnalyticFunction::constant(Complex(-1, 0), v.L, v.h);
  A.c() = AnalyticFunction::constant(Complex(1, 0), v.L, v.h);
  A.d() = AnalyticFunction::zero(v.L, v.h);
  Cocycle c;
  c.alpha = alpha;
  c.A = A;
  c.det_defect = 0; // (E-v)*0 - (-1)*1 = 1 exactly on coefficients
  c.homotopy_class = 0;
  return c;
}

int homotopy_degree(const MatrixFunction& A, int samples) {
  double total = 0;
  double prev = std::atan2(A.c().eval_real(0), A.a().eval_real(0));
  for (int s = 1; s <= samples; ++s) {
    double x = (double)s / samples;
    double ang = std::atan2(A.c().eval_real(x), A.a().eval_real(x));
    double d = ang - prev;
    while (d > M_PI) d -= 2 * M_PI;
    while (d < -M_PI) d += 2 * M_PI;
    total += d;
    prev = ang;
  }
  return (int)std::lround(total / (2 * M_PI));
}

MatrixFunction iterate(const Cocycle& c, const BigInt& n) {
  if (n == 0) return MatrixFunction::identity(c.L(), c.h());
  if (n < 0) {
    MatrixFunction P = iterate(c, -n);
    // A^{(-m)}(x) = [A^{(m)}(x - m alpha)]^{-1}
    Rational sh = frac(Rational(n) * c.alpha.value); // n<0: frac(-m alpha)
    return shift(P, sh.get_d()).adjugate();
  }
  // binary splitting, msb to lsb; stages promote their candidates so the
  // per-stage certificates do not compound (callers re-certify one-shot)
  size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  MatrixFunction acc = c.A;
  BigInt done = 1;
  for (int i = (int)bits - 2; i >= 0; --i) {
    acc = mul(shift(acc, c.alpha.frac_mult_d(done)), acc);
    acc.reset_err();
    done *= 2;
    if (mpz_tstbit(n.get_mpz_t(), i)) {
      acc = mul(shift(c.A, c.alpha.frac_mult_d(done)), acc);
      acc.reset_err();
      done += 1;
    }
    if (acc.norm_upper(acc.h) > 1e100) throw DomainError("growth overflow");
  }
  return acc;
}

namespace {

struct BaseEstimate {
  double mean = 0, spread = 0, unc = 0;
};

// projective-lift average of angle increments over several initial fibers
BaseEstimate base_rho(const MatrixFunction& A, double alpha, long n_iter,
                      int n_fibers) {
  BaseEstimate out;
  std::vector<double> fiber_means;
  double half_mean_acc = 0;
  for (int f = 0; f < n_fibers; ++f) {
    double x = (double)f / n_fibers;
    double u = TWO_PI * 0.37 * f / n_fibers;
    double sum = 0, sum_half = 0;
    for (long k = 0; k < n_iter; ++k) {
      Mat2 M = A.eval(Complex(x, 0));
      double vx = std::cos(u), vy = std::sin(u);
      double wx = M.a.real() * vx + M.b.real() * vy;
      double wy = M.c.real() * vx + M.d.real() * vy;
      double d = std::atan2(wy, wx) - u;
      while (d > M_PI) d -= 2 * M_PI;
      while (d <= -M_PI) d += 2 * M_PI;
      u += d;
      while (u > M_PI) u -= 2 * M_PI;
      while (u <= -M_PI) u += 2 * M_PI;
      sum += d;
      if (k == n_iter / 2 - 1) sum_half = sum;
      x += alpha;
      x -= std::floor(x);
    }
    fiber_means.push_back(sum / (TWO_PI * n_iter));
    half_mean_acc += sum_half / (TWO_PI * (n_iter / 2));
  }
  double mn = 1e300, mx = -1e300, avg = 0;
  for (double v : fiber_means) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
    avg += v;
  }
  avg /= fiber_means.size();
  out.mean = avg;
  out.spread = mx - mn;
  out.unc = out.spread + std::abs(avg - half_mean_acc / n_fibers) +
            2.0 / n_iter;
  return out;
}

} // namespace

RotResult rotation_number(const Cocycle& c, const RotOptions& opt) {
  if (c.homotopy_class != 0)
    throw DomainError("rotation number needs homotopy class 0");
  BaseEstimate base = base_rho(c.A, c.alpha.approx, opt.n_iter, opt.n_fibers);
  if (base.spread > opt.tol_spread)
    throw DomainError("rotation number not resolved");
  RotResult res;
  res.rho = base.mean - std::floor(base.mean);
  res.spread = base.spread;
  res.uncertainty = base.unc;

  if (opt.accel) {
    const ContinuedFraction& cf = *opt.accel;
    double rho_lift = base.mean; // refined estimate, mod 1 at the end
    for (int k = 1; k < (int)cf.q.size(); ++k) {
      const BigInt& q = cf.q[k];
      if (q <= 1) continue;
      double qd = q.get_d();
      if (qd > opt.accel_q_cap) break;
      if (qd * res.uncertainty > 0.2) break;
      MatrixFunction Aq;
      try {
        Aq = iterate(c, q);
      } catch (const DomainError&) {
        break;
      }
      if (Aq.norm_upper(Aq.h) > opt.accel_norm_cap) break;
      Rational fq = c.alpha.frac_mult(q);
      BaseEstimate sub = base_rho(Aq, fq.get_d(), opt.n_iter, opt.n_fibers);
      if (sub.spread > opt.tol_spread) break;
      double j = std::round(qd * rho_lift - sub.mean);
      double cand = (sub.mean + j) / qd;
      double new_unc = sub.unc / qd;
      if (new_unc < res.uncertainty) {
        rho_lift = cand;
        res.uncertainty = new_unc;
        res.accel_levels++;
      }
    }
    res.rho = rho_lift - std::floor(rho_lift);
  }
  return res;
}

LyapResult lyapunov(const Cocycle& c, long n_iter, int n_theta) {
  LyapResult out;
  double acc = 0, acc_half = 0;
  for (int t = 0; t < n_theta; ++t) {
    double x = (double)t / n_theta;
    double vx = 1, vy = 0;
    double lg = 0, lg_half = 0;
    for (long k = 0; k < n_iter; ++k) {
      Mat2 M = c.A.eval(Complex(x, 0));
      double wx = M.a.real() * vx + M.b.real() * vy;
      double wy = M.c.real() * vx + M.d.real() * vy;
      double s = std::hypot(wx, wy);
      if (s == 0) throw DomainError("lyapunov: degenerate orbit");
      vx = wx / s;
      vy = wy / s;
      lg += std::log(s);
      if (k == n_iter / 2 - 1) lg_half = lg;
      x += c.alpha.approx;
      x -= std::floor(x);
    }
    acc += lg / n_iter;
    acc_half += lg_half / (n_iter / 2);
  }
  out.value = std::max(0.0, acc / n_theta);
  out.half_value = std::max(0.0, acc_half / n_theta);
  return out;
}

RotationForm to_rotation_form(const MatrixFunction& A,
                              const AnalyticFunction& phi) {
  if (!phi.real_symmetric)
    throw DomainError("to_rotation_form: phi must be real-symmetric");
  AnalyticFunction mphi = phi * (-1.0);
  MatrixFunction xi = mul(MatrixFunction::rot_of(mphi), A);
  xi -= MatrixFunction::identity(A.L, A.h);
  return RotationForm{phi, xi};
}

RotationForm compose_rotation_forms(const std::vector<RotationForm>& forms,
                                    ComposeDiag* diag) {
  if (forms.empty()) throw DomainError("compose_rotation_forms: empty list");
  AnalyticFunction s = forms[0].phi;
  MatrixFunction zeta = forms[0].xi;
  const double hh = zeta.h;
  double sum_claim = 0;
  {
    double im0 = 0; // ||M^{(0)}|| = ||id|| = 1 for the first partial product
    sum_claim += std::exp(2 * im0) * forms[0].xi.norm_upper(hh);
  }
  for (size_t k = 1; k < forms.size(); ++k) {
    AnalyticFunction sdev = s;
    sdev -= AnalyticFunction::constant(Complex(s.mean().real(), 0), s.L, s.h);
    double im = sdev.norm_upper(hh) + std::abs(s.mean().imag());
    sum_claim += std::exp(2 * im) * forms[k].xi.norm_upper(hh);
    MatrixFunction Rs = MatrixFunction::rot_of(s);
    MatrixFunction Rms = MatrixFunction::rot_of(s * (-1.0));
    MatrixFunction W = mul(mul(Rms, forms[k].xi), Rs);
    zeta = W + zeta + mul(W, zeta);
    s += forms[k].phi;
  }
  double claim = std::exp(sum_claim) - 1;
  if (diag) {
    diag->claim_bound = claim;
    diag->measured = zeta.norm_upper(hh);
  }
  if (claim > 1.0) throw DomainError("rotation form lost");
  return RotationForm{s, zeta};
}

OrbitComposeResult iterate_rotation_form(const RotationForm& f,
                                         const Frequency& alpha,
                                         const BigInt& n, double err_amp) {
  if (n < 1) throw DomainError("iterate_rotation_form: n must be >= 1");
  const int L = f.xi.L;
  const double hh = f.xi.h;
  const double phi0 = f.phi.mean().real();

  AnalyticFunction phidev = f.phi;
  phidev -= AnalyticFunction::constant(Complex(phi0, 0), L, hh);

  // state at stage m
  BigInt m = 1;
  AnalyticFunction dev = phidev;
  MatrixFunction zeta = f.xi;
  double sum_claim = f.xi.norm_upper(hh);
  double rot_growth = std::exp(phidev.norm_upper(hh));

  size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  auto stage_rot = [&](const BigInt& mm,
                       const AnalyticFunction& dv) -> std::pair<MatrixFunction,
                                                                MatrixFunction> {
    AnalyticFunction sfull =
        dv + AnalyticFunction::constant(
                 Complex(reduced_mean_angle(phi0, mm), 0), L, hh);
    MatrixFunction R = MatrixFunction::rot_of(sfull);
    MatrixFunction Rm = MatrixFunction::rot_of(sfull * (-1.0));
    return {R, Rm};
  };

  for (int i = (int)bits - 2; i >= 0; --i) {
    // double: zeta_{2m} = W + zeta + W zeta, W = R_{-S_m} (zeta o T_m) R_{S_m}
    double beta = frac(Rational(m) * alpha.value).get_d();
    auto [R, Rm] = stage_rot(m, dev);
    MatrixFunction W = mul(mul(Rm, shift(zeta, beta)), R);
    double g = std::exp(dev.norm_upper(hh));
    rot_growth = std::max(rot_growth, g);
    sum_claim += g * g * zeta.norm_upper(hh);
    if (std::exp(sum_claim) - 1 > 1.0) throw DomainError("rotation form lost");
    zeta = W + zeta + mul(W, zeta);
    zeta.reset_err();
    dev = dev + shift(dev, beta);
    dev.reset_err();
    m *= 2;
    if (mpz_tstbit(n.get_mpz_t(), i)) {
      double beta2 = frac(Rational(m) * alpha.value).get_d();
      auto [R2, Rm2] = stage_rot(m, dev);
      MatrixFunction W2 = mul(mul(Rm2, shift(f.xi, beta2)), R2);
      double g2 = std::exp(dev.norm_upper(hh));
      sum_claim += g2 * g2 * f.xi.norm_upper(hh);
      if (std::exp(sum_claim) - 1 > 1.0)
        throw DomainError("rotation form lost");
      zeta = W2 + zeta + mul(W2, zeta);
      zeta.reset_err();
      dev = dev + shift(phidev, beta2);
      dev.reset_err();
      m += 1;
    }
  }

  // closed-form deviation is cheaper and exact; keep the folded one only as
  // a cross-check via its err budget
  OrbitComposeResult out;
  out.dev = birkhoff_deviation(f.phi, alpha.value, n, err_amp);
  out.mean_angle = reduced_mean_angle(phi0, n);
  out.xi = zeta;
  out.claim_bound = std::exp(sum_claim) - 1;
  out.rot_growth = rot_growth;
  return out;
}

}  // namespace qpr
