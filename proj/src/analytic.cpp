#include "qpr/analytic.hpp"

#include <algorithm>
#include <cmath>

namespace qpr {

namespace {

constexpr double ROUND = 1e-15; // per-op roundoff allowance factor

double exp2pi(double l, double hp) { return std::exp(TWO_PI * l * hp); }

// e^{2 pi i t} with t reduced to the nearest-integer representative; the
// floor-based reduction would round tiny negative distances-to-1 away
Complex phase(long double t) {
  long double f = t - nearbyintl(t);
  double ang = (double)(6.283185307179586476925286766559L * f);
  return Complex(std::cos(ang), std::sin(ang));
}

} // namespace

AnalyticFunction AnalyticFunction::constant(Complex v, int L, double h) {
  AnalyticFunction f(L, h, std::abs(v.imag()) == 0.0);
  f.at(0) = v;
  return f;
}

AnalyticFunction AnalyticFunction::cosine(int j, double amp, int L, double h) {
  if (j == 0 || j > L) throw DomainError("cosine: harmonic out of range");
  AnalyticFunction f(L, h, true);
  f.at(j) = Complex(amp / 2, 0);
  f.at(-j) = Complex(amp / 2, 0);
  return f;
}

AnalyticFunction AnalyticFunction::sine(int j, double amp, int L, double h) {
  if (j == 0 || j > L) throw DomainError("sine: harmonic out of range");
  AnalyticFunction f(L, h, true);
  f.at(j) = Complex(0, -amp / 2);
  f.at(-j) = Complex(0, amp / 2);
  return f;
}

AnalyticFunction AnalyticFunction::harmonic(int j, Complex amp, int L,
                                            double h) {
  if (std::abs(j) > L) throw DomainError("harmonic out of range");
  AnalyticFunction f(L, h, false);
  f.at(j) = amp;
  return f;
}

double AnalyticFunction::coeff_norm(double hp) const {
  double s = 0;
  for (int l = -L; l <= L; ++l) s += std::abs(at(l)) * exp2pi(std::abs(l), hp);
  return s;
}

double AnalyticFunction::norm_upper(double hp) const {
  if (hp > h + 1e-15) throw DomainError("outside strip");
  return coeff_norm(hp) + err;
}

double AnalyticFunction::norm_lower(double hp, int samples) const {
  if (hp > h + 1e-15) throw DomainError("outside strip");
  double m = 0;
  for (int s = 0; s < samples; ++s) {
    double x = (double)s / samples;
    m = std::max(m, std::abs(eval(Complex(x, hp))));
    m = std::max(m, std::abs(eval(Complex(x, -hp))));
  }
  return m;
}

double AnalyticFunction::deriv_upper(double hp) const {
  if (hp > h + 1e-15) throw DomainError("outside strip");
  double s = 0;
  for (int l = -L; l <= L; ++l)
    s += TWO_PI * std::abs(l) * std::abs(at(l)) * exp2pi(std::abs(l), hp);
  if (err > 0) {
    double gap = h - hp;
    s += gap > 1e-12 ? err / gap : err / 1e-12; // Cauchy on the err part
  }
  return s;
}

Complex AnalyticFunction::eval(Complex z) const {
  // sum c_l w^l with w = e^{2 pi i z}; split positive/negative for stability
  Complex w = std::exp(Complex(0, 1) * TWO_PI * z);
  Complex winv = 1.0 / w;
  Complex pos(0, 0), neg(0, 0);
  for (int l = L; l >= 1; --l) pos = (pos + at(l)) * w;
  for (int l = -L; l <= -1; ++l) neg = (neg + at(l)) * winv;
  return pos + neg + at(0);
}

AnalyticFunction AnalyticFunction::restrict_to(double hp) const {
  if (hp > h + 1e-15) throw DomainError("outside strip");
  AnalyticFunction g = *this;
  g.h = hp;
  return g;
}

double AnalyticFunction::symmetry_defect() const {
  double d = 0;
  for (int l = 0; l <= L; ++l)
    d = std::max(d, std::abs(at(-l) - std::conj(at(l))) * exp2pi(l, h));
  return d;
}

void AnalyticFunction::symmetrize() {
  double defect = 0;
  for (int l = 0; l <= L; ++l) {
    Complex a = at(l), b = at(-l);
    Complex avg = (a + std::conj(b)) / 2.0;
    defect += std::abs(a - avg) * exp2pi(l, h) +
              std::abs(b - std::conj(avg)) * exp2pi(l, h);
    at(l) = avg;
    at(-l) = std::conj(avg);
  }
  at(0) = Complex(at(0).real(), 0);
  err += defect;
  real_symmetric = true;
}

AnalyticFunction& AnalyticFunction::operator+=(const AnalyticFunction& g) {
  if (g.L != L) throw DomainError("degree mismatch");
  h = std::min(h, g.h);
  for (int i = 0; i < 2 * L + 1; ++i) c[i] += g.c[i];
  err += g.err;
  real_symmetric = real_symmetric && g.real_symmetric;
  return *this;
}

AnalyticFunction& AnalyticFunction::operator-=(const AnalyticFunction& g) {
  if (g.L != L) throw DomainError("degree mismatch");
  h = std::min(h, g.h);
  for (int i = 0; i < 2 * L + 1; ++i) c[i] -= g.c[i];
  err += g.err;
  real_symmetric = real_symmetric && g.real_symmetric;
  return *this;
}

AnalyticFunction& AnalyticFunction::operator*=(double s) {
  for (auto& v : c) v *= s;
  err *= std::abs(s);
  return *this;
}

AnalyticFunction& AnalyticFunction::operator*=(Complex s) {
  for (auto& v : c) v *= s;
  err *= std::abs(s);
  if (s.imag() != 0) real_symmetric = false;
  return *this;
}

AnalyticFunction operator+(AnalyticFunction f, const AnalyticFunction& g) {
  f += g;
  return f;
}
AnalyticFunction operator-(AnalyticFunction f, const AnalyticFunction& g) {
  f -= g;
  return f;
}
AnalyticFunction operator*(AnalyticFunction f, double s) {
  f *= s;
  return f;
}
AnalyticFunction operator*(AnalyticFunction f, Complex s) {
  f *= s;
  return f;
}

AnalyticFunction mul(const AnalyticFunction& f, const AnalyticFunction& g) {
  if (f.L != g.L) throw DomainError("degree mismatch");
  const int L = f.L;
  const double h = std::min(f.h, g.h);
  std::vector<Complex> full(4 * L + 1, Complex(0, 0)); // index l + 2L
  std::vector<double> absfull(4 * L + 1, 0.0);
  for (int i = -L; i <= L; ++i) {
    if (f.at(i) == Complex(0, 0)) continue;
    const double afi = std::abs(f.at(i));
    for (int j = -L; j <= L; ++j) {
      full[i + j + 2 * L] += f.at(i) * g.at(j);
      absfull[i + j + 2 * L] += afi * std::abs(g.at(j));
    }
  }
  AnalyticFunction r(L, h, f.real_symmetric && g.real_symmetric);
  for (int l = -L; l <= L; ++l) r.at(l) = full[l + 2 * L];
  double tail = 0, absnorm = 0;
  for (int l = L + 1; l <= 2 * L; ++l)
    tail += (std::abs(full[l + 2 * L]) + std::abs(full[-l + 2 * L])) *
            exp2pi(l, h);
  for (int l = -2 * L; l <= 2 * L; ++l)
    absnorm += absfull[l + 2 * L] * exp2pi(std::abs(l) > L ? L : std::abs(l), h);
  const double nf = f.coeff_norm(h), ng = g.coeff_norm(h);
  r.err = tail + nf * g.err + ng * f.err + f.err * g.err + 4 * ROUND * absnorm;
  return r;
}

std::pair<double, double> norm_strip(const AnalyticFunction& f,
                                     double h_prime) {
  if (h_prime > f.h + 1e-15) throw DomainError("outside strip");
  return {f.norm_upper(h_prime), f.norm_lower(h_prime)};
}

AnalyticFunction shift(const AnalyticFunction& f, double beta) {
  AnalyticFunction g = f;
  for (int l = -f.L; l <= f.L; ++l)
    g.at(l) = f.at(l) * phase((long double)l * (long double)beta);
  g.err += ROUND * f.coeff_norm(f.h);
  return g;
}

namespace {

AnalyticFunction birkhoff_impl(const AnalyticFunction& f,
                               const Rational& alpha, const BigInt& n,
                               double err_amp, bool with_mean) {
  if (n < 1) throw DomainError("birkhoff_sum: n must be >= 1");
  AnalyticFunction r(f.L, f.h, f.real_symmetric);
  for (int l = -f.L; l <= f.L; ++l) {
    if (l == 0) continue;
    Complex den =
        Complex(1, 0) - phase((long double)signed_frac_d(Rational(l) * alpha));
    if (std::abs(den) < 1e-13) throw DomainError("resonant frequency");
    Complex num = Complex(1, 0) -
                  phase((long double)signed_frac_d(Rational(n) * Rational(l) *
                                                   alpha));
    r.at(l) = f.at(l) * num / den;
  }
  if (with_mean) {
    double nd = n.get_d();
    if (std::abs(f.at(0)) * nd > 1e200)
      throw DomainError("birkhoff_sum: mean term overflows, use deviation");
    r.at(0) = f.at(0) * nd;
  }
  double amp = err_amp;
  double nd2 = 2.0 * n.get_d();
  if (amp < 0 || amp > nd2) amp = nd2;
  r.err = f.err * amp + ROUND * r.coeff_norm(f.h);
  return r;
}

} // namespace

AnalyticFunction birkhoff_sum(const AnalyticFunction& f, const Rational& alpha,
                              const BigInt& n, double err_amp) {
  return birkhoff_impl(f, alpha, n, err_amp, true);
}

AnalyticFunction birkhoff_deviation(const AnalyticFunction& f,
                                    const Rational& alpha, const BigInt& n,
                                    double err_amp) {
  return birkhoff_impl(f, alpha, n, err_amp, false);
}

AnalyticFunction exp_of(const AnalyticFunction& f) {
  const double nf = f.norm_upper(f.h);
  int halvings = 0;
  double scale = 1.0;
  while (nf * scale > 0.35 && halvings < 60) {
    scale /= 2;
    halvings++;
  }
  if (nf * scale > 0.35) throw DomainError("exp_of: argument too large");
  AnalyticFunction g = f;
  g *= scale;

  // exp series, K = 18: 1 + g/1 (1 + g/2 (1 + ... (1 + g/K)))
  const int K = 18;
  AnalyticFunction acc =
      AnalyticFunction::constant(Complex(1.0, 0), f.L, f.h);
  for (int k = K; k >= 1; --k) {
    acc = mul(acc, g);
    acc *= 1.0 / k;
    acc += AnalyticFunction::constant(Complex(1, 0), f.L, f.h);
  }
  // tail: sum_{k>K} U^k/k! <= U^{K+1}/(K+1)! * 1/(1-U/(K+2))
  double U = 0.35;
  double fact = 1;
  for (int k = 2; k <= K + 1; ++k) fact *= k;
  acc.err += std::pow(U, K + 1) / fact / (1 - U / (K + 2));

  for (int i = 0; i < halvings; ++i) acc = mul(acc, acc);
  if (f.real_symmetric) acc.symmetrize();
  return acc;
}

AnalyticFunction log1p_of(const AnalyticFunction& u) {
  const double nu_ = u.norm_upper(u.h);
  if (nu_ >= 0.9) throw DomainError("log1p_of: argument too large");
  // log(1+u) = 2 atanh(v), v = u/(2+u)
  AnalyticFunction den = u;
  den += AnalyticFunction::constant(Complex(2, 0), u.L, u.h);
  AnalyticFunction v = mul(u, reciprocal(den));
  const double nv = v.norm_upper(v.h); // <= 0.9/1.1 < 0.82
  AnalyticFunction v2 = mul(v, v);
  const int K = 24; // atanh terms v^{2k+1}/(2k+1), k=0..K
  AnalyticFunction acc =
      AnalyticFunction::constant(Complex(1.0 / (2 * K + 1), 0), u.L, u.h);
  for (int k = K - 1; k >= 0; --k) {
    acc = mul(acc, v2);
    acc += AnalyticFunction::constant(Complex(1.0 / (2 * k + 1), 0), u.L, u.h);
  }
  acc = mul(acc, v);
  acc *= 2.0;
  double t = std::pow(nv, 2 * K + 3) / (2 * K + 3);
  acc.err += 2 * t / std::max(1e-30, 1 - nv * nv);
  return acc;
}

AnalyticFunction reciprocal(const AnalyticFunction& g) {
  Complex g0 = g.mean();
  if (std::abs(g0) < 1e-300) throw DomainError("reciprocal: zero mean");
  AnalyticFunction r = AnalyticFunction::constant(1.0 / g0, g.L, g.h);
  double resid = 1e300;
  for (int it = 0; it < 60; ++it) {
    AnalyticFunction gr = mul(g, r);
    AnalyticFunction e = AnalyticFunction::constant(Complex(1, 0), g.L, g.h);
    e -= gr;
    double nr = e.norm_upper(g.h);
    if (nr >= resid && it > 2) break;
    resid = nr;
    if (resid < 1e-16) break;
    // r <- r (2 - g r) = r (1 + e)
    AnalyticFunction corr = e;
    corr += AnalyticFunction::constant(Complex(1, 0), g.L, g.h);
    r = mul(r, corr);
  }
  if (resid >= 0.5) throw DomainError("reciprocal: not invertible on strip");
  r.err += r.norm_upper(g.h) * resid / (1 - resid);
  if (g.real_symmetric) r.symmetrize();
  return r;
}

AnalyticFunction sqrt_near_const(const AnalyticFunction& d) {
  Complex d0 = d.mean();
  if (std::abs(d0) < 1e-300) throw DomainError("sqrt: zero mean");
  AnalyticFunction s = d;
  s *= (1.0 / d0);
  s -= AnalyticFunction::constant(Complex(1, 0), d.L, d.h);
  double ns = s.norm_upper(d.h);
  if (ns >= 0.9) throw DomainError("sqrt: relative variation >= 1");
  // sqrt(1+s) = sum binom(1/2,k) s^k
  const int K = 40;
  std::vector<double> binom(K + 1);
  binom[0] = 1;
  for (int k = 1; k <= K; ++k)
    binom[k] = binom[k - 1] * (0.5 - (k - 1)) / k;
  AnalyticFunction acc =
      AnalyticFunction::constant(Complex(binom[K], 0), d.L, d.h);
  for (int k = K - 1; k >= 0; --k) {
    acc = mul(acc, s);
    acc += AnalyticFunction::constant(Complex(binom[k], 0), d.L, d.h);
  }
  acc.err += std::pow(ns, K + 1) / (1 - ns); // |binom(1/2,k)| <= 1
  Complex root = std::sqrt(d0);
  acc *= root;
  if (d.real_symmetric && d0.real() > 0) acc.symmetrize();
  return acc;
}

AnalyticFunction log_near_const(const AnalyticFunction& d) {
  Complex d0 = d.mean();
  if (std::abs(d0) < 1e-300) throw DomainError("log: zero mean");
  AnalyticFunction s = d;
  s *= (1.0 / d0);
  s -= AnalyticFunction::constant(Complex(1, 0), d.L, d.h);
  AnalyticFunction r = log1p_of(s);
  r += AnalyticFunction::constant(std::log(d0), d.L, d.h);
  return r;
}

DenjoyReport verify_denjoy_bounds(const AnalyticFunction& f,
                                  const ContinuedFraction& cf,
                                  const SelectedSubsequence& seq,
                                  const DiophantineParams& params, double h,
                                  double eta) {
  DenjoyReport rep;
  AnalyticFunction dev0 = f;
  dev0 -= AnalyticFunction::constant(f.mean(), f.L, f.h);
  rep.fnorm = dev0.norm_upper(h);
  const double M = params.M;

  // err amplification band for the certified deviation norms
  double amp = -1;
  {
    int best = -1;
    for (int j = 0; j < (int)cf.q.size(); ++j)
      if (cf.q[j] <= 64 * f.L) best = j;
    if (best > 0) {
      double dd = cf.qk_dist(best).get_d();
      if (dd > 0) amp = 2.0 / dd;
    }
  }

  auto dev_norm = [&](const BigInt& n, double hk) {
    AnalyticFunction d = birkhoff_deviation(f, cf.alpha, n, amp);
    return d.norm_upper(hk);
  };

  for (int k = 1; k + 1 < seq.size(); ++k) {
    const double hk = h * (1.0 - eta / (double(k) * k));
    if (hk <= 0 || hk > f.h) continue;
    const long double lQ = log_big(seq.Q[k]);
    const long double lQb = log_big(seq.Qbar[k]);
    const double t1 = (double)expl(-(long double)M * lQ);
    const double t2 = (double)expl((-1.0L + 1.0L / (long double)M) * lQb);
    const double meas_Q = dev_norm(seq.Q[k], hk);

    // sample of l <= Q_{k+1}: geometric points plus denominators
    std::vector<BigInt> ls;
    const long double lQn = log_big(seq.Q[k + 1]);
    for (int j = 1; j <= 24; ++j) {
      long double t = lQn * j / 24.0L;
      if (t > 42) break; // past long-long range; denominators cover large l
      BigInt l((long)llroundl(expl(t)));
      if (l >= 1 && l <= seq.Q[k + 1]) ls.push_back(l);
    }
    for (const auto& q : cf.q)
      if (q >= 1 && q <= seq.Q[k + 1]) ls.push_back(q);
    double meas_sup = 0;
    for (const auto& l : ls) meas_sup = std::max(meas_sup, dev_norm(l, hk));
    const double s1 = (double)expl(lQb - (long double)M * lQ);
    const double s2 = (double)expl(lQb / (long double)M);

    rep.ks.push_back(k);
    rep.theory_Q_term1.push_back(t1);
    rep.theory_Q_term2.push_back(t2);
    rep.theory_sup_term1.push_back(s1);
    rep.theory_sup_term2.push_back(s2);
    const double den = rep.fnorm;
    rep.ratio_Q.push_back(den > 0 ? meas_Q / (den * (t1 + t2)) : 0.0);
    rep.ratio_sup.push_back(den > 0 ? meas_sup / (den * (s1 + s2)) : 0.0);
    rep.max_ratio =
        std::max({rep.max_ratio, rep.ratio_Q.back(), rep.ratio_sup.back()});
  }
  return rep;
}

}  // namespace qpr
