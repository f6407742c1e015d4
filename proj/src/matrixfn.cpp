#include "qpr/matrixfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qpr {

double Mat2::norm2() const {
  double p = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
  double dd = std::abs(det());
  double disc = p * p - 4 * dd * dd;
  if (disc < 0) disc = 0;
  return std::sqrt((p + std::sqrt(disc)) / 2);
}

MatrixFunction::MatrixFunction(int L_, double h_) : L(L_), h(h_) {
  for (auto& e : m) e = AnalyticFunction(L_, h_);
}

MatrixFunction MatrixFunction::identity(int L, double h) {
  MatrixFunction x(L, h);
  x.a() = AnalyticFunction::constant(Complex(1, 0), L, h);
  x.d() = AnalyticFunction::constant(Complex(1, 0), L, h);
  return x;
}

MatrixFunction MatrixFunction::constant(Mat2 v, int L, double h) {
  MatrixFunction x(L, h);
  x.a() = AnalyticFunction::constant(v.a, L, h);
  x.b() = AnalyticFunction::constant(v.b, L, h);
  x.c() = AnalyticFunction::constant(v.c, L, h);
  x.d() = AnalyticFunction::constant(v.d, L, h);
  return x;
}

MatrixFunction MatrixFunction::rotation(double angle, int L, double h) {
  return constant({Complex(std::cos(angle), 0), Complex(-std::sin(angle), 0),
                   Complex(std::sin(angle), 0), Complex(std::cos(angle), 0)},
                  L, h);
}

MatrixFunction MatrixFunction::J(int L, double h) {
  return constant({Complex(0, 0), Complex(-1, 0), Complex(1, 0), Complex(0, 0)},
                  L, h);
}

MatrixFunction MatrixFunction::rot_of(const AnalyticFunction& theta) {
  // split the mean so the series argument is small
  Complex t0 = theta.mean();
  AnalyticFunction psi = theta;
  psi -= AnalyticFunction::constant(t0, theta.L, theta.h);
  AnalyticFunction ep = exp_of(psi * Complex(0, 1));
  AnalyticFunction em = exp_of(psi * Complex(0, -1));
  Complex e0p = std::exp(Complex(0, 1) * t0);
  Complex e0m = std::exp(Complex(0, -1) * t0);
  AnalyticFunction cosf = ep * e0p + em * e0m;
  cosf *= 0.5;
  AnalyticFunction sinf = ep * e0p - em * e0m;
  sinf *= Complex(0, -0.5);
  if (theta.real_symmetric) {
    cosf.symmetrize();
    sinf.symmetrize();
  }
  MatrixFunction r(theta.L, theta.h);
  r.a() = cosf;
  r.b() = sinf * (-1.0);
  r.c() = sinf;
  r.d() = cosf;
  return r;
}

double MatrixFunction::norm_upper(double hp) const {
  double s = 0;
  for (const auto& e : m) {
    double u = e.norm_upper(hp);
    s += u * u;
  }
  return std::sqrt(s);
}

double MatrixFunction::norm_lower(double hp, int samples) const {
  if (hp > h + 1e-15) throw DomainError("outside strip");
  double best = 0;
  for (int s = 0; s < samples; ++s) {
    double x = (double)s / samples;
    best = std::max(best, eval(Complex(x, hp)).norm2());
    best = std::max(best, eval(Complex(x, -hp)).norm2());
  }
  return best;
}

Mat2 MatrixFunction::eval(Complex z) const {
  return {m[0].eval(z), m[1].eval(z), m[2].eval(z), m[3].eval(z)};
}

AnalyticFunction MatrixFunction::det() const {
  return mul(a(), d()) - mul(b(), c());
}

MatrixFunction MatrixFunction::adjugate() const {
  MatrixFunction r(L, h);
  r.a() = d();
  r.b() = b() * (-1.0);
  r.c() = c() * (-1.0);
  r.d() = a();
  return r;
}

MatrixFunction MatrixFunction::restrict_to(double hp) const {
  MatrixFunction r = *this;
  for (auto& e : r.m) e = e.restrict_to(hp);
  r.h = hp;
  return r;
}

void MatrixFunction::symmetrize() {
  for (auto& e : m) e.symmetrize();
}

bool MatrixFunction::real_symmetric() const {
  for (const auto& e : m)
    if (!e.real_symmetric) return false;
  return true;
}

MatrixFunction& MatrixFunction::operator+=(const MatrixFunction& o) {
  for (int i = 0; i < 4; ++i) m[i] += o.m[i];
  h = std::min(h, o.h);
  return *this;
}
MatrixFunction& MatrixFunction::operator-=(const MatrixFunction& o) {
  for (int i = 0; i < 4; ++i) m[i] -= o.m[i];
  h = std::min(h, o.h);
  return *this;
}
MatrixFunction& MatrixFunction::operator*=(double s) {
  for (auto& e : m) e *= s;
  return *this;
}

MatrixFunction operator+(MatrixFunction x, const MatrixFunction& y) {
  x += y;
  return x;
}
MatrixFunction operator-(MatrixFunction x, const MatrixFunction& y) {
  x -= y;
  return x;
}
MatrixFunction operator*(MatrixFunction x, double s) {
  x *= s;
  return x;
}

MatrixFunction mul(const MatrixFunction& x, const MatrixFunction& y) {
  MatrixFunction r(x.L, std::min(x.h, y.h));
  r.a() = mul(x.a(), y.a()) + mul(x.b(), y.c());
  r.b() = mul(x.a(), y.b()) + mul(x.b(), y.d());
  r.c() = mul(x.c(), y.a()) + mul(x.d(), y.c());
  r.d() = mul(x.c(), y.b()) + mul(x.d(), y.d());
  return r;
}

MatrixFunction shift(const MatrixFunction& x, double beta) {
  MatrixFunction r = x;
  for (auto& e : r.m) e = shift(e, beta);
  return r;
}

MatrixFunction qsym(const MatrixFunction& x) {
  // J M J = (-d, c; b, -a) entrywise, so Q(R_theta) = 0
  MatrixFunction jmj(x.L, x.h);
  jmj.a() = x.d() * (-1.0);
  jmj.b() = x.c();
  jmj.c() = x.b();
  jmj.d() = x.a() * (-1.0);
  MatrixFunction r = x;
  r += jmj;
  r *= 0.5;
  return r;
}

MatrixFunction scalar_mul(const MatrixFunction& x, const AnalyticFunction& s) {
  MatrixFunction r(x.L, std::min(x.h, s.h));
  for (int i = 0; i < 4; ++i) r.m[i] = mul(x.m[i], s);
  return r;
}

double dist_id_upper(const MatrixFunction& x, double hp) {
  MatrixFunction d = x - MatrixFunction::identity(x.L, x.h);
  return d.norm_upper(hp);
}

MatrixFunction exp_traceless(const MatrixFunction& v) {
  // v = [x, b; c, -x], v^2 = (x^2 + b c) id
  AnalyticFunction delta = mul(v.a(), v.a()) + mul(v.b(), v.c());
  double nd = delta.norm_upper(v.h);
  if (nd > 4.0) throw DomainError("exp_traceless: argument too large");
  // C = sum delta^k/(2k)!, S = sum delta^k/(2k+1)!
  const int K = 14;
  std::vector<double> fac(2 * K + 4);
  fac[0] = 1;
  for (size_t i = 1; i < fac.size(); ++i) fac[i] = fac[i - 1] * i;
  AnalyticFunction C =
      AnalyticFunction::constant(Complex(1.0 / fac[2 * K], 0), v.L, v.h);
  AnalyticFunction S =
      AnalyticFunction::constant(Complex(1.0 / fac[2 * K + 1], 0), v.L, v.h);
  for (int k = K - 1; k >= 0; --k) {
    C = mul(C, delta);
    C += AnalyticFunction::constant(Complex(1.0 / fac[2 * k], 0), v.L, v.h);
    S = mul(S, delta);
    S += AnalyticFunction::constant(Complex(1.0 / fac[2 * k + 1], 0), v.L, v.h);
  }
  double tail = std::pow(nd, K + 1) / fac[2 * K + 2];
  C.err += tail;
  S.err += tail;
  MatrixFunction r(v.L, v.h);
  r.a() = C + mul(S, v.a());
  r.b() = mul(S, v.b());
  r.c() = mul(S, v.c());
  r.d() = C - mul(S, v.a());
  return r;
}

MatrixFunction log_near_id(const MatrixFunction& P) {
  MatrixFunction X = P - MatrixFunction::identity(P.L, P.h);
  double nx = X.norm_upper(P.h);
  if (nx > 0.6) throw DomainError("log_near_id: argument too far from id");
  int K = nx < 1e-300 ? 2
                      : std::min(26.0, std::ceil(-40.0 / std::log(std::max(
                                           1e-300, nx))));
  if (K < 3) K = 3;
  // log(id+X) = sum (-1)^{k+1} X^k / k, Horner in X
  MatrixFunction acc = MatrixFunction::constant(
      {Complex((K % 2 == 1 ? 1.0 : -1.0) / K, 0), 0, 0,
       Complex((K % 2 == 1 ? 1.0 : -1.0) / K, 0)},
      P.L, P.h);
  for (int k = K - 1; k >= 1; --k) {
    acc = mul(acc, X);
    double ck = (k % 2 == 1 ? 1.0 : -1.0) / k;
    acc += MatrixFunction::constant({Complex(ck, 0), 0, 0, Complex(ck, 0)},
                                    P.L, P.h);
  }
  acc = mul(acc, X);
  double tail = std::pow(nx, K + 1) / ((K + 1) * std::max(0.4, 1 - nx));
  for (auto& e : acc.m) e.err += tail / 2;
  return acc;
}

double certified_min_modulus(const AnalyticFunction& g, double hp,
                             int samples) {
  double bmin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    double x = (double)s / samples;
    bmin = std::min(bmin, std::abs(g.eval(Complex(x, hp))));
    bmin = std::min(bmin, std::abs(g.eval(Complex(x, -hp))));
  }
  double margin = g.deriv_upper(hp) * (0.5 / samples) + g.err;
  double cert = bmin - margin;
  if (cert <= 0) return 0;
  // min-modulus principle: an interior sample below the boundary minimum
  // betrays a zero inside the strip
  for (int lev = -3; lev <= 3; ++lev) {
    double y = hp * lev / 4.0;
    for (int s = 0; s < samples / 4; ++s) {
      double x = (double)s / (samples / 4);
      if (std::abs(g.eval(Complex(x, y))) < cert) return 0;
    }
  }
  return cert;
}

double inv_norm_rot_minus_id(const AnalyticFunction& psi, double hp) {
  AnalyticFunction one = AnalyticFunction::constant(Complex(1, 0), psi.L, psi.h);
  AnalyticFunction gp = exp_of(psi * Complex(0, 1)) - one;
  AnalyticFunction gm = exp_of(psi * Complex(0, -1)) - one;
  double mp = certified_min_modulus(gp, hp);
  double mm = certified_min_modulus(gm, hp);
  double m = std::min(mp, mm);
  if (m <= 0) return std::numeric_limits<double>::infinity();
  return 1.0 / m;
}

}  // namespace qpr
