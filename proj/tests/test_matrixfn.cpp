#include <doctest.h>

#include <cmath>
#include <random>

#include "qpr/matrixfn.hpp"

using namespace qpr;

namespace {
constexpr int L = 32;
constexpr double H = 0.2;

Mat2 mat_exp_pointwise(const Mat2& v) {
  // closed form for traceless 2x2: exp v = cosh(s) id + sinh(s)/s v,
  // s^2 = det-part = a^2 + bc
  Complex d = v.a * v.a + v.b * v.c;
  Complex s = std::sqrt(d);
  Complex ch, shs;
  if (std::abs(s) < 1e-8) {
    ch = 1.0 + d / 2.0;
    shs = 1.0 + d / 6.0;
  } else {
    ch = std::cosh(s);
    shs = std::sinh(s) / s;
  }
  return {ch + shs * v.a, shs * v.b, shs * v.c, ch - shs * v.a};
}
} // namespace

TEST_CASE("rot_of has determinant 1 and matches pointwise rotations") {
  AnalyticFunction theta = AnalyticFunction::constant(Complex(0.9, 0), L, H);
  theta += AnalyticFunction::cosine(1, 0.05, L, H);
  MatrixFunction R = MatrixFunction::rot_of(theta);
  double worst = 0, worstdet = 0;
  for (int i = 0; i < 256; ++i) {
    double x = i / 256.0;
    double th = theta.eval_real(x);
    Mat2 got = R.eval(Complex(x, 0));
    Mat2 expect{Complex(std::cos(th), 0), Complex(-std::sin(th), 0),
                Complex(std::sin(th), 0), Complex(std::cos(th), 0)};
    worst = std::max(worst, (got - expect).norm2());
    worstdet = std::max(worstdet, std::abs(got.det() - Complex(1, 0)));
  }
  CHECK(worst < 1e-13);
  CHECK(worstdet < 1e-13);
}

TEST_CASE("qsym kills rotations and keeps the complementary part") {
  MatrixFunction R = MatrixFunction::rotation(0.7, L, H);
  CHECK(qsym(R).norm_upper(H) < 1e-15);
  // M - Q(M) has the form (p, -q; q, p)
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  MatrixFunction M(L, H);
  for (auto& e : M.m) {
    e = AnalyticFunction::constant(Complex(U(rng), 0), L, H);
    e += AnalyticFunction::cosine(1, 0.3 * U(rng), L, H);
  }
  MatrixFunction K = M - qsym(M);
  AnalyticFunction d1 = K.a() - K.d();
  AnalyticFunction d2 = K.b() + K.c();
  CHECK(d1.norm_upper(H) < 1e-13);
  CHECK(d2.norm_upper(H) < 1e-13);
  // and Q(M) + (M - Q(M)) = M
  MatrixFunction back = qsym(M) + K - M;
  CHECK(back.norm_upper(H) < 1e-13);
}

TEST_CASE("exp_traceless matches the pointwise closed form") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  MatrixFunction w(L, H);
  AnalyticFunction x = AnalyticFunction::cosine(1, 0.1 * U(rng), L, H);
  x += AnalyticFunction::constant(Complex(0.1 * U(rng), 0), L, H);
  AnalyticFunction y = AnalyticFunction::sine(2, 0.1 * U(rng), L, H);
  w.a() = x;
  w.b() = y;
  w.c() = y;
  w.d() = x * (-1.0);
  MatrixFunction E = exp_traceless(w);
  double worst = 0;
  for (int i = 0; i < 256; ++i) {
    double z = i / 256.0;
    Mat2 got = E.eval(Complex(z, 0));
    Mat2 expect = mat_exp_pointwise(w.eval(Complex(z, 0)));
    worst = std::max(worst, (got - expect).norm2());
  }
  CHECK(worst < 1e-13);
  // det(exp of traceless) = 1
  AnalyticFunction det = E.det();
  det -= AnalyticFunction::constant(Complex(1, 0), L, H);
  CHECK(det.norm_upper(H) < 1e-12);
}

TEST_CASE("log_near_id inverts exp_traceless") {
  MatrixFunction w(L, H);
  w.a() = AnalyticFunction::constant(Complex(0.02, 0), L, H);
  w.b() = AnalyticFunction::cosine(1, 0.03, L, H);
  w.c() = w.b();
  w.d() = w.a() * (-1.0);
  MatrixFunction E = exp_traceless(w);
  MatrixFunction v = log_near_id(E);
  MatrixFunction diff = v - w;
  CHECK(diff.norm_upper(H) < 1e-12);
}

TEST_CASE("inverse norm of R_psi - id against the constant closed form") {
  for (double psi0 : {0.4, 1.2, 2.8}) {
    auto psi = AnalyticFunction::constant(Complex(psi0, 0), L, H);
    double got = inv_norm_rot_minus_id(psi, 0.05);
    double expect = 1.0 / (2 * std::abs(std::sin(psi0 / 2)));
    // certified upper bound: above the truth, within a grid margin
    CHECK(got >= expect - 1e-9);
    CHECK(got <= expect * 1.02);
  }
  // singular case
  auto zero = AnalyticFunction::constant(Complex(0, 0), L, H);
  CHECK(std::isinf(inv_norm_rot_minus_id(zero, 0.05)));
}

TEST_CASE("certified min modulus flags an interior zero") {
  // g(x) = e^{2 pi i x} - 1 vanishes at x = 0 on the real axis
  AnalyticFunction g = AnalyticFunction::harmonic(1, Complex(1, 0), L, H);
  g -= AnalyticFunction::constant(Complex(1, 0), L, H);
  CHECK(certified_min_modulus(g, 0.1) == 0.0);
  // a safely nonvanishing function gets a positive floor
  AnalyticFunction p = AnalyticFunction::cosine(1, 0.3, L, H);
  p += AnalyticFunction::constant(Complex(2.0, 0), L, H);
  double m = certified_min_modulus(p, 0.1);
  CHECK(m > 1.0);
  CHECK(m < 2.0);
}
