#pragma once

#include <array>

#include "qpr/analytic.hpp"

namespace qpr {

/// Plain 2x2 complex matrix for pointwise evaluation.
struct Mat2 {
  Complex a{0, 0}, b{0, 0}, c{0, 0}, d{0, 0};
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
            c * o.b + d * o.d};
  }
  Mat2 operator-(const Mat2& o) const {
    return {a - o.a, b - o.b, c - o.c, d - o.d};
  }
  Complex det() const { return a * d - b * c; }
  /// spectral norm (largest singular value)
  double norm2() const;
  static Mat2 id() { return {1, 0, 0, 1}; }
};

/// 2x2 matrix of AnalyticFunctions, all sharing h and L. Norm conventions:
/// the certified upper bound is the Frobenius norm of the entrywise upper
/// bounds (dominates the operator sup-norm); the grid lower bound is the
/// max pointwise spectral norm over boundary samples.
struct MatrixFunction {
  std::array<AnalyticFunction, 4> m; // row-major: [a b; c d]
  int L = 0;
  double h = 0;

  MatrixFunction() = default;
  MatrixFunction(int L_, double h_);

  static MatrixFunction identity(int L, double h);
  static MatrixFunction constant(Mat2 v, int L, double h);
  /// constant rotation by `angle`
  static MatrixFunction rotation(double angle, int L, double h);
  /// x -> R_{theta(x)} = [cos theta, -sin theta; sin theta, cos theta]
  static MatrixFunction rot_of(const AnalyticFunction& theta);
  static MatrixFunction J(int L, double h); // (0,-1;1,0)

  AnalyticFunction& a() { return m[0]; }
  AnalyticFunction& b() { return m[1]; }
  AnalyticFunction& c() { return m[2]; }
  AnalyticFunction& d() { return m[3]; }
  const AnalyticFunction& a() const { return m[0]; }
  const AnalyticFunction& b() const { return m[1]; }
  const AnalyticFunction& c() const { return m[2]; }
  const AnalyticFunction& d() const { return m[3]; }

  double norm_upper(double hp) const;
  double norm_lower(double hp, int samples = 256) const;
  Mat2 eval(Complex z) const;

  AnalyticFunction det() const;
  /// adjugate (= inverse when det = 1): (d, -b; -c, a)
  MatrixFunction adjugate() const;
  MatrixFunction restrict_to(double hp) const;
  void symmetrize();
  bool real_symmetric() const;
  void reset_err() {
    for (auto& e : m) e.reset_err();
  }
  double err_sum() const {
    double s = 0;
    for (const auto& e : m) s += e.err;
    return s;
  }

  MatrixFunction& operator+=(const MatrixFunction& o);
  MatrixFunction& operator-=(const MatrixFunction& o);
  MatrixFunction& operator*=(double s);
};

MatrixFunction operator+(MatrixFunction x, const MatrixFunction& y);
MatrixFunction operator-(MatrixFunction x, const MatrixFunction& y);
MatrixFunction operator*(MatrixFunction x, double s);
MatrixFunction mul(const MatrixFunction& x, const MatrixFunction& y);
MatrixFunction shift(const MatrixFunction& x, double beta);

/// Q(M) = (M + J M J)/2; M - Q(M) commutes with every rotation.
MatrixFunction qsym(const MatrixFunction& x);

/// entrywise product with a scalar function
MatrixFunction scalar_mul(const MatrixFunction& x, const AnalyticFunction& s);

/// ||M - id|| certified upper bound at hp.
double dist_id_upper(const MatrixFunction& x, double hp);

/// exp of a traceless matrix function via v^2 = delta id:
/// exp v = C(delta) id + S(delta) v with even/odd scalar series.
MatrixFunction exp_traceless(const MatrixFunction& v);

/// log(id + X) by matrix series; requires ||X|| <= 0.6.
MatrixFunction log_near_id(const MatrixFunction& P);

/// Certified minimum modulus of a scalar analytic function over Delta_hp:
/// boundary grid minus a Lipschitz margin, with a min-modulus-principle
/// interior check. Returns 0 when no positive bound is certifiable.
double certified_min_modulus(const AnalyticFunction& g, double hp,
                             int samples = 512);

/// Certified upper bound of ||(R_psi - id)^{-1}|| over Delta_hp (pointwise
/// operator norm, 1/min |e^{+-i psi}-1|); +inf when not certifiable.
double inv_norm_rot_minus_id(const AnalyticFunction& psi, double hp);

}  // namespace qpr
