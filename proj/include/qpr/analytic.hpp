#pragma once

#include <utility>
#include <vector>

#include "qpr/arithmetic.hpp"
#include "qpr/common.hpp"

namespace qpr {

/// Real-analytic function on the torus represented by a truncated Fourier
/// series sum_{|l|<=L} c_l e^{2 pi i l x}, regarded as an element of
/// C^omega_h(T, C).
///
/// `err` is a certified bound for the sup-norm over the strip Delta_h of the
/// difference between the represented truncation and the function it stands
/// for (truncation tails discarded by products and series, plus a roundoff
/// allowance). Every certified upper norm includes it; everything derived
/// from coefficients alone is labeled accordingly.
struct AnalyticFunction {
  int L = 0;
  double h = 0;
  bool real_symmetric = true;
  double err = 0;
  std::vector<Complex> c{Complex(0, 0)}; // index l+L, l = -L..L

  AnalyticFunction() = default;
  AnalyticFunction(int L_, double h_, bool sym = true)
      : L(L_), h(h_), real_symmetric(sym), c(2 * L_ + 1, Complex(0, 0)) {}

  static AnalyticFunction zero(int L, double h) {
    return AnalyticFunction(L, h, true);
  }
  static AnalyticFunction constant(Complex v, int L, double h);
  /// amp * cos(2 pi j x)
  static AnalyticFunction cosine(int j, double amp, int L, double h);
  /// amp * sin(2 pi j x)
  static AnalyticFunction sine(int j, double amp, int L, double h);
  /// single harmonic amp * e^{2 pi i j x} (not real-symmetric)
  static AnalyticFunction harmonic(int j, Complex amp, int L, double h);

  Complex& at(int l) { return c[l + L]; }
  const Complex& at(int l) const { return c[l + L]; }
  Complex mean() const { return c[L]; }

  /// Certified upper bound of sup over Delta_{hp}: coefficient sum + err.
  double norm_upper(double hp) const;
  /// Coefficient sum only (no err), for error-propagation formulas.
  double coeff_norm(double hp) const;
  /// Grid lower bound: max |f| over samples on both boundary circles.
  double norm_lower(double hp, int samples = 512) const;
  /// Certified upper bound of sup |f'| over Delta_{hp} (hp < h needed only
  /// for the err part, which is Cauchy-estimated).
  double deriv_upper(double hp) const;

  Complex eval(Complex z) const;
  double eval_real(double x) const { return eval(Complex(x, 0)).real(); }

  /// Same coefficients regarded on a smaller strip.
  AnalyticFunction restrict_to(double hp) const;

  /// Defect max_l |c_{-l} - conj(c_l)| e^{2 pi |l| h}; symmetrize() folds it
  /// into err and sets the flag.
  double symmetry_defect() const;
  void symmetrize();

  /// Promote the represented coefficients to candidate status (forget the
  /// per-stage error budget). Iterative schemes promote at stage boundaries
  /// and re-certify one-shot at the end; forward budgets would otherwise
  /// compound exponentially through Newton loops.
  void reset_err() { err = 0; }

  AnalyticFunction& operator+=(const AnalyticFunction& g);
  AnalyticFunction& operator-=(const AnalyticFunction& g);
  AnalyticFunction& operator*=(double s);
  AnalyticFunction& operator*=(Complex s);
};

AnalyticFunction operator+(AnalyticFunction f, const AnalyticFunction& g);
AnalyticFunction operator-(AnalyticFunction f, const AnalyticFunction& g);
AnalyticFunction operator*(AnalyticFunction f, double s);
AnalyticFunction operator*(AnalyticFunction f, Complex s);

/// Product by coefficient convolution, re-truncated to degree L with the
/// discarded tail (computed exactly at strip h) added to err.
AnalyticFunction mul(const AnalyticFunction& f, const AnalyticFunction& g);

/// (upper, lower) per the strip-norm contract; throws "outside strip".
std::pair<double, double> norm_strip(const AnalyticFunction& f, double h_prime);

/// c_l -> c_l e^{2 pi i l beta}; beta is a torus point in [0,1).
AnalyticFunction shift(const AnalyticFunction& f, double beta);

/// Closed-form Birkhoff sum S_n f = sum_{k<n} f(.+k alpha) on coefficients:
/// l = 0 -> n c_0, else c_l (1 - e^{2 pi i n l alpha})/(1 - e^{2 pi i l alpha}).
/// Throws "resonant frequency" if some ||l alpha|| vanishes within precision.
/// err_amp: amplification bound for the err budget (pass the exact
/// 2/min_{l<=band} ||l alpha|| when known; <0 uses the trivial 2n).
AnalyticFunction birkhoff_sum(const AnalyticFunction& f, const Rational& alpha,
                              const BigInt& n, double err_amp = -1);
/// S_n f - n fhat(0) (safe for huge n; the mean is handled separately).
AnalyticFunction birkhoff_deviation(const AnalyticFunction& f,
                                    const Rational& alpha, const BigInt& n,
                                    double err_amp = -1);

/// exp(f) by scaling-and-squaring with a certified series tail.
AnalyticFunction exp_of(const AnalyticFunction& f);
/// log(1 + u) via 2 atanh(u/(2+u)); requires ||u|| < 0.9.
AnalyticFunction log1p_of(const AnalyticFunction& u);
/// Newton reciprocal with a-posteriori certificate ||1 - g r||.
AnalyticFunction reciprocal(const AnalyticFunction& g);
/// sqrt of a near-constant function d = d0 (1 + s), ||s|| < 0.9.
AnalyticFunction sqrt_near_const(const AnalyticFunction& d);
/// log of a near-constant function (principal branch at the mean).
AnalyticFunction log_near_const(const AnalyticFunction& d);

struct DenjoyReport {
  std::vector<int> ks;
  std::vector<double> ratio_Q;   // ||S_{Q_k} f - Q_k fhat0||_{h_k} vs theory
  std::vector<double> ratio_sup; // sup over sampled l <= Q_{k+1} vs theory
  std::vector<double> theory_Q_term1, theory_Q_term2;     // Q_k^{-M}, Qbar_k^{-1+1/M}
  std::vector<double> theory_sup_term1, theory_sup_term2; // Qbar_k Q_k^{-M}, Qbar_k^{1/M}
  double max_ratio = 0;
  double fnorm = 0; // ||f - fhat0||_h
};

/// Measures the Birkhoff-sum growth bounds along the selected denominators:
/// for each k >= 1, the ratios measured/(||f - fhat0||_h * theory) at strips
/// h_k = h(1 - eta/k^2), for S_{Q_k} and for a sample of l <= Q_{k+1}
/// (geometric points plus the denominators). The max ratio is an empirical
/// stand-in for the constant the bounds carry.
DenjoyReport verify_denjoy_bounds(const AnalyticFunction& f,
                                  const ContinuedFraction& cf,
                                  const SelectedSubsequence& seq,
                                  const DiophantineParams& params, double h,
                                  double eta);

}  // namespace qpr
