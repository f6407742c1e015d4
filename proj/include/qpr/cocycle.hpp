#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "qpr/arithmetic.hpp"
#include "qpr/matrixfn.hpp"

namespace qpr {

/// A base frequency held exactly, so torus reductions frac(m alpha) stay
/// meaningful at huge iterates. For exact-quotient expansions the value is
/// the deepest convergent. When built from an expansion the cf is kept so
/// downstream code (the KAM driver) reuses it instead of re-expanding.
struct Frequency {
  Rational value;
  double approx = 0;
  std::shared_ptr<const ContinuedFraction> cf;

  Frequency() = default;
  explicit Frequency(const Rational& v) : value(v), approx(v.get_d()) {}
  explicit Frequency(double v) : value(Rational(v)), approx(v) {}
  static Frequency from_cf(const ContinuedFraction& c) {
    Frequency f(c.alpha);
    f.cf = std::make_shared<ContinuedFraction>(c);
    return f;
  }

  Rational frac_mult(const BigInt& m) const { return frac(Rational(m) * value); }
  double frac_mult_d(const BigInt& m) const { return frac_mult(m).get_d(); }
  /// signed representative of m*alpha in (-1/2, 1/2]
  double signed_rep(const BigInt& m) const {
    Rational f = frac_mult(m);
    if (f > Rational(1, 2)) f -= 1;
    return f.get_d();
  }
};

/// SL(2,R)-valued analytic cocycle (alpha, A).
struct Cocycle {
  Frequency alpha;
  MatrixFunction A;
  int homotopy_class = 0;
  double det_defect = 0; // certified ||det A - 1|| at strip h

  double h() const { return A.h; }
  int L() const { return A.L; }
};

/// Builds the cocycle, measuring det defect and homotopy class.
Cocycle make_cocycle(const Frequency& alpha, const MatrixFunction& A);

/// Schrodinger cocycle S_{v,E} = (E - v, -1; 1, 0). det = 1 exactly on
/// coefficients; homotopy class 0.
Cocycle schrodinger(const AnalyticFunction& v, double E, const Frequency& alpha);

/// Degree of x -> A(x) as a loop (winding of the first column on the axis).
int homotopy_degree(const MatrixFunction& A, int samples = 1024);

/// Fibered product A^{(n)}; binary splitting over exact shifts. n < 0 uses
/// the inverse formula. Throws "growth overflow" past 1e100.
MatrixFunction iterate(const Cocycle& c, const BigInt& n);

struct RotResult {
  double rho = 0;        // mod 1, in [0,1)
  double spread = 0;     // across fibers (error indicator)
  double uncertainty = 0;
  int accel_levels = 0;
};

struct RotOptions {
  long n_iter = 1 << 13;
  int n_fibers = 8;
  double tol_spread = 0.05;       // above this: "rotation number not resolved"
  const ContinuedFraction* accel = nullptr;
  double accel_norm_cap = 40.0;   // stop accelerating past this iterate norm
  double accel_q_cap = 1e7;
};

/// Fibered rotation number via the projective lift, refined through the
/// identity rho(q alpha, A^{(q)}) = q rho when a continued fraction is given.
/// Reported in the unit where (0,-1;1,0) has rho = 1/4.
RotResult rotation_number(const Cocycle& c, const RotOptions& opt = {});

struct LyapResult {
  double value = 0;
  double half_value = 0; // estimate at n_iter/2 (convergence diagnostic)
};

/// Fibered Lyapunov exponent by renormalized pointwise orbits averaged over
/// n_theta fibers.
LyapResult lyapunov(const Cocycle& c, long n_iter, int n_theta);

/// A = R_phi (id + xi).
struct RotationForm {
  AnalyticFunction phi;
  MatrixFunction xi;

  MatrixFunction reconstruct() const {
    return mul(MatrixFunction::rot_of(phi),
               MatrixFunction::identity(xi.L, xi.h) + xi);
  }
  double xi_norm(double hp) const { return xi.norm_upper(hp); }
};

/// xi = R_{-phi} A - id with certified norm.
RotationForm to_rotation_form(const MatrixFunction& A,
                              const AnalyticFunction& phi);

struct ComposeDiag {
  double claim_bound = 0; // e^{sum ||M^(k)||^2 ||xi_k||} - 1
  double measured = 0;    // certified norm of the explicit xi^(l)
};

/// Product of rotation forms M_l(id+xi_l)...M_0(id+xi_0) (factors already
/// shifted along the orbit); returns R_{sum phi}(id + xi) with the explicit
/// xi and the growth-claim bound. Throws "rotation form lost" when the
/// claim bound reaches 1.
RotationForm compose_rotation_forms(const std::vector<RotationForm>& forms,
                                    ComposeDiag* diag = nullptr);

struct OrbitComposeResult {
  AnalyticFunction dev;  // S_n phi - n phihat(0)
  double mean_angle = 0; // n phihat(0) reduced mod 2pi
  MatrixFunction xi;     // xi^{(n)}
  double claim_bound = 0;
  double rot_growth = 0; // max measured e^{||Im S_m phi||} over stages
};

/// A^{(n)} of A = R_phi(id + xi) in rotation form, by binary splitting.
/// err_amp: Birkhoff error amplification bound (see birkhoff_deviation).
OrbitComposeResult iterate_rotation_form(const RotationForm& f,
                                         const Frequency& alpha,
                                         const BigInt& n, double err_amp = -1);

/// n phihat0 mod 2pi via exact rational reduction of the long-double ratio.
double reduced_mean_angle(double phi0, const BigInt& n);

}  // namespace qpr
