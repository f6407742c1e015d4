#include "qpr/selftest.hpp"

#include <cmath>
#include <iomanip>

#include "qpr/experiments.hpp"
#include "qpr/serialize.hpp"

namespace qpr {

namespace {

struct Harness {
  std::ostream& os;
  int passed = 0, failed = 0;

  void check(const std::string& name, bool ok) {
    os << (ok ? "PASS  " : "FAIL  ") << name << "\n";
    (ok ? passed : failed)++;
  }

  template <typename F>
  void expect_error(const std::string& name, const std::string& what, F&& f) {
    bool ok = false;
    try {
      f();
    } catch (const DomainError& e) {
      ok = std::string(e.what()).find(what) != std::string::npos;
    }
    check(name + " -> \"" + what + "\"", ok);
  }
};

} // namespace

bool selftest(std::ostream& os) {
  Harness t{os};
  const int L = 32;
  const double h = 0.2;

  // continued fractions
  {
    CfResult r = expand_cf((std::sqrt(5.0) - 1) / 2, BigInt(100));
    bool ok = r.status == CfStatus::ok;
    std::vector<long> expect{1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89};
    ok = ok && r.cf.q.size() == expect.size();
    for (size_t i = 0; ok && i < expect.size(); ++i)
      ok = r.cf.q[i] == expect[i];
    for (const auto& a : r.cf.a) ok = ok && a == 1;
    t.check("golden mean: a_k = 1, q = Fibonacci up to 89", ok);
  }
  {
    CfResult r = expand_cf(std::sqrt(2.0) - 1, BigInt(30));
    bool ok = r.cf.q.size() == 5;
    std::vector<long> expect{1, 2, 5, 12, 29};
    for (size_t i = 0; ok && i < expect.size(); ++i)
      ok = r.cf.q[i] == expect[i];
    for (const auto& a : r.cf.a) ok = ok && a == 2;
    t.check("sqrt2 - 1: a_k = 2, q = (1,2,5,12,29)", ok);
  }
  {
    CfResult r = expand_cf(Rational(1, 3), BigInt(1000));
    t.check("alpha = 1/3 -> rational or precision exhausted with a = (3)",
            r.status == CfStatus::rational_or_precision_exhausted &&
                r.cf.a.size() == 1 && r.cf.a[0] == 3);
  }
  t.check("torus_norm(0.3) = 0.3", std::abs(torus_norm(0.3) - 0.3) < 1e-15);
  t.check("torus_norm(0.7) = 0.3", std::abs(torus_norm(0.7) - 0.3) < 1e-15);
  t.check("torus_norm(-1.5) = 0.5", std::abs(torus_norm(-1.5) - 0.5) < 1e-15);

  {
    DiophantineParams p(2.0, 0.4, 0.1);
    ContinuedFraction cf1 = cf_from_quotients({BigInt(5)});
    t.expect_error("select_q on depth-1 cf", "insufficient depth",
                   [&] { select_q(cf1, p); });
    ContinuedFraction g = cf_golden(60);
    RhoConditionReport r0 = check_rho_condition(g, 0.0, p, 5);
    t.check("rho = 0 fails the arithmetic condition at i = 0",
            !r0.holds && r0.first_fail == 0);
    RhoConditionReport r14 = check_rho_condition(g, 0.25, p, 5);
    t.check("golden alpha, rho = 1/4 fails at i = 2 (q_2 = 2)",
            !r14.holds && r14.first_fail == 2);
  }

  // strip norms and shifts
  {
    auto f = AnalyticFunction::constant(Complex(-2.5, 0), L, h);
    auto [up, lo] = norm_strip(f, 0.1);
    t.check("norm_strip of a constant: upper = lower = |c|",
            std::abs(up - 2.5) < 1e-12 && std::abs(lo - 2.5) < 1e-12);
    auto c1 = AnalyticFunction::cosine(1, 1.0, L, h);
    auto [cu, cl] = norm_strip(c1, 0.15);
    t.check("cos 2 pi x: upper = e^{2 pi h'}, lower >= cosh(2 pi h')",
            std::abs(cu - std::exp(TWO_PI * 0.15)) < 1e-10 &&
                cl >= std::cosh(TWO_PI * 0.15) - 1e-9 && cl <= cu + 1e-12);
    t.expect_error("norm_strip outside the strip", "outside strip",
                   [&] { norm_strip(c1, 0.3); });
  }
  {
    auto f = AnalyticFunction::cosine(1, 1.0, L, h);
    auto g = shift(f, 0.0);
    double d = 0;
    for (int l = -L; l <= L; ++l) d = std::max(d, std::abs(f.at(l) - g.at(l)));
    t.check("shift by 0 is the identity", d < 1e-15);
    auto gh = shift(f, 0.5);
    t.check("cos shifted by 1/2 = -cos",
            std::abs(gh.at(1) + Complex(0.5, 0)) < 1e-14 &&
                std::abs(gh.at(-1) + Complex(0.5, 0)) < 1e-14);
    auto e1 = AnalyticFunction::harmonic(1, Complex(1, 0), L, h);
    auto eq = shift(e1, 0.25);
    t.check("e^{2 pi i x} shifted by 1/4 gets coefficient i",
            std::abs(eq.at(1) - Complex(0, 1)) < 1e-14);
  }
  {
    Rational golden_alpha = cf_golden(40).alpha;
    auto f = AnalyticFunction::constant(Complex(0.7, 0), L, h);
    auto s = birkhoff_sum(f, golden_alpha, BigInt(9));
    t.check("Birkhoff sum of a constant is n c",
            std::abs(s.at(0) - Complex(6.3, 0)) < 1e-12);
    auto c1 = AnalyticFunction::cosine(2, 0.3, L, h);
    auto s1 = birkhoff_sum(c1, golden_alpha, BigInt(1));
    double d = 0;
    for (int l = -L; l <= L; ++l)
      d = std::max(d, std::abs(s1.at(l) - c1.at(l)));
    t.check("Birkhoff sum with n = 1 is f", d < 1e-14);
    t.expect_error("Birkhoff sum at rational frequency", "resonant frequency",
                   [&] { birkhoff_sum(c1, Rational(1, 4), BigInt(7)); });
  }

  // Schrodinger construction
  {
    Frequency alpha = Frequency::from_cf(cf_golden(60));
    auto v0 = AnalyticFunction::zero(L, h);
    Cocycle c = schrodinger(v0, 0.0, alpha);
    Mat2 M = c.A.eval(Complex(0.3, 0));
    t.check("S_{0,0} is the quarter-turn matrix (0,-1;1,0)",
            std::abs(M.a) < 1e-15 && std::abs(M.b + Complex(1, 0)) < 1e-15 &&
                std::abs(M.c - Complex(1, 0)) < 1e-15 && std::abs(M.d) < 1e-15);
    double rho0 = 0.3;
    Cocycle ce = schrodinger(v0, 2 * std::cos(TWO_PI * rho0), alpha);
    Mat2 Me = ce.A.eval(Complex(0, 0));
    t.check("S_{0, 2cos(2 pi rho0)} has trace 2 cos(2 pi rho0)",
            std::abs((Me.a + Me.d).real() - 2 * std::cos(TWO_PI * rho0)) <
                1e-14);
    auto vam = build_potential("1:1", 0.25, L, h); // 2*0.25*cos
    Cocycle cam = schrodinger(vam, 0.0, alpha);
    t.check("almost Mathieu entries (-2 lambda cos, -1; 1, 0)",
            std::abs(cam.A.a().at(1) - Complex(-0.25, 0)) < 1e-15 &&
                cam.det_defect == 0);
  }

  // iteration and rotation number
  {
    Frequency alpha = Frequency::from_cf(cf_golden(60));
    Cocycle rc;
    rc.alpha = alpha;
    rc.A = MatrixFunction::rotation(0.7, L, h);
    rc.homotopy_class = 0;
    MatrixFunction A5 = iterate(rc, BigInt(5));
    Mat2 M = A5.eval(Complex(0.1, 0));
    t.check("constant R_theta iterates to R_{n theta}",
            std::abs(M.a - Complex(std::cos(3.5), 0)) < 1e-12 &&
                std::abs(M.c - Complex(std::sin(3.5), 0)) < 1e-12);
    RotOptions ro;
    ro.n_iter = 4096;
    ContinuedFraction cfg_ = cf_golden(60);
    ro.accel = &cfg_;
    RotResult rr = rotation_number(rc, ro);
    t.check("rotation number of constant R_theta is theta/2pi (1e-8)",
            std::abs(rr.rho - 0.7 / TWO_PI) < 1e-8);
    LyapResult ly = lyapunov(rc, 2048, 8);
    t.check("Lyapunov exponent of a rotation is 0 (1e-6)",
            ly.value < 1e-6);
    Cocycle dc;
    dc.alpha = alpha;
    dc.A = MatrixFunction::constant(
        {Complex(2, 0), Complex(0, 0), Complex(0, 0), Complex(0.5, 0)}, L, h);
    LyapResult ld = lyapunov(dc, 4096, 4);
    t.check("Lyapunov exponent of diag(2, 1/2) is ln 2 (1e-4)",
            std::abs(ld.value - std::log(2.0)) < 1e-4);
  }

  // rotation form
  {
    auto phi = AnalyticFunction::constant(Complex(0.6, 0), L, h);
    MatrixFunction A = MatrixFunction::rot_of(phi);
    RotationForm f = to_rotation_form(A, phi);
    t.check("A = R_phi exactly gives xi = 0 (1e-12)",
            f.xi.norm_upper(h) < 1e-12);
    MatrixFunction Q = MatrixFunction::rotation(M_PI / 2, L, h);
    RotationForm fq =
        to_rotation_form(Q, AnalyticFunction::zero(L, h));
    t.check("R_{quarter turn} vs phi = 0: ||xi|| = sqrt(2) pointwise",
            std::abs(fq.xi.norm_lower(0) - std::sqrt(2.0)) < 1e-6);
    std::vector<RotationForm> forms(3, f);
    ComposeDiag diag;
    RotationForm prod = compose_rotation_forms(forms, &diag);
    t.check("composing xi = 0 factors keeps xi = 0 and adds angles",
            prod.xi.norm_upper(h) < 1e-10 &&
                std::abs(prod.phi.mean().real() - 1.8) < 1e-12);
  }

  // elliptic normalization and CT smoke cases
  {
    KamConfig cfg;
    cfg.L = L;
    auto theta = AnalyticFunction::constant(Complex(0.8, 0), L, h);
    MatrixFunction A = MatrixFunction::rot_of(theta);
    EllipticResult el = elliptic_normalize(A, theta, 20, cfg);
    t.check("elliptic_normalize of R_theta: B = id after 0 iterations",
            el.report.iterations == 0 && el.report.B_dist < 1e-12);
    MatrixFunction H = MatrixFunction::constant(
        {Complex(3, 0), Complex(0, 0), Complex(0, 0), Complex(1.0 / 3, 0)}, L,
        h);
    t.expect_error("hyperbolic matrix with theta = 0", "not in elliptic domain",
                   [&] {
                     elliptic_normalize(
                         H, AnalyticFunction::zero(L, h), 20, cfg);
                   });
    auto phb = AnalyticFunction::constant(Complex(0.75, 0), L, h);
    CtStepResult ct =
        ct_step(0.013, MatrixFunction::rot_of(phb), phb, 0.1, h, cfg);
    t.check("ct_step on an exact rotation exits immediately with B = id",
            ct.report.N_used <= 1 && dist_id_upper(ct.B, ct.B.h) < 1e-10);
    t.expect_error("ct_step near phi = 0", "CT preconditions violated", [&] {
      auto ph0 = AnalyticFunction::constant(Complex(1e-9, 0), L, h);
      ct_step(0.013, MatrixFunction::rot_of(ph0), ph0, 0.1, h, cfg);
    });
  }

  // reduction of a constant rotation and a small scan
  {
    KamConfig cfg;
    cfg.L = L;
    Frequency alpha = Frequency::from_cf(cf_golden(200));
    Cocycle rc;
    rc.alpha = alpha;
    rc.A = MatrixFunction::rotation(0.9, L, h);
    rc.homotopy_class = 0;
    KamResult res = reduce_to_rotations(rc, cfg);
    t.check("reduce_to_rotations of constant R_theta converges at step 0",
            res.status == KamStatus::converged &&
                dist_id_upper(res.B, res.final_h) < 1e-12 &&
                std::abs(res.phi.mean().real() - 0.9) < 1e-10);
  }
  {
    KamConfig cfg;
    cfg.L = 16;
    Frequency alpha = Frequency::from_cf(cf_golden(200));
    auto v0 = AnalyticFunction::zero(16, h);
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) grid.push_back(-1.9 + i * (3.8 / 8));
    ScanResult sr = scan_energies(v0, alpha, grid, cfg);
    // E = 0 sits at rho = 1/4 exactly, which the arithmetic certificate
    // rejects; every admitted point converges at step 0
    t.check("scan of v = 0: every admitted energy converges at step 0",
            sr.summary.n_converged == sr.summary.n_admitted &&
                sr.summary.n_admitted >= (int)grid.size() - 1);
  }
  {
    KamConfig cfg;
    cfg.L = 16;
    Frequency alpha = Frequency::from_cf(cf_golden(200));
    auto v0 = AnalyticFunction::zero(16, h);
    std::vector<double> bad{0.5, -0.5, 2.5, -2.5};
    t.expect_error("check_rho_monotone on a shuffled grid",
                   "grid not increasing", [&] {
                     check_rho_monotone(v0, alpha, bad, cfg);
                   });
  }

  os << t.passed << " passed, " << t.failed << " failed\n";
  return t.failed == 0;
}

}  // namespace qpr
