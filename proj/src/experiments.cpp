#include "qpr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace qpr {

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double wrap_half(double x) {
  double f = x - std::floor(x);
  return f > 0.5 ? f - 1.0 : f;
}

} // namespace

Precondition precondition_schrodinger(const AnalyticFunction& v, double E,
                                      const Frequency& alpha) {
  Precondition out;
  const double t = E - v.mean().real();
  if (std::abs(t) >= 2.0 - 1e-12) return out; // mean matrix not elliptic
  out.elliptic = true;
  out.theta = std::acos(t / 2.0);
  const double s = std::sin(out.theta);
  const double rs = std::sqrt(s);
  out.C = Mat2{Complex(0, 0), Complex(s / rs, 0), Complex(-1.0 / rs, 0),
               Complex(std::cos(out.theta) / rs, 0)};

  Cocycle base = schrodinger(v, E, alpha);
  MatrixFunction Cm = MatrixFunction::constant(out.C, v.L, v.h);
  Mat2 Ci{out.C.d, -out.C.b, -out.C.c, out.C.a}; // det C = 1
  MatrixFunction Cmi = MatrixFunction::constant(Ci, v.L, v.h);
  MatrixFunction conjA = mul(Cm, mul(base.A, Cmi));
  conjA.symmetrize();
  out.conj = make_cocycle(alpha, conjA);
  out.dist_rot =
      (conjA - MatrixFunction::rotation(out.theta, v.L, v.h)).norm_upper(v.h);
  return out;
}

namespace {

ScanRecord scan_one(const AnalyticFunction& v, const Frequency& alpha,
                    double E, const KamConfig& cfg) {
  ScanRecord rec;
  rec.E = E;
  const double t0 = now_s();
  Precondition pre = precondition_schrodinger(v, E, alpha);
  Cocycle base = schrodinger(v, E, alpha);

  // rotation number of the original cocycle (no acceleration needed for the
  // record; the driver re-estimates with acceleration when attempted)
  try {
    RotOptions ro;
    ro.n_iter = std::max(2048L, cfg.rho_iters / 4);
    ro.tol_spread = 0.5;
    RotResult rr = rotation_number(base, ro);
    rec.rho = rr.rho;
    rec.rho_spread = rr.spread;
  } catch (const DomainError& e) {
    rec.note = e.what();
  }

  if (!pre.elliptic) {
    rec.kam_status = "not_attempted";
    rec.note = "mean matrix not elliptic";
  } else if (pre.dist_rot > cfg.admission) {
    rec.kam_status = "not_attempted";
    rec.note = "not close to a constant rotation";
  } else {
    KamResult res = reduce_to_rotations(pre.conj, cfg);
    rec.kam_status = to_string(res.status);
    rec.final_residual = res.final_residual;
    rec.cert_pass = res.cert_pass;
    if (res.status == KamStatus::converged) {
      rec.rho = res.rho; // accelerated estimate
      rec.rho_spread = res.rho_sigma;
    }
    if (!res.fail_reason.empty()) rec.note = res.fail_reason;
  }

  LyapResult ly = lyapunov(base, 2048, 16);
  rec.lyap = ly.value;
  rec.wall_time = now_s() - t0;
  return rec;
}

} // namespace

ScanResult scan_energies(const AnalyticFunction& v, const Frequency& alpha,
                         const std::vector<double>& E_grid,
                         const KamConfig& cfg, int jobs) {
  ScanResult out;
  const int n = (int)E_grid.size();
  out.records.resize(n);
  if (jobs < 1) jobs = 1;
  if (jobs == 1) {
    for (int i = 0; i < n; ++i)
      out.records[i] = scan_one(v, alpha, E_grid[i], cfg);
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      while (true) {
        int i = next.fetch_add(1);
        if (i >= n) break;
        out.records[i] = scan_one(v, alpha, E_grid[i], cfg);
      }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ScanSummary& s = out.summary;
  s.n_grid = n;
  for (const auto& r : out.records) {
    // admitted = both the rho-certificate and the closeness admission passed
    // (the scheme actually ran); rejected energies stay first-class data
    const bool admitted =
        r.kam_status == "converged" || r.kam_status == "stalled";
    if (admitted) s.n_admitted++;
    if (r.kam_status == "converged") s.n_converged++;
  }
  s.converged_fraction =
      s.n_admitted > 0 ? (double)s.n_converged / s.n_admitted : 0;
  const double cell =
      n > 1 ? (E_grid.back() - E_grid.front()) / (n - 1) : 0;
  s.measure_estimate = cell * s.n_converged;
  return out;
}

MonotoneReport check_rho_monotone(const AnalyticFunction& v,
                                  const Frequency& alpha,
                                  const std::vector<double>& E_grid,
                                  const KamConfig& cfg) {
  if (E_grid.size() < 2) throw DomainError("grid too small");
  for (size_t i = 1; i < E_grid.size(); ++i)
    if (E_grid[i] <= E_grid[i - 1])
      throw DomainError("grid not increasing");
  const double vsup = v.norm_upper(0);
  if (E_grid.front() > -2 - 2 * vsup || E_grid.back() < 2 + 2 * vsup)
    throw DomainError("grid does not cover the spectrum range");

  MonotoneReport rep;
  const ContinuedFraction* cf = alpha.cf ? alpha.cf.get() : nullptr;
  for (double E : E_grid) {
    Cocycle base = schrodinger(v, E, alpha);
    RotOptions ro;
    ro.n_iter = cfg.rho_iters;
    ro.tol_spread = 0.5;
    ro.accel = cf;
    RotResult rr = rotation_number(base, ro);
    rep.rhos.push_back(rr.rho);
    rep.spreads.push_back(std::max(rr.spread, rr.uncertainty));
  }
  double max_spread = 0;
  for (double s : rep.spreads) max_spread = std::max(max_spread, s);
  rep.tol_mono = 2 * max_spread + 1e-9;
  rep.ok = true;
  for (size_t i = 0; i + 1 < rep.rhos.size(); ++i) {
    if (rep.rhos[i] < rep.rhos[i + 1] - rep.tol_mono) {
      rep.ok = false;
      rep.first_bad = (int)i;
      break;
    }
  }
  rep.endpoints_ok =
      rep.rhos.front() >= 0.5 - 1e-2 && rep.rhos.back() <= 1e-2;
  return rep;
}

double hs_norm_sq_integral(const MatrixFunction& M) {
  double s = 0;
  for (const auto& e : M.m) {
    double p = 0, n1 = 0;
    for (int l = -e.L; l <= e.L; ++l) p += std::norm(e.at(l));
    for (int l = -e.L; l <= e.L; ++l) n1 += std::abs(e.at(l));
    s += p + 2 * n1 * e.err + e.err * e.err;
  }
  return s;
}

DrhoReport check_drho_dE(const AnalyticFunction& v, const Frequency& alpha,
                         double E0, const KamConfig& cfg, double dE) {
  DrhoReport rep;
  if (dE <= 0) dE = 1e-6 * std::max(1.0, std::abs(E0));
  rep.dE = dE;

  struct Run {
    bool ok = false;
    double rho = 0;
    MatrixFunction Btot;
  };
  auto run_at = [&](double E) {
    Run r;
    Precondition pre = precondition_schrodinger(v, E, alpha);
    if (!pre.elliptic) return r;
    KamResult res = reduce_to_rotations(pre.conj, cfg);
    if (res.status != KamStatus::converged) return r;
    r.ok = true;
    double m = res.phi.mean().real() / TWO_PI;
    r.rho = m - std::floor(m);
    MatrixFunction Cm = MatrixFunction::constant(pre.C, res.B.L, res.B.h);
    r.Btot = mul(res.B, Cm);
    return r;
  };

  Run mid = run_at(E0), lo = run_at(E0 - dE), hi = run_at(E0 + dE);
  if (!mid.ok || !lo.ok || !hi.ok) {
    rep.reason = "not applicable at E0";
    return rep;
  }
  rep.applicable = true;
  const double dplus = wrap_half(hi.rho - mid.rho);
  const double dminus = wrap_half(lo.rho - mid.rho);
  rep.fd = (dplus - dminus) / (2 * dE);
  rep.hs_integral = hs_norm_sq_integral(mid.Btot);
  rep.rhs = -rep.hs_integral / (8 * M_PI);
  rep.rel_discrepancy =
      std::abs(rep.fd - rep.rhs) / std::max(1e-300, std::abs(rep.rhs));
  return rep;
}

}  // namespace qpr
