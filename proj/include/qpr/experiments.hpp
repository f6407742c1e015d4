#pragma once

#include "qpr/kam.hpp"

namespace qpr {

struct ScanRecord {
  double E = 0;
  double rho = 0;
  double rho_spread = 0;
  bool cert_pass = false;
  std::string kam_status = "not_attempted";
  double final_residual = 0;
  double lyap = 0;
  double wall_time = 0;
  std::string note;
};

struct ScanSummary {
  double lambda = 0;
  int n_grid = 0;
  int n_admitted = 0;
  int n_converged = 0;
  double converged_fraction = 0; // of admitted points
  double measure_estimate = 0;   // one grid cell per converged point
};

struct ScanResult {
  std::vector<ScanRecord> records;
  ScanSummary summary;
};

/// Constant elliptic normal form of the mean Schrodinger matrix:
/// C (E - vhat0, -1; 1, 0) C^{-1} = R_theta with det C = 1, and the cocycle
/// C S_{v,E} C^{-1} it preconditions.
struct Precondition {
  bool elliptic = false;
  double theta = 0;
  Mat2 C = Mat2::id();
  Cocycle conj;
  double dist_rot = 0; // ||C S C^{-1} - R_theta||_h
};

Precondition precondition_schrodinger(const AnalyticFunction& v, double E,
                                      const Frequency& alpha);

/// Energy scan: per E estimate rho, run the certificate and (when admitted)
/// reduce_to_rotations; emits one record per grid point and an
/// interval-counting measure estimate of the converged set.
ScanResult scan_energies(const AnalyticFunction& v, const Frequency& alpha,
                         const std::vector<double>& E_grid,
                         const KamConfig& cfg, int jobs = 1);

struct MonotoneReport {
  bool ok = false;
  bool endpoints_ok = false;
  int first_bad = -1;
  double tol_mono = 0;
  std::vector<double> rhos;
  std::vector<double> spreads;
};

/// rho(E) non-increasing within 2 max(spread), rho(first) near 1/2,
/// rho(last) near 0; the grid must increase and cover [-2-2||v||, 2+2||v||].
MonotoneReport check_rho_monotone(const AnalyticFunction& v,
                                  const Frequency& alpha,
                                  const std::vector<double>& E_grid,
                                  const KamConfig& cfg);

struct DrhoReport {
  bool applicable = false;
  std::string reason;
  double dE = 0;
  double fd = 0;          // centered finite difference of rho
  double hs_integral = 0; // int_T ||B||_HS^2
  double rhs = 0;         // -(1/8 pi) hs_integral
  double rel_discrepancy = 0;
};

/// Validates d rho/dE = -(1/8 pi) int ||B||_HS^2 at E0 via converged runs at
/// E0 and E0 +- dE (B includes the constant preconditioner).
DrhoReport check_drho_dE(const AnalyticFunction& v, const Frequency& alpha,
                         double E0, const KamConfig& cfg, double dE = 0);

/// int_T ||M(x)||_HS^2 dx by Parseval on the entries.
double hs_norm_sq_integral(const MatrixFunction& M);

}  // namespace qpr
