#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qpr/cocycle.hpp"

namespace qpr {

/// Tunables of the reduction. The paper's constants (C0..C3, eps0, T, J)
/// are existence-only; here they are configuration with desk-scale
/// defaults, plus an adaptive mode where inner-loop lengths and admission
/// are driven by measured contraction instead of the formulas.
struct KamConfig {
  double h_star = 0.02;
  double eps = 1e-3;       // epsilon of the Q_alpha condition / Thm target
  double tau = 2.0;
  double nu = 0.4;
  double eta = 0.1;        // eta of the strip schedule eta_k = eta/k^2
  double D = 4.0;
  double tol_residual = 1e-9;
  int max_outer = 12;
  double c0 = 4.0;
  double c1 = 160000.0;    // 1e4 * c2
  double c2 = 16.0;
  double c3 = 100.0;
  double eps0 = 1e-4;      // formula-mode CT admission
  double el_eps = 0.05;    // elliptic-lemma domain epsilon
  double admission = 0.25; // closeness to a constant rotation at entry
  long long T_threshold = 1000;
  bool adaptive = true;
  double bridge_exponent = 1.5; // working-ladder calA in adaptive mode
  int L = 64;
  int max_inner = 48;
  int grid = 256;
  long rho_iters = 1 << 13;
  double rho_accel_cap = 1e7; // acceleration stops past this denominator
  double stop_floor = 1e-14;
  BigInt max_q = BigInt("1000000000000000000");
  int golden_depth = 600;

  DiophantineParams dioph() const { return {tau, nu, eps}; }
};

/// log U_k with U_k = exp(-(Qbar_k Q_k^{-b} + Qbar_k^a)); underflowing U_k
/// come back as very negative log values.
long double log_U(const SelectedSubsequence& seq, int k,
                  const DiophantineParams& params);

struct EllipticReport {
  int iterations = 0;
  double initial_dist = 0;
  double final_dist = 0;
  double B_dist = 0;
  double r2 = 0;          // ||R_{2 theta} - id|| at entry
  double bound_ratio = 0; // ||B-id|| ||R_{2theta}-id||^2 / initial_dist
};

struct EllipticResult {
  MatrixFunction B;
  AnalyticFunction theta_prime;
  EllipticReport report;
};

/// Lemma-"elliptic" iteration with function-valued arithmetic:
/// repeatedly write A = e^v R_theta, kill the symmetric part of v by a
/// conjugation e^w with (xt, yt) = (R_{2 theta} - id)^{-1}(x, y), absorb
/// the rotation part into theta. Stops at ||A - R_theta|| < 1e-14 (or the
/// certified arithmetic floor) or max_iter.
EllipticResult elliptic_normalize(const MatrixFunction& A,
                                  const AnalyticFunction& theta, int max_iter,
                                  const KamConfig& cfg);

struct CtInnerRecord {
  int i = 0;
  double h_i = 0;
  double xi_norm = 0;
  double B_dist = 0;
  double ratio = 0;
};

struct CtStepReport {
  double rho_inv = 0;
  double xi0 = 0;
  double xi_final = 0;
  int N_formula = 0;
  int N_used = 0;
  double target_formula = 0; // c0 e^{-h delta rho^2/(c0 |bar alpha|)} xi0
  double max_ratio = 0;
  std::string stop_note;
  std::vector<CtInnerRecord> inner;
};

struct CtStepResult {
  MatrixFunction B;
  AnalyticFunction phi;  // phi_N
  MatrixFunction A;      // A_N = B(x+bar alpha) bar_A B(x)^{-1}
  CtStepReport report;
};

/// Prop 4.1 part (1): the N-step inner loop on shrinking strips
/// h_j = e^{-delta j/(3N)} h, asserting the per-step contraction 1/C2 in
/// formula mode and following measured contraction in adaptive mode.
CtStepResult ct_step(double bar_alpha, const MatrixFunction& bar_A,
                     const AnalyticFunction& bar_phi, double delta, double hcur,
                     const KamConfig& cfg);

struct CtCommutingReport {
  double commutation_defect = 0;
  double L_norm = 0;
  double rotated_sum_inv = 0; // ||(R_{phi(.+alpha)+phi} - id)^{-1}||
  double residual = 0;
  double chain_bound = 0;
  std::vector<double> L_levels;
  std::vector<double> L1_levels;
  std::vector<double> L2_levels;
};

struct CtCommutingResult {
  AnalyticFunction phi2;
  MatrixFunction A2; // tilde A = B(x+alpha) A B(x)^{-1} on the final strip
  CtCommutingReport report;
};

/// Prop 4.1 part (2): conjugate the commuting partner (alpha, A) by the
/// ct_step B, symmetrize with Q(M) = (M + JMJ)/2 and extract the rotation
/// angle from (tilde A - L)/det^{1/2}.
CtCommutingResult ct_commuting(const MatrixFunction& B, const Frequency& alpha,
                               const MatrixFunction& A,
                               const AnalyticFunction& phi, double bar_alpha,
                               const MatrixFunction& bar_A, double rho_inv,
                               double delta, double hcur, const KamConfig& cfg);

struct RotExtract {
  AnalyticFunction phi;
  double qsym_norm = 0;
};

/// Angle function of a near-rotation matrix function via the symmetrization
/// route; throws "degenerate symmetrization" when det(M - Q(M)) winds or
/// vanishes on the strip.
RotExtract rot_extract(const MatrixFunction& M, double hp);

struct AqReport {
  double phi_dev = 0;
  double inv2 = 0;      // ||(R_{2 phi^{(Q)}} - id)^{-1}||
  double rho_k = 0;     // eps/(4(Q_{k+1}^{-tau} + Qbar_{k+1}^{-nu}))
  double xi_norm = 0;
  double U_k = 0;
  double claim_bound = 0;
  bool phi_ok = true, rho_ok = true, xi_ok = true;
};

struct AqResult {
  double bar_alpha = 0; // signed representative of Q_{k+1} alpha
  BigInt Q;
  RotationForm formQ;   // phi^{(Q)}, xi^{(Q)} at the target strip
  AqReport report;
};

/// Lemma "Aq": A^{(Q_{k+1})} in rotation form with the three conclusions
/// checked at the target strip (asserted in formula mode, recorded in
/// adaptive mode).
AqResult aq_iterate(const RotationForm& form, const Frequency& alpha,
                    const ContinuedFraction& cf, const SelectedSubsequence& seq,
                    int k, double h_target, const KamConfig& cfg);

struct KamStepRecord {
  int k = -1;              // ladder index (or -1 for the bootstrap)
  std::string Q, Qbar;
  double h = 0;
  double xi_norm = 0;
  double B_dist = 0;
  int N_inner = 0;
  double claim_bound = 0;
  std::string note;
};

struct KamState {
  int k = 0; // current ladder index
  double h_k = 0;
  RotationForm form;
  MatrixFunction B_accum;
  std::vector<double> residual_history;
};

/// One step of Prop 4.4: aq_iterate, ct_step on (bar alpha, bar A) with
/// delta tied to the strip schedule, ct_commuting on (alpha, A_k); the new
/// strip is h_k (1 - eta_{k+1})^2.
KamState inductive_step(const KamState& state, const Cocycle& cocycle,
                        const ContinuedFraction& cf,
                        const SelectedSubsequence& seq, const KamConfig& cfg,
                        KamStepRecord* record = nullptr);

enum class KamStatus { converged, stalled, precondition_failed };

std::string to_string(KamStatus s);

struct KamResult {
  KamStatus status = KamStatus::precondition_failed;
  MatrixFunction B;
  AnalyticFunction phi;
  double final_residual = 0;
  double final_h = 0;
  double B_dist_id = 0;
  double rho = 0, rho_sigma = 0;
  bool cert_pass = false;
  int cert_fail_index = -1;
  int cert_indeterminate_index = -1;
  std::string fail_reason;
  std::vector<KamStepRecord> history;
};

/// Theorem-1.4 driver: expansion and ladder, rotation number with
/// acceleration, the Q_alpha certificate, the section-5 bootstrap
/// (xi_0 = R_{-Q rho} A^{(Q)} - id plus one CT pass), then inductive steps
/// until the certified residual reaches tol_residual.
KamResult reduce_to_rotations(const Cocycle& c, const KamConfig& cfg);

/// Certified conjugacy residual ||B(x+alpha) A B^{-1} - R_phi|| at strip hp
/// (adjugate route with a determinant-floor correction), and the plain grid
/// residual with exact pointwise inverses.
double conjugacy_residual_cert(const MatrixFunction& B, const Frequency& alpha,
                               const MatrixFunction& A,
                               const AnalyticFunction& phi, double hp);
double conjugacy_residual_grid(const MatrixFunction& B, double alpha,
                               const MatrixFunction& A,
                               const AnalyticFunction& phi, int samples = 256);

}  // namespace qpr
