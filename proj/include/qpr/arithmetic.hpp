#pragma once

#include <optional>
#include <vector>

#include "qpr/common.hpp"

namespace qpr {

/// Continued-fraction expansion of a frequency alpha in (0,1).
///
/// Convergents are exact integers: p_0=0, q_0=1, p_1=1, q_1=a_1 and
/// p_k = a_k p_{k-1} + p_{k-2}, q_k = a_k q_{k-1} + q_{k-2}.
/// `alpha` is the exact rational the expansion was computed from; in
/// exact-quotient mode it is the deepest convergent p_K/q_K and
/// `surrogate_tail` is set (torus distances involving q_K are then
/// meaningless at the last level and callers must stay below it).
struct ContinuedFraction {
  Rational alpha;
  std::vector<BigInt> a;    // partial quotients a_1..a_K
  std::vector<BigInt> p, q; // convergents, indices 0..K
  bool terminated = false;  // expansion ended: rational or precision floor
  bool surrogate_tail = false;

  int depth() const { return static_cast<int>(a.size()); }

  /// ||q_k alpha||_T as an exact rational of the stored alpha.
  Rational qk_dist(int k) const;

  double alpha_d() const { return alpha.get_d(); }
};

enum class CfStatus { ok, rational_or_precision_exhausted };

struct CfResult {
  ContinuedFraction cf;
  CfStatus status = CfStatus::ok;
  std::string message;
};

/// Expand alpha (exact rational) by integer Euclid, truncated at the first
/// q_k > max_q. Residuals below 2^-40 end the expansion with status
/// rational_or_precision_exhausted (the partial expansion is returned).
CfResult expand_cf(const Rational& alpha, const BigInt& max_q);
CfResult expand_cf(double alpha, const BigInt& max_q);

/// Build from an explicit positive quotient list (exact Liouville mode).
/// alpha is set to the deepest convergent.
ContinuedFraction cf_from_quotients(const std::vector<BigInt>& quotients);

/// Quotient list (1,1,1,...) resp. (2,2,2,...) of the stated depth.
ContinuedFraction cf_golden(int depth);
ContinuedFraction cf_sqrt2(int depth);

/// Arithmetic parameters of the admission condition Q_alpha(tau, nu, eps)
/// and the derived KAM exponents.
struct DiophantineParams {
  double tau = 2.0;
  double nu = 0.4;
  double eps = 1e-3;
  double tau_bar = 0, nu_bar = 0;
  double M = 0;    // max(4 tau_bar, 2/(1 - 2 nu_bar))
  double a = 0;    // 2/M
  double b = 0;    // M/2
  double calA = 0; // 2M

  DiophantineParams() { derive(); }
  DiophantineParams(double tau_, double nu_, double eps_)
      : tau(tau_), nu(nu_), eps(eps_) {
    derive();
  }
  void derive();
};

/// The special denominators Q_k = q_{n_k}, Qbar_k = q_{n_k+1} produced by
/// the CD-bridge selection. calA records the exponent the sequence was
/// built (and must be validated) with.
struct SelectedSubsequence {
  std::vector<int> indices;
  std::vector<BigInt> Q, Qbar;
  double calA = 0;
  double M = 0;
  bool truncated = false; // ran out of depth mid-construction

  int size() const { return static_cast<int>(indices.size()); }
};

/// (q_l, q_n) is a CD(A, B, C) bridge: q_{i+1} <= q_i^A for i=l..n-1 and
/// q_l^C >= q_n >= q_l^B.
bool is_cd_bridge(const ContinuedFraction& cf, int l, int n, double A,
                  double B, double C);

/// Constructive selection: repeatedly pick the smallest q_n > Q_k with
/// q_{n+1} > q_n^A; take it directly when q_n <= Qbar_k^{A^4}, otherwise
/// insert a greedy chain of CD(A, A, A^3) bridges. calA_override = 0 uses
/// params.calA = 2M.
SelectedSubsequence select_q(const ContinuedFraction& cf,
                             const DiophantineParams& params,
                             double calA_override = 0.0);

struct SubseqCheck {
  bool ok = true;
  int first_violation = -1;
  std::string detail;
};

/// Independent re-validation of all SelectedSubsequence invariants against
/// the raw expansion: Q_0 = 1, Q_{k+1} <= Qbar_k^{A^4}, and for k >= 1 the
/// dichotomy (Qbar_k >= Q_k^A, or (Qbar_{k-1},Q_k) and (Q_k,Q_{k+1}) both
/// CD(A,A,A^3) bridges).
SubseqCheck validate_subsequence(const ContinuedFraction& cf,
                                 const SelectedSubsequence& seq);

struct RhoConditionReport {
  bool holds = false;
  int first_fail = -1;          // first i with a definite violation
  int first_indeterminate = -1; // first i that uncertainty cannot decide
  int depth_checked = -1;
  std::vector<double> margins;  // lhs - rhs per index
};

/// Finite-depth certificate of ||2 q_i rho|| > eps max(q_{i+1}^-nu, q_i^-tau)
/// for all i <= depth. sigma_rho is the uncertainty of rho; indices whose
/// verdict changes within the 2 q_i sigma band are reported indeterminate.
RhoConditionReport check_rho_condition(const ContinuedFraction& cf, double rho,
                                       const DiophantineParams& params,
                                       int depth, double sigma_rho = 0.0);

}  // namespace qpr
