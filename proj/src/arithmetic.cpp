#include "qpr/arithmetic.hpp"

#include <algorithm>
#include <cmath>

namespace qpr {

Rational ContinuedFraction::qk_dist(int k) const {
  // ||q_k alpha|| = |q_k alpha - p_k| for convergents
  Rational d = Rational(q[k]) * alpha - Rational(p[k]);
  return abs(d);
}

namespace {

void push_convergent(ContinuedFraction& cf, const BigInt& ak) {
  const auto K = cf.p.size(); // index of the new convergent
  cf.a.push_back(ak);
  if (K == 1) {
    cf.p.push_back(1);
    cf.q.push_back(ak);
  } else {
    cf.p.push_back(ak * cf.p[K - 1] + cf.p[K - 2]);
    cf.q.push_back(ak * cf.q[K - 1] + cf.q[K - 2]);
  }
}

} // namespace

CfResult expand_cf(const Rational& alpha, const BigInt& max_q) {
  if (alpha <= 0 || alpha >= 1)
    throw DomainError("expand_cf: alpha must lie in (0,1)");
  if (max_q < 1) throw DomainError("expand_cf: max_q must be >= 1");

  CfResult res;
  ContinuedFraction& cf = res.cf;
  cf.alpha = alpha;
  cf.alpha.canonicalize();
  cf.p = {0};
  cf.q = {1};

  // Euclid on (n, d): alpha_k = n/d, a_{k+1} = floor(d/n), next = (d mod n, n)
  BigInt n = cf.alpha.get_num();
  BigInt d = cf.alpha.get_den();
  const Rational floor_resid(1, BigInt(1) << 40);

  while (true) {
    if (n == 0) {
      cf.terminated = true;
      res.status = CfStatus::rational_or_precision_exhausted;
      res.message = "rational or precision exhausted";
      break;
    }
    BigInt ak = d / n;
    BigInt rem = d % n;
    // candidate q for this quotient
    BigInt qk = cf.q.size() == 1 ? ak : ak * cf.q.back() + cf.q[cf.q.size() - 2];
    if (qk > max_q) break; // truncate at the first q_k > max_q, exclusive
    push_convergent(cf, ak);
    // residual alpha_k = rem / n
    if (rem == 0) {
      cf.terminated = true;
      res.status = CfStatus::rational_or_precision_exhausted;
      res.message = "rational or precision exhausted";
      break;
    }
    if (Rational(rem, n) < floor_resid) {
      cf.terminated = true;
      res.status = CfStatus::rational_or_precision_exhausted;
      res.message = "rational or precision exhausted";
      break;
    }
    d = n;
    n = rem;
  }
  return res;
}

CfResult expand_cf(double alpha, const BigInt& max_q) {
  return expand_cf(Rational(alpha), max_q);
}

ContinuedFraction cf_from_quotients(const std::vector<BigInt>& quotients) {
  if (quotients.empty()) throw DomainError("cf_from_quotients: empty list");
  ContinuedFraction cf;
  cf.p = {0};
  cf.q = {1};
  for (const auto& ak : quotients) {
    if (ak < 1) throw DomainError("cf_from_quotients: quotients must be >= 1");
    push_convergent(cf, ak);
  }
  cf.alpha = Rational(cf.p.back(), cf.q.back());
  cf.alpha.canonicalize();
  cf.surrogate_tail = true;
  return cf;
}

ContinuedFraction cf_golden(int depth) {
  return cf_from_quotients(std::vector<BigInt>(depth, 1));
}

ContinuedFraction cf_sqrt2(int depth) {
  return cf_from_quotients(std::vector<BigInt>(depth, 2));
}

void DiophantineParams::derive() {
  if (tau <= 0) throw DomainError("DiophantineParams: tau must be > 0");
  if (nu <= 0 || nu >= 0.5)
    throw DomainError("DiophantineParams: nu must lie in (0, 1/2)");
  tau_bar = tau + 1;
  nu_bar = 0.5 * (nu + 0.5);
  M = std::max(4.0 * tau_bar, 2.0 / (1.0 - 2.0 * nu_bar));
  a = 2.0 / M;
  b = M / 2.0;
  calA = 2.0 * M;
}

bool is_cd_bridge(const ContinuedFraction& cf, int l, int n, double A,
                  double B, double C) {
  if (l < 0 || n <= l || n >= static_cast<int>(cf.q.size())) return false;
  for (int i = l; i < n; ++i)
    if (big_gt_pow(cf.q[i + 1], cf.q[i], A)) return false;
  return big_ge_pow(cf.q[n], cf.q[l], B) && big_le_pow(cf.q[n], cf.q[l], C);
}

SelectedSubsequence select_q(const ContinuedFraction& cf,
                             const DiophantineParams& params,
                             double calA_override) {
  if (cf.depth() < 2) throw DomainError("insufficient depth");
  const double A = calA_override > 0 ? calA_override : params.calA;
  if (A <= 1) throw DomainError("select_q: calA must exceed 1");
  const double A3 = A * A * A;
  const double A4 = A3 * A;
  const int K = cf.depth();       // q indices 0..K
  const int max_idx = K - 1;      // selected index needs q_{n+1}

  SelectedSubsequence seq;
  seq.calA = A;
  seq.M = params.M;

  // Q_0 = 1, anchored at the last index whose denominator is 1 so that
  // Qbar_0 >= 2 (bridges from q = 1 are degenerate).
  int n0 = (cf.q.size() > 1 && cf.q[1] == 1) ? 1 : 0;
  seq.indices.push_back(n0);

  while (true) {
    const int nk = seq.indices.back();
    if (nk + 1 > max_idx) { seq.truncated = true; break; }

    // smallest denominator q_n > Q_k followed by a jump q_{n+1} > q_n^A
    int jump = -1;
    for (int n = nk + 1; n <= max_idx; ++n) {
      if (cf.q[n] <= cf.q[nk]) continue;
      if (big_gt_pow(cf.q[n + 1], cf.q[n], A)) { jump = n; break; }
    }

    if (jump >= 0 && big_le_pow(cf.q[jump], cf.q[nk + 1], A4)) {
      seq.indices.push_back(jump);
      continue;
    }

    // chain of CD(A, A, A^3) bridges starting from Qbar_k
    int c = nk + 1;
    bool chain_done = false;
    while (!chain_done) {
      const int hi = jump >= 0 ? jump : max_idx;
      int best = -1;
      for (int m = hi; m >= c + 2; --m) {
        if (is_cd_bridge(cf, c, m, A, A, A3) &&
            is_cd_bridge(cf, c + 1, m, A, A, A3)) {
          best = m;
          break;
        }
      }
      if (best < 0) {
        seq.truncated = true;
        chain_done = true;
        break;
      }
      seq.indices.push_back(best);
      if (best == jump) break; // jump absorbed, back to the main loop
      c = best;
    }
    if (seq.truncated) break;
  }

  for (int idx : seq.indices) {
    seq.Q.push_back(cf.q[idx]);
    seq.Qbar.push_back(cf.q[idx + 1]);
  }
  return seq;
}

SubseqCheck validate_subsequence(const ContinuedFraction& cf,
                                 const SelectedSubsequence& seq) {
  SubseqCheck chk;
  auto fail = [&](int k, const std::string& what) {
    chk.ok = false;
    chk.first_violation = k;
    chk.detail = what;
    return chk;
  };

  const int K = cf.depth();
  const double A = seq.calA;
  const double A3 = A * A * A;
  const double A4 = A3 * A;
  const int sz = seq.size();
  if (sz == 0) return fail(0, "empty sequence");
  if (seq.Q[0] != 1) return fail(0, "Q_0 != 1");

  for (int k = 0; k < sz; ++k) {
    const int idx = seq.indices[k];
    if (idx < 0 || idx + 1 > K) return fail(k, "index out of range");
    if (seq.Q[k] != cf.q[idx]) return fail(k, "Q mismatch with expansion");
    if (seq.Qbar[k] != cf.q[idx + 1]) return fail(k, "Qbar mismatch");
    if (k > 0 && seq.indices[k] <= seq.indices[k - 1])
      return fail(k, "indices not increasing");
  }

  for (int k = 0; k + 1 < sz; ++k)
    if (big_gt_pow(seq.Q[k + 1], seq.Qbar[k], A4))
      return fail(k, "Q_{k+1} > Qbar_k^{A^4}");

  for (int k = 1; k < sz; ++k) {
    if (big_ge_pow(seq.Qbar[k], seq.Q[k], A)) continue; // first branch
    // second branch needs Q_{k+1}; vacuous on a truncated tail
    if (k + 1 >= sz) {
      if (!seq.truncated)
        return fail(k, "dichotomy unverifiable but sequence not truncated");
      continue;
    }
    const int prev_bar = seq.indices[k - 1] + 1;
    if (!is_cd_bridge(cf, prev_bar, seq.indices[k], A, A, A3))
      return fail(k, "(Qbar_{k-1}, Q_k) not a CD bridge");
    if (!is_cd_bridge(cf, seq.indices[k], seq.indices[k + 1], A, A, A3))
      return fail(k, "(Q_k, Q_{k+1}) not a CD bridge");
  }
  return chk;
}

RhoConditionReport check_rho_condition(const ContinuedFraction& cf, double rho,
                                       const DiophantineParams& params,
                                       int depth, double sigma_rho) {
  if (depth > cf.depth() - 1)
    throw DomainError("check_rho_condition: depth exceeds expansion");
  RhoConditionReport rep;
  rep.depth_checked = depth;
  rep.holds = true;
  const Rational rho_exact(rho);

  for (int i = 0; i <= depth; ++i) {
    const Rational lhs_exact = torus_dist(Rational(2 * cf.q[i]) * rho_exact);
    const long double lhs = (long double)lhs_exact.get_d();
    const long double rhs =
        (long double)params.eps *
        std::max(std::exp(-(long double)params.nu * log_big(cf.q[i + 1])),
                 std::exp(-(long double)params.tau * log_big(cf.q[i])));
    const long double band = 2.0L * (long double)sigma_rho *
                             std::exp(log_big(cf.q[i]));
    rep.margins.push_back((double)(lhs - rhs));
    if (lhs - band > rhs) continue; // certified pass
    if (lhs + band <= rhs) {
      rep.holds = false;
      if (rep.first_fail < 0) rep.first_fail = i;
      return rep;
    }
    rep.holds = false;
    if (rep.first_indeterminate < 0) rep.first_indeterminate = i;
    return rep;
  }
  return rep;
}

}  // namespace qpr
