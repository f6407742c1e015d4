// qpr: quasiperiodic SL(2,R) cocycles -- continued fractions, rotation
// numbers, Lyapunov exponents, and KAM reduction to cocycles of rotations.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "qpr/selftest.hpp"
#include "qpr/serialize.hpp"

using namespace qpr;

namespace {

constexpr int EXIT_USAGE = 64;
constexpr int EXIT_PRECONDITION = 2;
constexpr int EXIT_STALLED = 3;

struct AlphaArgs {
  std::string alpha_spec = "expr:golden";
  std::string quotients;
  std::string max_q = "1000000000000000000";
  int golden_depth = 600;
};

void add_alpha_flags(CLI::App* cmd, AlphaArgs& a) {
  cmd->add_option("--alpha", a.alpha_spec,
                  "frequency: decimal in (0,1), expr:golden, or expr:sqrt2");
  cmd->add_option("--quotients", a.quotients,
                  "exact partial quotients, comma separated (overrides --alpha)");
  cmd->add_option("--max-q", a.max_q, "truncate the expansion past this q");
  cmd->add_option("--golden-depth", a.golden_depth,
                  "expansion depth for expr: frequencies");
}

ContinuedFraction make_cf(const AlphaArgs& a, CfStatus* status = nullptr) {
  if (!a.quotients.empty()) {
    std::vector<BigInt> qs;
    std::stringstream ss(a.quotients);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) qs.emplace_back(item);
    }
    return cf_from_quotients(qs);
  }
  if (a.alpha_spec == "expr:golden") return cf_golden(a.golden_depth);
  if (a.alpha_spec == "expr:sqrt2") return cf_sqrt2(a.golden_depth);
  double val = std::stod(a.alpha_spec);
  CfResult r = expand_cf(val, BigInt(a.max_q));
  if (status) *status = r.status;
  return r.cf;
}

struct KamArgs {
  double h = 0.15;
  KamConfig cfg;
  bool formula = false;
};

void add_kam_options(CLI::App* cmd, KamArgs& k) {
  cmd->add_option("--h", k.h, "strip half-width of the cocycle");
  cmd->add_option("--h-star", k.cfg.h_star, "strip loss budget");
  cmd->add_option("--tau", k.cfg.tau, "");
  cmd->add_option("--nu", k.cfg.nu, "");
  cmd->add_option("--eps", k.cfg.eps, "epsilon of the arithmetic condition");
  cmd->add_option("--eta", k.cfg.eta, "strip schedule parameter");
  cmd->add_option("--tol", k.cfg.tol_residual, "target conjugacy residual");
  cmd->add_option("--max-outer", k.cfg.max_outer, "");
  cmd->add_option("--L", k.cfg.L, "Fourier truncation degree");
  cmd->add_option("--T", k.cfg.T_threshold, "bootstrap threshold T");
  cmd->add_option("--bridge-exponent", k.cfg.bridge_exponent,
                  "working-ladder exponent in adaptive mode");
  cmd->add_flag("--formula", k.formula,
                "formula-true mode (paper constants instead of measured contraction)");
  cmd->add_option("--admission", k.cfg.admission, "");
  cmd->add_option("--eps0", k.cfg.eps0, "");
}

void emit(const Json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream f(out);
    f << j.dump(2) << "\n";
  }
}

Frequency frequency_of(const ContinuedFraction& cf) {
  return Frequency::from_cf(cf);
}

int jobs_default() {
  if (const char* env = std::getenv("COCYCLE_KAM_THREADS"))
    return std::max(1, std::atoi(env));
  return 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasiperiodic SL(2,R) cocycle toolbox"};
  app.require_subcommand(1);
  // free the short -h for the strip option --h
  app.set_help_flag("--help", "print help and exit");

  // ---- cf ----
  auto* c_cf = app.add_subcommand("cf", "continued fraction expansion and Q_k selection");
  AlphaArgs cf_alpha;
  add_alpha_flags(c_cf, cf_alpha);
  bool cf_select = false;
  double cf_tau = 2.0, cf_nu = 0.4, cf_eps = 1e-3, cf_bridge = 0.0;
  std::string cf_out;
  c_cf->add_flag("--select-q", cf_select, "run the CD-bridge selection");
  c_cf->add_option("--tau", cf_tau, "");
  c_cf->add_option("--nu", cf_nu, "");
  c_cf->add_option("--eps", cf_eps, "");
  c_cf->add_option("--bridge-exponent", cf_bridge,
                   "override calA (0 = theory value 2M)");
  c_cf->add_option("--out", cf_out, "");

  // ---- rotnum / lyap ----
  auto* c_rot = app.add_subcommand("rotnum", "fibered rotation number");
  auto* c_lyap = app.add_subcommand("lyap", "fibered Lyapunov exponent");
  AlphaArgs rot_alpha, lyap_alpha;
  add_alpha_flags(c_rot, rot_alpha);
  add_alpha_flags(c_lyap, lyap_alpha);
  std::string rot_pot = "1:1", lyap_pot = "1:1";
  double rot_lambda = 0, lyap_lambda = 0, rot_E = 0, lyap_E = 0;
  long rot_iters = 1 << 13, lyap_iters = 1 << 13;
  int rot_L = 64, lyap_L = 64, lyap_fibers = 64;
  double rot_h = 0.15, lyap_h = 0.15;
  bool rot_noaccel = false;
  std::string rot_out, lyap_out;
  c_rot->add_option("--potential", rot_pot, "harmonic:amplitude list");
  c_rot->add_option("--lambda", rot_lambda, "");
  c_rot->add_option("--energy", rot_E, "");
  c_rot->add_option("--iters", rot_iters, "");
  c_rot->add_option("--L", rot_L, "");
  c_rot->add_option("--h", rot_h, "");
  c_rot->add_flag("--no-accel", rot_noaccel, "");
  c_rot->add_option("--out", rot_out, "");
  c_lyap->add_option("--potential", lyap_pot, "");
  c_lyap->add_option("--lambda", lyap_lambda, "");
  c_lyap->add_option("--energy", lyap_E, "");
  c_lyap->add_option("--iters", lyap_iters, "");
  c_lyap->add_option("--fibers", lyap_fibers, "");
  c_lyap->add_option("--L", lyap_L, "");
  c_lyap->add_option("--h", lyap_h, "");
  c_lyap->add_option("--out", lyap_out, "");

  // ---- kam-reduce ----
  auto* c_kam = app.add_subcommand("kam-reduce", "reduce to a cocycle of rotations");
  AlphaArgs kam_alpha;
  add_alpha_flags(c_kam, kam_alpha);
  KamArgs kam;
  add_kam_options(c_kam, kam);
  std::string kam_pot = "1:1", kam_out, kam_dump;
  double kam_lambda = 1e-3, kam_E = 0;
  c_kam->add_option("--potential", kam_pot, "");
  c_kam->add_option("--lambda", kam_lambda, "");
  c_kam->add_option("--energy", kam_E, "");
  c_kam->add_option("--out", kam_out, "");
  c_kam->add_option("--dump-state", kam_dump,
                    "write input cocycle + result for re-verification");

  // ---- scan ----
  auto* c_scan = app.add_subcommand("scan", "energy scan");
  AlphaArgs scan_alpha;
  add_alpha_flags(c_scan, scan_alpha);
  KamArgs scan_kam;
  add_kam_options(c_scan, scan_kam);
  std::string scan_pot = "1:1", scan_csv, scan_out, scan_lambdas = "0.001";
  double e_min = -2.2, e_max = 2.2;
  int e_steps = 200, scan_jobs = jobs_default();
  c_scan->add_option("--potential", scan_pot, "");
  c_scan->add_option("--lambda-list", scan_lambdas, "comma list of lambdas");
  c_scan->add_option("--e-min", e_min, "");
  c_scan->add_option("--e-max", e_max, "");
  c_scan->add_option("--e-steps", e_steps, "");
  c_scan->add_option("--jobs", scan_jobs, "");
  c_scan->add_option("--csv", scan_csv, "CSV output path (one row per record)");
  c_scan->add_option("--out", scan_out, "JSON summary path");

  // ---- check-rho / check-drho ----
  auto* c_mono = app.add_subcommand("check-rho", "rho(E) monotonicity check");
  AlphaArgs mono_alpha;
  add_alpha_flags(c_mono, mono_alpha);
  KamArgs mono_kam;
  add_kam_options(c_mono, mono_kam);
  std::string mono_pot = "1:1", mono_out;
  double mono_lambda = 0.05;
  int mono_steps = 50;
  c_mono->add_option("--potential", mono_pot, "");
  c_mono->add_option("--lambda", mono_lambda, "");
  c_mono->add_option("--e-steps", mono_steps, "");
  c_mono->add_option("--out", mono_out, "");

  auto* c_drho = app.add_subcommand("check-drho", "d rho/dE identity check");
  AlphaArgs drho_alpha;
  add_alpha_flags(c_drho, drho_alpha);
  KamArgs drho_kam;
  add_kam_options(c_drho, drho_kam);
  std::string drho_pot = "1:1", drho_out;
  double drho_lambda = 1e-3, drho_E = 0, drho_dE = 0;
  c_drho->add_option("--potential", drho_pot, "");
  c_drho->add_option("--lambda", drho_lambda, "");
  c_drho->add_option("--energy", drho_E, "");
  c_drho->add_option("--dE", drho_dE, "");
  c_drho->add_option("--out", drho_out, "");

  // ---- verify-denjoy ----
  auto* c_den = app.add_subcommand("verify-denjoy", "Birkhoff-sum bound ratios");
  AlphaArgs den_alpha;
  add_alpha_flags(c_den, den_alpha);
  std::string den_f = "1:0.5,2:0.15", den_out;
  double den_tau = 2.0, den_nu = 0.4, den_eps = 1e-3, den_h = 0.2,
         den_eta = 0.1, den_bridge = 1.5;
  int den_L = 64;
  c_den->add_option("--f", den_f, "test function, harmonic:amplitude list");
  c_den->add_option("--tau", den_tau, "");
  c_den->add_option("--nu", den_nu, "");
  c_den->add_option("--eps", den_eps, "");
  c_den->add_option("--h", den_h, "");
  c_den->add_option("--eta", den_eta, "");
  c_den->add_option("--L", den_L, "");
  c_den->add_option("--bridge-exponent", den_bridge,
                    "calA for the working ladder (0 = theory 2M)");
  c_den->add_option("--out", den_out, "");

  auto* c_self = app.add_subcommand("selftest", "run the quick example suite");
  (void)c_self;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : EXIT_USAGE;
  }

  try {
    if (app.got_subcommand(c_self)) {
      return selftest(std::cout) ? 0 : 1;
    }

    if (app.got_subcommand(c_cf)) {
      CfStatus status = CfStatus::ok;
      ContinuedFraction cf = make_cf(cf_alpha, &status);
      RunConfig rc;
      rc.command = "cf";
      rc.alpha_spec = cf_alpha.alpha_spec;
      Json j{{"config", to_json(rc)}, {"cf", to_json(cf)}};
      if (status != CfStatus::ok)
        j["error"] = "rational or precision exhausted";
      if (cf_select) {
        DiophantineParams p(cf_tau, cf_nu, cf_eps);
        SelectedSubsequence seq = select_q(cf, p, cf_bridge);
        SubseqCheck chk = validate_subsequence(cf, seq);
        j["selected"] = to_json(seq);
        j["selected"]["checker_ok"] = chk.ok;
        if (!chk.ok) j["selected"]["checker_detail"] = chk.detail;
      }
      emit(j, cf_out);
      return status == CfStatus::ok || !cf_select ? 0 : EXIT_PRECONDITION;
    }

    if (app.got_subcommand(c_rot)) {
      ContinuedFraction cf = make_cf(rot_alpha);
      Frequency alpha = frequency_of(cf);
      AnalyticFunction v = build_potential(rot_pot, rot_lambda, rot_L, rot_h);
      Cocycle c = schrodinger(v, rot_E, alpha);
      RotOptions ro;
      ro.n_iter = rot_iters;
      if (!rot_noaccel) ro.accel = alpha.cf.get();
      RotResult r = rotation_number(c, ro);
      RunConfig rc;
      rc.command = "rotnum";
      rc.alpha_spec = rot_alpha.alpha_spec;
      rc.potential = rot_pot;
      rc.lambda = rot_lambda;
      rc.energy = rot_E;
      emit(Json{{"config", to_json(rc)},
                {"rho", r.rho},
                {"spread", r.spread},
                {"uncertainty", r.uncertainty},
                {"accel_levels", r.accel_levels}},
           rot_out);
      return 0;
    }

    if (app.got_subcommand(c_lyap)) {
      ContinuedFraction cf = make_cf(lyap_alpha);
      Frequency alpha = frequency_of(cf);
      AnalyticFunction v =
          build_potential(lyap_pot, lyap_lambda, lyap_L, lyap_h);
      Cocycle c = schrodinger(v, lyap_E, alpha);
      LyapResult r = lyapunov(c, lyap_iters, lyap_fibers);
      RunConfig rc;
      rc.command = "lyap";
      rc.alpha_spec = lyap_alpha.alpha_spec;
      rc.potential = lyap_pot;
      rc.lambda = lyap_lambda;
      rc.energy = lyap_E;
      emit(Json{{"config", to_json(rc)},
                {"lyapunov", r.value},
                {"lyapunov_half", r.half_value}},
           lyap_out);
      return 0;
    }

    if (app.got_subcommand(c_kam)) {
      ContinuedFraction cf = make_cf(kam_alpha);
      Frequency alpha = frequency_of(cf);
      kam.cfg.adaptive = !kam.formula;
      AnalyticFunction v =
          build_potential(kam_pot, kam_lambda, kam.cfg.L, kam.h);
      Precondition pre = precondition_schrodinger(v, kam_E, alpha);
      RunConfig rc;
      rc.command = "kam-reduce";
      rc.alpha_spec = kam_alpha.alpha_spec;
      rc.potential = kam_pot;
      rc.lambda = kam_lambda;
      rc.energy = kam_E;
      rc.kam = kam.cfg;
      if (!pre.elliptic) {
        emit(Json{{"config", to_json(rc)},
                  {"status", "precondition_failed"},
                  {"reason", "mean matrix not elliptic"}},
             kam_out);
        return EXIT_PRECONDITION;
      }
      KamResult res = reduce_to_rotations(pre.conj, kam.cfg);
      Json j{{"config", to_json(rc)}, {"result", to_json(res)}};
      emit(j, kam_out);
      if (!kam_dump.empty()) {
        Json dump{{"config", to_json(rc)},
                  {"input_cocycle", to_json(pre.conj)},
                  {"result", to_json(res)}};
        std::ofstream f(kam_dump);
        f << dump.dump(2) << "\n";
      }
      if (res.status == KamStatus::converged) return 0;
      return res.status == KamStatus::precondition_failed ? EXIT_PRECONDITION
                                                          : EXIT_STALLED;
    }

    if (app.got_subcommand(c_scan)) {
      ContinuedFraction cf = make_cf(scan_alpha);
      Frequency alpha = frequency_of(cf);
      scan_kam.cfg.adaptive = !scan_kam.formula;
      std::vector<double> lambdas;
      {
        std::stringstream ss(scan_lambdas);
        std::string item;
        while (std::getline(ss, item, ','))
          if (!item.empty()) lambdas.push_back(std::stod(item));
      }
      std::vector<double> grid;
      for (int i = 0; i < e_steps; ++i)
        grid.push_back(e_min + (e_max - e_min) * i / (e_steps - 1.0));
      Json summaries = Json::array();
      std::ofstream csv;
      if (!scan_csv.empty()) {
        csv.open(scan_csv);
        csv << "lambda," << scan_csv_header() << "\n";
      }
      for (double lam : lambdas) {
        AnalyticFunction v =
            build_potential(scan_pot, lam, scan_kam.cfg.L, scan_kam.h);
        ScanResult sr = scan_energies(v, alpha, grid, scan_kam.cfg, scan_jobs);
        sr.summary.lambda = lam;
        summaries.push_back(to_json(sr.summary));
        if (csv.is_open())
          for (const auto& r : sr.records)
            csv << lam << ',' << scan_csv_row(r) << "\n";
      }
      RunConfig rc;
      rc.command = "scan";
      rc.alpha_spec = scan_alpha.alpha_spec;
      rc.potential = scan_pot;
      rc.jobs = scan_jobs;
      rc.kam = scan_kam.cfg;
      emit(Json{{"config", to_json(rc)}, {"summaries", summaries}}, scan_out);
      return 0;
    }

    if (app.got_subcommand(c_mono)) {
      ContinuedFraction cf = make_cf(mono_alpha);
      Frequency alpha = frequency_of(cf);
      AnalyticFunction v =
          build_potential(mono_pot, mono_lambda, mono_kam.cfg.L, mono_kam.h);
      double vs = v.norm_upper(0);
      std::vector<double> grid;
      for (int i = 0; i < mono_steps; ++i)
        grid.push_back(-2 - 2 * vs - 0.05 +
                       (4 + 4 * vs + 0.1) * i / (mono_steps - 1.0));
      MonotoneReport rep = check_rho_monotone(v, alpha, grid, mono_kam.cfg);
      Json rhos = Json::array();
      for (double r : rep.rhos) rhos.push_back(r);
      emit(Json{{"ok", rep.ok},
                {"endpoints_ok", rep.endpoints_ok},
                {"first_bad", rep.first_bad},
                {"tol_mono", rep.tol_mono},
                {"rhos", rhos}},
           mono_out);
      return rep.ok && rep.endpoints_ok ? 0 : EXIT_PRECONDITION;
    }

    if (app.got_subcommand(c_drho)) {
      ContinuedFraction cf = make_cf(drho_alpha);
      Frequency alpha = frequency_of(cf);
      drho_kam.cfg.adaptive = !drho_kam.formula;
      AnalyticFunction v =
          build_potential(drho_pot, drho_lambda, drho_kam.cfg.L, drho_kam.h);
      DrhoReport rep = check_drho_dE(v, alpha, drho_E, drho_kam.cfg, drho_dE);
      emit(Json{{"applicable", rep.applicable},
                {"reason", rep.reason},
                {"dE", rep.dE},
                {"finite_difference", rep.fd},
                {"hs_integral", rep.hs_integral},
                {"rhs", rep.rhs},
                {"rel_discrepancy", rep.rel_discrepancy}},
           drho_out);
      return rep.applicable ? 0 : EXIT_PRECONDITION;
    }

    if (app.got_subcommand(c_den)) {
      ContinuedFraction cf = make_cf(den_alpha);
      DiophantineParams p(den_tau, den_nu, den_eps);
      SelectedSubsequence seq = select_q(cf, p, den_bridge);
      AnalyticFunction f = build_potential(den_f, 0.5, den_L, den_h);
      DenjoyReport rep = verify_denjoy_bounds(f, cf, seq, p, den_h, den_eta);
      Json j{{"max_ratio", rep.max_ratio},
             {"fnorm", rep.fnorm},
             {"ks", rep.ks},
             {"ratio_Q", rep.ratio_Q},
             {"ratio_sup", rep.ratio_sup},
             {"theory_Q_term1", rep.theory_Q_term1},
             {"theory_Q_term2", rep.theory_Q_term2},
             {"selected", to_json(seq)}};
      emit(j, den_out);
      return 0;
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_PRECONDITION;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_USAGE;
  }
  return EXIT_USAGE;
}
