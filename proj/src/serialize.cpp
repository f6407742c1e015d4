#include "qpr/serialize.hpp"

#include <sstream>

namespace qpr {

Json to_json(const AnalyticFunction& f) {
  Json coeffs = Json::array();
  for (int l = -f.L; l <= f.L; ++l)
    coeffs.push_back({f.at(l).real(), f.at(l).imag()});
  return Json{{"h", f.h},
              {"L", f.L},
              {"real_symmetric", f.real_symmetric},
              {"err", f.err},
              {"coeffs", coeffs}};
}

AnalyticFunction analytic_from_json(const Json& j) {
  AnalyticFunction f(j.at("L").get<int>(), j.at("h").get<double>(),
                     j.at("real_symmetric").get<bool>());
  f.err = j.value("err", 0.0);
  const auto& coeffs = j.at("coeffs");
  if ((int)coeffs.size() != 2 * f.L + 1)
    throw DomainError("analytic_from_json: coefficient count mismatch");
  for (int i = 0; i < (int)coeffs.size(); ++i)
    f.c[i] = Complex(coeffs[i][0].get<double>(), coeffs[i][1].get<double>());
  return f;
}

Json to_json(const MatrixFunction& m) {
  return Json{{"h", m.h},
              {"L", m.L},
              {"entries", {to_json(m.m[0]), to_json(m.m[1]), to_json(m.m[2]),
                           to_json(m.m[3])}}};
}

MatrixFunction matrix_from_json(const Json& j) {
  MatrixFunction m(j.at("L").get<int>(), j.at("h").get<double>());
  for (int i = 0; i < 4; ++i)
    m.m[i] = analytic_from_json(j.at("entries")[i]);
  return m;
}

Json to_json(const ContinuedFraction& cf) {
  Json a = Json::array();
  for (const auto& q : cf.a) a.push_back(q.get_str());
  Json conv = Json::array();
  for (size_t k = 0; k < cf.q.size(); ++k)
    conv.push_back({cf.p[k].get_str(), cf.q[k].get_str()});
  return Json{{"alpha_num", cf.alpha.get_num().get_str()},
              {"alpha_den", cf.alpha.get_den().get_str()},
              {"quotients", a},
              {"convergents", conv},
              {"terminated", cf.terminated},
              {"surrogate_tail", cf.surrogate_tail}};
}

ContinuedFraction cf_from_json(const Json& j) {
  std::vector<BigInt> a;
  for (const auto& s : j.at("quotients"))
    a.emplace_back(s.get<std::string>());
  ContinuedFraction cf = cf_from_quotients(a);
  cf.alpha = Rational(BigInt(j.at("alpha_num").get<std::string>()),
                      BigInt(j.at("alpha_den").get<std::string>()));
  cf.alpha.canonicalize();
  cf.terminated = j.value("terminated", false);
  cf.surrogate_tail = j.value("surrogate_tail", true);
  return cf;
}

Json to_json(const SelectedSubsequence& s) {
  Json Q = Json::array(), Qb = Json::array();
  for (const auto& v : s.Q) Q.push_back(v.get_str());
  for (const auto& v : s.Qbar) Qb.push_back(v.get_str());
  return Json{{"indices", s.indices}, {"Q", Q},          {"Qbar", Qb},
              {"calA", s.calA},       {"M", s.M},        {"truncated", s.truncated}};
}

Json to_json(const Cocycle& c) {
  Json j{{"alpha_num", c.alpha.value.get_num().get_str()},
         {"alpha_den", c.alpha.value.get_den().get_str()},
         {"alpha_approx", c.alpha.approx},
         {"A", to_json(c.A)},
         {"homotopy_class", c.homotopy_class},
         {"det_defect", c.det_defect}};
  if (c.alpha.cf) j["cf"] = to_json(*c.alpha.cf);
  return j;
}

Cocycle cocycle_from_json(const Json& j) {
  Frequency alpha(Rational(BigInt(j.at("alpha_num").get<std::string>()),
                           BigInt(j.at("alpha_den").get<std::string>())));
  if (j.contains("cf"))
    alpha.cf = std::make_shared<ContinuedFraction>(cf_from_json(j.at("cf")));
  Cocycle c;
  c.alpha = alpha;
  c.A = matrix_from_json(j.at("A"));
  c.homotopy_class = j.at("homotopy_class").get<int>();
  c.det_defect = j.at("det_defect").get<double>();
  return c;
}

Json to_json(const KamConfig& c) {
  return Json{{"h_star", c.h_star},
              {"eps", c.eps},
              {"tau", c.tau},
              {"nu", c.nu},
              {"eta", c.eta},
              {"D", c.D},
              {"tol_residual", c.tol_residual},
              {"max_outer", c.max_outer},
              {"c0", c.c0},
              {"c1", c.c1},
              {"c2", c.c2},
              {"c3", c.c3},
              {"eps0", c.eps0},
              {"el_eps", c.el_eps},
              {"admission", c.admission},
              {"T_threshold", c.T_threshold},
              {"adaptive", c.adaptive},
              {"bridge_exponent", c.bridge_exponent},
              {"L", c.L},
              {"max_inner", c.max_inner},
              {"grid", c.grid},
              {"rho_iters", c.rho_iters},
              {"rho_accel_cap", c.rho_accel_cap},
              {"stop_floor", c.stop_floor},
              {"max_q", c.max_q.get_str()},
              {"golden_depth", c.golden_depth}};
}

KamConfig kam_config_from_json(const Json& j) {
  KamConfig c;
  c.h_star = j.value("h_star", c.h_star);
  c.eps = j.value("eps", c.eps);
  c.tau = j.value("tau", c.tau);
  c.nu = j.value("nu", c.nu);
  c.eta = j.value("eta", c.eta);
  c.D = j.value("D", c.D);
  c.tol_residual = j.value("tol_residual", c.tol_residual);
  c.max_outer = j.value("max_outer", c.max_outer);
  c.c0 = j.value("c0", c.c0);
  c.c1 = j.value("c1", c.c1);
  c.c2 = j.value("c2", c.c2);
  c.c3 = j.value("c3", c.c3);
  c.eps0 = j.value("eps0", c.eps0);
  c.el_eps = j.value("el_eps", c.el_eps);
  c.admission = j.value("admission", c.admission);
  c.T_threshold = j.value("T_threshold", c.T_threshold);
  c.adaptive = j.value("adaptive", c.adaptive);
  c.bridge_exponent = j.value("bridge_exponent", c.bridge_exponent);
  c.L = j.value("L", c.L);
  c.max_inner = j.value("max_inner", c.max_inner);
  c.grid = j.value("grid", c.grid);
  c.rho_iters = (long)j.value("rho_iters", (long long)c.rho_iters);
  c.rho_accel_cap = j.value("rho_accel_cap", c.rho_accel_cap);
  c.stop_floor = j.value("stop_floor", c.stop_floor);
  if (j.contains("max_q")) c.max_q = BigInt(j.at("max_q").get<std::string>());
  c.golden_depth = j.value("golden_depth", c.golden_depth);
  return c;
}

Json to_json(const KamStepRecord& r) {
  return Json{{"k", r.k},
              {"Q", r.Q},
              {"Qbar", r.Qbar},
              {"h", r.h},
              {"xi_norm", r.xi_norm},
              {"B_dist", r.B_dist},
              {"N_inner", r.N_inner},
              {"claim_bound", r.claim_bound},
              {"note", r.note}};
}

Json to_json(const KamResult& r) {
  Json hist = Json::array();
  for (const auto& rec : r.history) hist.push_back(to_json(rec));
  return Json{{"status", to_string(r.status)},
              {"B", to_json(r.B)},
              {"phi", to_json(r.phi)},
              {"final_residual", r.final_residual},
              {"final_h", r.final_h},
              {"B_dist_id", r.B_dist_id},
              {"rho", r.rho},
              {"rho_sigma", r.rho_sigma},
              {"cert_pass", r.cert_pass},
              {"cert_fail_index", r.cert_fail_index},
              {"cert_indeterminate_index", r.cert_indeterminate_index},
              {"fail_reason", r.fail_reason},
              {"history", hist}};
}

KamResult kam_result_from_json(const Json& j) {
  KamResult r;
  std::string st = j.at("status").get<std::string>();
  r.status = st == "converged"
                 ? KamStatus::converged
                 : st == "stalled" ? KamStatus::stalled
                                   : KamStatus::precondition_failed;
  r.B = matrix_from_json(j.at("B"));
  r.phi = analytic_from_json(j.at("phi"));
  r.final_residual = j.at("final_residual").get<double>();
  r.final_h = j.at("final_h").get<double>();
  r.B_dist_id = j.value("B_dist_id", 0.0);
  r.rho = j.value("rho", 0.0);
  r.rho_sigma = j.value("rho_sigma", 0.0);
  r.cert_pass = j.value("cert_pass", false);
  r.cert_fail_index = j.value("cert_fail_index", -1);
  r.cert_indeterminate_index = j.value("cert_indeterminate_index", -1);
  r.fail_reason = j.value("fail_reason", std::string());
  return r;
}

Json to_json(const RunConfig& rc) {
  return Json{{"format_version", rc.format_version},
              {"command", rc.command},
              {"alpha_spec", rc.alpha_spec},
              {"quotients", rc.quotients},
              {"potential", rc.potential},
              {"lambda", rc.lambda},
              {"energy", rc.energy},
              {"seed", rc.seed},
              {"jobs", rc.jobs},
              {"kam", to_json(rc.kam)}};
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig rc;
  rc.format_version = j.value("format_version", std::string(FORMAT_VERSION));
  rc.command = j.value("command", std::string());
  rc.alpha_spec = j.value("alpha_spec", std::string());
  if (j.contains("quotients"))
    rc.quotients = j.at("quotients").get<std::vector<std::string>>();
  rc.potential = j.value("potential", std::string("1:1"));
  rc.lambda = j.value("lambda", 0.0);
  rc.energy = j.value("energy", 0.0);
  rc.seed = j.value("seed", 12345UL);
  rc.jobs = j.value("jobs", 1);
  if (j.contains("kam")) rc.kam = kam_config_from_json(j.at("kam"));
  return rc;
}

Json to_json(const ScanRecord& r) {
  return Json{{"E", r.E},
              {"rho", r.rho},
              {"rho_spread", r.rho_spread},
              {"cert_pass", r.cert_pass},
              {"kam_status", r.kam_status},
              {"final_residual", r.final_residual},
              {"lyap", r.lyap},
              {"wall_time", r.wall_time},
              {"note", r.note}};
}

Json to_json(const ScanSummary& s) {
  return Json{{"lambda", s.lambda},
              {"n_grid", s.n_grid},
              {"n_admitted", s.n_admitted},
              {"n_converged", s.n_converged},
              {"converged_fraction", s.converged_fraction},
              {"measure_estimate", s.measure_estimate}};
}

std::string scan_csv_header() {
  return "E,rho,rho_spread,cert_pass,kam_status,final_residual,lyap,wall_time";
}

std::string scan_csv_row(const ScanRecord& r) {
  std::ostringstream os;
  os.precision(12);
  os << r.E << ',' << r.rho << ',' << r.rho_spread << ','
     << (r.cert_pass ? 1 : 0) << ',' << r.kam_status << ','
     << r.final_residual << ',' << r.lyap << ',' << r.wall_time;
  return os.str();
}

AnalyticFunction build_potential(const std::string& spec, double lambda, int L,
                                 double h) {
  AnalyticFunction v = AnalyticFunction::zero(L, h);
  std::stringstream ss(spec);
  std::string item;
  bool any = false;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto pos = item.find(':');
    int harmonic;
    double amp;
    if (pos == std::string::npos) {
      harmonic = std::stoi(item);
      amp = 1.0;
    } else {
      harmonic = std::stoi(item.substr(0, pos));
      amp = std::stod(item.substr(pos + 1));
    }
    v += AnalyticFunction::cosine(harmonic, amp, L, h);
    any = true;
  }
  if (!any) throw DomainError("empty potential spec");
  v *= 2.0 * lambda;
  return v;
}

}  // namespace qpr
