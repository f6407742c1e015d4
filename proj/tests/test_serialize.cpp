#include <doctest.h>

#include <cmath>

#include "qpr/serialize.hpp"

using namespace qpr;

TEST_CASE("analytic function round trip") {
  auto f = AnalyticFunction::cosine(2, 0.7, 16, 0.2);
  f += AnalyticFunction::sine(1, -0.3, 16, 0.2);
  f.err = 1e-13;
  Json j = to_json(f);
  AnalyticFunction g = analytic_from_json(j);
  CHECK(g.L == f.L);
  CHECK(g.h == f.h);
  CHECK(g.err == f.err);
  CHECK(g.real_symmetric == f.real_symmetric);
  for (int l = -16; l <= 16; ++l) CHECK(g.at(l) == f.at(l));
  // the spec'd field order l = -L..L
  CHECK(j["coeffs"].size() == 33);
  CHECK(j["coeffs"][15][1].get<double>() ==
        doctest::Approx(f.at(-1).imag()));
}

TEST_CASE("cocycle with an exact-quotient frequency round trips") {
  ContinuedFraction cf = cf_from_quotients({1, 20, 1, 2000});
  Frequency alpha = Frequency::from_cf(cf);
  auto v = AnalyticFunction::cosine(1, 0.002, 16, 0.2);
  Cocycle c = schrodinger(v, 0.4, alpha);
  Json j = to_json(c);
  Cocycle d = cocycle_from_json(j);
  CHECK(d.alpha.value == c.alpha.value);
  REQUIRE(d.alpha.cf != nullptr);
  CHECK(d.alpha.cf->q.back() == cf.q.back());
  CHECK(d.homotopy_class == 0);
  double worst = 0;
  for (int i = 0; i < 64; ++i) {
    double x = i / 64.0;
    worst = std::max(worst,
                     (d.A.eval(Complex(x, 0)) - c.A.eval(Complex(x, 0))).norm2());
  }
  CHECK(worst == 0.0);
}

TEST_CASE("config and run-config round trip with format version") {
  RunConfig rc;
  rc.command = "kam-reduce";
  rc.alpha_spec = "expr:golden";
  rc.lambda = 1e-3;
  rc.kam.tol_residual = 1e-10;
  rc.kam.adaptive = false;
  rc.kam.max_q = BigInt("123456789012345678901234567890");
  Json j = to_json(rc);
  CHECK(j["format_version"] == FORMAT_VERSION);
  RunConfig back = run_config_from_json(j);
  CHECK(back.command == rc.command);
  CHECK(back.kam.tol_residual == rc.kam.tol_residual);
  CHECK(back.kam.adaptive == false);
  CHECK(back.kam.max_q == rc.kam.max_q);
}

TEST_CASE("scan CSV header and row shape") {
  CHECK(scan_csv_header() ==
        "E,rho,rho_spread,cert_pass,kam_status,final_residual,lyap,wall_time");
  ScanRecord r;
  r.E = 0.5;
  r.kam_status = "converged";
  r.cert_pass = true;
  std::string row = scan_csv_row(r);
  CHECK(row.find("converged") != std::string::npos);
  int commas = 0;
  for (char ch : row)
    if (ch == ',') commas++;
  CHECK(commas == 7);
}

TEST_CASE("potential parser") {
  auto v = build_potential("1:1,2:0.3", 0.5, 16, 0.2);
  // v = 2*0.5*(cos + 0.3 cos2)
  CHECK(v.at(1).real() == doctest::Approx(0.5));
  CHECK(v.at(2).real() == doctest::Approx(0.15));
  CHECK(v.real_symmetric);
  CHECK_THROWS_AS(build_potential("", 1.0, 16, 0.2), DomainError);
}

TEST_CASE("kam result round trips enough state for re-verification") {
  KamResult r;
  r.status = KamStatus::converged;
  r.B = MatrixFunction::identity(8, 0.1);
  r.phi = AnalyticFunction::constant(Complex(0.4, 0), 8, 0.1);
  r.final_residual = 3e-12;
  r.final_h = 0.09;
  r.rho = 0.4 / TWO_PI;
  r.cert_pass = true;
  Json j = to_json(r);
  KamResult back = kam_result_from_json(j);
  CHECK(back.status == KamStatus::converged);
  CHECK(back.final_residual == r.final_residual);
  CHECK(back.phi.mean().real() == doctest::Approx(0.4));
  CHECK(back.B.a().mean().real() == doctest::Approx(1.0));
  CHECK(back.cert_pass);
}
