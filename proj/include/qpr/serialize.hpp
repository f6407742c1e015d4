#pragma once

#include <json.hpp>

#include "qpr/experiments.hpp"

namespace qpr {

using Json = nlohmann::json;

inline constexpr const char* FORMAT_VERSION = "1";

/// Everything that determines a run: config, inputs, seed. Embedded in every
/// output artifact so results reparse and reproduce.
struct RunConfig {
  std::string format_version = FORMAT_VERSION;
  std::string command;
  std::string alpha_spec;          // decimal | expr:golden | expr:sqrt2
  std::vector<std::string> quotients; // exact mode (wins over alpha_spec)
  std::string potential = "1:1";   // comma list harmonic:amplitude
  double lambda = 0;
  double energy = 0;
  unsigned long seed = 12345;
  int jobs = 1;
  KamConfig kam;
};

Json to_json(const AnalyticFunction& f);
AnalyticFunction analytic_from_json(const Json& j);

Json to_json(const MatrixFunction& m);
MatrixFunction matrix_from_json(const Json& j);

Json to_json(const ContinuedFraction& cf);
ContinuedFraction cf_from_json(const Json& j);

Json to_json(const SelectedSubsequence& s);

Json to_json(const Cocycle& c);
Cocycle cocycle_from_json(const Json& j);

Json to_json(const KamConfig& c);
KamConfig kam_config_from_json(const Json& j);

Json to_json(const KamStepRecord& r);
Json to_json(const KamResult& r);
KamResult kam_result_from_json(const Json& j);

Json to_json(const RunConfig& rc);
RunConfig run_config_from_json(const Json& j);

Json to_json(const ScanRecord& r);
Json to_json(const ScanSummary& s);

std::string scan_csv_header();
std::string scan_csv_row(const ScanRecord& r);

/// Parse "harmonic:amplitude[,...]" into v(x) = 2 lambda sum a_j cos(2 pi j x).
AnalyticFunction build_potential(const std::string& spec, double lambda, int L,
                                 double h);

}  // namespace qpr
