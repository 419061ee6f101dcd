#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace membrane {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitAssertionFailed = 1,
  kExitInvalidArguments = 2,
  kExitResourceCap = 3,
};

struct RunConfig {
  std::string command;
  int m = 3;
  int n = 4;
  std::int64_t samples = 1000;
  std::uint64_t seed = 1;
  std::vector<double> theta = {-1.0, 0.0, 1.0, 2.0};
  std::string law = "infinite";  // infinite | finite | finite-normalized
  std::string out_dir = ".";
  std::string format = "csv";    // csv | binary (matrix artifacts; summaries are JSON)
  bool large_m_assertions = false;
  int max_d = 10;
  std::int64_t cap_n = 20000;
  int threads = 1;
};

/// Closed-form table: d, the two kernel formula variants, the series oracle,
/// and the |proof - series| column.
int cmd_greens(const RunConfig& config);

/// G_n, Gbar_n, E_n artifacts plus a JSON summary of residuals, the variance
/// floor, max |E_n| and fitted bound constants.
int cmd_covariance(const RunConfig& config);

/// Sampling experiment for the selected law; writes the JSON report and a CSV
/// of per-sample (rescaled) maxima.
int cmd_extremes(const RunConfig& config);

/// Runs every module property suite at the default desk sizes and writes a
/// JSON manifest with one entry per check. Exit 1 on any hard failure.
/// tamper_greens perturbs the closed form inside the series-consistency check
/// so the suite's sensitivity is itself testable.
int cmd_verify(const RunConfig& config, bool tamper_greens = false);

/// Parse argv and dispatch. Invalid arguments exit with code 2.
int cli_main(int argc, const char* const* argv);

}  // namespace membrane
