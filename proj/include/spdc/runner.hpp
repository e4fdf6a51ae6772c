#ifndef SPDC_RUNNER_HPP_
#define SPDC_RUNNER_HPP_

#include "spdc/datamat.hpp"
#include "spdc/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace spdc {

struct run_config {
  std::string data;
  bool normalize = false;
  // spdc, adaspdc, dspdc, ovsspdc, ovs-exact, ovsspdc-plus, ovsspdc-plusplus
  std::string algo = "adaspdc";
  // uniform, cor16, cor17, ovs
  std::string prob = "uniform";
  // thm4, thm5, thm15, cor18, cor19, auto
  std::string schedule = "auto";
  int a = 1;
  // lambda = lambda_scale * lambda_max unless `lambda` is positive.
  double lambda_scale = 1e-2;
  double lambda = 0.0;
  // When positive, lambda = lambda_gamma_n / (gamma n) (takes precedence).
  double lambda_gamma_n = 0.0;
  double gamma = 1.0;
  double gap_tol = 1e-6;
  double max_epochs = 100.0;
  std::uint64_t seed = 1;
  std::string trace;
  std::string summary;
  // dspdc block size (0: one block holding every coordinate) and block
  // probabilities as a comma-separated list (empty: uniform).
  int b = 0;
  std::string q;
  std::size_t refresh_every = 0;
  // end_of_inner or every:K
  std::string gap_check = "end_of_inner";
  bool wall_clock = true;
};

struct condition_report {
  bool lemma3_ok = false;
  double lemma3_margin = 0.0;
  bool lemma14_ok = false;
  bool lemma14_first_ok = false;
  bool lemma14_second_ok = false;
  bool has_thm20 = false;
  bool thm20_ok = false;
  int thm20_first_failing = 0;
};

struct run_outcome {
  run_config config;
  std::size_t n = 0;
  std::size_t d = 0;
  double lambda = 0.0;
  // lambda * gamma * n of the solved problem.
  double lambda_gamma_n = 0.0;
  double lambda_max = 0.0;
  std::string schedule;
  step_params initial_params;
  sampling_plan initial_plan;
  condition_report conditions;
  double complexity = 0.0;
  run_result result;
};

// Checks the configuration, loads (or reuses) the dataset, runs the solver
// and writes the trace and summary files when their paths are set.
run_outcome run(const run_config& config, const sparse_dataset* preloaded = nullptr);

void write_trace_csv(std::ostream& out, const std::vector<trace_record>& trace);
std::string summary_json(const run_outcome& outcome);

// Maps an exception from run() to the process exit status (2 config,
// 3 schedule precondition, 4 numerical).
int exit_code_for(const std::exception& e) noexcept;

struct sweep_row {
  run_config config;
  int status = 0;
  std::string message;
  run_outcome outcome;
};

// Runs every configuration on a shared dataset (at most `jobs` at a time).
// Failures are recorded per row and do not stop the others.
std::vector<sweep_row> sweep(const std::vector<run_config>& configs, unsigned jobs = 1);
void write_sweep_csv(std::ostream& out, const std::vector<sweep_row>& rows);

}  // namespace spdc

#endif  // SPDC_RUNNER_HPP_
