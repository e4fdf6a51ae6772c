#ifndef SPDC_SOLVER_HPP_
#define SPDC_SOLVER_HPP_

#include "spdc/datamat.hpp"
#include "spdc/objective.hpp"
#include "spdc/rng.hpp"
#include "spdc/sampling.hpp"
#include "spdc/schedule.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spdc {

struct solver_state {
  Eigen::VectorXd w;
  Eigen::VectorXd w_prev;
  Eigen::VectorXd w_bar;
  Eigen::VectorXd alpha;
  Eigen::VectorXd alpha_bar;
  // u = (1/n) X^T alpha and u_bar = (1/n) X^T alpha_bar, kept incrementally.
  Eigen::VectorXd u;
  Eigen::VectorXd u_bar;
  std::uint64_t iter = 0;
  std::uint64_t dual_updates = 0;
  std::uint64_t primal_updates = 0;

  // Indices whose alpha_bar differs from alpha after the last step.
  std::vector<std::size_t> touched;
  // Dual indices drawn by the last sampled step.
  std::vector<std::size_t> batch;
};

solver_state make_state(const sparse_dataset& ds);
// State at (w, alpha) with w_prev = w_bar = w and caches rebuilt.
solver_state make_state(const sparse_dataset& ds, const Eigen::VectorXd& w,
                        const Eigen::VectorXd& alpha);

// Largest relative deviation of u and u_bar from fresh recomputation.
double cache_error(const solver_state& st, const sparse_dataset& ds);

// Optional per-coordinate observers, called with the prox inputs and output.
struct step_probes {
  std::function<void(std::size_t i, double s, double alpha_old, double alpha_new, double q)>
      on_dual;
  std::function<void(std::size_t j, double u, double w_old, double w_new, double tau)>
      on_primal;
};

// Which primal coordinates a step updates.
struct primal_scope {
  // When `all` is false only the listed coordinates are updated.
  bool all = true;
  std::span<const std::size_t> coords;
  // Multiplies tau for the listed coordinates.
  double tau_scale = 1.0;
};

// One iteration with a given dual index multiset K (applied in order).
// The dual step for i uses q = p_i n / sigma_i; alpha_bar_i gets the
// extrapolation alpha_i + (alpha_i^+ - alpha_i) / (a p_i).
void apply_step(solver_state& st, std::span<const std::size_t> batch,
                const step_params& params, const sampling_plan& plan,
                const sparse_dataset& ds, const problem_spec& spec,
                const primal_scope& scope = {}, const step_probes* probes = nullptr);

void adaspdc_step(solver_state& st, const step_params& params, const sampling_plan& plan,
                  const sparse_dataset& ds, const problem_spec& spec, rng& gen,
                  const step_probes* probes = nullptr);

// Same iteration with a shared scalar sigma.
void vanilla_spdc_step(solver_state& st, const step_params& params,
                       const sampling_plan& plan, const sparse_dataset& ds,
                       const problem_spec& spec, rng& gen,
                       const step_probes* probes = nullptr);

// Dual update as above, primal update on one block M_h drawn from q with
// tau' = tau |M_h| / (q_h d).
void dspdc_step(solver_state& st, const step_params& params, const sampling_plan& plan,
                const dspdc_config& cfg, const sparse_dataset& ds, const problem_spec& spec,
                rng& gen, const step_probes* probes = nullptr);

// Lyapunov potential relative to a reference optimum (w_ref, alpha_ref).
double delta_t(const solver_state& st, const Eigen::VectorXd& w_ref,
               const Eigen::VectorXd& alpha_ref, const step_params& params,
               const sampling_plan& plan, const sparse_dataset& ds,
               const problem_spec& spec, int a);

struct trace_record {
  std::size_t checkpoint = 0;
  double epoch = 0.0;
  double seconds = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  std::size_t nnz_w = 0;
  std::size_t zero_kappa = 0;
};

struct run_budget {
  // Stop once P(w) - D(alpha) <= gap_tol * P(0).
  double gap_tol = 1e-8;
  double max_epochs = 100.0;
  bool wall_clock = true;
};

struct run_result {
  solver_state state;  // best-gap state seen at a checkpoint
  std::vector<trace_record> trace;
  objective_values final{0.0, 0.0};
  double p0 = 0.0;
  double epochs = 0.0;
  double seconds = 0.0;
  bool converged = false;
  // All violations vanished (exact optimality).
  bool optimal = false;
  step_params params;
  // Variant bookkeeping.
  std::uint64_t draws_outside_support = 0;
  std::uint64_t refreshes = 0;
  std::uint64_t uniform_fallbacks = 0;
  std::vector<double> committed_gaps;
};

// Records checkpoints and tracks the best state; shared by every runner.
class trace_recorder {
 public:
  trace_recorder(const sparse_dataset& ds, const problem_spec& spec, const run_budget& budget);

  // Evaluates the state, appends a record, returns true when the gap target is met.
  bool checkpoint(const solver_state& st);
  double epochs(const solver_state& st) const;
  bool out_of_budget(const solver_state& st) const;
  double p0() const noexcept { return p0_; }
  double target() const noexcept { return budget_.gap_tol * p0_; }
  double best_gap() const noexcept { return best_gap_; }

  run_result finish(const solver_state& last, const step_params& params);

 private:
  const sparse_dataset& ds_;
  const problem_spec& spec_;
  run_budget budget_;
  double p0_;
  double start_;
  std::vector<trace_record> trace_;
  std::optional<solver_state> best_;
  double best_gap_ = infinity;
  objective_values best_values_{0.0, 0.0};
};

enum class base_algo { adaspdc, spdc, dspdc };

// Plain loop: step until the gap target or the epoch budget, checkpointing
// every ceil(n/a) iterations.
run_result run_solver(const sparse_dataset& ds, const problem_spec& spec, base_algo algo,
                      const sampling_plan& plan, const step_params& params,
                      const run_budget& budget, rng& gen,
                      const dspdc_config* cfg = nullptr, const step_probes* probes = nullptr);

}  // namespace spdc

#endif  // SPDC_SOLVER_HPP_
