#ifndef SPDC_SCHEDULE_HPP_
#define SPDC_SCHEDULE_HPP_

#include "spdc/datamat.hpp"
#include "spdc/objective.hpp"
#include "spdc/sampling.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace spdc {

enum class schedule_kind { thm4, thm5, thm15, cor18, cor19, manual };
std::string_view to_string(schedule_kind k) noexcept;
schedule_kind parse_schedule(std::string_view s);

struct step_params {
  double tau = 0.0;
  // Per-instance dual steps; entries outside the plan's support are unused (0).
  Eigen::VectorXd sigma;
  double theta = 0.0;
  schedule_kind schedule = schedule_kind::manual;
  // min_i p_i / ||x_i|| and max_i ||x_i|| over the support.
  double r_under = 0.0;
  double r_max = 0.0;
  bool scalar_sigma = false;

  double sigma_min(const sampling_plan& plan) const;
  double sigma_max(const sampling_plan& plan) const;
};

// Every schedule is computed on the plan's support. When the support has
// n' < n entries the problem is treated as having n' instances and the
// resulting steps are mapped back to the n-instance scaling, so that the
// inner loops of the restricted variants use the same formulas.
step_params schedule_thm4(const sparse_dataset& ds, const problem_spec& spec,
                          const sampling_plan& plan);
step_params schedule_thm5(const sparse_dataset& ds, const problem_spec& spec,
                          const sampling_plan& plan);
// Requires a >= sqrt(n) and a plan that is uniform over its support.
step_params schedule_thm15(const sparse_dataset& ds, const problem_spec& spec,
                           const sampling_plan& plan);
step_params schedule_thm15(const sparse_dataset& ds, const problem_spec& spec, int a);

enum class vanilla_scheme { cor18, cor19 };
step_params schedule_vanilla(const sparse_dataset& ds, const problem_spec& spec,
                             const sampling_plan& plan, vanilla_scheme scheme);

step_params make_schedule(schedule_kind kind, const sparse_dataset& ds,
                          const problem_spec& spec, const sampling_plan& plan);

// max{1 - 1/(1 + 1/(2 tau lambda)), 1 - 1/max_i(1/(a p_i) + n/(2 a sigma_i gamma))}
double theta_of(const step_params& params, const sampling_plan& plan,
                const problem_spec& spec, std::size_t n);

struct condition_result {
  bool ok = true;
  // Smallest slack (rhs - lhs, or lhs for a ">= 0" condition) seen.
  double worst_margin = infinity;
  std::size_t worst_index = 0;
};

// 1/(2 a sigma_k) - tau ||x_k||^2 ((1 - a p_k)^2 + theta) / (a p_k n)^2 >= 0
condition_result verify_lemma3(const step_params& params, const sampling_plan& plan,
                               const sparse_dataset& ds, int a);

struct lemma14_result {
  bool ok = true;
  // tau sigma_i <= a (p_i n)^2 / (4 ||x_i||^2)
  condition_result first;
  // tau sum_k ||x_k||^2 / n^2 <= 1 / (4 a sigma_i)
  condition_result second;
};
lemma14_result verify_lemma14(const step_params& params, const sampling_plan& plan,
                              const sparse_dataset& ds, int a);

// Leading iteration-count factor of the schedule's complexity bound.
double complexity_estimate(const sparse_dataset& ds, const problem_spec& spec,
                           const sampling_plan& plan, int a, schedule_kind schedule);

// Primal block partition for the doubly stochastic method: (d mod b) blocks
// of b + 1 coordinates followed by floor(d/b) - (d mod b) blocks of b.
struct dspdc_config {
  int b = 1;
  std::vector<std::size_t> block_start;  // size blocks() + 1
  std::vector<std::size_t> coords;       // 0, 1, ..., d - 1
  Eigen::VectorXd q;
  alias_table q_alias;

  std::size_t blocks() const noexcept { return block_start.size() - 1; }
  std::size_t block_size(std::size_t h) const noexcept {
    return block_start[h + 1] - block_start[h];
  }
  std::span<const std::size_t> block(std::size_t h) const noexcept {
    return std::span<const std::size_t>(coords).subspan(block_start[h], block_size(h));
  }
};
// Empty q means uniform.
dspdc_config make_dspdc_config(std::size_t d, int b, Eigen::VectorXd q = {});

// Momentum implied by the first two clauses (over blocks and instances).
double dspdc_theta(const step_params& params, const sampling_plan& plan,
                   const dspdc_config& cfg, const problem_spec& spec, std::size_t n);

struct thm20_result {
  bool ok = true;
  std::array<bool, 5> clause{true, true, true, true, true};
  std::array<double, 5> margin{};
  // 1-based index of the first failing clause, 0 when all hold.
  int first_failing = 0;
  double theta_bar = 0.0;
};
// theta_bar <= 0 selects theta_bar = params.theta.
thm20_result verify_thm20(const step_params& params, const sampling_plan& plan,
                          const dspdc_config& cfg, const sparse_dataset& ds,
                          const problem_spec& spec, int a, double theta_bar = 0.0);

}  // namespace spdc

#endif  // SPDC_SCHEDULE_HPP_
