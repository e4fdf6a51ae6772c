#ifndef SPDC_SAMPLING_HPP_
#define SPDC_SAMPLING_HPP_

#include "spdc/datamat.hpp"
#include "spdc/objective.hpp"
#include "spdc/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace spdc {

// Walker/Vose alias table. Only indices with positive probability enter the
// table, so zero-probability entries are never drawn.
class alias_table {
 public:
  alias_table() = default;
  // Requires nonnegative finite entries summing to 1 within 1e-9.
  explicit alias_table(std::span<const double> p);

  std::size_t draw(rng& gen) const {
    const std::size_t slot = gen.uniform_index(prob_.size());
    return gen.uniform01() < prob_[slot] ? outcome_[slot] : outcome_[alias_[slot]];
  }
  std::size_t size() const noexcept { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
  std::vector<std::size_t> outcome_;
};

enum class plan_kind { uniform, data16, data17, ovs, restricted };
std::string_view to_string(plan_kind k) noexcept;

struct sampling_plan {
  Eigen::VectorXd p;
  double cap = 1.0;
  int a = 1;
  plan_kind kind = plan_kind::uniform;
  // Indices with p_i > 0, ascending.
  std::vector<std::size_t> support;
  alias_table alias;
  // True when p is constant over the support; draws then bypass the alias table.
  bool flat = false;

  std::size_t n() const noexcept { return static_cast<std::size_t>(p.size()); }
  std::size_t draw(rng& gen) const {
    return flat ? support[gen.uniform_index(support.size())] : alias.draw(gen);
  }
};

// Fills `out` with a i.i.d. indices (with replacement).
void draw_batch(const sampling_plan& plan, rng& gen, std::vector<std::size_t>& out);
std::vector<std::size_t> draw_batch(const sampling_plan& plan, rng& gen);

// General plan from an explicit probability vector.
sampling_plan make_plan(Eigen::VectorXd p, int a, plan_kind kind, double cap);

sampling_plan build_uniform(std::size_t n, int a);

enum class data_scheme { cor16, cor17 };
// cor16: p_i ~ ||x_i|| + sqrt(lambda gamma); cor17: p_i ~ ||x_i|| + sqrt(n lambda gamma).
// Only a = 1 is supported.
sampling_plan build_data_driven(const sparse_dataset& ds, const problem_spec& spec, int a,
                                data_scheme scheme);

// Violation-weighted probabilities capped at 1/(a sqrt(n)) through a uniform
// mixture. Empty when every kappa is zero (caller falls back to uniform).
std::optional<sampling_plan> build_ovs(const Eigen::VectorXd& kappa,
                                       const Eigen::VectorXd& row_norms, int a);

// Uniform over {i : kappa_i > threshold}. Empty when that set is empty.
std::optional<sampling_plan> build_restricted(const Eigen::VectorXd& kappa, int a = 1,
                                              double threshold = 0.0);

}  // namespace spdc

#endif  // SPDC_SAMPLING_HPP_
