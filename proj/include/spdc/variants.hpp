#ifndef SPDC_VARIANTS_HPP_
#define SPDC_VARIANTS_HPP_

#include "spdc/solver.hpp"

#include <cstddef>

namespace spdc {

enum class gap_check_mode { end_of_inner, every_k };

struct variant_config {
  // Iterations between violation/probability refreshes; 0 means ceil(n/a).
  std::size_t refresh_every = 0;
  gap_check_mode gap_check = gap_check_mode::end_of_inner;
  std::size_t gap_check_k = 1;
  // kappa_i <= threshold (psi_j <= threshold) counts as zero. Exact by default.
  double zero_threshold = 0.0;
};

// Violation-based sampling: every refresh recomputes kappa at (w, alpha),
// rebuilds the capped distribution (uniform when kappa vanishes) and the
// small-batch schedule. Needs a <= sqrt(n).
run_result run_ovsspdc(const sparse_dataset& ds, const problem_spec& spec, int a,
                       const variant_config& cfg, const run_budget& budget, rng& gen);

// a = 1; kappa is evaluated against w_bar every iteration and only
// coordinates with nonzero violation can be drawn. Small problems only.
run_result run_ovs_exact(const sparse_dataset& ds, const problem_spec& spec,
                         const variant_config& cfg, const run_budget& budget, rng& gen);

// Outer loop: full dual and primal pass, violations, restricted distribution;
// inner loop of ceil(n/a) iterations on a copy accepted only if the duality
// gap drops below that of the outer iterate.
run_result run_ovsspdc_plus(const sparse_dataset& ds, const problem_spec& spec, int a,
                            const variant_config& cfg, const run_budget& budget, rng& gen);

// As above with inner primal updates limited to coordinates with psi_j != 0.
run_result run_ovsspdc_plusplus(const sparse_dataset& ds, const problem_spec& spec, int a,
                                const variant_config& cfg, const run_budget& budget,
                                rng& gen);

}  // namespace spdc

#endif  // SPDC_VARIANTS_HPP_
