#ifndef SPDC_SYNTH_HPP_
#define SPDC_SYNTH_HPP_

#include "spdc/datamat.hpp"

#include <cstddef>
#include <cstdint>

namespace spdc {

struct synth_options {
  std::size_t n = 200;
  std::size_t d = 50;
  // Fraction of zero coefficients in the generating weight vector.
  double sparsity = 0.8;
  // Fraction of instances pushed far onto the correct side of the margin.
  double dual_skew = 0.0;
  // Probability that a feature is present in an instance.
  double density = 1.0;
  // Extra margin given to the easy instances, and label noise for the rest.
  double shift = 3.0;
  double noise = 1.0;
  std::uint64_t seed = 1;
};

// Labels follow sign(<x, w_true> + noise); a dual_skew fraction of the
// instances is shifted along w_true so that they end up well outside the
// margin (zero optimal dual variable for small enough lambda).
sparse_dataset synth(const synth_options& opts);

}  // namespace spdc

#endif  // SPDC_SYNTH_HPP_
