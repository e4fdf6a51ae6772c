#include "spdc/synth.hpp"

#include "spdc/error.hpp"
#include "spdc/rng.hpp"

#include <cmath>
#include <vector>

namespace spdc {

sparse_dataset synth(const synth_options& opts) {
  if (opts.n < 1 || opts.d < 1) throw parameter_error("synth needs n >= 1 and d >= 1");
  if (!(opts.sparsity >= 0.0 && opts.sparsity < 1.0))
    throw parameter_error("sparsity must lie in [0, 1)");
  if (!(opts.dual_skew >= 0.0 && opts.dual_skew <= 1.0))
    throw parameter_error("dual_skew must lie in [0, 1]");
  if (!(opts.density > 0.0 && opts.density <= 1.0))
    throw parameter_error("density must lie in (0, 1]");

  rng gen(opts.seed);
  Eigen::VectorXd w_true = Eigen::VectorXd::Zero(opts.d);
  for (std::size_t j = 0; j < opts.d; ++j)
    if (gen.uniform01() >= opts.sparsity) w_true[j] = gen.normal();
  if (w_true.squaredNorm() == 0.0) w_true[gen.uniform_index(opts.d)] = 1.0;
  const Eigen::VectorXd dir = w_true / w_true.norm();

  std::vector<triplet> entries;
  std::vector<double> labels(opts.n);
  Eigen::VectorXd x(opts.d);
  for (std::size_t i = 0; i < opts.n; ++i) {
    x.setZero();
    bool any = false;
    for (std::size_t j = 0; j < opts.d; ++j)
      if (gen.uniform01() < opts.density) {
        x[j] = gen.normal();
        any = any || x[j] != 0.0;
      }
    if (!any) x[gen.uniform_index(opts.d)] = 1.0;

    const double m = x.dot(dir);
    double y;
    if (gen.uniform01() < opts.dual_skew) {
      y = m >= 0.0 ? 1.0 : -1.0;
      x += y * opts.shift * dir;
    } else {
      y = m + opts.noise * gen.normal() >= 0.0 ? 1.0 : -1.0;
    }
    labels[i] = y;
    bool kept = false;
    for (std::size_t j = 0; j < opts.d; ++j)
      if (x[j] != 0.0) {
        entries.push_back({static_cast<index_t>(i), static_cast<index_t>(j), x[j]});
        kept = true;
      }
    if (!kept) entries.push_back({static_cast<index_t>(i), 0, 1.0});
  }
  return sparse_dataset::from_triplets(opts.n, opts.d, std::move(entries), std::move(labels));
}

}  // namespace spdc
