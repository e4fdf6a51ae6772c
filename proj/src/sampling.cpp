#include "spdc/sampling.hpp"

#include "spdc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spdc {

alias_table::alias_table(std::span<const double> p) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0)
      throw validation_error("probability entry " + std::to_string(i) +
                             " is negative or not finite");
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw validation_error("probabilities sum to " + std::to_string(sum) + ", expected 1");

  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) outcome_.push_back(i);
  const std::size_t m = outcome_.size();
  prob_.assign(m, 1.0);
  alias_.resize(m);
  for (std::size_t k = 0; k < m; ++k) alias_[k] = k;

  std::vector<double> scaled(m);
  std::vector<std::size_t> small, large;
  for (std::size_t k = 0; k < m; ++k) {
    scaled[k] = p[outcome_[k]] / sum * static_cast<double>(m);
    (scaled[k] < 1.0 ? small : large).push_back(k);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (std::size_t k : small) prob_[k] = 1.0;
  for (std::size_t k : large) prob_[k] = 1.0;
}

std::string_view to_string(plan_kind k) noexcept {
  switch (k) {
    case plan_kind::uniform: return "uniform";
    case plan_kind::data16: return "cor16";
    case plan_kind::data17: return "cor17";
    case plan_kind::ovs: return "ovs";
    case plan_kind::restricted: return "restricted";
  }
  return "unknown";
}

void draw_batch(const sampling_plan& plan, rng& gen, std::vector<std::size_t>& out) {
  out.resize(static_cast<std::size_t>(plan.a));
  for (auto& k : out) k = plan.draw(gen);
}

std::vector<std::size_t> draw_batch(const sampling_plan& plan, rng& gen) {
  std::vector<std::size_t> out;
  draw_batch(plan, gen, out);
  return out;
}

sampling_plan make_plan(Eigen::VectorXd p, int a, plan_kind kind, double cap) {
  if (a < 1) throw parameter_error("mini-batch size must be at least 1");
  sampling_plan plan;
  plan.alias = alias_table(std::span<const double>(p.data(), p.size()));
  plan.p = std::move(p);
  plan.a = a;
  plan.kind = kind;
  plan.cap = cap;
  for (Eigen::Index i = 0; i < plan.p.size(); ++i)
    if (plan.p[i] > 0.0) plan.support.push_back(i);
  plan.flat = true;
  for (std::size_t i : plan.support)
    if (plan.p[i] != plan.p[plan.support.front()]) plan.flat = false;
  return plan;
}

sampling_plan build_uniform(std::size_t n, int a) {
  if (n == 0) throw validation_error("cannot sample from zero instances");
  if (a < 1 || static_cast<std::size_t>(a) > n)
    throw parameter_error("mini-batch size a = " + std::to_string(a) + " outside [1, " +
                          std::to_string(n) + "]");
  return make_plan(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), a,
                   plan_kind::uniform, 1.0 / a);
}

sampling_plan build_data_driven(const sparse_dataset& ds, const problem_spec& spec, int a,
                                data_scheme scheme) {
  if (a != 1) throw parameter_error("norm-based sampling is only defined for a = 1");
  const std::size_t n = ds.n();
  const double sqn = std::sqrt(static_cast<double>(n));
  const double lg = std::sqrt(spec.lambda() * spec.gamma());
  const auto& norms = ds.row_norms();

  if (scheme == data_scheme::cor17) {
    const double bound = norms.sum() / sqn + lg * (static_cast<double>(n) - sqn);
    Eigen::Index worst;
    const double mx = norms.maxCoeff(&worst);
    if (mx > bound)
      throw schedule_error("cor17 norm cap violated by instance " + std::to_string(worst + 1) +
                           ": ||x_i|| = " + std::to_string(mx) + " > " +
                           std::to_string(bound));
  }
  const double shift = scheme == data_scheme::cor16 ? lg : sqn * lg;
  Eigen::VectorXd p = norms.array() + shift;
  p /= p.sum();
  return make_plan(std::move(p), a,
                   scheme == data_scheme::cor16 ? plan_kind::data16 : plan_kind::data17, 1.0);
}

std::optional<sampling_plan> build_ovs(const Eigen::VectorXd& kappa,
                                       const Eigen::VectorXd& row_norms, int a) {
  const auto n = static_cast<std::size_t>(kappa.size());
  if (n == 0 || static_cast<std::size_t>(row_norms.size()) != n)
    throw validation_error("violation and norm vectors must be non-empty and equal length");
  if (a < 1 || static_cast<double>(a) * a > static_cast<double>(n))
    throw schedule_error("violation-based sampling requires 1 <= a <= sqrt(n); got a = " +
                         std::to_string(a) + ", n = " + std::to_string(n));

  double min_nz = infinity;
  for (double k : kappa)
    if (k > 0.0) min_nz = std::min(min_nz, k);
  if (min_nz == infinity) return std::nullopt;

  const double nd = static_cast<double>(n);
  const double cap = 1.0 / (a * std::sqrt(nd));
  Eigen::VectorXd raw = (kappa.array() + min_nz) * row_norms.array();
  raw /= raw.sum();
  const double pbar = raw.maxCoeff();
  if (pbar <= cap) return make_plan(std::move(raw), a, plan_kind::ovs, cap);

  const double zeta = (cap - 1.0 / nd) / (pbar - 1.0 / nd);
  Eigen::VectorXd p(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = raw[i] == pbar ? cap : (1.0 - zeta) / nd + zeta * raw[i];
    p[i] = std::min(p[i], cap);
  }
  return make_plan(std::move(p), a, plan_kind::ovs, cap);
}

std::optional<sampling_plan> build_restricted(const Eigen::VectorXd& kappa, int a,
                                              double threshold) {
  std::size_t active = 0;
  for (double k : kappa)
    if (k > threshold) ++active;
  if (active == 0) return std::nullopt;
  const double share = 1.0 / static_cast<double>(active);
  Eigen::VectorXd p(kappa.size());
  for (Eigen::Index i = 0; i < kappa.size(); ++i) p[i] = kappa[i] > threshold ? share : 0.0;
  return make_plan(std::move(p), a, plan_kind::restricted, share);
}

}  // namespace spdc
