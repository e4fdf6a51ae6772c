#include "spdc/variants.hpp"

#include "spdc/error.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace spdc {

namespace {

std::size_t ceil_div(std::size_t n, int a) { return (n + a - 1) / static_cast<std::size_t>(a); }

step_params inner_schedule(const sparse_dataset& ds, const problem_spec& spec,
                           const sampling_plan& plan) {
  const double active = static_cast<double>(plan.support.size());
  return static_cast<double>(plan.a) * plan.a <= active ? schedule_thm5(ds, spec, plan)
                                                        : schedule_thm15(ds, spec, plan);
}

run_result run_restricted(const sparse_dataset& ds, const problem_spec& spec, int a,
                          const variant_config& cfg, const run_budget& budget, rng& gen,
                          bool primal_mask) {
  if (a < 1) throw parameter_error("mini-batch size must be at least 1");
  const std::size_t n = ds.n(), d = ds.d();
  const sampling_plan full_plan = build_uniform(n, static_cast<int>(n));
  const step_params full_params = schedule_thm15(ds, spec, full_plan);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const std::size_t inner_len = ceil_div(n, a);

  trace_recorder rec(ds, spec, budget);
  solver_state st = make_state(ds);
  step_params last = full_params;
  std::uint64_t outside = 0;
  std::vector<double> committed;
  std::vector<std::size_t> coords;
  coords.reserve(d);

  bool done = rec.checkpoint(st);
  while (!done && !rec.out_of_budget(st)) {
    apply_step(st, all, full_params, full_plan, ds, spec);

    const Eigen::VectorXd kappa = dual_violations(st.w, st.alpha, ds, spec);
    const auto plan = build_restricted(kappa, a, cfg.zero_threshold);
    double ref_gap = evaluate(st.w, st.alpha, ds, spec).gap();

    if (plan) {
      last = inner_schedule(ds, spec, *plan);
      primal_scope scope;
      if (primal_mask) {
        const Eigen::VectorXd psi = primal_violations(st.w, st.alpha, ds, spec);
        coords.clear();
        for (std::size_t j = 0; j < d; ++j)
          if (psi[j] > cfg.zero_threshold) coords.push_back(j);
        scope.all = false;
        scope.coords = coords;
      }
      solver_state inner = st;
      for (std::size_t it = 1; it <= inner_len; ++it) {
        draw_batch(*plan, gen, inner.batch);
        for (std::size_t k : inner.batch) outside += !(kappa[k] > cfg.zero_threshold);
        apply_step(inner, inner.batch, last, *plan, ds, spec, scope);
        const bool check = it == inner_len || (cfg.gap_check == gap_check_mode::every_k &&
                                               it % cfg.gap_check_k == 0);
        if (!check) continue;
        const double gap = evaluate(inner.w, inner.alpha, ds, spec).gap();
        if (gap < ref_gap) {
          st = inner;
          ref_gap = gap;
          committed.push_back(gap);
        }
      }
      // Rejected inner work still counts toward the epoch budget.
      st.iter = inner.iter;
      st.dual_updates = inner.dual_updates;
      st.primal_updates = inner.primal_updates;
    }
    done = rec.checkpoint(st);
  }
  auto r = rec.finish(st, last);
  r.draws_outside_support = outside;
  r.committed_gaps = std::move(committed);
  return r;
}

}  // namespace

run_result run_ovsspdc(const sparse_dataset& ds, const problem_spec& spec, int a,
                       const variant_config& cfg, const run_budget& budget, rng& gen) {
  const std::size_t n = ds.n();
  if (a < 1 || static_cast<double>(a) * a > static_cast<double>(n))
    throw schedule_error("ovsspdc requires 1 <= a <= sqrt(n); got a = " + std::to_string(a) +
                         ", n = " + std::to_string(n));
  const sampling_plan uniform = build_uniform(n, a);
  sampling_plan plan = uniform;
  step_params params = schedule_thm5(ds, spec, plan);
  const std::size_t refresh = cfg.refresh_every ? cfg.refresh_every : ceil_div(n, a);
  const std::size_t period = ceil_div(n, a);
  std::uint64_t refreshes = 0, fallbacks = 0;

  trace_recorder rec(ds, spec, budget);
  solver_state st = make_state(ds);
  bool done = rec.checkpoint(st);
  std::size_t t = 0;
  while (!done && !rec.out_of_budget(st)) {
    adaspdc_step(st, params, plan, ds, spec, gen);
    ++t;
    if (t % refresh == 0) {
      const Eigen::VectorXd kappa = dual_violations(st.w, st.alpha, ds, spec);
      auto fresh = build_ovs(kappa, ds.row_norms(), a);
      ++refreshes;
      if (fresh) {
        plan = std::move(*fresh);
      } else {
        plan = uniform;
        ++fallbacks;
      }
      params = schedule_thm5(ds, spec, plan);
    }
    if (t % period == 0) done = rec.checkpoint(st);
  }
  auto r = rec.finish(st, params);
  r.refreshes = refreshes;
  r.uniform_fallbacks = fallbacks;
  return r;
}

run_result run_ovs_exact(const sparse_dataset& ds, const problem_spec& spec,
                         const variant_config& cfg, const run_budget& budget, rng& gen) {
  const std::size_t n = ds.n();
  trace_recorder rec(ds, spec, budget);
  solver_state st = make_state(ds);
  step_params params = schedule_thm5(ds, spec, build_uniform(n, 1));
  sampling_plan plan = build_uniform(n, 1);
  std::uint64_t outside = 0;
  bool optimal = false;

  bool done = rec.checkpoint(st);
  std::size_t t = 0;
  while (!done && !rec.out_of_budget(st)) {
    const Eigen::VectorXd margins = ds.multiply(st.w_bar);
    const Eigen::VectorXd kappa = dual_violations_from_margins(margins, st.alpha, ds, spec);
    auto fresh = build_restricted(kappa, 1, cfg.zero_threshold);
    if (fresh) {
      plan = std::move(*fresh);
      params = schedule_thm5(ds, spec, plan);
      const std::size_t k = plan.draw(gen);
      outside += !(kappa[k] > cfg.zero_threshold);
      if (spec.gamma() == plan.p[k] * static_cast<double>(n) / params.sigma[k])
        throw schedule_error("gamma equals p_i n / sigma_i for instance " +
                             std::to_string(k + 1) + "; the skip rule does not apply");
      st.batch.assign(1, k);
      apply_step(st, st.batch, params, plan, ds, spec);
    } else {
      const Eigen::VectorXd psi = primal_violations_from_u(st.w, st.u, spec);
      if ((psi.array() <= cfg.zero_threshold).all()) {
        optimal = true;
        rec.checkpoint(st);
        break;
      }
      apply_step(st, {}, params, plan, ds, spec);
      ++st.dual_updates;  // the iteration still costs one sampling round
    }
    ++t;
    if (t % n == 0) done = rec.checkpoint(st);
  }
  auto r = rec.finish(st, params);
  r.optimal = optimal;
  r.draws_outside_support = outside;
  return r;
}

run_result run_ovsspdc_plus(const sparse_dataset& ds, const problem_spec& spec, int a,
                            const variant_config& cfg, const run_budget& budget, rng& gen) {
  return run_restricted(ds, spec, a, cfg, budget, gen, false);
}

run_result run_ovsspdc_plusplus(const sparse_dataset& ds, const problem_spec& spec, int a,
                                const variant_config& cfg, const run_budget& budget,
                                rng& gen) {
  return run_restricted(ds, spec, a, cfg, budget, gen, true);
}

}  // namespace spdc
