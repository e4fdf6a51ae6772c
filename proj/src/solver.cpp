#include "spdc/solver.hpp"

#include "spdc/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace spdc {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

solver_state make_state(const sparse_dataset& ds) {
  return make_state(ds, Eigen::VectorXd::Zero(ds.d()), Eigen::VectorXd::Zero(ds.n()));
}

solver_state make_state(const sparse_dataset& ds, const Eigen::VectorXd& w,
                        const Eigen::VectorXd& alpha) {
  if (static_cast<std::size_t>(w.size()) != ds.d() ||
      static_cast<std::size_t>(alpha.size()) != ds.n())
    throw validation_error("initial point has the wrong dimensions");
  if (!dual_feasible(alpha, ds)) throw validation_error("initial dual point is infeasible");
  solver_state st;
  st.w = st.w_prev = st.w_bar = w;
  st.alpha = st.alpha_bar = alpha;
  st.u = ds.multiply_transpose(alpha) / static_cast<double>(ds.n());
  st.u_bar = st.u;
  return st;
}

double cache_error(const solver_state& st, const sparse_dataset& ds) {
  const double n = static_cast<double>(ds.n());
  const Eigen::VectorXd u = ds.multiply_transpose(st.alpha) / n;
  const Eigen::VectorXd ub = ds.multiply_transpose(st.alpha_bar) / n;
  const double e1 = (st.u - u).norm() / std::max(1.0, u.norm());
  const double e2 = (st.u_bar - ub).norm() / std::max(1.0, ub.norm());
  return std::max(e1, e2);
}

void apply_step(solver_state& st, std::span<const std::size_t> batch,
                const step_params& params, const sampling_plan& plan,
                const sparse_dataset& ds, const problem_spec& spec,
                const primal_scope& scope, const step_probes* probes) {
  const double n = static_cast<double>(ds.n());
  const double gamma = spec.gamma(), lambda = spec.lambda();
  const bool dual_probe = probes && probes->on_dual;
  const bool primal_probe = probes && probes->on_primal;

  for (std::size_t i : st.touched) st.alpha_bar[i] = st.alpha[i];
  st.touched.clear();
  st.u_bar = st.u;

  for (std::size_t k : batch) {
    const double pk = plan.p[k];
    const auto row = ds.row(k);
    const double s = row.dot(st.w_bar);
    const double q = pk * n / params.sigma[k];
    const double old = st.alpha[k];
    const double upd = dual_prox(s, old, q, ds.label(k), gamma);
    if (dual_probe) probes->on_dual(k, s, old, upd, q);
    if (upd != old) {
      const double delta = upd - old;
      const double ext = delta / (plan.a * pk);
      st.alpha[k] = upd;
      st.alpha_bar[k] += ext;
      row.axpy_into(delta / n, st.u);
      row.axpy_into(ext / n, st.u_bar);
      st.touched.push_back(k);
    }
  }
  st.dual_updates += batch.size();

  st.w_prev = st.w;
  const double tau = params.tau * scope.tau_scale;
  auto update = [&](std::size_t j) {
    const double old = st.w[j];
    const double upd = primal_prox(st.u_bar[j], old, tau, lambda);
    if (primal_probe) probes->on_primal(j, st.u_bar[j], old, upd, tau);
    st.w[j] = upd;
  };
  if (scope.all) {
    for (std::size_t j = 0; j < ds.d(); ++j) update(j);
    st.primal_updates += ds.d();
  } else {
    for (std::size_t j : scope.coords) update(j);
    st.primal_updates += scope.coords.size();
  }
  st.w_bar = st.w + params.theta * (st.w - st.w_prev);
  ++st.iter;
}

void adaspdc_step(solver_state& st, const step_params& params, const sampling_plan& plan,
                  const sparse_dataset& ds, const problem_spec& spec, rng& gen,
                  const step_probes* probes) {
  draw_batch(plan, gen, st.batch);
  apply_step(st, st.batch, params, plan, ds, spec, {}, probes);
}

void vanilla_spdc_step(solver_state& st, const step_params& params,
                       const sampling_plan& plan, const sparse_dataset& ds,
                       const problem_spec& spec, rng& gen, const step_probes* probes) {
  if (!params.scalar_sigma)
    throw parameter_error("vanilla SPDC needs a scalar-sigma schedule (cor18 or cor19)");
  adaspdc_step(st, params, plan, ds, spec, gen, probes);
}

void dspdc_step(solver_state& st, const step_params& params, const sampling_plan& plan,
                const dspdc_config& cfg, const sparse_dataset& ds, const problem_spec& spec,
                rng& gen, const step_probes* probes) {
  draw_batch(plan, gen, st.batch);
  const std::size_t h = cfg.q_alias.draw(gen);
  primal_scope scope;
  scope.all = false;
  scope.coords = cfg.block(h);
  scope.tau_scale = static_cast<double>(cfg.block_size(h)) /
                    (cfg.q[h] * static_cast<double>(ds.d()));
  apply_step(st, st.batch, params, plan, ds, spec, scope, probes);
}

double delta_t(const solver_state& st, const Eigen::VectorXd& w_ref,
               const Eigen::VectorXd& alpha_ref, const step_params& params,
               const sampling_plan& plan, const sparse_dataset& ds,
               const problem_spec& spec, int a) {
  const double n = static_cast<double>(ds.n());
  const Eigen::VectorXd dw = st.w - w_ref;
  const Eigen::VectorXd da = st.alpha - alpha_ref;
  const Eigen::VectorXd step = st.w - st.w_prev;
  double out = (1.0 / (2.0 * params.tau) + spec.lambda()) * dw.squaredNorm();
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (da[i] == 0.0) continue;
    out += (1.0 / (2.0 * params.sigma[i]) + spec.gamma() / (n * plan.p[i])) * da[i] * da[i] / a;
  }
  out += step.squaredNorm() / (4.0 * params.tau);
  out -= da.dot(ds.multiply(step)) / n;
  return out;
}

trace_recorder::trace_recorder(const sparse_dataset& ds, const problem_spec& spec,
                               const run_budget& budget)
    : ds_(ds),
      spec_(spec),
      budget_(budget),
      p0_(primal_objective(Eigen::VectorXd::Zero(ds.d()), ds, spec)),
      start_(now_seconds()) {}

double trace_recorder::epochs(const solver_state& st) const {
  return static_cast<double>(st.dual_updates) / static_cast<double>(ds_.n());
}

bool trace_recorder::out_of_budget(const solver_state& st) const {
  return epochs(st) >= budget_.max_epochs;
}

bool trace_recorder::checkpoint(const solver_state& st) {
  const auto vals = evaluate(st.w, st.alpha, ds_, spec_);
  const double gap = vals.gap();
  if (!std::isfinite(vals.primal) || !std::isfinite(vals.dual) || gap < -1e-9 * p0_)
    throw numerical_error("invalid objective values at iteration " + std::to_string(st.iter) +
                          ": primal " + std::to_string(vals.primal) + ", dual " +
                          std::to_string(vals.dual));
  trace_record rec;
  rec.checkpoint = trace_.size();
  rec.epoch = epochs(st);
  rec.seconds = budget_.wall_clock ? now_seconds() - start_ : 0.0;
  rec.primal = vals.primal;
  rec.dual = vals.dual;
  rec.gap = gap;
  for (double v : st.w) rec.nnz_w += v != 0.0;
  const Eigen::VectorXd kappa = dual_violations(st.w, st.alpha, ds_, spec_);
  for (double k : kappa) rec.zero_kappa += k == 0.0;
  trace_.push_back(rec);
  if (gap < best_gap_) {
    best_gap_ = gap;
    best_ = st;
    best_values_ = vals;
  }
  return gap <= target();
}

run_result trace_recorder::finish(const solver_state& last, const step_params& params) {
  run_result r;
  r.state = best_ ? std::move(*best_) : last;
  r.trace = std::move(trace_);
  r.final = best_ ? best_values_ : evaluate(last.w, last.alpha, ds_, spec_);
  r.p0 = p0_;
  r.epochs = epochs(last);
  r.seconds = budget_.wall_clock ? now_seconds() - start_ : 0.0;
  r.converged = r.final.gap() <= target();
  r.params = params;
  return r;
}

run_result run_solver(const sparse_dataset& ds, const problem_spec& spec, base_algo algo,
                      const sampling_plan& plan, const step_params& params,
                      const run_budget& budget, rng& gen, const dspdc_config* cfg,
                      const step_probes* probes) {
  if (algo == base_algo::dspdc && cfg == nullptr)
    throw parameter_error("dspdc needs a block configuration");
  if (algo != base_algo::adaspdc && !params.scalar_sigma)
    throw parameter_error("spdc and dspdc need a scalar-sigma schedule (cor18 or cor19)");
  trace_recorder rec(ds, spec, budget);
  solver_state st = make_state(ds);
  const std::size_t period = (ds.n() + plan.a - 1) / plan.a;
  bool done = rec.checkpoint(st);
  while (!done && !rec.out_of_budget(st)) {
    for (std::size_t t = 0; t < period; ++t) {
      if (algo == base_algo::dspdc)
        dspdc_step(st, params, plan, *cfg, ds, spec, gen, probes);
      else
        adaspdc_step(st, params, plan, ds, spec, gen, probes);
    }
    done = rec.checkpoint(st);
  }
  return rec.finish(st, params);
}

}  // namespace spdc
