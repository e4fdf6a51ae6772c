#include "spdc/schedule.hpp"

#include "spdc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spdc {

namespace {

// Conditions are accepted up to this relative slack so that schedules which
// sit exactly on a boundary are not rejected by the last bit of rounding.
constexpr double rel_slack = 1e-12;

bool leq(double lhs, double rhs) { return lhs <= rhs + rel_slack * std::abs(rhs); }

// The problem as seen from the plan's support: n_eff instances with
// lambda_eff = lambda n / n_eff, and `scale` = n / n_eff mapping steps back.
struct support_view {
  double n;
  double n_eff;
  double lambda_eff;
  double scale;
};

support_view view_of(const sparse_dataset& ds, const problem_spec& spec,
                     const sampling_plan& plan) {
  if (plan.n() != ds.n())
    throw validation_error("sampling plan has " + std::to_string(plan.n()) +
                           " entries but the dataset has " + std::to_string(ds.n()) +
                           " instances");
  if (plan.kind != plan_kind::restricted && plan.support.size() != plan.n())
    throw schedule_error("sampling plan is not proper: some p_i = 0");
  const double n = static_cast<double>(ds.n());
  const double ne = static_cast<double>(plan.support.size());
  return {n, ne, spec.lambda() * n / ne, n / ne};
}

void check_cap(const sampling_plan& plan, double cap, const char* what) {
  for (std::size_t i : plan.support)
    if (!leq(plan.p[i], cap))
      throw schedule_error(std::string(what) + ": p_" + std::to_string(i + 1) + " = " +
                           std::to_string(plan.p[i]) + " exceeds the cap " +
                           std::to_string(cap));
}

void check_small_batch(const sampling_plan& plan, const support_view& v, const char* what) {
  if (static_cast<double>(plan.a) * plan.a > v.n_eff)
    throw schedule_error(std::string(what) + " requires a <= sqrt(n); got a = " +
                         std::to_string(plan.a) + ", n = " +
                         std::to_string(static_cast<std::size_t>(v.n_eff)));
}

double r_under_of(const sparse_dataset& ds, const sampling_plan& plan) {
  double r = infinity;
  for (std::size_t i : plan.support) r = std::min(r, plan.p[i] / ds.row_norms()[i]);
  return r;
}

double r_max_of(const sparse_dataset& ds, const sampling_plan& plan) {
  double r = 0.0;
  for (std::size_t i : plan.support) r = std::max(r, ds.row_norms()[i]);
  return r;
}

// Shared form of the four R_under schedules: tau = (a R/2) sqrt(c gamma / lambda)
// and sigma_i = (n p_i / (2 ||x_i||)) sqrt(c lambda / gamma), or the scalar
// sigma = (n R/2) sqrt(c lambda / gamma), with c = 1 or n.
step_params r_under_schedule(const sparse_dataset& ds, const problem_spec& spec,
                             const sampling_plan& plan, const support_view& v, bool root_n,
                             bool scalar, schedule_kind kind) {
  const double c = root_n ? v.n_eff : 1.0;
  const double g = spec.gamma();
  step_params out;
  out.schedule = kind;
  out.scalar_sigma = scalar;
  out.r_under = r_under_of(ds, plan);
  out.r_max = r_max_of(ds, plan);
  out.tau = plan.a * out.r_under / 2.0 * std::sqrt(c * g / v.lambda_eff) * v.scale;
  out.sigma = Eigen::VectorXd::Zero(ds.n());
  const double root = std::sqrt(c * v.lambda_eff / g);
  for (std::size_t i : plan.support) {
    const double s = scalar ? v.n_eff * out.r_under / 2.0 * root
                            : v.n_eff * plan.p[i] / (2.0 * ds.row_norms()[i]) * root;
    out.sigma[i] = s * v.scale;
  }
  out.theta = theta_of(out, plan, spec, ds.n());
  return out;
}

}  // namespace

std::string_view to_string(schedule_kind k) noexcept {
  switch (k) {
    case schedule_kind::thm4: return "thm4";
    case schedule_kind::thm5: return "thm5";
    case schedule_kind::thm15: return "thm15";
    case schedule_kind::cor18: return "cor18";
    case schedule_kind::cor19: return "cor19";
    case schedule_kind::manual: return "manual";
  }
  return "unknown";
}

schedule_kind parse_schedule(std::string_view s) {
  for (auto k : {schedule_kind::thm4, schedule_kind::thm5, schedule_kind::thm15,
                 schedule_kind::cor18, schedule_kind::cor19, schedule_kind::manual})
    if (s == to_string(k)) return k;
  throw parameter_error("unknown schedule '" + std::string(s) + "'");
}

double step_params::sigma_min(const sampling_plan& plan) const {
  double m = infinity;
  for (std::size_t i : plan.support) m = std::min(m, sigma[i]);
  return m;
}

double step_params::sigma_max(const sampling_plan& plan) const {
  double m = 0.0;
  for (std::size_t i : plan.support) m = std::max(m, sigma[i]);
  return m;
}

step_params schedule_thm4(const sparse_dataset& ds, const problem_spec& spec,
                          const sampling_plan& plan) {
  const auto v = view_of(ds, spec, plan);
  check_cap(plan, 1.0 / plan.a, "thm4");
  return r_under_schedule(ds, spec, plan, v, false, false, schedule_kind::thm4);
}

step_params schedule_thm5(const sparse_dataset& ds, const problem_spec& spec,
                          const sampling_plan& plan) {
  const auto v = view_of(ds, spec, plan);
  check_small_batch(plan, v, "thm5");
  check_cap(plan, 1.0 / (plan.a * std::sqrt(v.n_eff)), "thm5");
  return r_under_schedule(ds, spec, plan, v, true, false, schedule_kind::thm5);
}

step_params schedule_thm15(const sparse_dataset& ds, const problem_spec& spec,
                           const sampling_plan& plan) {
  const auto v = view_of(ds, spec, plan);
  if (static_cast<double>(plan.a) * plan.a < v.n_eff)
    throw schedule_error("thm15 requires a >= sqrt(n); got a = " + std::to_string(plan.a) +
                         ", n = " + std::to_string(static_cast<std::size_t>(v.n_eff)));
  if (!plan.flat) throw schedule_error("thm15 requires uniform sampling");
  step_params out;
  out.schedule = schedule_kind::thm15;
  out.r_under = r_under_of(ds, plan);
  out.r_max = r_max_of(ds, plan);
  const double g = spec.gamma();
  out.tau = 1.0 / (2.0 * out.r_max) * std::sqrt(g / v.lambda_eff) * v.scale;
  out.sigma = Eigen::VectorXd::Zero(ds.n());
  const double root = std::sqrt(v.lambda_eff / g);
  for (std::size_t i : plan.support)
    out.sigma[i] = v.n_eff / (2.0 * plan.a * ds.row_norms()[i]) * root * v.scale;
  out.theta = theta_of(out, plan, spec, ds.n());
  return out;
}

step_params schedule_thm15(const sparse_dataset& ds, const problem_spec& spec, int a) {
  return schedule_thm15(ds, spec, build_uniform(ds.n(), a));
}

step_params schedule_vanilla(const sparse_dataset& ds, const problem_spec& spec,
                             const sampling_plan& plan, vanilla_scheme scheme) {
  const auto v = view_of(ds, spec, plan);
  if (scheme == vanilla_scheme::cor18) {
    check_cap(plan, 1.0 / plan.a, "cor18");
    return r_under_schedule(ds, spec, plan, v, false, true, schedule_kind::cor18);
  }
  check_small_batch(plan, v, "cor19");
  check_cap(plan, 1.0 / (plan.a * std::sqrt(v.n_eff)), "cor19");
  return r_under_schedule(ds, spec, plan, v, true, true, schedule_kind::cor19);
}

step_params make_schedule(schedule_kind kind, const sparse_dataset& ds,
                          const problem_spec& spec, const sampling_plan& plan) {
  switch (kind) {
    case schedule_kind::thm4: return schedule_thm4(ds, spec, plan);
    case schedule_kind::thm5: return schedule_thm5(ds, spec, plan);
    case schedule_kind::thm15: return schedule_thm15(ds, spec, plan);
    case schedule_kind::cor18: return schedule_vanilla(ds, spec, plan, vanilla_scheme::cor18);
    case schedule_kind::cor19: return schedule_vanilla(ds, spec, plan, vanilla_scheme::cor19);
    case schedule_kind::manual: break;
  }
  throw parameter_error("a manual schedule has no formula");
}

double theta_of(const step_params& params, const sampling_plan& plan,
                const problem_spec& spec, std::size_t n) {
  const double first = 1.0 - 1.0 / (1.0 + 1.0 / (2.0 * params.tau * spec.lambda()));
  double worst = 0.0;
  for (std::size_t i : plan.support)
    worst = std::max(worst, 1.0 / (plan.a * plan.p[i]) +
                                static_cast<double>(n) /
                                    (2.0 * plan.a * params.sigma[i] * spec.gamma()));
  return std::max(first, 1.0 - 1.0 / worst);
}

condition_result verify_lemma3(const step_params& params, const sampling_plan& plan,
                               const sparse_dataset& ds, int a) {
  condition_result r;
  const double n = static_cast<double>(ds.n());
  for (std::size_t k : plan.support) {
    const double apn = a * plan.p[k] * n;
    const double one = 1.0 - a * plan.p[k];
    const double pos = 1.0 / (2.0 * a * params.sigma[k]);
    const double neg = params.tau * ds.row_norms()[k] * ds.row_norms()[k] *
                       (one * one + params.theta) / (apn * apn);
    const double lhs = pos - neg;
    if (lhs < r.worst_margin) {
      r.worst_margin = lhs;
      r.worst_index = k;
    }
    if (!leq(neg, pos)) r.ok = false;
  }
  return r;
}

lemma14_result verify_lemma14(const step_params& params, const sampling_plan& plan,
                              const sparse_dataset& ds, int a) {
  lemma14_result r;
  const double n = static_cast<double>(ds.n());
  double frob = 0.0;
  for (std::size_t k : plan.support) frob += ds.row_norms()[k] * ds.row_norms()[k];
  for (std::size_t i : plan.support) {
    const double nrm2 = ds.row_norms()[i] * ds.row_norms()[i];
    const double pn = plan.p[i] * n;
    const double lhs1 = params.tau * params.sigma[i];
    const double rhs1 = a * pn * pn / (4.0 * nrm2);
    if (rhs1 - lhs1 < r.first.worst_margin) {
      r.first.worst_margin = rhs1 - lhs1;
      r.first.worst_index = i;
    }
    if (!leq(lhs1, rhs1)) r.first.ok = false;

    const double lhs2 = params.tau * frob / (n * n);
    const double rhs2 = 1.0 / (4.0 * a * params.sigma[i]);
    if (rhs2 - lhs2 < r.second.worst_margin) {
      r.second.worst_margin = rhs2 - lhs2;
      r.second.worst_index = i;
    }
    if (!leq(lhs2, rhs2)) r.second.ok = false;
  }
  r.ok = r.first.ok && r.second.ok;
  return r;
}

double complexity_estimate(const sparse_dataset& ds, const problem_spec& spec,
                           const sampling_plan& plan, int a, schedule_kind schedule) {
  const double n = static_cast<double>(ds.n());
  const double lg = spec.gamma() * spec.lambda();
  const auto& nr = ds.row_norms();
  switch (schedule) {
    case schedule_kind::thm4:
    case schedule_kind::thm5: {
      const double root = std::sqrt(schedule == schedule_kind::thm5 ? n * lg : lg);
      double m = 0.0;
      for (std::size_t i : plan.support)
        m = std::max(m, 1.0 / (a * plan.p[i]) + nr[i] / (plan.p[i] * a * root));
      return m;
    }
    case schedule_kind::thm15:
      return n / a + r_max_of(ds, plan) / std::sqrt(lg);
    case schedule_kind::cor18:
    case schedule_kind::cor19: {
      const double root = std::sqrt(schedule == schedule_kind::cor19 ? n * lg : lg);
      double m = 0.0;
      for (std::size_t i : plan.support) m = std::max(m, 1.0 / (a * plan.p[i]));
      return m + 1.0 / (r_under_of(ds, plan) * a * root);
    }
    case schedule_kind::manual: break;
  }
  throw parameter_error("no complexity estimate for a manual schedule");
}

dspdc_config make_dspdc_config(std::size_t d, int b, Eigen::VectorXd q) {
  if (b < 1) throw parameter_error("primal block size b must be at least 1");
  const std::size_t ub = static_cast<std::size_t>(b);
  const std::size_t m = d / ub, r = d % ub;
  if (m == 0 || m < r)
    throw parameter_error("cannot partition d = " + std::to_string(d) + " coordinates into " +
                          "blocks of size " + std::to_string(b) + " and " +
                          std::to_string(b + 1));
  dspdc_config cfg;
  cfg.b = b;
  cfg.block_start.push_back(0);
  for (std::size_t h = 0; h < m; ++h)
    cfg.block_start.push_back(cfg.block_start.back() + (h < r ? ub + 1 : ub));
  cfg.coords.resize(d);
  for (std::size_t j = 0; j < d; ++j) cfg.coords[j] = j;
  if (q.size() == 0) q = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  if (static_cast<std::size_t>(q.size()) != m)
    throw parameter_error("block probability vector has " + std::to_string(q.size()) +
                          " entries, expected " + std::to_string(m));
  for (double v : q)
    if (!(v > 0.0)) throw parameter_error("block probabilities must be positive");
  cfg.q_alias = alias_table(std::span<const double>(q.data(), q.size()));
  cfg.q = std::move(q);
  return cfg;
}

double dspdc_theta(const step_params& params, const sampling_plan& plan,
                   const dspdc_config& cfg, const problem_spec& spec, std::size_t n) {
  const double lam = spec.lambda(), g = spec.gamma();
  const double d = static_cast<double>(cfg.block_start.back());
  double t = 0.0;
  for (std::size_t l = 0; l < cfg.blocks(); ++l) {
    const double base = d / (2.0 * params.tau * static_cast<double>(cfg.block_size(l)));
    const double ql = cfg.q[l];
    t = std::max(t, (base + lam * (1.0 - ql) / ql) / (base + lam / ql));
  }
  const double nd = static_cast<double>(n);
  for (std::size_t i : plan.support) {
    const double half = 1.0 / (2.0 * params.sigma[i]);
    const double pn = plan.p[i] * nd;
    t = std::max(t, (half + (1.0 - plan.a * plan.p[i]) * g / pn) / (half + g / pn));
  }
  return t;
}

thm20_result verify_thm20(const step_params& params, const sampling_plan& plan,
                          const dspdc_config& cfg, const sparse_dataset& ds,
                          const problem_spec& spec, int a, double theta_bar) {
  thm20_result r;
  const double tb = theta_bar > 0.0 ? theta_bar : params.theta;
  r.theta_bar = tb;
  const double lam = spec.lambda(), g = spec.gamma();
  const double d = static_cast<double>(ds.d());
  const double n = static_cast<double>(ds.n());
  if (cfg.block_start.back() != ds.d())
    throw parameter_error("block partition covers " + std::to_string(cfg.block_start.back()) +
                          " coordinates, dataset has " + std::to_string(ds.d()));

  double c1 = 0.0;
  for (std::size_t l = 0; l < cfg.blocks(); ++l) {
    const double base = d / (2.0 * params.tau * static_cast<double>(cfg.block_size(l)));
    const double ql = cfg.q[l];
    c1 = std::max(c1, (base + lam * (1.0 - ql) / ql) / (base + lam / ql));
  }
  double c2 = 0.0;
  for (std::size_t i : plan.support) {
    const double half = 1.0 / (2.0 * params.sigma[i]);
    const double pn = plan.p[i] * n;
    c2 = std::max(c2, (half + (1.0 - a * plan.p[i]) * g / pn) / (half + g / pn));
  }
  // (theta/n) / (1/(n q_h)) and (theta/(4 tau)) / (1/(4 tau q_h)) both equal theta q_h.
  const double qmax = cfg.q.maxCoeff(), qmin = cfg.q.minCoeff();
  const double c34 = params.theta * qmax;
  r.margin = {tb - c1, tb - c2, tb - c34, tb - c34, infinity};
  r.clause[0] = leq(c1, tb);
  r.clause[1] = leq(c2, tb);
  r.clause[2] = leq(c34, tb);
  r.clause[3] = r.clause[2];

  const std::size_t rr = ds.d() % static_cast<std::size_t>(cfg.b);
  const std::size_t big = rr * static_cast<std::size_t>(cfg.b + 1);
  auto block_of = [&](std::size_t j) {
    return j < big ? j / static_cast<std::size_t>(cfg.b + 1)
                   : rr + (j - big) / static_cast<std::size_t>(cfg.b);
  };
  std::vector<double> per_block(cfg.blocks());
  for (std::size_t k : plan.support) {
    std::fill(per_block.begin(), per_block.end(), 0.0);
    const auto row = ds.row(k);
    for (std::size_t e = 0; e < row.nnz(); ++e)
      per_block[block_of(row.index[e])] += row.value[e] * row.value[e];
    const double lambda_k = *std::max_element(per_block.begin(), per_block.end());
    const double one = 1.0 - a * plan.p[k];
    const double apn = a * plan.p[k] * n;
    const double pos = 1.0 / (2.0 * a * params.sigma[k]);
    const double neg = (one * one / qmin + params.theta) * params.tau * lambda_k / (apn * apn);
    r.margin[4] = std::min(r.margin[4], pos - neg);
    if (!leq(neg, pos)) r.clause[4] = false;
  }
  for (int c = 0; c < 5; ++c)
    if (!r.clause[c]) {
      r.ok = false;
      if (r.first_failing == 0) r.first_failing = c + 1;
    }
  return r;
}

}  // namespace spdc
