#include "oracles.hpp"
#include "spdc/error.hpp"
#include "spdc/solver.hpp"
#include "spdc/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace spdc;

namespace {

// Dense re-implementation of one iteration, with grid/bisection proxes.
struct dense_ref {
  Eigen::MatrixXd x;
  Eigen::VectorXd y, w, w_bar, alpha;

  void step(const std::vector<std::size_t>& batch, const step_params& prm,
            const sampling_plan& plan, double gamma, double lambda) {
    const double n = static_cast<double>(x.rows());
    Eigen::VectorXd abar = alpha;
    for (auto k : batch) {
      const double s = x.row(k).dot(w_bar);
      const double q = plan.p[k] * n / prm.sigma[k];
      const double upd = oracle::dual_prox(s, alpha[k], q, y[k], gamma);
      abar[k] += (upd - alpha[k]) / (plan.a * plan.p[k]);
      alpha[k] = upd;
    }
    const Eigen::VectorXd u = x.transpose() * abar / n;
    Eigen::VectorXd nw(w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j)
      nw[j] = oracle::primal_prox(u[j], w[j], prm.tau, lambda);
    w_bar = nw + prm.theta * (nw - w);
    w = nw;
  }
};

sparse_dataset small_problem(std::size_t n, std::size_t d, std::uint64_t seed) {
  synth_options so;
  so.n = n;
  so.d = d;
  so.sparsity = 0.4;
  so.seed = seed;
  return synth(so);
}

// Long adaspdc run to a tight gap.
run_result reference_run(const sparse_dataset& ds, const problem_spec& spec) {
  const auto plan = build_uniform(ds.n(), 1);
  const auto prm = schedule_thm5(ds, spec, plan);
  rng gen(77);
  return run_solver(ds, spec, base_algo::adaspdc, plan, prm, {1e-14, 20000.0, false}, gen);
}

}  // namespace

TEST_CASE("three hand-computed iterations on one instance") {
  // x = 3, y = 1, gamma = lambda = 1: tau = sigma = 1/6, theta = 3/4.
  const auto ds = sparse_dataset::from_dense(Eigen::MatrixXd{{3.0}}, Eigen::VectorXd{{1.0}});
  const problem_spec spec(1.0, 1.0);
  const auto plan = build_uniform(1, 1);
  const auto prm = schedule_thm5(ds, spec, plan);
  CHECK(prm.tau == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(prm.sigma[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(prm.theta == doctest::Approx(0.75).epsilon(1e-15));

  // With a p = 1 the extrapolated dual equals the new dual.
  auto st = make_state(ds);
  const std::vector<std::size_t> k{0};
  apply_step(st, k, prm, plan, ds, spec);
  CHECK(st.alpha[0] == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
  CHECK(st.alpha_bar[0] == st.alpha[0]);
  CHECK(st.u_bar[0] == doctest::Approx(3.0 / 7.0).epsilon(1e-14));
  CHECK(st.w[0] == 0.0);

  apply_step(st, k, prm, plan, ds, spec);
  CHECK(st.alpha[0] == doctest::Approx(13.0 / 49.0).epsilon(1e-14));
  CHECK(st.w[0] == 0.0);

  apply_step(st, k, prm, plan, ds, spec);
  CHECK(st.alpha[0] == doctest::Approx(127.0 / 343.0).epsilon(1e-14));
  CHECK(st.u_bar[0] == doctest::Approx(381.0 / 343.0).epsilon(1e-14));
  CHECK(st.w[0] == doctest::Approx(38.0 / 2401.0).epsilon(1e-14));
  CHECK(st.w_bar[0] == doctest::Approx(1.75 * 38.0 / 2401.0).epsilon(1e-14));
  CHECK(st.iter == 3);
  CHECK(st.dual_updates == 3);
}

TEST_CASE("trajectory matches a dense reference iteration") {
  const auto ds = small_problem(6, 4, 5);
  const problem_spec spec(0.8, 0.05);
  const auto plan = build_data_driven(ds, spec, 1, data_scheme::cor16);
  // Mini-batches of 2 drawn from the same non-uniform p.
  auto plan2 = make_plan(plan.p, 2, plan_kind::data16, 0.5);
  REQUIRE(plan2.p.maxCoeff() <= 0.5);
  const auto prm = schedule_thm4(ds, spec, plan2);

  dense_ref ref;
  ref.x = Eigen::MatrixXd::Zero(ds.n(), ds.d());
  for (std::size_t i = 0; i < ds.n(); ++i)
    for (std::size_t j = 0; j < ds.d(); ++j) ref.x(i, j) = ds.at_row_major(i, j);
  ref.y = ds.labels();
  ref.w = ref.w_bar = Eigen::VectorXd::Zero(ds.d());
  ref.alpha = Eigen::VectorXd::Zero(ds.n());

  auto st = make_state(ds);
  rng gen(11);
  bool saw_duplicate = false;
  for (int t = 0; t < 60; ++t) {
    const auto batch = draw_batch(plan2, gen);
    saw_duplicate |= batch[0] == batch[1];
    apply_step(st, batch, prm, plan2, ds, spec);
    ref.step(batch, prm, plan2, spec.gamma(), spec.lambda());
    REQUIRE((st.w - ref.w).lpNorm<Eigen::Infinity>() <= 1e-8);
    REQUIRE((st.alpha - ref.alpha).lpNorm<Eigen::Infinity>() <= 1e-8);
    REQUIRE((st.w_bar - ref.w_bar).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
  CHECK(saw_duplicate);
}

TEST_CASE("caches and feasibility over many steps") {
  const auto ds = small_problem(40, 12, 8);
  const problem_spec spec(1.0, 0.01);
  for (int a : {1, 3, 6}) {
    const auto plan = build_uniform(ds.n(), a);
    const auto prm = schedule_thm5(ds, spec, plan);
    auto st = make_state(ds);
    rng gen(a);
    for (int t = 0; t < 1000; ++t) {
      adaspdc_step(st, prm, plan, ds, spec, gen);
      REQUIRE(dual_feasible(st.alpha, ds));
      if (t % 100 == 99) REQUIRE(cache_error(st, ds) <= 1e-9);
    }
    CHECK(cache_error(st, ds) <= 1e-9);
    CHECK(st.dual_updates == 1000u * a);
    CHECK(st.primal_updates == 1000u * ds.d());
  }
}

TEST_CASE("the optimum is (numerically) a fixed point") {
  const auto ds = small_problem(20, 5, 3);
  const problem_spec spec(1.0, 0.1);
  const auto ref = reference_run(ds, spec);
  REQUIRE(ref.converged);
  const auto plan = build_uniform(ds.n(), 1);
  const auto prm = schedule_thm5(ds, spec, plan);
  auto st = make_state(ds, ref.state.w, ref.state.alpha);
  rng gen(4);
  for (int t = 0; t < 200; ++t) adaspdc_step(st, prm, plan, ds, spec, gen);
  CHECK((st.w - ref.state.w).lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK((st.alpha - ref.state.alpha).lpNorm<Eigen::Infinity>() <= 1e-6);

  CHECK(delta_t(make_state(ds, ref.state.w, ref.state.alpha), ref.state.w, ref.state.alpha,
                prm, plan, ds, spec, 1) == 0.0);
  CHECK(delta_t(make_state(ds), ref.state.w, ref.state.alpha, prm, plan, ds, spec, 1) > 0.0);
}

TEST_CASE("vanilla step equals the adaptive step under a scalar sigma") {
  const auto ds = small_problem(30, 8, 2);
  const problem_spec spec(1.0, 0.02);
  const auto plan = build_uniform(ds.n(), 2);
  const auto prm = schedule_vanilla(ds, spec, plan, vanilla_scheme::cor18);
  auto s1 = make_state(ds), s2 = make_state(ds);
  rng g1(9), g2(9);
  for (int t = 0; t < 300; ++t) {
    vanilla_spdc_step(s1, prm, plan, ds, spec, g1);
    adaspdc_step(s2, prm, plan, ds, spec, g2);
  }
  CHECK(s1.w == s2.w);
  CHECK(s1.alpha == s2.alpha);
  CHECK_THROWS_AS(vanilla_spdc_step(s1, schedule_thm4(ds, spec, plan), plan, ds, spec, g1),
                  parameter_error);
}

TEST_CASE("single-block doubly stochastic step equals the vanilla step") {
  const auto ds = small_problem(30, 8, 6);
  const problem_spec spec(1.0, 0.02);
  const auto plan = build_uniform(ds.n(), 1);
  auto prm = schedule_vanilla(ds, spec, plan, vanilla_scheme::cor18);
  const auto cfg = make_dspdc_config(ds.d(), static_cast<int>(ds.d()));
  REQUIRE(cfg.blocks() == 1);
  auto s1 = make_state(ds), s2 = make_state(ds);
  rng g1(10), g2(10);
  for (int t = 0; t < 300; ++t) {
    dspdc_step(s1, prm, plan, cfg, ds, spec, g1);
    vanilla_spdc_step(s2, prm, plan, ds, spec, g2);
    cfg.q_alias.draw(g2);  // keep the streams aligned
  }
  CHECK(s1.w == s2.w);
  CHECK(s1.alpha == s2.alpha);
}

TEST_CASE("block steps touch only the drawn block") {
  const auto ds = small_problem(30, 9, 12);
  const problem_spec spec(1.0, 0.02);
  const auto plan = build_uniform(ds.n(), 1);
  const auto prm = schedule_vanilla(ds, spec, plan, vanilla_scheme::cor18);
  const auto cfg = make_dspdc_config(ds.d(), 3);
  auto st = make_state(ds);
  rng gen(1);
  for (int t = 0; t < 50; ++t) adaspdc_step(st, prm, plan, ds, spec, gen);
  std::vector<std::size_t> seen;
  step_probes probes;
  probes.on_primal = [&](std::size_t j, double, double, double, double tau) {
    seen.push_back(j);
    CHECK(tau == doctest::Approx(prm.tau * 3.0 / (cfg.q[0] * 9.0)).epsilon(1e-15));
  };
  dspdc_step(st, prm, plan, cfg, ds, spec, gen, &probes);
  REQUIRE(seen.size() == 3);
  CHECK(seen[0] % 3 == 0);
  CHECK(seen[1] == seen[0] + 1);
  CHECK(seen[2] == seen[0] + 2);
}

TEST_CASE("runs are deterministic and converge") {
  const auto ds = small_problem(50, 10, 4);
  const problem_spec spec(1.0, 0.01);
  const auto plan = build_uniform(ds.n(), 1);
  const auto prm = schedule_thm5(ds, spec, plan);
  rng g1(3), g2(3);
  const run_budget b{1e-8, 2000.0, false};
  const auto r1 = run_solver(ds, spec, base_algo::adaspdc, plan, prm, b, g1);
  const auto r2 = run_solver(ds, spec, base_algo::adaspdc, plan, prm, b, g2);
  CHECK(r1.converged);
  CHECK(r1.final.gap() <= 1e-8 * r1.p0);
  REQUIRE(r1.trace.size() == r2.trace.size());
  for (std::size_t c = 0; c < r1.trace.size(); ++c) {
    CHECK(r1.trace[c].primal == r2.trace[c].primal);
    CHECK(r1.trace[c].dual == r2.trace[c].dual);
    CHECK(r1.trace[c].seconds == 0.0);
  }
  CHECK(r1.trace.front().epoch == 0.0);
  CHECK(r1.trace[1].epoch == 1.0);
}

TEST_CASE("two hand-computed iterations with extrapolation") {
  // Rows (1, 0) and (0, 2), uniform p, a = 1, gamma = lambda = 1.
  const auto ds = sparse_dataset::from_dense(Eigen::MatrixXd{{1.0, 0.0}, {0.0, 2.0}},
                                             Eigen::VectorXd{{1.0, -1.0}});
  const problem_spec spec(1.0, 1.0);
  const auto plan = build_uniform(2, 1);
  step_params prm;
  prm.tau = 1.0;
  prm.sigma = Eigen::VectorXd::Constant(2, 1.0);
  prm.theta = 0.5;
  auto st = make_state(ds);
  // q = p n / sigma = 1, beta = (y - s + alpha) / 2 clipped.
  apply_step(st, std::vector<std::size_t>{1}, prm, plan, ds, spec);
  CHECK(st.alpha[1] == -0.5);
  CHECK(st.alpha_bar[1] == -1.0);
  CHECK(st.u[1] == -0.5);
  CHECK(st.u_bar[1] == -1.0);
  // w_1 = soft(-1, 1) / 2 = 0
  CHECK(st.w[1] == 0.0);
  apply_step(st, std::vector<std::size_t>{1}, prm, plan, ds, spec);
  // alpha_bar resets to alpha before the new draw.
  CHECK(st.alpha[1] == -0.75);
  CHECK(st.alpha_bar[1] == -1.0);
  CHECK(st.u_bar[1] == -1.0);
  apply_step(st, std::vector<std::size_t>{1, 1}, prm, plan, ds, spec);
  // Sequential duplicates: -0.875 then -0.9375, alpha_bar = -0.75 - 0.25 - 0.125.
  CHECK(st.alpha[1] == -0.9375);
  CHECK(st.alpha_bar[1] == -1.125);
  CHECK(st.u_bar[1] == -1.125);
  // w_1 = soft(-1.125, 1) / 2
  CHECK(st.w[1] == -0.0625);
  CHECK(st.w_bar[1] == -0.09375);
  CHECK(st.w[0] == 0.0);
}
