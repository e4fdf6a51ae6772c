#include "spdc/error.hpp"
#include "spdc/synth.hpp"
#include "spdc/variants.hpp"

#include <doctest.h>

#include <cmath>

using namespace spdc;

namespace {

sparse_dataset skewed(std::size_t n, std::size_t d, double skew, std::uint64_t seed) {
  synth_options so;
  so.n = n;
  so.d = d;
  so.dual_skew = skew;
  so.seed = seed;
  return synth(so).normalized();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("violation-based sampling refreshes on schedule") {
  const auto ds = skewed(100, 10, 0.5, 1);
  const problem_spec spec(1.0, 0.01 * lambda_max(ds));
  variant_config cfg;
  cfg.refresh_every = 7;
  rng gen(1);
  const auto r = run_ovsspdc(ds, spec, 2, cfg, {1e-20, 3.0, false}, gen);
  const auto iters = r.state.iter;
  CHECK(r.refreshes >= 3 * 100 / 2 / 7 - 1);
  CHECK(r.uniform_fallbacks == 0);
  CHECK(iters <= 150);
  CHECK_THROWS_AS(run_ovsspdc(ds, spec, 11, cfg, {}, gen), schedule_error);
}

TEST_CASE("restricted variants: acceptance and support") {
  const auto ds = skewed(80, 10, 0.7, 2);
  const problem_spec spec(1.0, 0.01 * lambda_max(ds));
  for (bool plusplus : {false, true}) {
    for (int a : {1, 4}) {
      rng gen(3);
      const run_budget b{1e-9, 400.0, false};
      const auto r = plusplus ? run_ovsspdc_plusplus(ds, spec, a, {}, b, gen)
                              : run_ovsspdc_plus(ds, spec, a, {}, b, gen);
      CHECK(r.converged);
      CHECK(r.draws_outside_support == 0);
      REQUIRE_FALSE(r.committed_gaps.empty());
      for (std::size_t k = 1; k < r.committed_gaps.size(); ++k)
        REQUIRE(r.committed_gaps[k] < r.committed_gaps[k - 1]);
    }
  }
}

TEST_CASE("per-iteration gap checks") {
  const auto ds = skewed(60, 8, 0.6, 5);
  const problem_spec spec(1.0, 0.01 * lambda_max(ds));
  variant_config cfg;
  cfg.gap_check = gap_check_mode::every_k;
  cfg.gap_check_k = 1;
  rng gen(8);
  const auto r = run_ovsspdc_plus(ds, spec, 2, cfg, {1e-8, 400.0, false}, gen);
  CHECK(r.converged);
  for (std::size_t k = 1; k < r.committed_gaps.size(); ++k)
    REQUIRE(r.committed_gaps[k] < r.committed_gaps[k - 1]);
}

TEST_CASE("primal masking is inert when every coordinate is active") {
  const auto ds = skewed(50, 8, 0.5, 4);
  const problem_spec spec(1.0, 0.05 * lambda_max(ds));
  variant_config cfg;
  cfg.zero_threshold = -1.0;
  rng g1(6), g2(6);
  const run_budget b{1e-8, 60.0, false};
  const auto p = run_ovsspdc_plus(ds, spec, 2, cfg, b, g1);
  const auto pp = run_ovsspdc_plusplus(ds, spec, 2, cfg, b, g2);
  CHECK(p.state.w == pp.state.w);
  CHECK(p.state.alpha == pp.state.alpha);
  CHECK(p.trace.size() == pp.trace.size());
}

TEST_CASE("primal masking saves primal writes on sparse solutions") {
  const auto ds = skewed(120, 40, 0.7, 9);
  const problem_spec spec(1.0, 0.1 * lambda_max(ds));
  rng g1(2), g2(2);
  const run_budget b{1e-8, 400.0, false};
  const auto p = run_ovsspdc_plus(ds, spec, 1, {}, b, g1);
  const auto pp = run_ovsspdc_plusplus(ds, spec, 1, {}, b, g2);
  REQUIRE(p.converged);
  REQUIRE(pp.converged);
  CHECK(pp.state.primal_updates < p.state.primal_updates);
  CHECK(rel(p.final.primal, pp.final.primal) < 1e-6);
}

TEST_CASE("exact violation sampling converges tightly") {
  const auto ds = skewed(20, 5, 0.5, 7);
  const problem_spec spec(1.0, 0.05 * lambda_max(ds));
  rng gen(1);
  const auto r = run_ovs_exact(ds, spec, {}, {1e-10, 5000.0, false}, gen);
  CHECK(r.converged);
  CHECK(r.final.gap() <= 1e-10 * r.p0);
  CHECK(r.draws_outside_support == 0);
}

TEST_CASE("all variants reach the same optimum") {
  const auto ds = skewed(100, 20, 0.6, 11);
  const problem_spec spec(1.0, 0.005 * lambda_max(ds));
  const run_budget b{1e-9, 3000.0, false};
  std::vector<double> primal;
  {
    rng gen(1);
    const auto plan = build_uniform(ds.n(), 1);
    const auto r = run_solver(ds, spec, base_algo::adaspdc, plan,
                              schedule_thm5(ds, spec, plan), b, gen);
    REQUIRE(r.converged);
    primal.push_back(r.final.primal);
  }
  rng g(2);
  for (const auto& r : {run_ovsspdc(ds, spec, 3, {}, b, g), run_ovs_exact(ds, spec, {}, b, g),
                        run_ovsspdc_plus(ds, spec, 3, {}, b, g),
                        run_ovsspdc_plusplus(ds, spec, 3, {}, b, g)}) {
    CHECK(r.converged);
    primal.push_back(r.final.primal);
  }
  for (double v : primal) CHECK(rel(v, primal[0]) < 1e-6);
}
