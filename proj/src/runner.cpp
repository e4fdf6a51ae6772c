#include "spdc/runner.hpp"

#include "spdc/error.hpp"
#include "spdc/variants.hpp"

#include <json.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace spdc {

namespace {

const char* const algos[] = {"spdc", "adaspdc", "dspdc", "ovsspdc", "ovs-exact",
                             "ovsspdc-plus", "ovsspdc-plusplus"};
const char* const probs[] = {"uniform", "cor16", "cor17", "ovs"};

template <std::size_t N>
bool one_of(const std::string& s, const char* const (&set)[N]) {
  for (const char* v : set)
    if (s == v) return true;
  return false;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Eigen::VectorXd parse_list(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double v;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw parameter_error("bad number '" + tok + "' in list '" + s + "'");
    vals.push_back(v);
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

variant_config variant_of(const run_config& c) {
  variant_config v;
  v.refresh_every = c.refresh_every;
  if (c.gap_check == "end_of_inner") {
    v.gap_check = gap_check_mode::end_of_inner;
  } else if (c.gap_check.rfind("every:", 0) == 0) {
    v.gap_check = gap_check_mode::every_k;
    const std::string k = c.gap_check.substr(6);
    auto [ptr, ec] = std::from_chars(k.data(), k.data() + k.size(), v.gap_check_k);
    if (ec != std::errc() || ptr != k.data() + k.size() || v.gap_check_k == 0)
      throw parameter_error("gap-check must be end_of_inner or every:K with K >= 1");
  } else {
    throw parameter_error("gap-check must be end_of_inner or every:K with K >= 1");
  }
  return v;
}

void validate(const run_config& c) {
  if (!one_of(c.algo, algos)) throw parameter_error("unknown algo '" + c.algo + "'");
  if (!one_of(c.prob, probs)) throw parameter_error("unknown prob '" + c.prob + "'");
  if (c.schedule != "auto") parse_schedule(c.schedule);
  if (c.a < 1) throw parameter_error("a must be at least 1");
  if (!(c.lambda_scale > 0.0)) throw parameter_error("lambda-scale must be positive");
  if (!(c.gamma > 0.0)) throw parameter_error("gamma must be positive");
  if (!(c.gap_tol > 0.0)) throw parameter_error("gap-tol must be positive");
  if (!(c.max_epochs > 0.0)) throw parameter_error("max-epochs must be positive");
  if (c.b < 0) throw parameter_error("b must be nonnegative");

  const bool base = c.algo == "spdc" || c.algo == "adaspdc" || c.algo == "dspdc";
  if (c.prob == "ovs" && c.algo != "ovsspdc")
    throw parameter_error("prob=ovs is only available with algo=ovsspdc");
  if (!base && c.prob != "uniform" && !(c.algo == "ovsspdc" && c.prob == "ovs"))
    throw parameter_error("algo=" + c.algo + " chooses its own sampling; prob must be uniform");
  if (c.algo == "ovsspdc" && c.schedule != "auto" && c.schedule != "thm5")
    throw parameter_error("algo=ovsspdc uses the thm5 schedule");
  if (!base && c.algo != "ovsspdc" && c.schedule != "auto")
    throw parameter_error("algo=" + c.algo + " chooses its own schedule; use schedule=auto");
  if ((c.algo == "spdc" || c.algo == "dspdc") && c.schedule != "auto" &&
      c.schedule != "cor18" && c.schedule != "cor19")
    throw parameter_error("algo=" + c.algo + " needs a scalar-sigma schedule (cor18 or cor19)");
  if (c.algo == "ovs-exact" && c.a != 1) throw parameter_error("algo=ovs-exact requires a = 1");
  if ((c.prob == "cor16" || c.prob == "cor17") && c.a != 1)
    throw parameter_error("prob=" + c.prob + " requires a = 1");
  if (c.algo != "dspdc" && (c.b != 0 || !c.q.empty()))
    throw parameter_error("b and q apply to algo=dspdc only");
  variant_of(c);
}

schedule_kind auto_schedule(const run_config& c, const sampling_plan& plan, std::size_t n) {
  const bool small = static_cast<double>(c.a) * c.a <= static_cast<double>(n);
  if (c.algo == "spdc" || c.algo == "dspdc") {
    if (c.prob == "cor16" || !small) return schedule_kind::cor18;
    return schedule_kind::cor19;
  }
  if (c.prob == "cor16") return schedule_kind::thm4;
  if (small) return schedule_kind::thm5;
  if (plan.kind != plan_kind::uniform)
    throw schedule_error("non-uniform sampling with a > sqrt(n) has no automatic schedule");
  return schedule_kind::thm15;
}

}  // namespace

run_outcome run(const run_config& config, const sparse_dataset* preloaded) {
  validate(config);
  sparse_dataset loaded;
  if (!preloaded) {
    if (config.data.empty()) throw parameter_error("no dataset given");
    loaded = load_libsvm(config.data, config.normalize);
    preloaded = &loaded;
  }
  const sparse_dataset& ds = *preloaded;
  if (static_cast<std::size_t>(config.a) > ds.n())
    throw parameter_error("a = " + std::to_string(config.a) + " exceeds n = " +
                          std::to_string(ds.n()));

  run_outcome out;
  out.config = config;
  out.n = ds.n();
  out.d = ds.d();
  out.lambda_max = lambda_max(ds);
  if (config.lambda_gamma_n > 0.0)
    out.lambda = config.lambda_gamma_n / (config.gamma * static_cast<double>(ds.n()));
  else if (config.lambda > 0.0)
    out.lambda = config.lambda;
  else
    out.lambda = config.lambda_scale * out.lambda_max;
  out.lambda_gamma_n = out.lambda * config.gamma * static_cast<double>(ds.n());
  const problem_spec spec(config.gamma, out.lambda);
  const run_budget budget{config.gap_tol, config.max_epochs, config.wall_clock};
  const variant_config vcfg = variant_of(config);
  rng gen(config.seed);
  const int a = config.a;
  const std::string& algo = config.algo;

  std::optional<dspdc_config> blocks;
  schedule_kind kind;
  if (algo == "spdc" || algo == "adaspdc" || algo == "dspdc") {
    if (config.prob == "uniform")
      out.initial_plan = build_uniform(ds.n(), a);
    else
      out.initial_plan = build_data_driven(
          ds, spec, a, config.prob == "cor16" ? data_scheme::cor16 : data_scheme::cor17);
    kind = config.schedule == "auto" ? auto_schedule(config, out.initial_plan, ds.n())
                                     : parse_schedule(config.schedule);
    out.initial_params = make_schedule(kind, ds, spec, out.initial_plan);
    if (algo == "dspdc") {
      blocks = make_dspdc_config(ds.d(), config.b == 0 ? static_cast<int>(ds.d()) : config.b,
                                 config.q.empty() ? Eigen::VectorXd() : parse_list(config.q));
      out.initial_params.theta =
          dspdc_theta(out.initial_params, out.initial_plan, *blocks, spec, ds.n());
      const auto t20 =
          verify_thm20(out.initial_params, out.initial_plan, *blocks, ds, spec, a);
      out.conditions.has_thm20 = true;
      out.conditions.thm20_ok = t20.ok;
      out.conditions.thm20_first_failing = t20.first_failing;
      if (!t20.ok)
        throw schedule_error("dspdc step sizes violate convergence condition " +
                             std::to_string(t20.first_failing) + " of 5");
    }
  } else if (algo == "ovsspdc" || algo == "ovs-exact") {
    if (algo == "ovsspdc" && static_cast<double>(a) * a > static_cast<double>(ds.n()))
      throw schedule_error("ovsspdc requires a <= sqrt(n); got a = " + std::to_string(a) +
                           ", n = " + std::to_string(ds.n()));
    kind = schedule_kind::thm5;
    out.initial_plan = build_uniform(ds.n(), a);
    out.initial_params = schedule_thm5(ds, spec, out.initial_plan);
  } else {
    kind = schedule_kind::thm15;
    out.initial_plan = build_uniform(ds.n(), static_cast<int>(ds.n()));
    out.initial_params = schedule_thm15(ds, spec, out.initial_plan);
  }
  out.schedule = std::string(to_string(kind));

  const int plan_a = out.initial_plan.a;
  const auto l3 = verify_lemma3(out.initial_params, out.initial_plan, ds, plan_a);
  const auto l14 = verify_lemma14(out.initial_params, out.initial_plan, ds, plan_a);
  out.conditions.lemma3_ok = l3.ok;
  out.conditions.lemma3_margin = l3.worst_margin;
  out.conditions.lemma14_ok = l14.ok;
  out.conditions.lemma14_first_ok = l14.first.ok;
  out.conditions.lemma14_second_ok = l14.second.ok;
  out.complexity = complexity_estimate(ds, spec, out.initial_plan, plan_a, kind);

  if (algo == "adaspdc")
    out.result = run_solver(ds, spec, base_algo::adaspdc, out.initial_plan,
                            out.initial_params, budget, gen);
  else if (algo == "spdc")
    out.result = run_solver(ds, spec, base_algo::spdc, out.initial_plan, out.initial_params,
                            budget, gen);
  else if (algo == "dspdc")
    out.result = run_solver(ds, spec, base_algo::dspdc, out.initial_plan, out.initial_params,
                            budget, gen, &*blocks);
  else if (algo == "ovsspdc")
    out.result = run_ovsspdc(ds, spec, a, vcfg, budget, gen);
  else if (algo == "ovs-exact")
    out.result = run_ovs_exact(ds, spec, vcfg, budget, gen);
  else if (algo == "ovsspdc-plus")
    out.result = run_ovsspdc_plus(ds, spec, a, vcfg, budget, gen);
  else
    out.result = run_ovsspdc_plusplus(ds, spec, a, vcfg, budget, gen);

  if (!config.trace.empty()) {
    std::ofstream f(config.trace, std::ios::binary);
    if (!f) throw validation_error("cannot write trace file '" + config.trace + "'");
    write_trace_csv(f, out.result.trace);
  }
  if (!config.summary.empty()) {
    std::ofstream f(config.summary, std::ios::binary);
    if (!f) throw validation_error("cannot write summary file '" + config.summary + "'");
    f << summary_json(out) << '\n';
  }
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<trace_record>& trace) {
  out << "checkpoint,epoch,seconds,primal,dual,gap,nnz_w,zero_kappa\n";
  for (const auto& r : trace)
    out << r.checkpoint << ',' << fmt(r.epoch) << ',' << fmt(r.seconds) << ','
        << fmt(r.primal) << ',' << fmt(r.dual) << ',' << fmt(r.gap) << ',' << r.nnz_w << ','
        << r.zero_kappa << '\n';
}

std::string summary_json(const run_outcome& o) {
  nlohmann::ordered_json j;
  const auto& c = o.config;
  const auto& r = o.result;
  j["algo"] = c.algo;
  j["prob"] = c.prob;
  j["schedule"] = o.schedule;
  j["a"] = c.a;
  j["n"] = o.n;
  j["d"] = o.d;
  j["gamma"] = c.gamma;
  j["lambda"] = o.lambda;
  j["lambda_max"] = o.lambda_max;
  j["lambda_scale"] = o.lambda / o.lambda_max;
  j["lambda_gamma_n"] = o.lambda_gamma_n;
  j["seed"] = c.seed;
  j["gap_tol"] = c.gap_tol;
  j["converged"] = r.converged;
  j["optimal"] = r.optimal;
  j["final_primal"] = r.final.primal;
  j["final_dual"] = r.final.dual;
  j["final_gap"] = r.final.gap();
  j["relative_gap"] = r.final.gap() / r.p0;
  j["epochs"] = r.epochs;
  j["iterations"] = r.state.iter;
  j["seconds"] = r.seconds;
  j["checkpoints"] = r.trace.size();
  j["tau"] = o.initial_params.tau;
  j["sigma_min"] = o.initial_params.sigma_min(o.initial_plan);
  j["sigma_max"] = o.initial_params.sigma_max(o.initial_plan);
  j["theta"] = o.initial_params.theta;
  j["complexity_estimate"] = o.complexity;
  nlohmann::ordered_json cond;
  cond["lemma3"] = {{"ok", o.conditions.lemma3_ok}, {"worst_margin", o.conditions.lemma3_margin}};
  cond["lemma14"] = {{"ok", o.conditions.lemma14_ok},
                     {"first_ok", o.conditions.lemma14_first_ok},
                     {"second_ok", o.conditions.lemma14_second_ok}};
  if (o.conditions.has_thm20)
    cond["thm20"] = {{"ok", o.conditions.thm20_ok},
                     {"first_failing", o.conditions.thm20_first_failing}};
  else
    cond["thm20"] = nullptr;
  j["conditions"] = cond;
  return j.dump(2);
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const schedule_error*>(&e)) return 3;
  if (dynamic_cast<const numerical_error*>(&e)) return 4;
  return 2;
}

std::vector<sweep_row> sweep(const std::vector<run_config>& configs, unsigned jobs) {
  std::vector<sweep_row> rows(configs.size());
  if (configs.empty()) return rows;
  for (const auto& c : configs)
    if (c.data != configs.front().data || c.normalize != configs.front().normalize)
      throw parameter_error("all sweep runs must share one dataset");
  if (configs.front().data.empty()) throw parameter_error("no dataset given");
  const sparse_dataset ds = load_libsvm(configs.front().data, configs.front().normalize);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      rows[k].config = configs[k];
      try {
        rows[k].outcome = run(configs[k], &ds);
      } catch (const std::exception& e) {
        rows[k].status = exit_code_for(e);
        rows[k].message = e.what();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<sweep_row>& rows) {
  out << "algo,prob,a,lambda_scale,lambda,lambda_gamma_n,n,status,converged,epochs,"
         "iterations,iterations_times_a,final_gap,relative_gap,seconds,message\n";
  for (const auto& row : rows) {
    const auto& c = row.config;
    const auto& o = row.outcome;
    out << c.algo << ',' << c.prob << ',' << c.a << ',';
    if (row.status != 0) {
      std::string msg = row.message;
      for (char& ch : msg)
        if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
      out << fmt(c.lambda_scale) << ",,,," << row.status << ",,,,,,,," << msg << '\n';
      continue;
    }
    const auto& r = o.result;
    out << fmt(o.lambda / o.lambda_max) << ',' << fmt(o.lambda) << ','
        << fmt(o.lambda_gamma_n) << ',' << o.n << ",0,"
        << (r.converged ? 1 : 0) << ',' << fmt(r.epochs) << ',' << r.state.iter << ','
        << r.state.iter * static_cast<std::uint64_t>(c.a) << ',' << fmt(r.final.gap()) << ','
        << fmt(r.final.gap() / r.p0) << ',' << fmt(r.seconds) << ",\n";
  }
}

}  // namespace spdc
