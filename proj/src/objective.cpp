#include "spdc/objective.hpp"

#include "spdc/error.hpp"

#include <cmath>
#include <string>

namespace spdc {

problem_spec::problem_spec(double gamma, double lambda) : gamma_(gamma), lambda_(lambda) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw parameter_error("gamma must be positive, got " + std::to_string(gamma));
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw parameter_error("lambda must be positive, got " + std::to_string(lambda));
}

double smoothed_hinge(double z, double y, double gamma) noexcept {
  const double m = y * z;
  if (m > 1.0) return 0.0;
  if (m < 1.0 - gamma) return 1.0 - m - 0.5 * gamma;
  const double r = 1.0 - m;
  return r * r / (2.0 * gamma);
}

double smoothed_hinge_grad(double z, double y, double gamma) noexcept {
  const double m = y * z;
  if (m > 1.0) return 0.0;
  if (m < 1.0 - gamma) return -y;
  return -y * (1.0 - m) / gamma;
}

double smoothed_hinge_conj(double u, double y, double gamma) noexcept {
  const double yu = y * u;
  if (yu < -1.0 || yu > 0.0) return infinity;
  return 0.5 * gamma * u * u + y * u;
}

double elastic_net(const Eigen::VectorXd& w) noexcept {
  return w.lpNorm<1>() + 0.5 * w.squaredNorm();
}

double elastic_net_conj(double v) noexcept {
  const double e = std::abs(v) - 1.0;
  return e > 0.0 ? 0.5 * e * e : 0.0;
}

double elastic_net_conj(const Eigen::VectorXd& v) noexcept {
  double s = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) s += elastic_net_conj(v[j]);
  return s;
}

double elastic_net_conj_grad(double v) noexcept { return soft_threshold(v, 1.0); }

double dual_prox(double s, double alpha_old, double q, double y, double gamma) {
  if (!(q > 0.0)) throw parameter_error("dual_prox: q = p_i n / sigma_i must be positive");
  if (dual_violation(s, alpha_old, y, gamma) == 0.0) return alpha_old;
  const double beta = (y - s + q * alpha_old) / (gamma + q);
  double yb = y * beta;
  if (yb < 0.0) yb = 0.0;
  if (yb > 1.0) yb = 1.0;
  return y * yb;
}

double primal_prox(double u, double w_old, double tau, double lambda) {
  if (!(tau > 0.0)) throw parameter_error("primal_prox: tau must be positive");
  if (!(lambda > 0.0)) throw parameter_error("primal_prox: lambda must be positive");
  if (w_old == elastic_net_conj_grad(u / lambda)) return w_old;
  const double inv_tau = 1.0 / tau;
  return soft_threshold(u + w_old * inv_tau, lambda) / (lambda + inv_tau);
}

bool dual_feasible(const Eigen::VectorXd& alpha, const sparse_dataset& ds) noexcept {
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double ya = ds.label(i) * alpha[i];
    if (!(ya >= 0.0 && ya <= 1.0)) return false;
  }
  return true;
}

namespace {

void check_dims(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha,
                const sparse_dataset& ds) {
  if (static_cast<std::size_t>(w.size()) != ds.d())
    throw validation_error("primal vector has dimension " + std::to_string(w.size()) +
                           ", expected " + std::to_string(ds.d()));
  if (static_cast<std::size_t>(alpha.size()) != ds.n())
    throw validation_error("dual vector has dimension " + std::to_string(alpha.size()) +
                           ", expected " + std::to_string(ds.n()));
}

double loss_sum(const Eigen::VectorXd& w, const sparse_dataset& ds, double gamma) {
  double s = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i)
    s += smoothed_hinge(ds.row(i).dot(w), ds.label(i), gamma);
  return s;
}

double conj_loss_sum(const Eigen::VectorXd& alpha, const sparse_dataset& ds, double gamma) {
  double s = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double v = smoothed_hinge_conj(-alpha[i], ds.label(i), gamma);
    if (v == infinity) return infinity;
    s += v;
  }
  return s;
}

}  // namespace

double primal_objective(const Eigen::VectorXd& w, const sparse_dataset& ds,
                        const problem_spec& spec) {
  if (static_cast<std::size_t>(w.size()) != ds.d())
    throw validation_error("primal vector has dimension " + std::to_string(w.size()) +
                           ", expected " + std::to_string(ds.d()));
  return loss_sum(w, ds, spec.gamma()) / static_cast<double>(ds.n()) +
         spec.lambda() * elastic_net(w);
}

double dual_objective(const Eigen::VectorXd& alpha, const sparse_dataset& ds,
                      const problem_spec& spec) {
  if (static_cast<std::size_t>(alpha.size()) != ds.n())
    throw validation_error("dual vector has dimension " + std::to_string(alpha.size()) +
                           ", expected " + std::to_string(ds.n()));
  const double conj = conj_loss_sum(alpha, ds, spec.gamma());
  if (conj == infinity) return -infinity;
  const double n = static_cast<double>(ds.n());
  const Eigen::VectorXd v = ds.multiply_transpose(alpha) / (spec.lambda() * n);
  return -conj / n - spec.lambda() * elastic_net_conj(v);
}

double duality_gap(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha,
                   const sparse_dataset& ds, const problem_spec& spec) {
  return evaluate(w, alpha, ds, spec).gap();
}

objective_values evaluate(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha,
                          const sparse_dataset& ds, const problem_spec& spec) {
  check_dims(w, alpha, ds);
  return {primal_objective(w, ds, spec), dual_objective(alpha, ds, spec)};
}

Eigen::VectorXd dual_violations(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha,
                                const sparse_dataset& ds, const problem_spec& spec) {
  check_dims(w, alpha, ds);
  return dual_violations_from_margins(ds.multiply(w), alpha, ds, spec);
}

Eigen::VectorXd dual_violations_from_margins(const Eigen::VectorXd& margins,
                                             const Eigen::VectorXd& alpha,
                                             const sparse_dataset& ds,
                                             const problem_spec& spec) {
  Eigen::VectorXd kappa(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i)
    kappa[i] = dual_violation(margins[i], alpha[i], ds.label(i), spec.gamma());
  return kappa;
}

Eigen::VectorXd primal_violations(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha,
                                  const sparse_dataset& ds, const problem_spec& spec) {
  check_dims(w, alpha, ds);
  const Eigen::VectorXd u = ds.multiply_transpose(alpha) / static_cast<double>(ds.n());
  return primal_violations_from_u(w, u, spec);
}

Eigen::VectorXd primal_violations_from_u(const Eigen::VectorXd& w, const Eigen::VectorXd& u,
                                         const problem_spec& spec) {
  Eigen::VectorXd psi(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j)
    psi[j] = primal_violation(w[j], u[j], spec.lambda());
  return psi;
}

}  // namespace spdc
