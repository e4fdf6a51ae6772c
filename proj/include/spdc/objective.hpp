#ifndef SPDC_OBJECTIVE_HPP_
#define SPDC_OBJECTIVE_HPP_

#include "spdc/datamat.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>

namespace spdc {

enum class loss_kind { smoothed_hinge };
enum class penalty_kind { elastic_net };

// min_w (1/n) sum_i f_i(x_i^T w) + lambda g(w), with f_i the smoothed hinge
// (1/gamma-smooth) and g(w) = ||w||_1 + ||w||^2/2.
class problem_spec {
 public:
  problem_spec(double gamma, double lambda);

  double gamma() const noexcept { return gamma_; }
  double lambda() const noexcept { return lambda_; }
  loss_kind loss() const noexcept { return loss_kind::smoothed_hinge; }
  penalty_kind penalty() const noexcept { return penalty_kind::elastic_net; }

 private:
  double gamma_;
  double lambda_;
};

inline constexpr double infinity = std::numeric_limits<double>::infinity();

// The quadratic branch owns both region boundaries (y z = 1 and y z = 1 - gamma).
double smoothed_hinge(double z, double y, double gamma) noexcept;
double smoothed_hinge_grad(double z, double y, double gamma) noexcept;
// f*(u) = gamma/2 u^2 + y u for y u in [-1, 0], +inf otherwise.
double smoothed_hinge_conj(double u, double y, double gamma) noexcept;

double elastic_net(const Eigen::VectorXd& w) noexcept;
// Coordinate value of g*(v) = 1/2 sum_j max(|v_j| - 1, 0)^2.
double elastic_net_conj(double v) noexcept;
double elastic_net_conj(const Eigen::VectorXd& v) noexcept;
// d/dv of the coordinate conjugate: sign(v) max(|v| - 1, 0).
double elastic_net_conj_grad(double v) noexcept;

// sign(s) max(|s| - threshold, 0)
inline double soft_threshold(double s, double threshold) noexcept {
  if (s > threshold) return s - threshold;
  if (s < -threshold) return s + threshold;
  return 0.0;
}

// argmax_beta { -beta s - f*(-beta) - q/2 (beta - alpha_old)^2 } where
// s = <x_i, w_bar> and q = p_i n / sigma_i. When the dual violation at s is
// exactly zero the maximizer is alpha_old, which is returned bit-for-bit.
double dual_prox(double s, double alpha_old, double q, double y, double gamma);

// argmin_w { lambda g(w) - u w + (w - w_old)^2 / (2 tau) } where
// u = (1/n) <X_:j, alpha_bar>. When w_old already equals grad g*(u / lambda)
// the minimizer is w_old, which is returned bit-for-bit.
double primal_prox(double u, double w_old, double tau, double lambda);

double primal_objective(const Eigen::VectorXd& w, const sparse_dataset& ds,
                        const problem_spec& spec);
// Returns -inf when some y_i alpha_i lies outside [0, 1].
double dual_objective(const Eigen::VectorXd& alpha, const sparse_dataset& ds,
                      const problem_spec& spec);
// Returns +inf when alpha is dual-infeasible.
double duality_gap(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha,
                   const sparse_dataset& ds, const problem_spec& spec);

// Both objectives from one pass over the data.
struct objective_values {
  double primal;
  double dual;
  double gap() const noexcept { return primal - dual; }
};
objective_values evaluate(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha,
                          const sparse_dataset& ds, const problem_spec& spec);

bool dual_feasible(const Eigen::VectorXd& alpha, const sparse_dataset& ds) noexcept;

// kappa_i = |-alpha_i - f_i'(x_i^T w)|
Eigen::VectorXd dual_violations(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha,
                                const sparse_dataset& ds, const problem_spec& spec);
// Same quantity from precomputed margins x_i^T w (e.g. against w_bar).
Eigen::VectorXd dual_violations_from_margins(const Eigen::VectorXd& margins,
                                             const Eigen::VectorXd& alpha,
                                             const sparse_dataset& ds,
                                             const problem_spec& spec);
inline double dual_violation(double margin, double alpha, double y, double gamma) noexcept {
  return std::abs(-alpha - smoothed_hinge_grad(margin, y, gamma));
}

// psi_j = |w_j - grad g_j*((1/(lambda n)) X_:j^T alpha)|
Eigen::VectorXd primal_violations(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha,
                                  const sparse_dataset& ds, const problem_spec& spec);
// Same quantity from a precomputed u = (1/n) X^T alpha.
Eigen::VectorXd primal_violations_from_u(const Eigen::VectorXd& w, const Eigen::VectorXd& u,
                                         const problem_spec& spec);
inline double primal_violation(double w, double u, double lambda) noexcept {
  return std::abs(w - elastic_net_conj_grad(u / lambda));
}

struct violation_vector {
  Eigen::VectorXd kappa;
  Eigen::VectorXd psi;
  std::uint64_t stamp = 0;
};

}  // namespace spdc

#endif  // SPDC_OBJECTIVE_HPP_
