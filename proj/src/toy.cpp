#include "dualflow/toy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dualflow/dual_core.hpp"

namespace dualflow {

Vec2 toy_residual(const Vec2& u, double c) {
  const double cross = (u[0] - c) * (u[1] - c);
  return {cross - (u[0] - c), cross - (u[1] - c)};
}

Vec2 toy_dtp(const Vec2& d, const Vec2& vbar, double c) {
  const double sigma = d[0] + d[1];
  if (std::abs(std::abs(sigma) - 1.0) < 1e-12) {
    DtPZoneReport rep;
    rep.min_margin = 1.0 - std::abs(sigma);
    rep.violating_fraction = 1.0;
    throw ZoneExitError(rep);
  }
  // (u2-c)*sigma - d1 - (u1-vbar1) = 0 and the index-swapped twin
  const double rhs1 = d[0] - vbar[0] + c * sigma;
  const double rhs2 = d[1] - vbar[1] + c * sigma;
  const double u2 = (rhs2 + sigma * rhs1) / (sigma * sigma - 1.0);
  const double u1 = sigma * u2 - rhs1;
  return {u1, u2};
}

double toy_objective(const Vec2& d, const Vec2& vbar, double c) {
  const double sigma = d[0] + d[1];
  if (std::abs(sigma) >= 1.0) {
    DtPZoneReport rep;
    rep.min_margin = 1.0 - std::abs(sigma);
    rep.violating_fraction = 1.0;
    throw ZoneExitError(rep);
  }
  const double w1 = d[0] - vbar[0] + c;
  const double w2 = d[1] - vbar[1] + c;
  const double quad =
      (w1 * w1 + w2 * w2 + 2.0 * sigma * w1 * w2) / (1.0 - sigma * sigma);
  const double b1 = c - vbar[0];
  const double b2 = c - vbar[1];
  return 0.5 * quad - 0.5 * (b1 * b1 + b2 * b2);
}

Vec2 toy_gradient(const Vec2& d, const Vec2& vbar, double c) {
  return toy_residual(toy_dtp(d, vbar, c), c);
}

double toy_reduced_rhs(double d, double c_eff) {
  const double den = 2.0 * d - 1.0;
  if (std::abs(den) < 1e-14) {
    throw std::invalid_argument("toy_reduced_rhs: singular denominator");
  }
  const double g = (c_eff + d) / den;
  return g - g * g;
}

double toy_implicit_solution(double d_tilde, double c_tilde) {
  if (c_tilde <= 0.0 || d_tilde <= -2.0 || d_tilde >= 0.0 ||
      d_tilde == c_tilde || d_tilde == -c_tilde) {
    throw std::invalid_argument("toy_implicit_solution: out of regime");
  }
  const auto term = [c_tilde](double dt) {
    return 2.0 * dt + c_tilde * std::log(std::abs((c_tilde - dt) / (c_tilde + dt)));
  };
  return term(d_tilde) - term(-1.0);
}

double toy_attractor(double c_eff) {
  if (std::abs(2.0 * c_eff + 1.0) >= 2.0) {
    throw std::invalid_argument("toy_attractor: outside the equilibration regime");
  }
  return 0.5 - std::abs(c_eff + 0.5);
}

double toy_switch_time(double c_tilde) {
  if (c_tilde < 2.0) {
    throw std::invalid_argument("toy_switch_time: requires c_tilde >= 2");
  }
  if (c_tilde == 2.0) return std::numeric_limits<double>::infinity();
  return -2.0 + c_tilde * std::log((c_tilde + 2.0) / (c_tilde - 2.0)) -
         c_tilde * std::log((c_tilde + 1.0) / (c_tilde - 1.0));
}

double toy_base_recursion(double v_k, double d_star, double c) {
  const double den = 2.0 * d_star - 1.0;
  if (std::abs(den) < 1e-14) {
    throw std::invalid_argument("toy_base_recursion: singular denominator");
  }
  return (c - v_k + d_star) / den + c;
}

double toy_base_asymptote(int k, double c) {
  return (c + 0.5) * (1.0 - std::pow(2.0, 1 - k));
}

double ToyFlowProblem::objective(const std::vector<double>& a) const {
  return toy_objective({a[0], a[1]}, vbar_, c_);
}

std::vector<double> ToyFlowProblem::gradient(const std::vector<double>& a) const {
  const double margin = min_zone_margin(a);
  if (margin <= eps_zone_) {
    DtPZoneReport rep;
    rep.min_margin = margin;
    rep.violating_fraction = 1.0;
    rep.eps_zone = eps_zone_;
    throw ZoneExitError(rep);
  }
  const Vec2 g = toy_gradient({a[0], a[1]}, vbar_, c_);
  return {g[0], g[1]};
}

double ToyFlowProblem::min_zone_margin(const std::vector<double>& a) const {
  return 1.0 - std::abs(a[0] + a[1]);
}

std::vector<double> ToyFlowProblem::primal_image(
    const std::vector<double>& a) const {
  const Vec2 u = toy_dtp({a[0], a[1]}, vbar_, c_);
  return {u[0], u[1]};
}

RunResult toy_run(double c, const Vec2& vbar1, const FlowConfig& cfg) {
  ToyFlowProblem problem(c, vbar1);
  return run_scheme(problem, {vbar1[0], vbar1[1]}, cfg);
}

}  // namespace dualflow
