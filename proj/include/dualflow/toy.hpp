#pragma once

#include <array>

#include "dualflow/flow.hpp"

namespace dualflow {

using Vec2 = std::array<double, 2>;

// Two-unknown algebraic model: Q_c(U)_i = (U1-c)(U2-c) - (U_i-c), with exact
// solutions (c,c) and (c+1,c+1). Every scheme ingredient has a closed form,
// which the tests pin against the generic driver.
struct ToyProblem {
  double c = 0.0;
  Vec2 vbar{0.0, 0.0};
};

Vec2 toy_residual(const Vec2& u, double c);

// unique solution of the stationarity system at dual state D (|D1+D2| != 1)
Vec2 toy_dtp(const Vec2& d, const Vec2& vbar, double c);

double toy_objective(const Vec2& d, const Vec2& vbar, double c);

// envelope identity: residual evaluated at the DtP image
Vec2 toy_gradient(const Vec2& d, const Vec2& vbar, double c);

// d' on the symmetric line, base state folded into c_eff = c - v
double toy_reduced_rhs(double d, double c_eff);

// inverse trajectory map s(d_tilde) in shifted variables d~ = 2d-1, c~ = |2c+1|
double toy_implicit_solution(double d_tilde, double c_tilde);

double toy_attractor(double c_eff);

// fake time at which the symmetric flow meets the zone boundary (c~ >= 2)
double toy_switch_time(double c_tilde);

double toy_base_recursion(double v_k, double d_star, double c);

// v_k ~ (c+1/2)(1 - 2^{1-k})
double toy_base_asymptote(int k, double c);

class ToyFlowProblem : public DualProblemInterface {
 public:
  explicit ToyFlowProblem(double c, Vec2 vbar = {0.0, 0.0})
      : c_(c), vbar_(vbar) {}

  int64_t dofs() const override { return 2; }
  double inner(const std::vector<double>& x,
               const std::vector<double>& y) const override {
    return x[0] * y[0] + x[1] * y[1];
  }
  double objective(const std::vector<double>& a) const override;
  std::vector<double> gradient(const std::vector<double>& a) const override;
  double min_zone_margin(const std::vector<double>& a) const override;
  std::vector<double> primal_image(const std::vector<double>& a) const override;
  std::vector<double> base_state() const override {
    return {vbar_[0], vbar_[1]};
  }
  void set_base_state(const std::vector<double>& v) override {
    vbar_ = {v[0], v[1]};
  }
  void set_zone_params(double eps_zone, double frac) override {
    eps_zone_ = eps_zone;
    (void)frac;  // a single "node": any violation is total
  }

  double c() const { return c_; }

 private:
  double c_;
  Vec2 vbar_;
  double eps_zone_ = 1e-3;
};

RunResult toy_run(double c, const Vec2& vbar1, const FlowConfig& cfg);

}  // namespace dualflow
