#pragma once

#include <Eigen/Dense>

#include "dualflow/field.hpp"

namespace dualflow {

// Two time-derivative stencil families coexist on purpose.
//
// Diagnostic: centered interior + second-order one-sided ends; exact on
// quadratics at every node, but it does not satisfy a summation-by-parts
// identity against the trapezoid weights.
//
// Pairing: centered interior + first-order one-sided ends, the classic
// summation-by-parts companion of the trapezoid rule:
//   W D + D^T W = e_T e_T^T - e_0 e_0^T  exactly.
// The dual machinery (eb_from_a, gradients, constraint pairing) uses this
// one so the weak-form constraint and integration by parts are discrete
// identities, not approximations.
enum class TimeStencil { diagnostic, pairing };

class TimeOps {
 public:
  TimeOps(int nt, double T);

  int nt() const { return nt_; }
  double dt() const { return dt_; }
  const Eigen::VectorXd& weights() const { return w_; }
  const Eigen::MatrixXd& deriv(TimeStencil s) const {
    return s == TimeStencil::diagnostic ? d_diag_ : d_sbp_;
  }
  // W^{-1} D_pairing^T W with the terminal row zeroed (preserves a(T)=0)
  const Eigen::MatrixXd& adjoint_deriv() const { return m_time_; }

  static const TimeOps& get(int nt, double T);

 private:
  int nt_;
  double dt_;
  Eigen::VectorXd w_;
  Eigen::MatrixXd d_diag_;
  Eigen::MatrixXd d_sbp_;
  Eigen::MatrixXd m_time_;
};

// applies the chosen time-derivative matrix to every (node, component) line
Field time_derivative(const Field& a, TimeStencil s = TimeStencil::diagnostic);

// applies adjoint_deriv() (the Riesz time block of the flow gradient)
Field time_adjoint_derivative(const Field& f);

// a(t) = integral from T to t of e, cumulative trapezoid, a(T) = 0
Field integrate_from_terminal(const Field& e);

}  // namespace dualflow
