#pragma once

#include <Eigen/Dense>

namespace dualflow {

// Player/state dimensions shared by every module. The composite index layout
// is fixed once here: a spatial coordinate (player j, dim l) flattens to
// j*p + l, and a full vector component (player i, coordinate (j,l)) flattens
// to (i*N + j)*p + l. All 0-based.
class PlayerConfig {
 public:
  PlayerConfig(int n_players, int state_dim);

  int players() const { return players_; }
  int state_dim() const { return state_dim_; }
  // n = p*N^2, the per-node vector dimension
  int tensor_dim() const { return state_dim_ * players_ * players_; }
  // m = N*p, the spatial dimension
  int space_dim() const { return players_ * state_dim_; }

  int coord_index(int j, int l) const { return j * state_dim_ + l; }
  int vec_index(int i, int j, int l) const {
    return (i * players_ + j) * state_dim_ + l;
  }

 private:
  int players_;
  int state_dim_;
};

bool is_symmetric(const Eigen::MatrixXd& a, double tol = 1e-12);

// y_i = 1/2 sum_l [ A(iil,iil) + sum_{j != i} (A(jjl,ijl) + A(ijl,jjl)) ]
Eigen::VectorXd apply_U(const Eigen::MatrixXd& a, const PlayerConfig& cfg);

// Adjoint of apply_U under the Frobenius pairing; sparse symmetric tensor
// with trace (p/2) * sum_i y_i.
Eigen::MatrixXd apply_U_adjoint(const Eigen::VectorXd& y,
                                const PlayerConfig& cfg);

double trace_U_adjoint(const Eigen::VectorXd& y, const PlayerConfig& cfg);

struct TraceConditionReport {
  bool premise_holds = false;       // k*I + U*(y) PSD
  bool minors_hold = false;         // y_j^2 <= 4k^2 + 2k*y_i for all i != j
  double min_eig_shifted = 0.0;     // min eig of k*I + U*(y)
  double max_eig_adjoint = 0.0;     // max eig of U*(y)
  double worst_minor_margin = 0.0;  // min over (i,j) of 4k^2 + 2k*y_i - y_j^2
};

// Requires N > 1; the condition fails structurally for a single player.
TraceConditionReport check_trace_condition(const Eigen::VectorXd& y, double k,
                                           const PlayerConfig& cfg);

}  // namespace dualflow
