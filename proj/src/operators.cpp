#include "dualflow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dualflow {

PlayerConfig::PlayerConfig(int n_players, int state_dim)
    : players_(n_players), state_dim_(state_dim) {
  if (n_players < 1 || state_dim < 1) {
    throw std::invalid_argument("PlayerConfig: N and p must be >= 1");
  }
}

bool is_symmetric(const Eigen::MatrixXd& a, double tol) {
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + a.cwiseAbs().maxCoeff());
}

namespace {

void check_tensor_shape(const Eigen::MatrixXd& a, const PlayerConfig& cfg) {
  const int n = cfg.tensor_dim();
  if (a.rows() != n || a.cols() != n) {
    throw std::invalid_argument("tensor shape does not match configuration");
  }
}

void check_player_vector(const Eigen::VectorXd& y, const PlayerConfig& cfg) {
  if (y.size() != cfg.players()) {
    throw std::invalid_argument("player vector has wrong length");
  }
}

}  // namespace

Eigen::VectorXd apply_U(const Eigen::MatrixXd& a, const PlayerConfig& cfg) {
  check_tensor_shape(a, cfg);
  if (!is_symmetric(a)) {
    throw std::invalid_argument("apply_U: input tensor is not symmetric");
  }
  const int N = cfg.players();
  const int p = cfg.state_dim();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < N; ++i) {
    double acc = 0.0;
    for (int l = 0; l < p; ++l) {
      const int iil = cfg.vec_index(i, i, l);
      acc += a(iil, iil);
      for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        const int jjl = cfg.vec_index(j, j, l);
        const int ijl = cfg.vec_index(i, j, l);
        acc += a(jjl, ijl) + a(ijl, jjl);
      }
    }
    y(i) = 0.5 * acc;
  }
  return y;
}

Eigen::MatrixXd apply_U_adjoint(const Eigen::VectorXd& y,
                                const PlayerConfig& cfg) {
  check_player_vector(y, cfg);
  const int N = cfg.players();
  const int p = cfg.state_dim();
  const int n = cfg.tensor_dim();
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, n);
  // Pairing the Frobenius product against apply_U places 1/2*y_i on the
  // cells ((j,j,l),(i,j,l)) and their transposes, collapsing to a single
  // 1/2*y_i diagonal entry when i = j.
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      for (int l = 0; l < p; ++l) {
        const int jjl = cfg.vec_index(j, j, l);
        const int ijl = cfg.vec_index(i, j, l);
        z(jjl, ijl) = 0.5 * y(i);
        z(ijl, jjl) = 0.5 * y(i);
      }
    }
  }
  return z;
}

double trace_U_adjoint(const Eigen::VectorXd& y, const PlayerConfig& cfg) {
  check_player_vector(y, cfg);
  return 0.5 * cfg.state_dim() * y.sum();
}

TraceConditionReport check_trace_condition(const Eigen::VectorXd& y, double k,
                                           const PlayerConfig& cfg) {
  if (cfg.players() == 1) {
    throw std::invalid_argument(
        "check_trace_condition: unsupported for a single player (the trace "
        "condition fails for N=1)");
  }
  check_player_vector(y, cfg);
  const Eigen::MatrixXd z = apply_U_adjoint(y, cfg);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z);
  const Eigen::VectorXd eigs = es.eigenvalues();

  TraceConditionReport rep;
  rep.max_eig_adjoint = eigs.maxCoeff();
  rep.min_eig_shifted = k + eigs.minCoeff();
  const double scale = 1.0 + std::abs(k) + y.cwiseAbs().maxCoeff();
  rep.premise_holds = rep.min_eig_shifted >= -1e-12 * scale;

  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.players(); ++i) {
    for (int j = 0; j < cfg.players(); ++j) {
      if (i == j) continue;
      worst = std::min(worst, 4.0 * k * k + 2.0 * k * y(i) - y(j) * y(j));
    }
  }
  rep.worst_minor_margin = worst;
  rep.minors_hold = worst >= -1e-10 * scale * scale;
  return rep;
}

}  // namespace dualflow
