#include "dualflow/time_ops.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

#include "dualflow/threading.hpp"

namespace dualflow {

TimeOps::TimeOps(int nt, double T) : nt_(nt), dt_(T / (nt - 1)) {
  if (nt < 3) throw std::invalid_argument("time ops: need nt >= 3");

  w_ = Eigen::VectorXd::Constant(nt, dt_);
  w_(0) *= 0.5;
  w_(nt - 1) *= 0.5;

  d_diag_ = Eigen::MatrixXd::Zero(nt, nt);
  d_sbp_ = Eigen::MatrixXd::Zero(nt, nt);
  for (int t = 1; t < nt - 1; ++t) {
    d_diag_(t, t - 1) = -0.5 / dt_;
    d_diag_(t, t + 1) = 0.5 / dt_;
    d_sbp_(t, t - 1) = -0.5 / dt_;
    d_sbp_(t, t + 1) = 0.5 / dt_;
  }
  d_diag_(0, 0) = -1.5 / dt_;
  d_diag_(0, 1) = 2.0 / dt_;
  d_diag_(0, 2) = -0.5 / dt_;
  d_diag_(nt - 1, nt - 3) = 0.5 / dt_;
  d_diag_(nt - 1, nt - 2) = -2.0 / dt_;
  d_diag_(nt - 1, nt - 1) = 1.5 / dt_;

  d_sbp_(0, 0) = -1.0 / dt_;
  d_sbp_(0, 1) = 1.0 / dt_;
  d_sbp_(nt - 1, nt - 2) = -1.0 / dt_;
  d_sbp_(nt - 1, nt - 1) = 1.0 / dt_;

  m_time_ = w_.cwiseInverse().asDiagonal() * d_sbp_.transpose() * w_.asDiagonal();
  m_time_.row(nt - 1).setZero();
}

const TimeOps& TimeOps::get(int nt, double T) {
  static std::map<std::pair<int, double>, TimeOps> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(nt, T);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, TimeOps(nt, T)).first;
  return it->second;
}

namespace {

Field apply_time_matrix(const Field& a, const Eigen::MatrixXd& mat) {
  const auto& g = a.grid();
  Field out(g, a.comps());
  const int nt = g.nt();
  const int64_t line = g.space_points() * a.comps();
  parallel_for(line, [&](int64_t lo, int64_t hi) {
    for (int t = 0; t < nt; ++t) {
      double* o = out.slice(t);
      for (int s = 0; s < nt; ++s) {
        const double c = mat(t, s);
        if (c == 0.0) continue;
        const double* in = a.slice(s);
        for (int64_t i = lo; i < hi; ++i) o[i] += c * in[i];
      }
    }
  });
  return out;
}

}  // namespace

Field time_derivative(const Field& a, TimeStencil s) {
  const auto& ops = TimeOps::get(a.grid().nt(), a.grid().horizon());
  return apply_time_matrix(a, ops.deriv(s));
}

Field time_adjoint_derivative(const Field& f) {
  const auto& ops = TimeOps::get(f.grid().nt(), f.grid().horizon());
  return apply_time_matrix(f, ops.adjoint_deriv());
}

Field integrate_from_terminal(const Field& e) {
  const auto& g = e.grid();
  Field a(g, e.comps());
  const int64_t line = g.space_points() * e.comps();
  const double dt = g.dt();
  for (int t = g.nt() - 2; t >= 0; --t) {
    double* cur = a.slice(t);
    const double* next = a.slice(t + 1);
    const double* e0 = e.slice(t);
    const double* e1 = e.slice(t + 1);
    for (int64_t i = 0; i < line; ++i) {
      cur[i] = next[i] - 0.5 * dt * (e0[i] + e1[i]);
    }
  }
  return a;
}

}  // namespace dualflow
