#include "dualflow/dual_core.hpp"

#include <atomic>
#include <cmath>

#include "dualflow/threading.hpp"

namespace dualflow {

double frak_c(const Field& vbar, const Field& v0) {
  return -inner_spacetime(v0, vbar) + 0.5 * inner_spacetime(vbar, vbar);
}

DtPZoneReport zone_margin(const Field& b, double eps_zone) {
  const auto& g = b.grid();
  const int n = g.config().tensor_dim();
  const int64_t nodes = g.nodes();
  DtPZoneReport rep;
  rep.eps_zone = eps_zone;
  rep.margin_field.assign(nodes, 0.0);

  const double* bd = b.data().data();
  double global_min = 1e300;
  int64_t bad = 0;
  for (int64_t node = 0; node < nodes; ++node) {
    Eigen::Map<const Eigen::MatrixXd> bm(bd + node * n * n, n, n);
    Eigen::MatrixXd m = 2.0 * bm;
    m.diagonal().array() += 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                      Eigen::EigenvaluesOnly);
    const double margin = es.eigenvalues().minCoeff();
    rep.margin_field[node] = margin;
    global_min = std::min(global_min, margin);
    if (margin <= eps_zone) ++bad;
  }
  rep.min_margin = global_min;
  rep.violating_fraction = static_cast<double>(bad) / static_cast<double>(nodes);
  return rep;
}

double k_functional(const Field& q, const Field& b) {
  const auto& g = q.grid();
  const int n = g.config().tensor_dim();
  const int64_t sp = g.space_points();
  const auto w = trapezoid_weights(g);

  double total = 0.0;
  for (int t = 0; t < g.nt(); ++t) {
    const double* qs = q.slice(t);
    const double* bs = b.slice(t);
    double slice_acc = 0.0;
    for (int64_t s = 0; s < sp; ++s) {
      Eigen::Map<const Eigen::MatrixXd> bm(bs + s * n * n, n, n);
      Eigen::Map<const Eigen::VectorXd> qv(qs + s * n, n);
      Eigen::MatrixXd m = 2.0 * bm;
      m.diagonal().array() += 1.0;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
      const Eigen::VectorXd eig = es.eigenvalues();
      if (eig.minCoeff() < -kEpsPsd) return kNegInf;
      const Eigen::VectorXd qm = es.eigenvectors().transpose() * qv;
      double quad = 0.0;
      double out_of_range = 0.0;
      for (int i = 0; i < n; ++i) {
        if (eig(i) > kEpsPsd) {
          quad += qm(i) * qm(i) / eig(i);
        } else {
          out_of_range += qm(i) * qm(i);
        }
      }
      if (out_of_range > kEpsRange * kEpsRange * (1.0 + qv.squaredNorm())) {
        return kNegInf;
      }
      slice_acc += quad;
    }
    total += w[t] * slice_acc;
  }
  return -0.5 * total * g.cell_measure();
}

Field dtp_map(const Field& e, const Field& b, const Field& vbar,
              double eps_zone, double violating_fraction_max) {
  const auto& g = e.grid();
  if (!g.same_as(b.grid()) || !g.same_as(vbar.grid())) {
    throw std::invalid_argument("dtp_map: grid mismatch");
  }
  const int n = g.config().tensor_dim();
  const int64_t nodes = g.nodes();
  Field v(g, n);

  const double* ed = e.data().data();
  const double* bd = b.data().data();
  const double* vb = vbar.data().data();
  double* out = v.data().data();

  std::atomic<int64_t> bad{0};
  parallel_for(nodes, [&](int64_t lo, int64_t hi) {
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd rhs(n);
    int64_t local_bad = 0;
    for (int64_t node = lo; node < hi; ++node) {
      Eigen::Map<const Eigen::MatrixXd> bm(bd + node * n * n, n, n);
      m = 2.0 * bm;
      m.diagonal().array() += 1.0 - eps_zone;
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success) {
        ++local_bad;
        continue;
      }
      // refactor without the shift for the actual solve
      m.diagonal().array() += eps_zone;
      Eigen::LLT<Eigen::MatrixXd> solve_llt(m);
      for (int c = 0; c < n; ++c) {
        rhs(c) = vb[node * n + c] - ed[node * n + c];
      }
      Eigen::Map<Eigen::VectorXd>(out + node * n, n) = solve_llt.solve(rhs);
    }
    bad += local_bad;
  });

  const double frac = static_cast<double>(bad.load()) / static_cast<double>(nodes);
  if (frac > violating_fraction_max) {
    throw ZoneExitError(zone_margin(b, eps_zone));
  }
  return v;
}

ConsistentDual construct_consistent_dual(const Field& v, const Field& g_density,
                                         const Field& u) {
  const auto& g = v.grid();
  const int n = g.config().tensor_dim();
  const int64_t nodes = g.nodes();
  ConsistentDual out{Field(g, n), Field(g, n), Field(g, n * n)};

  const double* vd = v.data().data();
  const double* gd = g_density.data().data();
  const double* ud = u.data().data();
  for (int64_t node = 0; node < nodes; ++node) {
    Eigen::Map<const Eigen::MatrixXd> gm(gd + node * n * n, n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gm,
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kEpsPsd) {
      throw std::invalid_argument(
          "construct_consistent_dual: density G has a negative eigenvalue");
    }
    Eigen::Map<const Eigen::VectorXd> vv(vd + node * n, n);
    Eigen::Map<const Eigen::VectorXd> uv(ud + node * n, n);
    Eigen::Map<Eigen::VectorXd>(out.vbar.data().data() + node * n, n) =
        gm * (vv - uv);
    Eigen::Map<Eigen::VectorXd>(out.e.data().data() + node * n, n) = -gm * uv;
    Eigen::Map<Eigen::MatrixXd> bm(out.b.data().data() + node * n * n, n, n);
    bm = 0.5 * gm;
    bm.diagonal().array() -= 0.5;
  }
  return out;
}

NashDualProblem::NashDualProblem(const SpaceTimeGrid& grid, Field v0,
                                 Field vbar)
    : grid_(grid), v0_(std::move(v0)), vbar_(std::move(vbar)) {
  v0_.require_finite("NashDualProblem v0");
  vbar_.require_finite("NashDualProblem vbar");
  // v0 must be constant in t
  for (int t = 1; t < grid_.nt(); ++t) {
    const double* a = v0_.slice(0);
    const double* b = v0_.slice(t);
    const int64_t line = grid_.space_points() * v0_.comps();
    for (int64_t i = 0; i < line; ++i) {
      if (a[i] != b[i]) {
        throw std::invalid_argument("NashDualProblem: v0 must be constant in t");
      }
    }
  }
}

void NashDualProblem::set_vbar(Field vbar) {
  vbar.require_finite("NashDualProblem vbar");
  vbar_ = std::move(vbar);
}

EBPair NashDualProblem::eb_from_a(const Field& a) const {
  return {time_derivative(a, TimeStencil::pairing), apply_L_adjoint(a)};
}

double NashDualProblem::dual_objective_pair(const EBPair& pair) const {
  Field q = pair.e;
  q -= vbar_;
  const double k = k_functional(q, pair.b);
  if (k == kNegInf) return kNegInf;
  return -inner_spacetime(v0_, pair.e) +
         0.5 * inner_spacetime(vbar_, vbar_) + k;
}

double NashDualProblem::dual_objective(const Field& a) const {
  return dual_objective_pair(eb_from_a(a));
}

Field NashDualProblem::dtp_image(const Field& a) const {
  const EBPair pair = eb_from_a(a);
  return dtp_map(pair.e, pair.b, vbar_, eps_zone_, violating_fraction_max_);
}

Field NashDualProblem::dual_gradient(const Field& a) const {
  const EBPair pair = eb_from_a(a);
  const Field v =
      dtp_map(pair.e, pair.b, vbar_, eps_zone_, violating_fraction_max_);

  // grad s_h = W^{-1} D^T W (v0 - v) + grad U(v x v), zero terminal slice
  Field diff = v0_;
  diff -= v;
  Field grad = time_adjoint_derivative(diff);

  const int n = grid_.config().tensor_dim();
  Field vv(grid_, n * n);
  const double* vd = v.data().data();
  double* od = vv.data().data();
  parallel_for(grid_.nodes(), [&](int64_t lo, int64_t hi) {
    for (int64_t node = lo; node < hi; ++node) {
      const double* x = vd + node * n;
      double* o = od + node * n * n;
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) o[r * n + c] = x[r] * x[c];
      }
    }
  });
  Field spatial = apply_L(vv);  // -grad U(v x v)
  spatial *= -1.0;
  // terminal slice stays zero so the flow preserves a(T)=0
  {
    double* last = spatial.slice(grid_.nt() - 1);
    const int64_t line = grid_.space_points() * n;
    for (int64_t i = 0; i < line; ++i) last[i] = 0.0;
  }
  grad += spatial;
  return grad;
}

GapReport duality_gap(const Field& v, const Field& vbar, double dual_value) {
  Field diff = v;
  diff -= vbar;
  GapReport rep;
  rep.primal = 0.5 * inner_spacetime(diff, diff);
  rep.dual = dual_value;
  rep.gap = std::abs(rep.primal - rep.dual);
  return rep;
}

}  // namespace dualflow
