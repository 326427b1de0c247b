#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dualflow/dual_core.hpp"
#include "dualflow/nash.hpp"
#include "dualflow/rng.hpp"
#include "dualflow/spectral.hpp"

using namespace dualflow;

namespace {

Field random_field(const SpaceTimeGrid& g, int comps, Rng& rng, double amp = 1.0) {
  Field f(g, comps);
  for (double& x : f.data()) x = amp * rng.normal();
  return f;
}

// fills every node of a matrix field with the same symmetric matrix
void fill_matrix(Field& b, const Eigen::MatrixXd& m) {
  const int n = m.rows();
  for (int t = 0; t < b.grid().nt(); ++t) {
    for (int64_t s = 0; s < b.grid().space_points(); ++s) {
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) b.at(t, s, r * n + c) = m(r, c);
      }
    }
  }
}

// derivative-free coordinate descent on the inner Lagrangian
// f(v) = 1/2 |v|^2 + <B v, v> + <Q, v>; its infimum has the closed form
// -1/2 <Q, (I+2B)^{-1} Q> when I+2B is positive definite.
double brute_force_inner_inf(const Eigen::MatrixXd& b, const Eigen::VectorXd& q) {
  const int n = q.size();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  auto f = [&](const Eigen::VectorXd& x) {
    return 0.5 * x.squaredNorm() + x.dot(b * x) + q.dot(x);
  };
  double step = 1.0;
  double best = f(v);
  for (int iter = 0; iter < 4000 && step > 1e-10; ++iter) {
    bool improved = false;
    for (int c = 0; c < n; ++c) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd trial = v;
        trial(c) += sign * step;
        const double ft = f(trial);
        if (ft < best) {
          best = ft;
          v = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace

TEST_CASE("base-state cost functional on constants") {
  PlayerConfig cfg(2, 1);
  SpaceTimeGrid g(cfg, 2.0, 5, 4);
  Field vbar = make_vector_field(g, 1.0);
  Field v0 = make_vector_field(g, 3.0);
  // per component: -3*1 + 0.5, times 4 components, times horizon 2
  CHECK(frak_c(vbar, v0) == doctest::Approx(2.0 * 4 * (-2.5)).epsilon(1e-14));
}

TEST_CASE("zone margin: smallest eigenvalue of I + 2B per node") {
  PlayerConfig cfg(1, 2);
  SpaceTimeGrid g(cfg, 1.0, 3, 4);
  Field b = make_matrix_field(g);
  Eigen::MatrixXd m(2, 2);
  m << -0.2, 0.1, 0.1, 0.3;
  fill_matrix(b, m);
  Eigen::MatrixXd shifted = 2.0 * m + Eigen::MatrixXd::Identity(2, 2);
  const double expected =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(shifted).eigenvalues().minCoeff();
  DtPZoneReport rep = zone_margin(b, 1e-3);
  CHECK(rep.min_margin == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rep.violating_fraction == 0.0);
}

TEST_CASE("quadratic functional agrees with brute-force minimization") {
  Rng rng(17);
  for (int n_case = 0; n_case < 2; ++n_case) {
    // n = p N^2: (1,2) gives n=2, (2,1) gives n=4
    PlayerConfig cfg = n_case == 0 ? PlayerConfig(1, 2) : PlayerConfig(2, 1);
    const int n = cfg.tensor_dim();
    SpaceTimeGrid g(cfg, 1.0, 3, 4);
    for (int draw = 0; draw < 50; ++draw) {
      Eigen::MatrixXd raw(n, n);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) raw(r, c) = 0.3 * rng.normal();
      }
      Eigen::MatrixXd bm = 0.5 * (raw + raw.transpose());
      // keep I + 2B comfortably positive definite
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          2.0 * bm + Eigen::MatrixXd::Identity(n, n));
      if (es.eigenvalues().minCoeff() < 0.2) continue;
      Eigen::VectorXd q(n);
      for (int c = 0; c < n; ++c) q(c) = rng.normal();

      Field b = make_matrix_field(g);
      fill_matrix(b, bm);
      Field qf(g, n);
      for (int t = 0; t < g.nt(); ++t) {
        for (int64_t s = 0; s < g.space_points(); ++s) {
          for (int c = 0; c < n; ++c) qf.at(t, s, c) = q(c);
        }
      }
      // constant fields: the integral is inf-value * T * total measure
      const double expected = brute_force_inner_inf(bm, q);
      CHECK(k_functional(qf, b) == doctest::Approx(expected).epsilon(1e-6));
    }
  }
}

TEST_CASE("quadratic functional: boundary and unbounded cases") {
  PlayerConfig cfg(1, 2);
  SpaceTimeGrid g(cfg, 1.0, 3, 4);
  Field b = make_matrix_field(g);
  Field q(g, 2);

  // I + 2B has a negative eigenvalue: unbounded below
  Eigen::MatrixXd neg(2, 2);
  neg << -0.6, 0.0, 0.0, 0.1;
  fill_matrix(b, neg);
  CHECK(k_functional(q, b) == kNegInf);

  // PSD boundary with Q inside the range: finite; Q outside: unbounded
  Eigen::MatrixXd boundary(2, 2);
  boundary << -0.5, 0.0, 0.0, 0.1;  // I+2B = diag(0, 1.2)
  fill_matrix(b, boundary);
  for (int t = 0; t < g.nt(); ++t) {
    for (int64_t s = 0; s < g.space_points(); ++s) {
      q.at(t, s, 0) = 0.0;
      q.at(t, s, 1) = 2.0;
    }
  }
  const double finite_val = k_functional(q, b);
  CHECK(std::isfinite(finite_val));
  CHECK(finite_val == doctest::Approx(-0.5 * 4.0 / 1.2).epsilon(1e-12));
  for (int t = 0; t < g.nt(); ++t) {
    for (int64_t s = 0; s < g.space_points(); ++s) q.at(t, s, 0) = 1.0;
  }
  CHECK(k_functional(q, b) == kNegInf);
}

TEST_CASE("dual-to-primal map solves the stationarity system") {
  Rng rng(23);
  PlayerConfig cfg(2, 1);
  const int n = cfg.tensor_dim();
  SpaceTimeGrid g(cfg, 0.5, 3, 4);
  Field e = random_field(g, n, rng, 0.5);
  Field vbar = random_field(g, n, rng, 0.5);
  Field b = make_matrix_field(g);
  Eigen::MatrixXd raw(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) raw(r, c) = 0.05 * rng.normal();
  }
  fill_matrix(b, 0.5 * (raw + raw.transpose()));

  Field v = dtp_map(e, b, vbar, 1e-3, 0.0);
  double worst = 0.0;
  for (int t = 0; t < g.nt(); ++t) {
    for (int64_t s = 0; s < g.space_points(); ++s) {
      Eigen::MatrixXd bm(n, n);
      Eigen::VectorXd vv(n), rhs(n);
      for (int r = 0; r < n; ++r) {
        vv(r) = v.at(t, s, r);
        rhs(r) = vbar.at(t, s, r) - e.at(t, s, r);
        for (int c = 0; c < n; ++c) bm(r, c) = b.at(t, s, r * n + c);
      }
      const Eigen::VectorXd lhs = vv + 2.0 * bm * vv;
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("dual-to-primal map reports zone exits") {
  PlayerConfig cfg(1, 2);
  SpaceTimeGrid g(cfg, 1.0, 3, 4);
  Field e(g, 2), vbar(g, 2);
  Field b = make_matrix_field(g);
  Eigen::MatrixXd bad(2, 2);
  bad << -0.51, 0.0, 0.0, 0.0;  // I+2B has eigenvalue -0.02
  fill_matrix(b, bad);
  CHECK_THROWS_AS(dtp_map(e, b, vbar, 1e-3, 0.0), ZoneExitError);
}

TEST_CASE("consistent dual construction recovers the primal field") {
  Rng rng(29);
  PlayerConfig cfg(2, 1);
  const int n = cfg.tensor_dim();
  SpaceTimeGrid g(cfg, 0.5, 3, 4);
  Field v = random_field(g, n, rng);
  Field u = random_field(g, n, rng);
  // G = I + small symmetric perturbation, kept positive definite
  Field gd = make_matrix_field(g);
  Eigen::MatrixXd raw(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) raw(r, c) = 0.1 * rng.normal();
  }
  Eigen::MatrixXd gm =
      Eigen::MatrixXd::Identity(n, n) + 0.5 * (raw + raw.transpose());
  fill_matrix(gd, gm);

  ConsistentDual cd = construct_consistent_dual(v, gd, u);
  Field rec = dtp_map(cd.e, cd.b, cd.vbar, 1e-8, 0.0);
  rec -= v;
  CHECK(rec.max_abs() <= 1e-10);

  Field neg = make_matrix_field(g);
  fill_matrix(neg, -Eigen::MatrixXd::Identity(n, n));
  CHECK_THROWS_AS(construct_consistent_dual(v, neg, u), std::invalid_argument);
}

TEST_CASE("admissible affine dual state reproduces the base-state cost") {
  Rng rng(31);
  PlayerConfig cfg(2, 1);
  const int n = cfg.tensor_dim();
  SpaceTimeGrid g(cfg, 0.5, 9, 4);
  for (int draw = 0; draw < 10; ++draw) {
    Field sample = random_field(g, n, rng, 0.5);
    // v0 and vbar constant in time so the affine dual state has the exact
    // time derivative (the averaged data of the linear-in-time state)
    Field v0(g, n), vbar(g, n);
    for (int t = 0; t < g.nt(); ++t) {
      for (int64_t s = 0; s < g.space_points(); ++s) {
        for (int c = 0; c < n; ++c) {
          v0.at(t, s, c) = sample.at(0, s, c);
          vbar.at(t, s, c) = sample.at(g.nt() - 1, s, c);
        }
      }
    }
    Field pv = project_average(vbar);
    Field a(g, n);
    for (int t = 0; t < g.nt(); ++t) {
      const double factor = g.time_at(t) - g.horizon();
      for (int64_t s = 0; s < g.space_points(); ++s) {
        for (int c = 0; c < n; ++c) a.at(t, s, c) = factor * pv.at(t, s, c);
      }
    }
    NashDualProblem prob(g, v0, vbar);
    const double lhs = prob.dual_objective(a);
    const double rhs = frak_c(pv, project_average(v0));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("averaged-data pair attains the base-state cost for rough data") {
  // with the dual pair chosen directly as (spatial average of the data, 0),
  // the objective collapses to the base-state cost even when the data vary
  // in both time and space
  Rng rng(41);
  PlayerConfig cfg(2, 1);
  const int n = cfg.tensor_dim();
  SpaceTimeGrid g(cfg, 0.5, 9, 4);
  for (int draw = 0; draw < 10; ++draw) {
    Field vbar = random_field(g, n, rng, 0.5);
    Field v0 = random_field(g, n, rng, 0.5);
    Field e = project_average(vbar);
    Field b = make_matrix_field(g);
    Field q = e;
    q -= vbar;
    const double value = -inner_spacetime(v0, e) +
                         0.5 * inner_spacetime(vbar, vbar) + k_functional(q, b);
    const double rhs = frak_c(e, project_average(v0));
    CHECK(value == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("dual gradient matches central finite differences") {
  Rng rng(37);
  for (auto [nx, nt] : {std::pair{8, 9}, {16, 17}}) {
    PlayerConfig cfg(2, 1);
    const int n = cfg.tensor_dim();
    SpaceTimeGrid g(cfg, 0.25, nt, nx);
    Field v0 = make_vector_field(g);
    Field v0c = random_field(g, n, rng, 0.1);
    for (int t = 0; t < g.nt(); ++t) {
      for (int64_t s = 0; s < g.space_points(); ++s) {
        for (int c = 0; c < n; ++c) v0.at(t, s, c) = v0c.at(0, s, c);
      }
    }
    Field vbar = random_field(g, n, rng, 0.1);
    NashDualProblem prob(g, v0, vbar);

    // smooth the dual state so its induced matrix part stays inside the zone
    Field a = mollify(random_field(g, n, rng, 0.01), 0.1);
    double* last = a.slice(g.nt() - 1);
    for (int64_t i = 0; i < g.space_points() * n; ++i) last[i] = 0.0;

    const Field grad = prob.dual_gradient(a);
    const auto wt = trapezoid_weights(g);

    const int dirs = nx == 8 ? 12 : 8;
    for (int d = 0; d < dirs; ++d) {
      Field da = random_field(g, n, rng);
      double* dl = da.slice(g.nt() - 1);
      for (int64_t i = 0; i < g.space_points() * n; ++i) dl[i] = 0.0;

      // H inner product of grad with the direction
      double pairing = 0.0;
      for (int t = 0; t < g.nt(); ++t) {
        pairing += wt[t] * inner_space(grad, da, t);
      }

      const double eps = 1e-6;
      Field ap = a, am = a;
      for (size_t i = 0; i < ap.data().size(); ++i) {
        ap.data()[i] += eps * da.data()[i];
        am.data()[i] -= eps * da.data()[i];
      }
      const double fd = (prob.s_h(ap) - prob.s_h(am)) / (2.0 * eps);
      CHECK(pairing == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("duality gap report") {
  PlayerConfig cfg(2, 1);
  SpaceTimeGrid g(cfg, 1.0, 3, 4);
  Field v = make_vector_field(g, 2.0);
  Field vbar = make_vector_field(g, 1.0);
  GapReport rep = duality_gap(v, vbar, 1.5);
  CHECK(rep.primal == doctest::Approx(0.5 * 4.0).epsilon(1e-14));
  CHECK(rep.gap == doctest::Approx(0.5).epsilon(1e-12));
}
