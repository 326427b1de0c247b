#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dualflow/field.hpp"
#include "dualflow/hj.hpp"
#include "dualflow/spectral.hpp"

using namespace dualflow;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> sampled(const SpaceTimeGrid& g,
                            double (*f)(double)) {
  std::vector<double> out(g.space_points());
  for (int64_t s = 0; s < g.space_points(); ++s) out[s] = f(g.coordinate(s, 0));
  return out;
}

double cos_mode(double x) { return 0.05 * std::cos(kTwoPi * x); }

// characteristics oracle for smooth pre-shock data: the minimizer y of the
// quadratic envelope satisfies x = y + t f'(y); solve by bisection on the
// monotone map (valid while 1 + t f'' > 0 everywhere)
double characteristics_value(double x, double t, double amp) {
  auto fp = [&](double y) { return -amp * kTwoPi * std::sin(kTwoPi * y); };
  auto map = [&](double y) { return y + t * fp(y); };
  double lo = x - 0.5, hi = x + 0.5;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (map(mid) < x ? lo : hi) = mid;
  }
  const double y = 0.5 * (lo + hi);
  return amp * std::cos(kTwoPi * y) + (x - y) * (x - y) / (2.0 * t);
}

}  // namespace

TEST_CASE("trig interpolation reproduces samples and resolved modes") {
  PlayerConfig cfg(1, 1);
  SpaceTimeGrid g(cfg, 1.0, 3, 16);
  std::vector<double> samples(g.space_points());
  for (int64_t s = 0; s < g.space_points(); ++s) {
    samples[s] = 1.0 + std::sin(kTwoPi * 3 * g.coordinate(s, 0));
  }
  TrigInterpolant interp(g, samples);
  // at nodes
  for (int64_t s = 0; s < g.space_points(); ++s) {
    CHECK(interp.value({g.coordinate(s, 0)}) ==
          doctest::Approx(samples[s]).epsilon(1e-12));
  }
  // between nodes
  for (double x : {0.013, 0.471, 0.928}) {
    CHECK(interp.value({x}) ==
          doctest::Approx(1.0 + std::sin(kTwoPi * 3 * x)).epsilon(1e-10));
  }
}

TEST_CASE("quadratic envelope of a constant is the constant") {
  PlayerConfig cfg(1, 1);
  SpaceTimeGrid g(cfg, 0.5, 3, 32);
  std::vector<double> flat(g.space_points(), 0.7);
  const auto slice = hopf_lax_slice(flat, 0.3, g);
  for (double v : slice) CHECK(v == doctest::Approx(0.7).epsilon(1e-10));
  CHECK_THROWS_AS(hopf_lax_slice(flat, 0.0, g), std::invalid_argument);
}

TEST_CASE("quadratic envelope matches the characteristics oracle pre-shock") {
  PlayerConfig cfg(1, 1);
  SpaceTimeGrid g(cfg, 0.5, 3, 128);
  const auto psi_star = sampled(g, cos_mode);
  for (double t : {0.1, 0.3, 0.5}) {
    const auto slice = hopf_lax_slice(psi_star, t, g);
    double worst = 0.0;
    for (int64_t s = 0; s < g.space_points(); ++s) {
      const double exact = characteristics_value(g.coordinate(s, 0), t, 0.05);
      worst = std::max(worst, std::abs(slice[s] - exact));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("dynamic programming identity across intermediate times") {
  PlayerConfig cfg(1, 1);
  SpaceTimeGrid g(cfg, 0.5, 3, 128);
  const auto psi_star = sampled(g, cos_mode);
  const double t = 0.2, s_extra = 0.2;
  const auto mid = hopf_lax_slice(psi_star, t, g);
  const auto direct = hopf_lax_slice(psi_star, t + s_extra, g);
  const auto chained = hopf_lax_slice(mid, s_extra, g);
  double worst = 0.0;
  for (int64_t s = 0; s < g.space_points(); ++s) {
    worst = std::max(worst, std::abs(chained[s] - direct[s]));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("potential field starts at the terminal data slice") {
  PlayerConfig cfg(1, 1);
  SpaceTimeGrid g(cfg, 0.5, 5, 64);
  const auto psi_star = sampled(g, cos_mode);
  Field psi = hopf_lax_potential(psi_star, g);
  for (int64_t s = 0; s < g.space_points(); ++s) {
    CHECK(psi.at(0, s, 0) == doctest::Approx(psi_star[s]).epsilon(1e-14));
  }
  // interior slices solve the evolution: check the node equation weakly by
  // comparing against a direct envelope evaluation at slice 2
  const auto direct = hopf_lax_slice(psi_star, g.time_at(2), g);
  for (int64_t s = 0; s < g.space_points(); ++s) {
    CHECK(psi.at(2, s, 0) == doctest::Approx(direct[s]).epsilon(1e-10));
  }
}

TEST_CASE("transport with zero velocity keeps the unit density") {
  PlayerConfig cfg(1, 1);
  SpaceTimeGrid g(cfg, 0.5, 9, 32);
  Field u = make_vector_field(g, 0.0);
  TransportDensity td = solve_transport_backward(u);
  for (double v : td.rho.data()) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(td.mass_error <= 1e-13);
}

TEST_CASE("transport with constant velocity keeps the unit density") {
  // constant advection of a constant state is exact for a conservative flux
  PlayerConfig cfg(1, 1);
  SpaceTimeGrid g(cfg, 0.5, 9, 32);
  Field u = make_vector_field(g, 0.8);
  TransportDensity td = solve_transport_backward(u);
  for (double v : td.rho.data()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transport matches the characteristics oracle for smooth flow") {
  // u(x) independent of t; along dX/dt = u(X) backward from (T, x),
  // d(log rho)/dt = -u'(X). RK4 on the coupled system gives the oracle.
  PlayerConfig cfg(1, 1);
  SpaceTimeGrid g(cfg, 0.25, 65, 256);
  Field u = make_vector_field(g);
  const double amp = 0.1;
  for (int t = 0; t < g.nt(); ++t) {
    for (int64_t s = 0; s < g.space_points(); ++s) {
      u.at(t, s, 0) = amp * std::sin(kTwoPi * g.coordinate(s, 0));
    }
  }
  TransportDensity td = solve_transport_backward(u);
  CHECK(td.mass_error <= 1e-8);
  CHECK(td.min_rho > 0.0);

  auto vel = [&](double x) { return amp * std::sin(kTwoPi * x); };
  auto dvel = [&](double x) { return amp * kTwoPi * std::cos(kTwoPi * x); };
  double worst = 0.0;
  for (int64_t s = 0; s < g.space_points(); s += 8) {
    // integrate x' = u(x), q' = -u'(x) q forward from t=0 node values and
    // compare the terminal constraint rho(T)=1 transported back
    double x = g.coordinate(s, 0);
    double q = 1.0;  // rho along the path, normalized at t=0
    const int steps = 4000;
    const double h = g.horizon() / steps;
    for (int i = 0; i < steps; ++i) {
      auto rhs = [&](double xx, double qq, double& dx, double& dq) {
        dx = vel(xx);
        dq = -dvel(xx) * qq;
      };
      double k1x, k1q, k2x, k2q, k3x, k3q, k4x, k4q;
      rhs(x, q, k1x, k1q);
      rhs(x + 0.5 * h * k1x, q + 0.5 * h * k1q, k2x, k2q);
      rhs(x + 0.5 * h * k2x, q + 0.5 * h * k2q, k3x, k3q);
      rhs(x + h * k3x, q + h * k3q, k4x, k4q);
      x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
      q += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
    }
    // rho(T, x(T)) = 1 forces rho(0, x(0)) = 1/q... but the computed field
    // stores node values, so compare rho(0, s) * q against 1
    worst = std::max(worst, std::abs(td.rho.at(0, s, 0) * q - 1.0));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("ladder members shrink toward the base state") {
  PlayerConfig cfg(1, 1);
  SpaceTimeGrid g(cfg, 0.5, 33, 64);
  const auto psi_star = sampled(g, cos_mode);
  Field psi = hopf_lax_potential(psi_star, g);
  Field v = velocity_from_potential(psi);
  const auto members = build_base_state_ladder(v, {0.2, 0.1, 0.05, 0.025});
  REQUIRE(members.size() == 4);
  for (size_t i = 0; i < members.size(); ++i) {
    CHECK(members[i].min_rho > 0.0);
    if (i > 0) CHECK(members[i].l1_vbar < members[i - 1].l1_vbar);
  }
}

TEST_CASE("consistency report: identity base state gives tiny raw recovery") {
  PlayerConfig cfg(1, 1);
  SpaceTimeGrid g(cfg, 0.5, 33, 64);
  const auto psi_star = sampled(g, cos_mode);
  Field psi = hopf_lax_potential(psi_star, g);
  Field v = velocity_from_potential(psi);
  Field v0(g, 1);
  for (int t = 0; t < g.nt(); ++t) {
    for (int64_t s = 0; s < g.space_points(); ++s) {
      v0.at(t, s, 0) = v.at(0, s, 0);
    }
  }
  Field gd = make_matrix_field(g);
  for (int t = 0; t < g.nt(); ++t) {
    for (int64_t s = 0; s < g.space_points(); ++s) gd.at(t, s, 0) = 1.0;
  }
  Field u = make_vector_field(g, 0.0);
  ConsistencyReport rep = verify_consistency(v, gd, u, v0);
  // the algebraic recovery identity is exact independently of any quadrature
  CHECK(rep.recovery_raw <= 1e-10);
  CHECK(rep.min_margin > 0.0);
  // discretization errors only: modest grid, loose sanity bounds
  CHECK(std::abs(rep.gap) <= 1e-2);
  CHECK(rep.recovery_err <= 1e-2);
  CHECK(rep.constraint_res <= 1e-2);
}
