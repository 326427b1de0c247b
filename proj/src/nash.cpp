#include "dualflow/nash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dualflow/serialization.hpp"

namespace dualflow {

namespace {

Field outer_square(const Field& v) {
  const SpaceTimeGrid& g = v.grid();
  const int n = g.config().tensor_dim();
  Field vv = make_matrix_field(g);
  for (int t = 0; t < g.nt(); ++t) {
    for (int64_t s = 0; s < g.space_points(); ++s) {
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          vv.at(t, s, r * n + c) = v.at(t, s, r) * v.at(t, s, c);
        }
      }
    }
  }
  return vv;
}

}  // namespace

NashFlowProblem::NashFlowProblem(NashDualProblem problem)
    : problem_(std::move(problem)) {
  const SpaceTimeGrid& g = problem_.grid();
  const int n = g.config().tensor_dim();
  const std::vector<double> wt = trapezoid_weights(g);
  weights_.resize(static_cast<size_t>(g.nodes()) * n);
  size_t idx = 0;
  for (int t = 0; t < g.nt(); ++t) {
    const double w = wt[t] * g.cell_measure();
    for (int64_t s = 0; s < g.space_points(); ++s) {
      for (int c = 0; c < n; ++c) weights_[idx++] = w;
    }
  }
}

Field NashFlowProblem::wrap(const std::vector<double>& data) const {
  Field f(problem_.grid(), problem_.grid().config().tensor_dim());
  if (data.size() != f.data().size()) {
    throw std::invalid_argument("flat state size mismatch");
  }
  f.data() = data;
  return f;
}

int64_t NashFlowProblem::dofs() const {
  return static_cast<int64_t>(weights_.size());
}

double NashFlowProblem::inner(const std::vector<double>& x,
                              const std::vector<double>& y) const {
  double acc = 0.0;
  for (size_t i = 0; i < weights_.size(); ++i) acc += weights_[i] * x[i] * y[i];
  return acc;
}

double NashFlowProblem::objective(const std::vector<double>& a) const {
  return problem_.s_h(wrap(a));
}

std::vector<double> NashFlowProblem::gradient(
    const std::vector<double>& a) const {
  return problem_.dual_gradient(wrap(a)).data();
}

double NashFlowProblem::min_zone_margin(const std::vector<double>& a) const {
  return zone_margin(problem_.eb_from_a(wrap(a)).b, problem_.eps_zone())
      .min_margin;
}

std::vector<double> NashFlowProblem::primal_image(
    const std::vector<double>& a) const {
  return problem_.dtp_image(wrap(a)).data();
}

std::vector<double> NashFlowProblem::base_state() const {
  return problem_.vbar().data();
}

void NashFlowProblem::set_base_state(const std::vector<double>& v) {
  problem_.set_vbar(wrap(v));
}

void NashFlowProblem::set_zone_params(double eps_zone, double frac) {
  problem_.set_zone_params(eps_zone, frac);
}

Field build_potential(const SpaceTimeGrid& grid,
                      const std::vector<PotentialMode>& modes) {
  const int m = grid.space_dim();
  Field psi = make_player_field(grid);
  for (const PotentialMode& mode : modes) {
    if (mode.player < 0 || mode.player >= grid.config().players()) {
      throw std::invalid_argument("potential mode: player out of range");
    }
    if (static_cast<int>(mode.freq.size()) != m) {
      throw std::invalid_argument(
          "potential mode: one frequency per spatial dimension required");
    }
    for (int64_t s = 0; s < grid.space_points(); ++s) {
      double value = mode.amp;
      for (int d = 0; d < m; ++d) {
        value *= std::cos(2.0 * M_PI * mode.freq[d] * grid.coordinate(s, d) +
                          mode.phase);
      }
      for (int t = 0; t < grid.nt(); ++t) {
        psi.at(t, s, mode.player) += value;
      }
    }
  }
  return psi;
}

NashDualProblem assemble(const NashScenario& scenario) {
  if (scenario.players < 2) {
    throw std::invalid_argument(
        "nash scenarios need at least two players; the single-player case "
        "belongs to the consistency laboratory");
  }
  PlayerConfig cfg(scenario.players, scenario.state_dim);
  SpaceTimeGrid grid(cfg, scenario.T, scenario.nt, scenario.nx);
  Field psi = build_potential(grid, scenario.psi_modes);
  Field v0 = spatial_gradient(psi);

  Field vbar;
  switch (scenario.base_policy) {
    case BasePolicy::initial_velocity:
      vbar = v0;
      break;
    case BasePolicy::zero:
      vbar = make_vector_field(grid);
      break;
    case BasePolicy::file: {
      vbar = read_field_binary(scenario.base_file);
      if (!vbar.grid().same_as(grid) ||
          vbar.comps() != cfg.tensor_dim()) {
        throw std::invalid_argument("base-state file does not match the grid");
      }
      break;
    }
  }
  return NashDualProblem(grid, std::move(v0), std::move(vbar));
}

Field nash_time_integrate(const SpaceTimeGrid& grid, const Field& v0,
                          int substeps) {
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  const int n = grid.config().tensor_dim();
  const int64_t sp = grid.space_points();

  // single-slice right-hand side apply_L(v x v), hosted on a 3-node aux grid
  SpaceTimeGrid aux(grid.config(), grid.horizon(), 3, grid.nx());
  auto rhs = [&](const std::vector<double>& slice) {
    Field tmp(aux, n);
    for (int t = 0; t < 3; ++t) {
      std::copy(slice.begin(), slice.end(), tmp.slice(t));
    }
    Field out = apply_L(outer_square(tmp));
    return std::vector<double>(out.slice(1), out.slice(1) + sp * n);
  };

  Field v(grid, n);
  std::vector<double> cur(v0.slice(0), v0.slice(0) + sp * n);
  std::copy(cur.begin(), cur.end(), v.slice(0));
  const double h = grid.dt() / substeps;
  auto saxpy = [&](const std::vector<double>& base, double c,
                   const std::vector<double>& dir) {
    std::vector<double> out(base.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = base[i] + c * dir[i];
    return out;
  };
  for (int t = 1; t < grid.nt(); ++t) {
    for (int sub = 0; sub < substeps; ++sub) {
      std::vector<double> k1 = rhs(cur);
      std::vector<double> k2 = rhs(saxpy(cur, 0.5 * h, k1));
      std::vector<double> k3 = rhs(saxpy(cur, 0.5 * h, k2));
      std::vector<double> k4 = rhs(saxpy(cur, h, k3));
      for (size_t i = 0; i < cur.size(); ++i) {
        cur[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
    }
    std::copy(cur.begin(), cur.end(), v.slice(t));
  }
  return v;
}

NashRunOutput run_nash(const NashScenario& scenario) {
  NashFlowProblem problem(assemble(scenario));
  NashRunOutput out;
  out.result =
      run_scheme(problem, problem.core().vbar().data(), scenario.flow);

  for (size_t k = 1; k < out.result.base_states.size(); ++k) {
    std::vector<double> diff = out.result.base_states[k];
    const std::vector<double>& prev = out.result.base_states[k - 1];
    for (size_t i = 0; i < diff.size(); ++i) diff[i] -= prev[i];
    out.audits.base_state_distances.push_back(
        std::sqrt(std::max(0.0, problem.inner(diff, diff))));
  }

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (!out.result.solution) {
    out.audits.strong_residual = nan;
    out.audits.ic_error = nan;
    out.audits.potential_residual = nan;
    out.audits.duality_gap = nan;
    return out;
  }

  const SpaceTimeGrid& grid = problem.core().grid();
  Field v = problem.wrap(*out.result.solution);

  // residual of dv/dt + grad U(v x v) over interior time slices
  Field r = time_derivative(v, TimeStencil::diagnostic);
  Field gu = apply_L(outer_square(v));
  gu *= -1.0;
  r += gu;
  double worst = 0.0;
  for (int t = 1; t + 1 < grid.nt(); ++t) {
    worst = std::max(worst, std::sqrt(std::max(0.0, inner_space(r, r, t))));
  }
  out.audits.strong_residual = worst;

  Field ic = v;
  ic -= problem.core().v0();
  out.audits.ic_error = std::sqrt(std::max(0.0, inner_space(ic, ic, 0)));

  Field v_zero = v;
  v_zero -= project_average(v);
  double pot_res = 0.0;
  recover_potential(v_zero, &pot_res);
  const double vnorm = std::sqrt(std::max(0.0, inner_spacetime(v_zero, v_zero)));
  out.audits.potential_residual = pot_res / std::max(vnorm, 1e-300);

  Field a_final = problem.wrap(out.result.stages.back().a_end);
  const double dual = problem.core().dual_objective(a_final);
  Field vbar_final = problem.wrap(out.result.base_states.back());
  out.audits.duality_gap = duality_gap(v, vbar_final, dual).gap;
  return out;
}

}  // namespace dualflow
