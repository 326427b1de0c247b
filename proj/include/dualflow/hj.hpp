#pragma once

#include <vector>

#include "dualflow/dual_core.hpp"

namespace dualflow {

// Smooth periodic interpolation of one spatial sample set, used to evaluate
// terminal potentials between grid nodes during Hopf-Lax refinement.
class TrigInterpolant {
 public:
  TrigInterpolant(const SpaceTimeGrid& grid, std::vector<double> samples);
  double value(const std::vector<double>& x) const;

 private:
  int nx_;
  int m_;
  int64_t sp_;
  std::vector<double> coef_;
  const SpaceTimeGrid* grid_;
};

// psi(t,x) = min_y [ psi*(y) + |x-y|^2 / (2t) ], minimized over the periodic
// lift (3 copies per dimension) and polished by iterated quadratic fits on
// the interpolated potential. The viscosity solution of
// d/dt psi + |grad psi|^2 / 2 = 0 with psi(0) = psi*.
std::vector<double> hopf_lax_slice(const std::vector<double>& psi_star,
                                   double t, const SpaceTimeGrid& grid);

// all time slices; the t=0 slice is psi* itself
Field hopf_lax_potential(const std::vector<double>& psi_star,
                         const SpaceTimeGrid& grid);

Field velocity_from_potential(const Field& psi);

struct TransportDensity {
  Field rho;               // scalar (single-player) space-time field
  double min_rho = 0.0;
  double mass_error = 0.0;  // worst per-slice deviation of the integral from 1
};

// Solves d/dt rho + div(rho u) = 0 backward from rho(T) = 1 with a
// conservative MUSCL / local Lax-Friedrichs finite-volume sweep,
// CFL-substepped; throws on positivity loss below 1e-10.
TransportDensity solve_transport_backward(const Field& u);

struct LadderMember {
  double sigma = 0.0;
  Field u;       // mollified velocity
  Field rho;     // transported density
  Field vbar;    // rho * (v - u)
  Field g;       // rho * I (matrix field)
  double l1_vbar = 0.0;
  double min_rho = 0.0;
};

// base-state ladder u_m = mollify(v, sigma_m), rho_m from backward transport,
// vbar_m = rho_m (v - u_m)
std::vector<LadderMember> build_base_state_ladder(
    const Field& v, const std::vector<double>& sigmas);

struct ConsistencyReport {
  double primal = 0.0;        // relative energy of v against vbar
  double dual = 0.0;          // dual objective at the induced dual state
  double gap = 0.0;
  double recovery_raw = 0.0;  // sup |dtp(E+,B+,vbar) - v| (algebraic identity)
  double recovery_err = 0.0;  // sup recovery error via the integrated dual state
  double min_margin = 0.0;    // min eig(I + 2B+) over nodes
  double constraint_res = 0.0;
};

// Builds (vbar, E+, B+) from (G, u), integrates E+ to a dual state a with
// a(T)=0, and reports the duality gap plus recovery errors of the
// dual-to-primal map. Nodes at or below margin 1e-8 are excluded from the
// recovery sup-norms.
ConsistencyReport verify_consistency(const Field& v, const Field& g_density,
                                     const Field& u, const Field& v0);

}  // namespace dualflow
