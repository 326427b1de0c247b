#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "dualflow/field.hpp"
#include "dualflow/spectral.hpp"
#include "dualflow/time_ops.hpp"

namespace dualflow {

struct DtPZoneReport {
  double min_margin = 1.0;          // min over nodes of min eig(I+2B)
  double violating_fraction = 0.0;  // fraction of nodes with margin <= eps
  double eps_zone = 0.0;
  std::vector<double> margin_field;  // per node, [t][space]
};

class ZoneExitError : public std::runtime_error {
 public:
  explicit ZoneExitError(DtPZoneReport rep)
      : std::runtime_error("DtP zone violated"), report(std::move(rep)) {}
  DtPZoneReport report;
};

struct EBPair {
  Field e;
  Field b;
};

constexpr double kEpsPsd = 1e-10;
constexpr double kEpsRange = 1e-8;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// c(vbar, v0) = int [ -(v0,vbar) + 1/2 (vbar,vbar) ] dt
double frak_c(const Field& vbar, const Field& v0);

// min eig of I+2B per node, aggregated against eps_zone
DtPZoneReport zone_margin(const Field& b, double eps_zone);

// -1/2 int <Q, (I+2B)^{-1} Q> dt inside the zone; pseudo-inverse with a
// range check on the PSD boundary; -inf when the inner infimum is unbounded.
double k_functional(const Field& q, const Field& b);

// pointwise solve (I+2B) v = vbar - e. Throws ZoneExitError when the margin
// drops to eps_zone or below on more than the allowed fraction of nodes.
Field dtp_map(const Field& e, const Field& b, const Field& vbar,
              double eps_zone = 0.0, double violating_fraction_max = 0.0);

struct ConsistentDual {
  Field vbar;
  Field e;
  Field b;
};

// vbar = G(v-u), E+ = -Gu, B+ = (G-I)/2; dtp recovery returns v where G > 0
ConsistentDual construct_consistent_dual(const Field& v, const Field& g_density,
                                         const Field& u);

// The Nash dual problem at a fixed base state. dual_objective is the concave
// functional the dual problem maximizes; the flow descends
// s_h(a) = -dual_objective(a) + const.
class NashDualProblem {
 public:
  NashDualProblem(const SpaceTimeGrid& grid, Field v0, Field vbar);

  const SpaceTimeGrid& grid() const { return grid_; }
  const Field& v0() const { return v0_; }
  const Field& vbar() const { return vbar_; }
  void set_vbar(Field vbar);

  void set_zone_params(double eps_zone, double violating_fraction_max) {
    eps_zone_ = eps_zone;
    violating_fraction_max_ = violating_fraction_max;
  }
  double eps_zone() const { return eps_zone_; }

  EBPair eb_from_a(const Field& a) const;
  double dual_objective(const Field& a) const;
  double dual_objective_pair(const EBPair& pair) const;
  double s_h(const Field& a) const { return -dual_objective(a); }

  // primal image of the dual state (DtP of eb_from_a)
  Field dtp_image(const Field& a) const;

  // exact gradient of the discrete s_h over {da : da(T)=0}
  Field dual_gradient(const Field& a) const;

 private:
  SpaceTimeGrid grid_;
  Field v0_;
  Field vbar_;
  double eps_zone_ = 1e-3;
  double violating_fraction_max_ = 0.0;
};

struct GapReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

GapReport duality_gap(const Field& v, const Field& vbar, double dual_value);

}  // namespace dualflow
