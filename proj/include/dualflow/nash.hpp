#pragma once

#include <string>
#include <vector>

#include "dualflow/dual_core.hpp"
#include "dualflow/flow.hpp"

namespace dualflow {

// Adapter exposing the Nash dual problem to the generic staged driver.
// Flat states are field coefficient vectors in [t][node][component] order;
// the inner product is the trapezoid-in-time, cell-measure-in-space pairing.
class NashFlowProblem : public DualProblemInterface {
 public:
  explicit NashFlowProblem(NashDualProblem problem);

  int64_t dofs() const override;
  double inner(const std::vector<double>& x,
               const std::vector<double>& y) const override;
  double objective(const std::vector<double>& a) const override;
  std::vector<double> gradient(const std::vector<double>& a) const override;
  double min_zone_margin(const std::vector<double>& a) const override;
  std::vector<double> primal_image(const std::vector<double>& a) const override;
  std::vector<double> base_state() const override;
  void set_base_state(const std::vector<double>& v) override;
  void set_zone_params(double eps_zone, double frac) override;

  NashDualProblem& core() { return problem_; }
  Field wrap(const std::vector<double>& data) const;

 private:
  NashDualProblem problem_;
  std::vector<double> weights_;  // per-dof H weights
};

struct PotentialMode {
  int player = 0;
  std::vector<int> freq;  // one integer frequency per spatial dimension
  double amp = 0.0;
  double phase = 0.0;  // applied per dimension: cos(2 pi k x + phase)
};

enum class BasePolicy { initial_velocity, zero, file };

struct NashScenario {
  int players = 2;
  int state_dim = 1;
  int nx = 16;
  int nt = 33;
  double T = 0.25;
  std::vector<PotentialMode> psi_modes;
  BasePolicy base_policy = BasePolicy::initial_velocity;
  std::string base_file;
  FlowConfig flow;
};

Field build_potential(const SpaceTimeGrid& grid,
                      const std::vector<PotentialMode>& modes);

// v0 = grad psi*, extended constant in time; vbar per policy
NashDualProblem assemble(const NashScenario& scenario);

struct NashAudits {
  double strong_residual = 0.0;   // max interior-slice L2 of dv/dt + grad U(v x v)
  double ic_error = 0.0;          // L2 of v(0) - v0
  double potential_residual = 0.0;  // non-gradient part of v - Pi v
  double duality_gap = 0.0;
  std::vector<double> base_state_distances;  // consecutive L2 distances
};

struct NashRunOutput {
  RunResult result;
  NashAudits audits;
};

NashRunOutput run_nash(const NashScenario& scenario);

// forward time integration of dv/dt = -grad U(v x v) from v0, sampled on the
// grid's time nodes with `substeps` RK4 sub-intervals per node spacing; used
// to manufacture near-solution base states
Field nash_time_integrate(const SpaceTimeGrid& grid, const Field& v0,
                          int substeps);

}  // namespace dualflow
