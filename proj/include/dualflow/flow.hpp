#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualflow {

// Abstract dual problem advanced by the staged gradient-flow driver. States
// and gradients are flat coefficient vectors; `inner` supplies the Hilbert
// inner product the descent is measured in. `gradient` must throw
// ZoneExitError whenever the DtP zone condition fails beyond the allowed
// node fraction.
class DualProblemInterface {
 public:
  virtual ~DualProblemInterface() = default;

  virtual int64_t dofs() const = 0;
  virtual double inner(const std::vector<double>& x,
                       const std::vector<double>& y) const = 0;
  virtual double objective(const std::vector<double>& a) const = 0;
  virtual std::vector<double> gradient(const std::vector<double>& a) const = 0;
  virtual double min_zone_margin(const std::vector<double>& a) const = 0;
  virtual std::vector<double> primal_image(const std::vector<double>& a) const = 0;
  virtual std::vector<double> base_state() const = 0;
  virtual void set_base_state(const std::vector<double>& v) = 0;
  virtual void set_zone_params(double eps_zone, double violating_frac) = 0;
};

struct FlowConfig {
  double tau = 1e-6;     // equilibration threshold on the gradient H-norm
  double nu = 1e-3;      // fake-time step-back before a base-state switch
  double mu = 50.0;      // fake-time cap per stage
  double eps_zone = 1e-3;
  double violating_fraction_max = 0.0;
  double ds_init = 1e-3;
  double ds_min = 1e-11;
  double ds_max = 1.0;
  int max_stages = 20;
  int record_stride = 1;      // sampling cadence for CSV rows
  bool record_state = false;  // attach the dual state to every sample
  double stall_tol = 1e-14;   // sup-norm for identical consecutive base states
};

enum class ExitReason { equilibrated, zone_exit, cap };
enum class RunStatus { solved, stage_budget_exhausted, stalled };

std::string to_string(ExitReason r);
std::string to_string(RunStatus s);

struct FlowSample {
  int stage;
  double s;
  double grad_norm;
  double min_zone_margin;  // NaN when not evaluated at this sample
  double objective;        // NaN when not evaluated at this sample
  std::vector<double> state;  // dual state, only with FlowConfig::record_state
};

struct StageRecord {
  int k = 0;
  ExitReason exit_reason = ExitReason::equilibrated;
  double s_exit = 0.0;
  double s_star = 0.0;
  double nu_used = 0.0;
  std::vector<std::pair<double, double>> dissipation_history;  // (s, |grad|)
  double dissipation_at_s_star = 0.0;
  std::vector<double> a_star;  // dual state used for the switch
  std::vector<double> a_end;   // final accepted dual state
};

struct RunResult {
  std::vector<StageRecord> stages;
  RunStatus final_status = RunStatus::stage_budget_exhausted;
  std::vector<std::vector<double>> base_states;  // vbar^1, vbar^2, ...
  std::optional<std::vector<double>> solution;
  std::vector<FlowSample> samples;
};

class StiffnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// one descent at a fixed base state, from a = 0
StageRecord run_stage(DualProblemInterface& problem, const FlowConfig& cfg,
                      int stage_index, std::vector<FlowSample>* samples = nullptr);

// DtP image at the checkpointed a(s_star) under the current (old) base state
std::vector<double> switch_base_state(const StageRecord& record,
                                      DualProblemInterface& problem);

RunResult run_scheme(DualProblemInterface& problem,
                     const std::vector<double>& vbar1, const FlowConfig& cfg);

struct DissipationReport {
  bool pass = true;
  double worst_relative_increase = 0.0;
};

// scans the concatenated dissipation history, switches included
DissipationReport verify_dissipation(const RunResult& result);

void write_run_csv(const RunResult& result, const std::string& path);

}  // namespace dualflow
