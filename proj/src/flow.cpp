#include "dualflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>

#include "dualflow/dual_core.hpp"

namespace dualflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double norm_of(DualProblemInterface& p, const std::vector<double>& g) {
  return std::sqrt(std::max(0.0, p.inner(g, g)));
}

std::vector<double> axpy(const std::vector<double>& a, double c,
                         const std::vector<double>& g) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + c * g[i];
  return out;
}

struct Checkpoints {
  // dense recent window for accurate step-back, geometric tail for long jumps
  std::deque<std::pair<double, std::vector<double>>> recent;
  std::vector<std::pair<double, std::vector<double>>> geo;
  double fine_spacing;
  double window;

  void push(double s, const std::vector<double>& a, bool force = false) {
    if (!force && !recent.empty() && s - recent.back().first < fine_spacing) {
      return;
    }
    recent.emplace_back(s, a);
    while (!recent.empty() && recent.front().first < s - window) {
      auto& front = recent.front();
      if (geo.empty() || front.first >= 1.5 * geo.back().first + 1e-12) {
        geo.push_back(std::move(front));
      }
      recent.pop_front();
    }
  }

  // linear interpolation at target (target must be <= latest stored s)
  std::vector<double> interpolate(double target) const {
    const std::pair<double, std::vector<double>>* lo = nullptr;
    const std::pair<double, std::vector<double>>* hi = nullptr;
    auto scan = [&](const std::pair<double, std::vector<double>>& pt) {
      if (pt.first <= target && (!lo || pt.first > lo->first)) lo = &pt;
      if (pt.first >= target && (!hi || pt.first < hi->first)) hi = &pt;
    };
    for (const auto& pt : geo) scan(pt);
    for (const auto& pt : recent) scan(pt);
    if (!lo && !hi) throw StiffnessError("no checkpoints stored");
    if (!lo) return hi->second;
    if (!hi || hi->first == lo->first) return lo->second;
    const double w = (target - lo->first) / (hi->first - lo->first);
    std::vector<double> out(lo->second.size());
    for (size_t i = 0; i < out.size(); ++i) {
      out[i] = (1.0 - w) * lo->second[i] + w * hi->second[i];
    }
    return out;
  }
};

}  // namespace

std::string to_string(ExitReason r) {
  switch (r) {
    case ExitReason::equilibrated: return "equilibrated";
    case ExitReason::zone_exit: return "zone_exit";
    case ExitReason::cap: return "cap";
  }
  return "?";
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::solved: return "solved";
    case RunStatus::stage_budget_exhausted: return "stage_budget_exhausted";
    case RunStatus::stalled: return "stalled";
  }
  return "?";
}

StageRecord run_stage(DualProblemInterface& problem, const FlowConfig& cfg,
                      int stage_index, std::vector<FlowSample>* samples) {
  StageRecord rec;
  rec.k = stage_index;
  rec.nu_used = cfg.nu;

  std::vector<double> a(problem.dofs(), 0.0);
  std::vector<double> g = problem.gradient(a);  // a=0 is always inside the zone
  double gnorm = norm_of(problem, g);

  double s = 0.0;
  double ds = std::min(cfg.ds_init, cfg.ds_max);
  int consecutive_accepts = 0;
  int accepted = 0;
  bool last_reject_was_zone = false;

  Checkpoints cp;
  cp.fine_spacing = cfg.nu / 16.0;
  cp.window = 8.0 * cfg.nu;
  cp.push(0.0, a);

  rec.dissipation_history.emplace_back(s, gnorm);
  auto record_sample = [&]() {
    if (!samples) return;
    samples->push_back({stage_index, s, gnorm, problem.min_zone_margin(a),
                        problem.objective(a),
                        cfg.record_state ? a : std::vector<double>{}});
  };
  record_sample();

  while (true) {
    if (gnorm <= cfg.tau) {
      rec.exit_reason = ExitReason::equilibrated;
      break;
    }
    if (s >= cfg.mu) {
      rec.exit_reason = ExitReason::cap;
      break;
    }
    const double step = std::min(ds, cfg.mu - s);
    std::vector<double> trial = axpy(a, -step, g);

    bool zone_reject = false;
    std::vector<double> g_trial;
    double g_trial_norm = 0.0;
    try {
      g_trial = problem.gradient(trial);
      g_trial_norm = norm_of(problem, g_trial);
    } catch (const ZoneExitError&) {
      zone_reject = true;
    }

    if (!zone_reject && g_trial_norm <= gnorm * (1.0 + 1e-12)) {
      a = std::move(trial);
      g = std::move(g_trial);
      gnorm = g_trial_norm;
      s += step;
      ++accepted;
      cp.push(s, a);
      rec.dissipation_history.emplace_back(s, gnorm);
      if (++consecutive_accepts >= 5) {
        ds = std::min(ds * 1.5, cfg.ds_max);
        consecutive_accepts = 0;
      }
      if (samples && accepted % cfg.record_stride == 0) record_sample();
      continue;
    }

    // rejected: halve and retry; persistent zone rejections mean the flow
    // has reached the zone boundary
    last_reject_was_zone = zone_reject;
    consecutive_accepts = 0;
    ds *= 0.5;
    if (ds < cfg.ds_min) {
      if (last_reject_was_zone) {
        rec.exit_reason = ExitReason::zone_exit;
        break;
      }
      throw StiffnessError(
          "gradient flow step underflow without zone exit (stage " +
          std::to_string(stage_index) + ", s=" + std::to_string(s) + ")");
    }
  }

  rec.s_exit = s;
  rec.a_end = a;
  cp.push(s, a, true);

  if (rec.exit_reason != ExitReason::zone_exit) {
    rec.s_star = rec.exit_reason == ExitReason::cap ? cfg.mu : s;
    rec.a_star = a;
    rec.dissipation_at_s_star = gnorm;
    return rec;
  }

  // zone exit: step back nu in fake time; enlarge nu (doubling, bounded by
  // s_exit/2) until the checkpointed state is strictly inside the zone
  double nu = cfg.nu;
  while (true) {
    const double target = rec.s_exit - nu;
    if (target < 0.0) {
      throw StiffnessError("zone exit too early for the configured step-back");
    }
    std::vector<double> a_star = cp.interpolate(target);
    bool inside = false;
    double g_star_norm = 0.0;
    try {
      std::vector<double> g_star = problem.gradient(a_star);
      g_star_norm = norm_of(problem, g_star);
      inside = true;
    } catch (const ZoneExitError&) {
      inside = false;
    }
    if (inside) {
      rec.s_star = target;
      rec.a_star = std::move(a_star);
      rec.nu_used = nu;
      rec.dissipation_at_s_star = g_star_norm;
      break;
    }
    nu *= 2.0;
    if (nu > rec.s_exit / 2.0) {
      throw StiffnessError("no in-zone checkpoint found for the switch");
    }
  }
  return rec;
}

std::vector<double> switch_base_state(const StageRecord& record,
                                      DualProblemInterface& problem) {
  return problem.primal_image(record.a_star);
}

RunResult run_scheme(DualProblemInterface& problem,
                     const std::vector<double>& vbar1, const FlowConfig& cfg) {
  problem.set_zone_params(cfg.eps_zone, cfg.violating_fraction_max);
  problem.set_base_state(vbar1);

  RunResult result;
  result.base_states.push_back(vbar1);

  for (int k = 1; k <= cfg.max_stages; ++k) {
    StageRecord rec = run_stage(problem, cfg, k, &result.samples);
    const bool equilibrated = rec.exit_reason == ExitReason::equilibrated;
    result.stages.push_back(std::move(rec));
    const StageRecord& stage = result.stages.back();

    if (equilibrated) {
      result.final_status = RunStatus::solved;
      result.solution = problem.primal_image(stage.a_end);
      return result;
    }

    std::vector<double> vbar_next = switch_base_state(stage, problem);
    const std::vector<double>& vbar_prev = result.base_states.back();
    double sup = 0.0;
    for (size_t i = 0; i < vbar_next.size(); ++i) {
      sup = std::max(sup, std::abs(vbar_next[i] - vbar_prev[i]));
    }
    if (sup < cfg.stall_tol) {
      // keep the repeated state so callers can see the identical switch
      result.base_states.push_back(std::move(vbar_next));
      result.final_status = RunStatus::stalled;
      return result;
    }
    result.base_states.push_back(vbar_next);
    problem.set_base_state(vbar_next);
  }

  result.final_status = RunStatus::stage_budget_exhausted;
  return result;
}

DissipationReport verify_dissipation(const RunResult& result) {
  DissipationReport rep;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& stage : result.stages) {
    for (const auto& [s, gnorm] : stage.dissipation_history) {
      if (s > stage.s_star + 1e-15) break;  // discarded by the step-back
      if (gnorm > prev) {
        const double rel = (gnorm - prev) / std::max(prev, 1e-300);
        rep.worst_relative_increase = std::max(rep.worst_relative_increase, rel);
      }
      prev = gnorm;
    }
    // the switch hands the next stage exactly this dissipation value
    if (stage.dissipation_at_s_star > prev) {
      const double rel =
          (stage.dissipation_at_s_star - prev) / std::max(prev, 1e-300);
      rep.worst_relative_increase = std::max(rep.worst_relative_increase, rel);
    }
    prev = std::min(prev, stage.dissipation_at_s_star);
  }
  rep.pass = rep.worst_relative_increase <= 1e-9;
  return rep;
}

void write_run_csv(const RunResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "stage,s,grad_norm,min_zone_margin,objective\n";
  char buf[128];
  for (const auto& sample : result.samples) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n",
                  sample.stage, sample.s, sample.grad_norm,
                  sample.min_zone_margin, sample.objective);
    out << buf;
  }
}

}  // namespace dualflow
