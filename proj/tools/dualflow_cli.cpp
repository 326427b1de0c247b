// Command-line front end: toy closed-form runs, Nash desk runs, the
// single-player consistency ladder, and a quick self-test suite. Every
// subcommand writes a manifest (resolved config + output checksums) next to
// its outputs; runs with identical manifests are bit-identical.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dualflow/dual_core.hpp"
#include "dualflow/flow.hpp"
#include "dualflow/hj.hpp"
#include "dualflow/manifest.hpp"
#include "dualflow/nash.hpp"
#include "dualflow/rng.hpp"
#include "dualflow/serialization.hpp"
#include "dualflow/toy.hpp"

namespace {

using nlohmann::json;

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(std::stod(item));
  }
  return out;
}

json flow_to_json(const dualflow::FlowConfig& f) {
  return json{{"tau", f.tau},
              {"nu", f.nu},
              {"mu", f.mu},
              {"eps_zone", f.eps_zone},
              {"violating_fraction_max", f.violating_fraction_max},
              {"ds_init", f.ds_init},
              {"ds_min", f.ds_min},
              {"ds_max", f.ds_max},
              {"max_stages", f.max_stages},
              {"record_stride", f.record_stride}};
}

void flow_from_json(const json& j, dualflow::FlowConfig& f) {
  f.tau = j.value("tau", f.tau);
  f.nu = j.value("nu", f.nu);
  f.mu = j.value("mu", f.mu);
  f.eps_zone = j.value("eps_zone", f.eps_zone);
  f.violating_fraction_max =
      j.value("violating_fraction_max", f.violating_fraction_max);
  f.ds_init = j.value("ds_init", f.ds_init);
  f.ds_min = j.value("ds_min", f.ds_min);
  f.ds_max = j.value("ds_max", f.ds_max);
  f.max_stages = j.value("max_stages", f.max_stages);
  f.record_stride = j.value("record_stride", f.record_stride);
}

int run_toy(double c, const std::string& vbar_text, const std::string& csv,
            dualflow::FlowConfig flow) {
  const std::vector<double> vb = parse_csv_doubles(vbar_text);
  if (vb.size() != 2) {
    std::cerr << "toy: --vbar needs exactly two comma-separated values\n";
    return 1;
  }
  flow.record_state = true;
  dualflow::RunResult result = dualflow::toy_run(c, {vb[0], vb[1]}, flow);

  std::ofstream out(csv);
  if (!out) {
    std::cerr << "toy: cannot open " << csv << "\n";
    return 1;
  }
  out << "stage,s,d1,d2,grad_norm\n";
  char buf[160];
  for (const auto& sample : result.samples) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n",
                  sample.stage, sample.s, sample.state[0], sample.state[1],
                  sample.grad_norm);
    out << buf;
  }
  out.close();

  std::cout << "status: " << dualflow::to_string(result.final_status) << "\n";
  std::cout << "stages: " << result.stages.size() << "\n";
  if (result.solution) {
    std::printf("solution: (%.12g, %.12g)\n", (*result.solution)[0],
                (*result.solution)[1]);
  }

  dualflow::RunManifest manifest;
  manifest.command = "toy";
  manifest.config = {{"c", c},
                     {"vbar", {vb[0], vb[1]}},
                     {"csv", csv},
                     {"flow", flow_to_json(flow)}};
  manifest.add_output(csv);
  manifest.write(csv + ".manifest.json");
  return result.final_status == dualflow::RunStatus::solved ? 0 : 2;
}

int run_nash(const std::string& config_path, const std::string& out_dir) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "nash: cannot open config " << config_path << "\n";
    return 1;
  }
  json j = json::parse(in);

  dualflow::NashScenario sc;
  sc.players = j.value("players", 2);
  sc.state_dim = j.value("state_dim", 1);
  sc.nx = j.value("nx", 16);
  sc.nt = j.value("nt", 33);
  sc.T = j.value("T", 0.25);
  sc.flow.tau = 1e-6;
  sc.flow.nu = 0.05;
  sc.flow.mu = 50.0;
  sc.flow.max_stages = 20;
  if (j.contains("flow")) flow_from_json(j["flow"], sc.flow);
  const std::string policy = j.value("base_policy", "initial_velocity");
  if (policy == "initial_velocity") {
    sc.base_policy = dualflow::BasePolicy::initial_velocity;
  } else if (policy == "zero") {
    sc.base_policy = dualflow::BasePolicy::zero;
  } else if (policy == "file") {
    sc.base_policy = dualflow::BasePolicy::file;
    sc.base_file = j.at("base_file").get<std::string>();
  } else {
    std::cerr << "nash: unknown base_policy " << policy << "\n";
    return 1;
  }
  for (const auto& mode : j.value("psi_modes", json::array())) {
    dualflow::PotentialMode pm;
    pm.player = mode.value("player", 0);
    pm.freq = mode.value("freq", std::vector<int>{});
    pm.amp = mode.value("amp", 0.0);
    pm.phase = mode.value("phase", 0.0);
    sc.psi_modes.push_back(std::move(pm));
  }

  std::filesystem::create_directories(out_dir);
  dualflow::NashRunOutput out = dualflow::run_nash(sc);

  dualflow::RunManifest manifest;
  manifest.command = "nash";
  manifest.config = j;

  const std::string run_csv = out_dir + "/run.csv";
  dualflow::write_run_csv(out.result, run_csv);
  manifest.add_output(run_csv);

  dualflow::NashFlowProblem shape(dualflow::assemble(sc));
  for (size_t k = 0; k < out.result.base_states.size(); ++k) {
    const std::string path =
        out_dir + "/base_state_" + std::to_string(k + 1) + ".bin";
    dualflow::write_field_binary(shape.wrap(out.result.base_states[k]), path);
    manifest.add_output(path);
  }
  if (out.result.solution) {
    const std::string path = out_dir + "/solution.bin";
    dualflow::write_field_binary(shape.wrap(*out.result.solution), path);
    manifest.add_output(path);
  }

  json audits = {{"strong_residual", out.audits.strong_residual},
                 {"ic_error", out.audits.ic_error},
                 {"potential_residual", out.audits.potential_residual},
                 {"duality_gap", out.audits.duality_gap},
                 {"base_state_distances", out.audits.base_state_distances},
                 {"status", dualflow::to_string(out.result.final_status)},
                 {"stages", out.result.stages.size()}};
  const std::string audits_path = out_dir + "/audits.json";
  {
    std::ofstream af(audits_path);
    af << audits.dump(2) << "\n";
  }
  manifest.add_output(audits_path);
  manifest.write(out_dir + "/manifest.json");

  std::cout << audits.dump(2) << "\n";
  return out.result.final_status == dualflow::RunStatus::solved ? 0 : 2;
}

int run_consistency(int p, int nx, int nt, double T, double amp,
                    const std::string& ladder_text, const std::string& csv) {
  const std::vector<double> sigmas = parse_csv_doubles(ladder_text);
  dualflow::PlayerConfig cfg(1, p);
  dualflow::SpaceTimeGrid grid(cfg, T, nt, nx);

  // terminal potential amp * cos(2 pi x_1), zero mean
  std::vector<double> psi_star(grid.space_points());
  for (int64_t s = 0; s < grid.space_points(); ++s) {
    psi_star[s] = amp * std::cos(2.0 * M_PI * grid.coordinate(s, 0));
  }

  dualflow::Field psi = dualflow::hopf_lax_potential(psi_star, grid);
  dualflow::Field v = dualflow::velocity_from_potential(psi);
  dualflow::Field v0(grid, cfg.tensor_dim());
  for (int t = 0; t < grid.nt(); ++t) {
    std::copy(v.slice(0), v.slice(0) + grid.space_points() * cfg.tensor_dim(),
              v0.slice(t));
  }

  std::ofstream out(csv);
  if (!out) {
    std::cerr << "consistency: cannot open " << csv << "\n";
    return 1;
  }
  out << "m,sigma,l1_vbar,gap,recovery_err,min_rho\n";
  char buf[200];

  // m = 0: the identity base state (G, u) = (I, 0)
  {
    dualflow::Field g_id = dualflow::make_matrix_field(grid);
    for (int t = 0; t < grid.nt(); ++t) {
      double* gm = g_id.slice(t);
      const int n = cfg.tensor_dim();
      for (int64_t s = 0; s < grid.space_points(); ++s) {
        for (int c = 0; c < n; ++c) gm[s * n * n + c * n + c] = 1.0;
      }
    }
    dualflow::Field u0(grid, cfg.tensor_dim());
    dualflow::ConsistencyReport rep =
        dualflow::verify_consistency(v, g_id, u0, v0);
    std::snprintf(buf, sizeof(buf), "0,0,%.17g,%.17g,%.17g,%.17g\n", 0.0,
                  rep.gap, rep.recovery_err, 1.0);
    out << buf;
  }

  auto members = dualflow::build_base_state_ladder(v, sigmas);
  for (size_t m = 0; m < members.size(); ++m) {
    const auto& mem = members[m];
    dualflow::ConsistencyReport rep =
        dualflow::verify_consistency(v, mem.g, mem.u, v0);
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  m + 1, mem.sigma, mem.l1_vbar, rep.gap, rep.recovery_err,
                  mem.min_rho);
    out << buf;
  }
  out.close();

  dualflow::RunManifest manifest;
  manifest.command = "consistency";
  manifest.config = {{"p", p},     {"nx", nx},   {"nt", nt},
                     {"T", T},     {"amp", amp}, {"sigma_ladder", sigmas},
                     {"csv", csv}};
  manifest.add_output(csv);
  manifest.write(csv + ".manifest.json");
  return 0;
}

struct SelfTest {
  std::string name;
  bool pass;
};

int run_selftest(uint64_t seed) {
  using namespace dualflow;
  std::vector<SelfTest> results;
  Rng rng(seed);

  // operator adjointness and the trace identity
  {
    bool adj = true;
    bool trace = true;
    for (auto [N, p] : {std::pair{2, 1}, {2, 2}, {3, 1}}) {
      PlayerConfig cfg(N, p);
      const int n = cfg.tensor_dim();
      for (int draw = 0; draw < 200; ++draw) {
        Eigen::MatrixXd a(n, n);
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < n; ++c) a(r, c) = rng.normal();
        }
        a = (0.5 * (a + a.transpose())).eval();
        Eigen::VectorXd y(N);
        for (int i = 0; i < N; ++i) y(i) = rng.normal();
        const Eigen::VectorXd ua = apply_U(a, cfg);
        const Eigen::MatrixXd uay = apply_U_adjoint(y, cfg);
        const double lhs = ua.dot(y);
        const double rhs = (a.array() * uay.array()).sum();
        if (std::abs(lhs - rhs) > 1e-10) adj = false;
        if (std::abs(trace_U_adjoint(y, cfg) - 0.5 * p * y.sum()) > 1e-14) {
          trace = false;
        }
      }
    }
    results.push_back({"operator adjointness", adj});
    results.push_back({"trace identity", trace});
  }

  // exact discrete integration by parts of the dual constraint
  {
    PlayerConfig cfg(2, 1);
    SpaceTimeGrid grid(cfg, 0.5, 9, 8);
    Field a(grid, cfg.tensor_dim());
    for (double& x : a.data()) x = rng.normal();
    double* last = a.slice(grid.nt() - 1);
    for (int64_t i = 0; i < grid.space_points() * cfg.tensor_dim(); ++i) {
      last[i] = 0.0;
    }
    NashDualProblem prob(grid, Field(grid, cfg.tensor_dim()),
                         Field(grid, cfg.tensor_dim()));
    EBPair pair = prob.eb_from_a(a);
    const double res = constraint_residual(pair.e, pair.b);
    results.push_back({"weak constraint identity", res <= 1e-10});
  }

  // toy closed forms against the generic driver
  {
    FlowConfig fc;
    fc.tau = 1e-9;
    fc.eps_zone = 1e-6;
    RunResult r = toy_run(0.2, {0.0, 0.0}, fc);
    const bool ok = r.final_status == RunStatus::solved && r.solution &&
                    std::abs((*r.solution)[0] - 0.2) < 1e-8 &&
                    std::abs((*r.solution)[1] - 0.2) < 1e-8;
    results.push_back({"toy single-stage attractor", ok});
  }

  // serialization round trip
  {
    PlayerConfig cfg(2, 1);
    SpaceTimeGrid grid(cfg, 0.25, 5, 4);
    Field f(grid, cfg.tensor_dim());
    for (double& x : f.data()) x = rng.normal();
    const std::string path = "selftest_roundtrip.bin";
    write_field_binary(f, path);
    Field g = read_field_binary(path);
    bool ok = g.data() == f.data();
    std::filesystem::remove(path);
    results.push_back({"field binary round trip", ok});
  }

  bool all = true;
  for (const auto& r : results) {
    std::printf("%-32s %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL");
    all = all && r.pass;
  }
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual variational solver for quadratic PDE systems"};
  app.require_subcommand(1);

  // toy
  auto* toy = app.add_subcommand("toy", "two-unknown closed-form model run");
  double toy_c = 0.0;
  std::string toy_vbar = "0,0";
  std::string toy_csv = "toy_run.csv";
  dualflow::FlowConfig toy_flow;
  toy_flow.tau = 1e-9;
  toy_flow.eps_zone = 1e-6;
  toy->add_option("--c", toy_c, "model constant c")->required();
  toy->add_option("--vbar", toy_vbar, "initial base state a,b");
  toy->add_option("--csv", toy_csv, "output CSV path");
  toy->add_option("--tau", toy_flow.tau, "equilibration threshold");
  toy->add_option("--nu", toy_flow.nu, "switch step-back");
  toy->add_option("--mu", toy_flow.mu, "fake-time cap per stage");
  toy->add_option("--max-stages", toy_flow.max_stages, "stage budget");
  toy->add_option("--ds-init", toy_flow.ds_init, "initial descent step");
  toy->add_option("--ds-max", toy_flow.ds_max, "descent step cap");

  // nash
  auto* nash = app.add_subcommand("nash", "multi-player desk run");
  std::string nash_config;
  std::string nash_out = ".";
  nash->add_option("--config", nash_config, "scenario JSON")->required();
  nash->add_option("--out", nash_out, "output directory");

  // consistency
  auto* cons =
      app.add_subcommand("consistency", "single-player base-state ladder");
  int cons_p = 1, cons_nx = 256, cons_nt = 128;
  double cons_T = 0.5, cons_amp = 0.05;
  std::string cons_ladder = "0.2,0.1,0.05,0.025";
  std::string cons_csv = "consistency.csv";
  cons->add_option("--p", cons_p, "spatial dimension");
  cons->add_option("--nx", cons_nx, "spatial resolution");
  cons->add_option("--nt", cons_nt, "time resolution");
  cons->add_option("--T", cons_T, "horizon");
  cons->add_option("--amp", cons_amp, "terminal potential amplitude");
  cons->add_option("--sigma-ladder", cons_ladder, "mollification widths");
  cons->add_option("--csv", cons_csv, "output CSV path");

  // selftest
  auto* self = app.add_subcommand("selftest", "invariant suite");
  uint64_t seed = 12345;
  self->add_option("--seed", seed, "PRNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // --help is a success path
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage errors map to a single well-known code
  }

  try {
    if (toy->parsed()) return run_toy(toy_c, toy_vbar, toy_csv, toy_flow);
    if (nash->parsed()) return run_nash(nash_config, nash_out);
    if (cons->parsed()) {
      return run_consistency(cons_p, cons_nx, cons_nt, cons_T, cons_amp,
                             cons_ladder, cons_csv);
    }
    if (self->parsed()) return run_selftest(seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
