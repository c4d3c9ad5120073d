// veh-offload: command-line front end for the scheduler library.

#include "vehoff/harness.hpp"
#include "vehoff/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace vehoff;

namespace {

constexpr int kConfigError = 2;
constexpr int kInfeasible = 3;

std::vector<PolicyId> parse_policies(const std::vector<std::string>& names) {
  std::vector<PolicyId> out;
  for (const auto& raw : names) {
    std::stringstream ss(raw);
    std::string name;
    while (std::getline(ss, name, ',')) {
      auto p = parse_policy(name);
      if (!p) throw ConfigError("unknown policy " + name);
      out.push_back(*p);
    }
  }
  return out;
}

std::vector<double> parse_values(const std::vector<std::string>& raw) {
  std::vector<double> out;
  for (const auto& r : raw) {
    std::stringstream ss(r);
    std::string v;
    while (std::getline(ss, v, ',')) {
      try {
        out.push_back(std::stod(v));
      } catch (const std::exception&) {
        throw ConfigError("not a number: " + v);
      }
    }
  }
  return out;
}

struct Common {
  std::string scenario;
  std::vector<std::string> policies{"proposed"};
  int trials = 500;
  std::uint64_t seed = 42;
  int threads = 0;
  int quantize_levels = 0;
  std::string out;
  std::string summary;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "scenario JSON file")->required();
  cmd->add_option("--policy", c.policies, "proposed|da|pao|pas3|pp (repeat or comma separate)");
  cmd->add_option("--trials", c.trials, "Monte-Carlo trials");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  cmd->add_option("--quantize-levels", c.quantize_levels,
                  "round buffers up to this many levels after each slot (0 = off)");
  cmd->add_option("--out", c.out, "results CSV")->required();
  cmd->add_option("--summary", c.summary, "human-readable summary file");
}

ExperimentConfig make_config(const Common& c) {
  ExperimentConfig cfg;
  cfg.scenario = load_scenario(c.scenario);
  cfg.policies = parse_policies(c.policies);
  cfg.trials = c.trials;
  cfg.master_seed = c.seed;
  cfg.threads = c.threads;
  if (c.quantize_levels > 0) {
    if (c.quantize_levels < 2) throw ConfigError("--quantize-levels must be >= 2");
    double top = 0.0;
    for (const auto& t : cfg.scenario.tasks) top = std::max(top, t.size_bits);
    cfg.execution.quantizer = Quantizer{c.quantize_levels, top};
  }
  return cfg;
}

void finish(const ExperimentResult& r, const Common& c) {
  const auto rows = aggregate(r);
  emit_results(rows, c.out, c.summary);
  std::cout << results_summary(rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-time-scale vehicular task offloading simulator"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "evaluate policies on a scenario");
  add_common(run, run_opts);

  Common sweep_opts;
  std::string sweep_param;
  std::vector<std::string> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "evaluate policies across one parameter");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", sweep_param, "task_size|arrival|gamma|omega1|vehicles")->required();
  sweep->add_option("--values", sweep_values, "comma separated values")->required();

  std::string dp_scenario;
  int dp_levels = 21;
  long long dp_budget = 5'000'000;
  auto* dpo = app.add_subcommand("dp-oracle", "exact DP on the quantized buffer grid");
  dpo->add_option("--scenario", dp_scenario)->required();
  dpo->add_option("--levels", dp_levels, "buffer quantization levels");
  dpo->add_option("--budget", dp_budget, "largest state count to attempt");

  std::string tr_path, tr_scenario, tr_out;
  auto* est = app.add_subcommand("estimate-transitions", "estimate transition matrices from traces");
  est->add_option("--traces", tr_path, "CSV with trial,vehicle,slot,waypoint_index")->required();
  est->add_option("--scenario", tr_scenario, "scenario whose routes the traces index");
  est->add_option("--out", tr_out, "write the scenario with estimated matrices here");

  std::string pa_scenario, pa_out;
  int pa_super = 1;
  auto* pre = app.add_subcommand("prealloc", "dump the first pre-allocation as CSV");
  pre->add_option("--scenario", pa_scenario)->required();
  pre->add_option("--out", pa_out)->required();
  pre->add_option("--super-slot", pa_super, "super slot whose first slot anchors the plan");

  SyntheticOptions syn;
  std::string syn_out;
  auto* gen = app.add_subcommand("synthesize", "write a synthetic road scenario");
  gen->add_option("--out", syn_out)->required();
  gen->add_option("--vehicles", syn.vehicles);
  gen->add_option("--bs", syn.bs);
  gen->add_option("--horizon", syn.horizon);
  gen->add_option("--super-slot", syn.super_slot);
  gen->add_option("--task-bits", syn.task_bits);
  gen->add_option("--energy-weight", syn.energy_weight);
  gen->add_option("--residual-weight", syn.residual_weight);
  gen->add_option("--residual-unit-bits", syn.residual_unit_bits);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) {
      finish(run_experiment(make_config(run_opts)), run_opts);
    } else if (*sweep) {
      ExperimentConfig cfg = make_config(sweep_opts);
      cfg.sweep = SweepSpec{sweep_param, parse_values(sweep_values)};
      finish(run_experiment(cfg), sweep_opts);
    } else if (*dpo) {
      const Scenario s = load_scenario(dp_scenario);
      double top = 0.0;
      for (const auto& t : s.tasks) top = std::max(top, t.size_bits);
      if (top <= 0.0) throw ConfigError("dp-oracle needs a positive task size");
      const DpResult dp = exact_dp(s, Quantizer{dp_levels, top}, {}, dp_budget);
      std::printf("value %.17g\nstates %lld\n", dp.value, dp.state_count);
    } else if (*est) {
      const auto traces = read_trace_csv(tr_path);
      if (!tr_scenario.empty()) {
        Scenario s = load_scenario(tr_scenario);
        if (static_cast<int>(traces.size()) > s.n_vehicles())
          throw ConfigError("traces name more vehicles than the scenario has");
        for (std::size_t n = 0; n < traces.size(); ++n)
          if (!traces[n].empty()) s.transitions[n] = estimate_transition_matrix(traces[n], s.routes[n]);
        if (!tr_out.empty()) save_scenario(s, tr_out);
        else std::cout << dump_scenario(s);
      } else {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& per_vehicle : traces) {
          int top = 0;
          for (const auto& tr : per_vehicle)
            for (int w : tr) top = std::max(top, w);
          Route r;
          r.waypoints.assign(static_cast<std::size_t>(top + 1), Point::Zero());
          const TransitionMatrix P = estimate_transition_matrix(per_vehicle, r);
          nlohmann::json rows = nlohmann::json::array();
          for (int a = 0; a < P.size(); ++a) {
            nlohmann::json row = nlohmann::json::array();
            for (int b = 0; b < P.size(); ++b) row.push_back(P.probs(a, b));
            rows.push_back(row);
          }
          j.push_back(rows);
        }
        std::cout << j.dump(2) << "\n";
      }
    } else if (*pre) {
      const Scenario s = load_scenario(pa_scenario);
      if (pa_super < 1 || pa_super > s.time.n_super_slots()) throw ConfigError("--super-slot out of range");
      const ChannelModel ch(s);
      SystemState st = initial_state(s);
      st.slot = s.time.first_slot(pa_super);
      const ReferenceSchedule ref = solve_preallocation(s, st, pa_super, SolverSettings{}, ch);
      std::ofstream out(pa_out, std::ios::binary);
      if (!out) throw ConfigError("cannot write " + pa_out);
      out << "slot,vehicle,bs,tau,rate_bits\n";
      char buf[160];
      for (int t = ref.start_slot; t <= ref.end_slot(); ++t)
        for (int n = 0; n < s.n_vehicles(); ++n) {
          std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g\n", t, n, ref.bs(n, t),
                        ref.time_shares(n, ref.column(t)), ref.rates(n, ref.column(t)));
          out << buf;
        }
      std::printf("objective %.17g\n", ref.objective);
    } else if (*gen) {
      const Scenario s = make_synthetic_scenario(syn);
      const auto errs = validate_scenario(s);
      if (!errs.empty()) throw ConfigError(errs.front());
      save_scenario(s, syn_out);
    }
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << (e.where().empty() ? "" : " (" + e.where() + ")") << "\n";
    return kInfeasible;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
