#include "vehoff/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

namespace vehoff {

std::string policy_name(PolicyId p) {
  switch (p) {
    case PolicyId::Proposed: return "proposed";
    case PolicyId::DA: return "da";
    case PolicyId::PAO: return "pao";
    case PolicyId::PAS3: return "pas3";
    case PolicyId::PP: return "pp";
  }
  return "?";
}

std::optional<PolicyId> parse_policy(const std::string& name) {
  for (PolicyId p : {PolicyId::Proposed, PolicyId::DA, PolicyId::PAO, PolicyId::PAS3, PolicyId::PP})
    if (policy_name(p) == name) return p;
  return std::nullopt;
}

PolicyTrace run_policy(PolicyId p, const Scenario& s, const TrialPaths& paths, const RunOptions& opt) {
  switch (p) {
    case PolicyId::Proposed: return run_proposed_policy(s, paths, opt);
    case PolicyId::DA: return run_da(s, paths, opt);
    case PolicyId::PAO: return run_pao(s, paths, opt);
    case PolicyId::PAS3: return run_pas3(s, paths, opt);
    case PolicyId::PP: return run_pp(s, paths, opt);
  }
  throw ConfigError("unknown policy");
}

Scenario apply_sweep(const Scenario& base, const std::string& param, double value) {
  Scenario s = base;
  if (param == "task_size") {
    for (auto& t : s.tasks) t.size_bits = value;
  } else if (param == "arrival") {
    s.tasks.at(0).arrival_slot = static_cast<int>(std::lround(value));
  } else if (param == "gamma") {
    s.time.super_slot_len = static_cast<int>(std::lround(value));
  } else if (param == "omega1") {
    s.weights.energy_weight = value;
  } else if (param == "vehicles") {
    const int k = static_cast<int>(std::lround(value));
    if (k < 1 || k > base.n_vehicles()) throw ConfigError("vehicles sweep value out of range");
    s.routes.resize(k);
    s.transitions.resize(k);
    s.tasks.resize(k);
  } else {
    throw ConfigError("unknown sweep parameter " + param);
  }
  const auto errs = validate_scenario(s);
  if (!errs.empty()) throw ConfigError(param + "=" + std::to_string(value) + ": " + errs.front());
  return s;
}

const PointResult* ExperimentResult::find(PolicyId p, double sweep_value) const {
  for (const auto& pt : points)
    if (pt.policy == p && pt.sweep_value == sweep_value) return &pt;
  return nullptr;
}

namespace {

void run_point(const Scenario& s, const ExperimentConfig& cfg, const std::string& param, double value,
               ExperimentResult& out) {
  const ChannelModel ch(s);
  RunOptions opt;
  opt.solver = cfg.solver;
  opt.execution = cfg.execution;
  opt.channel = &ch;

  const std::size_t first = out.points.size();
  for (PolicyId p : cfg.policies) {
    PointResult pr;
    pr.policy = p;
    pr.sweep_param = param;
    pr.sweep_value = value;
    pr.trials.resize(static_cast<std::size_t>(cfg.trials));
    out.points.push_back(std::move(pr));
  }

  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  int err_trial = -1;
  auto worker = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= cfg.trials) return;
      try {
        Rng rng(trial_seed(cfg.master_seed, static_cast<std::uint64_t>(k)));
        const TrialPaths paths = sample_paths(s, rng);
        for (std::size_t i = 0; i < cfg.policies.size(); ++i)
          out.points[first + i].trials[static_cast<std::size_t>(k)] =
              run_policy(cfg.policies[i], s, paths, opt).metrics;
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err || k < err_trial) {
          err = std::current_exception();
          err_trial = k;
        }
        next.store(cfg.trials);
        return;
      }
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(cfg.trials, 1));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) {
    const std::string ctx = "trial " + std::to_string(err_trial) + ": ";
    try {
      std::rethrow_exception(err);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(ctx + e.what(), e.where());
    } catch (const ConfigError& e) {
      throw ConfigError(ctx + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(ctx + e.what());
    }
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.policies.empty()) throw ConfigError("no policy selected");
  const auto errs = validate_scenario(cfg.scenario);
  if (!errs.empty()) throw ConfigError(errs.front());
  ExperimentResult out;
  if (!cfg.sweep) {
    run_point(cfg.scenario, cfg, "none", 0.0, out);
  } else {
    for (double v : cfg.sweep->values)
      run_point(apply_sweep(cfg.scenario, cfg.sweep->param, v), cfg, cfg.sweep->param, v, out);
  }
  return out;
}

ExperimentResult sweep_super_slot(const ExperimentConfig& config, const std::vector<int>& gammas) {
  ExperimentConfig c = config;
  SweepSpec sw;
  sw.param = "gamma";
  for (int g : gammas) {
    if (g < 1 || config.scenario.time.horizon_slots % g != 0)
      throw ConfigError("super_slot_len must divide horizon_slots");
    sw.values.push_back(g);
  }
  c.sweep = sw;
  return run_experiment(c);
}

MeanSe mean_se(const std::vector<double>& x) {
  MeanSe r;
  if (x.empty()) return r;
  double sum = 0.0;
  for (double v : x) sum += v;
  r.mean = sum / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  }
  return r;
}

MeanSe paired_difference(const PointResult& a, const PointResult& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.trials.size() && i < b.trials.size(); ++i)
    d.push_back(a.trials[i].total_cost - b.trials[i].total_cost);
  return mean_se(d);
}

MetricsRow aggregate(const PointResult& p) {
  MetricsRow r;
  r.policy = policy_name(p.policy);
  r.sweep_param = p.sweep_param;
  r.sweep_value = p.sweep_value;
  std::vector<double> cost;
  double tx = 0.0, energy = 0.0, residual = 0.0;
  for (const auto& m : p.trials) {
    cost.push_back(m.total_cost);
    tx += m.mean_tx_slots();
    energy += m.energy_j;
    residual += m.residual_bits;
  }
  const double n = static_cast<double>(std::max<std::size_t>(p.trials.size(), 1));
  const MeanSe ms = mean_se(cost);
  r.mean_cost = ms.mean;
  r.se_cost = ms.se;
  r.mean_tx_slots = tx / n;
  r.mean_energy_j = energy / n;
  r.mean_residual_bits = residual / n;
  return r;
}

std::vector<MetricsRow> aggregate(const ExperimentResult& r) {
  std::vector<MetricsRow> rows;
  for (const auto& p : r.points) rows.push_back(aggregate(p));
  return rows;
}

namespace {

constexpr const char* kHeader =
    "policy,sweep_param,sweep_value,mean_cost,se_cost,mean_tx_slots,mean_energy_j,mean_residual_bits";

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string results_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kHeader) + "\n";
  for (const auto& r : rows) {
    out += r.policy + "," + r.sweep_param + "," + g17(r.sweep_value) + "," + g17(r.mean_cost) + "," +
           g17(r.se_cost) + "," + g17(r.mean_tx_slots) + "," + g17(r.mean_energy_j) + "," +
           g17(r.mean_residual_bits) + "\n";
  }
  return out;
}

std::string results_summary(const std::vector<MetricsRow>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-9s %-10s %12s %14s %10s %8s %12s %14s\n", "policy", "sweep", "value",
                "mean cost", "se", "tx slots", "energy [J]", "residual bits");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-9s %-10s %12g %14.4f %10.4f %8.3f %12.4f %14.4g\n", r.policy.c_str(),
                  r.sweep_param.c_str(), r.sweep_value, r.mean_cost, r.se_cost, r.mean_tx_slots,
                  r.mean_energy_j, r.mean_residual_bits);
    out += buf;
  }
  return out;
}

void emit_results(const std::vector<MetricsRow>& rows, const std::string& csv_path,
                  const std::string& summary_path) {
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path);
    out << results_csv(rows);
    if (!out) throw std::runtime_error("write failed for " + csv_path);
  }
  if (!summary_path.empty()) {
    std::ofstream out(summary_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + summary_path);
    out << results_summary(rows);
  }
}

std::vector<MetricsRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::runtime_error("unexpected results header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f[8];
    for (auto& x : f)
      if (!std::getline(ls, x, ',')) throw std::runtime_error("short results row");
    MetricsRow r;
    r.policy = f[0];
    r.sweep_param = f[1];
    double* nums[] = {&r.sweep_value, &r.mean_cost, &r.se_cost, &r.mean_tx_slots, &r.mean_energy_j,
                      &r.mean_residual_bits};
    for (int i = 0; i < 6; ++i) *nums[i] = std::strtod(f[i + 2].c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

std::vector<MetricsRow> read_results_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_results_csv(ss.str());
}

}  // namespace vehoff
