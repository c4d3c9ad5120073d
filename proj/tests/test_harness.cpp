#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vehoff;

namespace {

ExperimentConfig small_config(double task_bits = 4e8) {
  SyntheticOptions o;
  o.vehicles = 3;
  o.bs = 2;
  o.horizon = 6;
  o.super_slot = 3;
  o.task_bits = task_bits;
  ExperimentConfig c;
  c.scenario = make_synthetic_scenario(o);
  c.trials = 4;
  c.master_seed = 9;
  c.threads = 1;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("policy names round trip") {
  for (const PolicyId p : {PolicyId::Proposed, PolicyId::DA, PolicyId::PAO, PolicyId::PAS3, PolicyId::PP})
    CHECK(parse_policy(policy_name(p)) == p);
  CHECK(parse_policy("Proposed") == std::nullopt);
  CHECK(parse_policy("") == std::nullopt);
}

TEST_CASE("a trial with nothing to send reports zeros") {
  ExperimentConfig c = small_config(0.0);
  c.trials = 1;
  c.policies = {PolicyId::Proposed, PolicyId::DA};
  const std::vector<MetricsRow> rows = aggregate(run_experiment(c));
  REQUIRE(rows.size() == 2);
  for (const MetricsRow& r : rows) {
    CHECK(r.mean_cost == 0.0);
    CHECK(r.se_cost == 0.0);
    CHECK(r.mean_tx_slots == 0.0);
    CHECK(r.mean_energy_j == 0.0);
    CHECK(r.mean_residual_bits == 0.0);
    CHECK(r.sweep_param == "none");
  }
}

TEST_CASE("every policy sees the trajectories of its trial seed") {
  ExperimentConfig c = small_config();
  c.policies = {PolicyId::Proposed, PolicyId::PAO};
  const ExperimentResult r = run_experiment(c);
  for (int k = 0; k < c.trials; ++k) {
    Rng rng(trial_seed(c.master_seed, static_cast<std::uint64_t>(k)));
    const TrialPaths paths = sample_paths(c.scenario, rng);
    CHECK(r.find(PolicyId::Proposed, 0.0)->trials[static_cast<std::size_t>(k)].total_cost ==
          run_proposed_policy(c.scenario, paths).metrics.total_cost);
    CHECK(r.find(PolicyId::PAO, 0.0)->trials[static_cast<std::size_t>(k)].total_cost ==
          run_pao(c.scenario, paths).metrics.total_cost);
  }
}

TEST_CASE("results do not depend on the thread count") {
  ExperimentConfig c = small_config();
  c.policies = {PolicyId::Proposed, PolicyId::DA, PolicyId::PP};
  c.sweep = SweepSpec{"omega1", {1.0, 3.0}};
  const std::string one = results_csv(aggregate(run_experiment(c)));
  c.threads = 3;
  const std::string three = results_csv(aggregate(run_experiment(c)));
  CHECK(one == three);
  CHECK(one == results_csv(aggregate(run_experiment(c))));
  c.master_seed = 10;
  CHECK(one != results_csv(aggregate(run_experiment(c))));
}

TEST_CASE("aggregation by hand") {
  PointResult p;
  p.policy = PolicyId::DA;
  p.sweep_param = "task_size";
  p.sweep_value = 2e9;
  for (double cost : {2.0, 4.0, 9.0}) {
    TrialMetrics m;
    m.reset(2);
    m.total_cost = cost;
    m.energy_j = cost / 2.0;
    m.residual_bits = 10.0 * cost;
    m.transmission_slots << 1, static_cast<int>(cost);
    p.trials.push_back(m);
  }
  const MetricsRow r = aggregate(p);
  CHECK(r.policy == "da");
  CHECK(r.mean_cost == doctest::Approx(5.0));
  // Sample variance (9 + 1 + 16) / 2 = 13 over three trials.
  CHECK(r.se_cost == doctest::Approx(std::sqrt(13.0 / 3.0)));
  CHECK(r.mean_energy_j == doctest::Approx(2.5));
  CHECK(r.mean_residual_bits == doctest::Approx(50.0));
  CHECK(r.mean_tx_slots == doctest::Approx((1.5 + 2.5 + 5.0) / 3.0));

  PointResult q = p;
  for (auto& m : q.trials) m.total_cost -= 1.0;
  const MeanSe d = paired_difference(p, q);
  CHECK(d.mean == doctest::Approx(1.0));
  CHECK(d.se == doctest::Approx(0.0));
}

TEST_CASE("results CSV") {
  SUBCASE("empty table is the header alone") {
    const std::string csv = results_csv({});
    CHECK(csv == "policy,sweep_param,sweep_value,mean_cost,se_cost,mean_tx_slots,mean_energy_j,mean_residual_bits\n");
    CHECK(parse_results_csv(csv).empty());
  }
  SUBCASE("rows survive a round trip bit for bit") {
    std::vector<MetricsRow> rows{{"proposed", "none", 0.0, 1.0 / 3.0, 1e-17, 2.5, 0.1, 12345678.9},
                                 {"pp", "task_size", 1.5e9, 42.0, 0.0, 1.0, 6.02e23, 0.0}};
    const std::string csv = results_csv(rows);
    CHECK(parse_results_csv(csv) == rows);
    const auto dir = std::filesystem::temp_directory_path() / "vehoff_harness_test";
    std::filesystem::create_directories(dir);
    emit_results(rows, (dir / "a.csv").string(), (dir / "a.txt").string());
    emit_results(rows, (dir / "b.csv").string());
    CHECK(slurp(dir / "a.csv") == csv);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(read_results_csv((dir / "b.csv").string()) == rows);
    CHECK(slurp(dir / "a.txt").find("proposed") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "b.txt"));
    std::filesystem::remove_all(dir);
  }
  SUBCASE("a foreign header is rejected") {
    CHECK_THROWS(parse_results_csv("a,b\n1,2\n"));
  }
}

TEST_CASE("sweep parameters") {
  const Scenario base = small_config().scenario;
  CHECK(apply_sweep(base, "task_size", 7e8).tasks[2].size_bits == 7e8);
  const Scenario late = apply_sweep(base, "arrival", 3);
  CHECK(late.tasks[0].arrival_slot == 3);
  CHECK(late.tasks[1].arrival_slot == 1);
  CHECK(apply_sweep(base, "gamma", 2).time.super_slot_len == 2);
  CHECK(apply_sweep(base, "omega1", 4.5).weights.energy_weight == 4.5);
  const Scenario two = apply_sweep(base, "vehicles", 2);
  CHECK(two.n_vehicles() == 2);
  CHECK(two.transitions.size() == 2);
  CHECK(two.tasks.size() == 2);
  CHECK_THROWS_AS(apply_sweep(base, "vehicles", 4), ConfigError);
  CHECK_THROWS_AS(apply_sweep(base, "gamma", 4), ConfigError);
  CHECK_THROWS_AS(apply_sweep(base, "arrival", 7), ConfigError);
  CHECK_THROWS_AS(apply_sweep(base, "speed", 1.0), ConfigError);
}

TEST_CASE("bad experiment configurations") {
  ExperimentConfig c = small_config();
  c.trials = 0;
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
  c = small_config();
  c.policies.clear();
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
  c = small_config();
  c.scenario.radio.bandwidth_hz = -1.0;
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
  c = small_config();
  CHECK_THROWS_AS(sweep_super_slot(c, {4}), ConfigError);
  CHECK_THROWS_AS(sweep_super_slot(c, {0}), ConfigError);
}

TEST_CASE("super-slot sweep") {
  ExperimentConfig c = small_config();
  c.policies = {PolicyId::Proposed};
  const ExperimentResult sw = sweep_super_slot(c, {6, 3, 1});
  REQUIRE(sw.points.size() == 3);

  // A single super slot over the whole period is the one-shot variant.
  ExperimentConfig one_shot = c;
  one_shot.policies = {PolicyId::PAS3};
  MetricsRow whole = aggregate(*sw.find(PolicyId::Proposed, 6.0));
  MetricsRow pas3 = aggregate(run_experiment(one_shot).points.front());
  whole.policy = pas3.policy;
  whole.sweep_param = pas3.sweep_param;
  whole.sweep_value = pas3.sweep_value;
  CHECK(whole == pas3);

  // The scenario's own length reproduces an unswept run.
  MetricsRow own = aggregate(*sw.find(PolicyId::Proposed, 3.0));
  MetricsRow plain = aggregate(run_experiment(c).points.front());
  CHECK(own.sweep_param == "gamma");
  own.sweep_param = plain.sweep_param;
  own.sweep_value = plain.sweep_value;
  CHECK(own == plain);
}
