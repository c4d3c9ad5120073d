#include "vehoff/baselines.hpp"

#include <memory>

namespace vehoff {

namespace {

struct Channel {
  std::unique_ptr<ChannelModel> own;
  const ChannelModel* ptr;
  Channel(const Scenario& s, const RunOptions& opt) : ptr(opt.channel) {
    if (!ptr) {
      own = std::make_unique<ChannelModel>(s);
      ptr = own.get();
    }
  }
  const ChannelModel& get() const { return *ptr; }
};

Action planned_action(const ReferenceSchedule& ref, const SystemState& st) {
  Action a = ref.action_at(st.slot);
  for (int n = 0; n < a.rates.size(); ++n) a.rates(n) = std::min(a.rates(n), st.buffers(n));
  return a;
}

PolicyTrace open_loop(const Scenario& s, const TrialPaths& paths, const RunOptions& opt, bool replan) {
  Channel ch(s, opt);
  PolicyTrace trace;
  trace.metrics.reset(s.n_vehicles());
  SystemState st = initial_state(s, paths.positions_at(1));
  ReferenceSchedule ref;
  for (int iota = 1; iota <= s.time.n_super_slots(); ++iota) {
    if (iota == 1 || replan) ref = solve_preallocation(s, st, iota, opt.solver, ch.get());
    const int last = iota * s.time.super_slot_len;
    for (int t = s.time.first_slot(iota); t <= last; ++t) st = advance(s, st, planned_action(ref, st), paths, opt, trace);
  }
  return trace;
}

}  // namespace

PolicyTrace run_da(const Scenario& s, const TrialPaths& paths, const RunOptions& opt) {
  return open_loop(s, paths, opt, false);
}

PolicyTrace run_pao(const Scenario& s, const TrialPaths& paths, const RunOptions& opt) {
  return open_loop(s, paths, opt, true);
}

PolicyTrace run_pas3(const Scenario& s, const TrialPaths& paths, const RunOptions& opt) {
  Scenario one = s;
  one.time.super_slot_len = s.time.horizon_slots;
  return run_proposed_policy(one, paths, opt);
}

PolicyTrace run_pp(const Scenario& s, const TrialPaths& paths, const RunOptions& opt) {
  Channel ch(s, opt);
  PolicyTrace trace;
  trace.metrics.reset(s.n_vehicles());
  SystemState st = initial_state(s, paths.positions_at(1));
  ReferenceSchedule ref =
      solve_preallocation_on_basis(s, st, true_basis(ch.get(), paths, 1, s.horizon()), opt.solver);
  for (int t = 1; t <= s.horizon(); ++t) {
    std::vector<Point> pts;
    for (int n = 0; n < s.n_vehicles(); ++n) pts.push_back(s.routes[n].waypoints[paths.position(n, t)]);
    ref.basis_positions.push_back(std::move(pts));
  }
  for (int t = 1; t <= s.horizon(); ++t) st = advance(s, st, planned_action(ref, st), paths, opt, trace);
  return trace;
}

PolicyTrace run_da(const Scenario& s, Rng& rng, const RunOptions& opt) {
  return run_da(s, sample_paths(s, rng), opt);
}
PolicyTrace run_pao(const Scenario& s, Rng& rng, const RunOptions& opt) {
  return run_pao(s, sample_paths(s, rng), opt);
}
PolicyTrace run_pas3(const Scenario& s, Rng& rng, const RunOptions& opt) {
  return run_pas3(s, sample_paths(s, rng), opt);
}
PolicyTrace run_pp(const Scenario& s, Rng& rng, const RunOptions& opt) {
  return run_pp(s, sample_paths(s, rng), opt);
}

}  // namespace vehoff
