#include "vehoff/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace vehoff {

using nlohmann::json;

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

bool finite(const Point& p) { return std::isfinite(p.x()) && std::isfinite(p.y()); }

json point_json(const Point& p) { return json::array({p.x(), p.y()}); }

Point point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ScenarioError("coordinate must be [x, y]");
  return Point(j.at(0).get<double>(), j.at(1).get<double>());
}

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> out;
  const int N = s.n_vehicles();
  const int M = s.n_bs();
  if (N < 1) out.push_back("n_vehicles must be >= 1");
  if (M < 1) out.push_back("n_bs must be >= 1");
  for (int m = 0; m < M; ++m)
    if (!finite(s.bs_positions[m])) out.push_back("bs_positions[" + std::to_string(m) + "] must be finite");

  if (static_cast<int>(s.transitions.size()) != N)
    out.push_back("transitions must have one entry per vehicle");
  if (static_cast<int>(s.tasks.size()) != N) out.push_back("tasks must have one entry per vehicle");

  for (int n = 0; n < N; ++n) {
    const std::string rn = "routes[" + std::to_string(n) + "]";
    const Route& r = s.routes[n];
    if (r.waypoints.empty()) {
      out.push_back(rn + ".waypoints must be non-empty");
      continue;
    }
    for (std::size_t i = 0; i < r.waypoints.size(); ++i)
      if (!finite(r.waypoints[i])) out.push_back(rn + ".waypoints[" + std::to_string(i) + "] must be finite");
    if (r.start_index < 0 || r.start_index >= r.size()) out.push_back(rn + ".start_index out of range");

    if (n >= static_cast<int>(s.transitions.size())) continue;
    const std::string tn = "transitions[" + std::to_string(n) + "]";
    const Matrix& P = s.transitions[n].probs;
    if (P.rows() != r.size() || P.cols() != r.size()) {
      out.push_back(tn + " must be " + std::to_string(r.size()) + "x" + std::to_string(r.size()));
      continue;
    }
    for (int j = 0; j < P.rows(); ++j) {
      bool bad = false;
      for (int i = 0; i < P.cols(); ++i)
        if (!(P(j, i) >= 0.0 && P(j, i) <= 1.0)) bad = true;
      if (bad) {
        out.push_back(tn + " row " + std::to_string(j) + " has entries outside [0, 1]");
        continue;
      }
      const double sum = P.row(j).sum();
      if (std::abs(sum - 1.0) > 1e-12)
        out.push_back(tn + " row " + std::to_string(j) + " sums to " + fmt_g(sum));
    }
  }

  const RadioParams& rp = s.radio;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string("radio.") + name + " must be > 0");
  };
  positive(rp.bandwidth_hz, "bandwidth_hz");
  positive(rp.path_loss_const, "path_loss_const");
  positive(rp.path_loss_exp, "path_loss_exp");
  positive(rp.noise_plus_interference_w, "noise_plus_interference_w");
  positive(rp.fading_mean_power, "fading_mean_power");
  positive(rp.p_max_w, "p_max_w");
  positive(rp.slot_seconds, "slot_seconds");
  positive(rp.min_distance_m, "min_distance_m");
  if (rp.path_loss_exp > 0.0 && rp.path_loss_exp < 2.0) out.push_back("radio.path_loss_exp must be >= 2");
  if (!rp.per_bs_noise_w.empty()) {
    if (static_cast<int>(rp.per_bs_noise_w.size()) != M)
      out.push_back("radio.per_bs_noise_w must have one entry per BS");
    for (double v : rp.per_bs_noise_w)
      if (!(v > 0.0)) {
        out.push_back("radio.per_bs_noise_w entries must be > 0");
        break;
      }
  }

  const int T = s.time.horizon_slots;
  if (T < 1) out.push_back("time.horizon_slots must be >= 1");
  if (s.time.super_slot_len < 1) out.push_back("time.super_slot_len must be >= 1");
  else if (T >= 1 && T % s.time.super_slot_len != 0)
    out.push_back("super_slot_len must divide horizon_slots");

  for (std::size_t n = 0; n < s.tasks.size(); ++n) {
    const TaskSpec& t = s.tasks[n];
    const std::string tn = "tasks[" + std::to_string(n) + "]";
    if (t.arrival_slot < 1 || t.arrival_slot > T) out.push_back(tn + ".arrival_slot must be in [1, T]");
    if (!(t.size_bits >= 0.0) || !std::isfinite(t.size_bits)) out.push_back(tn + ".size_bits must be >= 0");
  }

  if (!(s.weights.energy_weight >= 0.0)) out.push_back("weights.energy_weight must be >= 0");
  if (!(s.weights.residual_weight >= 0.0)) out.push_back("weights.residual_weight must be >= 0");
  if (!(s.weights.residual_unit_bits > 0.0)) out.push_back("weights.residual_unit_bits must be > 0");
  return out;
}

namespace {

// Dense rows, or {"size": W, "entries": [[from, to, p], ...]} for long routes.
TransitionMatrix transition_from(const json& jt) {
  if (jt.is_object()) {
    const int size = jt.at("size").get<int>();
    if (size <= 0) throw ScenarioError("transition size must be positive");
    Matrix P = Matrix::Zero(size, size);
    for (const auto& e : jt.at("entries")) {
      const int a = e.at(0).get<int>();
      const int b = e.at(1).get<int>();
      if (a < 0 || a >= size || b < 0 || b >= size) throw ScenarioError("transition entry out of range");
      P(a, b) += e.at(2).get<double>();
    }
    return TransitionMatrix(std::move(P));
  }
  const int rows = static_cast<int>(jt.size());
  Matrix P(rows, rows);
  for (int a = 0; a < rows; ++a) {
    if (static_cast<int>(jt.at(a).size()) != rows) throw ScenarioError("transition must be square");
    for (int b = 0; b < rows; ++b) P(a, b) = jt.at(a).at(b).get<double>();
  }
  return TransitionMatrix(std::move(P));
}

json transition_json(const Matrix& P) {
  const Eigen::Index nnz = (P.array() != 0.0).count();
  if (P.rows() > 8 && nnz * 4 < P.size()) {
    json entries = json::array();
    for (int a = 0; a < P.rows(); ++a)
      for (int b = 0; b < P.cols(); ++b)
        if (P(a, b) != 0.0) entries.push_back({a, b, P(a, b)});
    return {{"size", P.rows()}, {"entries", entries}};
  }
  json rows = json::array();
  for (int a = 0; a < P.rows(); ++a) {
    json row = json::array();
    for (int b = 0; b < P.cols(); ++b) row.push_back(P(a, b));
    rows.push_back(row);
  }
  return rows;
}

// Two-space indentation, but arrays of scalars stay on one line.
void write_json(const json& j, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + json(it.key()).dump() + ": ";
      write_json(it.value(), depth + 1, out);
    }
    out += "\n" + close + "}";
  } else if (j.is_array()) {
    const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
    if (flat) {
      out += j.dump(-1, ' ', false);
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      write_json(j[i], depth + 1, out);
    }
    out += "\n" + close + "]";
  } else {
    out += j.dump();
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  try {
    const json j = json::parse(text);
    for (const auto& p : j.at("bs_positions")) s.bs_positions.push_back(point_from(p));

    for (const auto& v : j.at("vehicles")) {
      Route r;
      const auto& jr = v.at("route");
      for (const auto& p : jr.at("waypoints")) r.waypoints.push_back(point_from(p));
      r.start_index = jr.value("start_index", 0);
      s.routes.push_back(std::move(r));

      s.transitions.push_back(transition_from(v.at("transition")));

      TaskSpec task;
      const auto& jk = v.at("task");
      task.arrival_slot = jk.value("arrival_slot", 1);
      task.size_bits = jk.at("size_bits").get<double>();
      s.tasks.push_back(task);
    }

    const auto& jr = j.at("radio");
    RadioParams& rp = s.radio;
    rp.bandwidth_hz = jr.at("bandwidth_hz").get<double>();
    rp.path_loss_const = jr.at("path_loss_const").get<double>();
    rp.path_loss_exp = jr.at("path_loss_exp").get<double>();
    rp.noise_plus_interference_w = jr.at("noise_plus_interference_w").get<double>();
    if (jr.contains("per_bs_noise_w")) rp.per_bs_noise_w = jr.at("per_bs_noise_w").get<std::vector<double>>();
    rp.fading_mean_power = jr.at("fading_mean_power").get<double>();
    rp.p_max_w = jr.at("p_max_w").get<double>();
    rp.slot_seconds = jr.at("slot_seconds").get<double>();
    rp.min_distance_m = jr.value("min_distance_m", 1.0);

    const auto& jw = j.at("weights");
    s.weights.energy_weight = jw.at("energy_weight").get<double>();
    s.weights.residual_weight = jw.at("residual_weight").get<double>();
    s.weights.residual_unit_bits = jw.value("residual_unit_bits", 1.0);

    const auto& jg = j.at("time");
    s.time.horizon_slots = jg.at("horizon_slots").get<int>();
    s.time.super_slot_len = jg.at("super_slot_len").get<int>();
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario parse error: ") + e.what());
  }
  return s;
}

std::string dump_scenario(const Scenario& s) {
  json j;
  j["bs_positions"] = json::array();
  for (const auto& p : s.bs_positions) j["bs_positions"].push_back(point_json(p));
  j["vehicles"] = json::array();
  for (int n = 0; n < s.n_vehicles(); ++n) {
    json v;
    json wps = json::array();
    for (const auto& p : s.routes[n].waypoints) wps.push_back(point_json(p));
    v["route"] = {{"waypoints", wps}, {"start_index", s.routes[n].start_index}};
    v["transition"] = transition_json(s.transitions[n].probs);
    v["task"] = {{"arrival_slot", s.tasks[n].arrival_slot}, {"size_bits", s.tasks[n].size_bits}};
    j["vehicles"].push_back(v);
  }
  const RadioParams& rp = s.radio;
  j["radio"] = {{"bandwidth_hz", rp.bandwidth_hz},
                {"path_loss_const", rp.path_loss_const},
                {"path_loss_exp", rp.path_loss_exp},
                {"noise_plus_interference_w", rp.noise_plus_interference_w},
                {"fading_mean_power", rp.fading_mean_power},
                {"p_max_w", rp.p_max_w},
                {"slot_seconds", rp.slot_seconds},
                {"min_distance_m", rp.min_distance_m}};
  if (!rp.per_bs_noise_w.empty()) j["radio"]["per_bs_noise_w"] = rp.per_bs_noise_w;
  j["weights"] = {{"energy_weight", s.weights.energy_weight},
                  {"residual_weight", s.weights.residual_weight},
                  {"residual_unit_bits", s.weights.residual_unit_bits}};
  j["time"] = {{"horizon_slots", s.time.horizon_slots}, {"super_slot_len", s.time.super_slot_len}};
  std::string out;
  write_json(j, 0, out);
  return out + "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Scenario s = parse_scenario(ss.str());
  const auto errs = validate_scenario(s);
  if (!errs.empty()) {
    std::string msg = errs.front();
    for (std::size_t i = 1; i < errs.size(); ++i) msg += "; " + errs[i];
    throw ScenarioError(msg);
  }
  return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write scenario file " + path);
  out << dump_scenario(s);
}

TransitionMatrix estimate_transition_matrix(const std::vector<std::vector<int>>& traces,
                                            const Route& route) {
  if (traces.empty()) throw ScenarioError("no traces to estimate transitions from");
  const int W = route.size();
  Matrix counts = Matrix::Zero(W, W);
  for (const auto& tr : traces) {
    for (int idx : tr)
      if (idx < 0 || idx >= W) throw ScenarioError("trace waypoint index " + std::to_string(idx) + " out of range");
    for (std::size_t k = 1; k < tr.size(); ++k) counts(tr[k - 1], tr[k]) += 1.0;
  }
  for (int j = 0; j < W; ++j) {
    const double departures = counts.row(j).sum();
    if (departures == 0.0) {
      counts(j, j) = 1.0;
    } else {
      counts.row(j) /= departures;
    }
  }
  return TransitionMatrix(std::move(counts));
}

std::vector<std::vector<std::vector<int>>> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open trace file " + path);
  std::string line;
  if (!std::getline(in, line)) throw ScenarioError("trace file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "trial,vehicle,slot,waypoint_index")
    throw ScenarioError("trace header must be trial,vehicle,slot,waypoint_index");

  // vehicle -> trial -> slot -> waypoint
  std::map<int, std::map<long, std::map<long, int>>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[4];
    for (auto& x : f)
      if (!std::getline(ss, x, ',')) throw ScenarioError("trace line " + std::to_string(line_no) + " has too few fields");
    try {
      rows[std::stoi(f[1])][std::stol(f[0])][std::stol(f[2])] = std::stoi(f[3]);
    } catch (const std::exception&) {
      throw ScenarioError("trace line " + std::to_string(line_no) + " is not numeric");
    }
  }
  std::vector<std::vector<std::vector<int>>> out;
  if (rows.empty()) return out;
  if (rows.begin()->first < 0) throw ScenarioError("negative vehicle index in traces");
  out.resize(static_cast<std::size_t>(rows.rbegin()->first + 1));
  for (const auto& [veh, trials] : rows)
    for (const auto& [trial, slots] : trials) {
      std::vector<int> seq;
      for (const auto& [slot, wp] : slots) seq.push_back(wp);
      out[static_cast<std::size_t>(veh)].push_back(std::move(seq));
    }
  return out;
}

}  // namespace vehoff
