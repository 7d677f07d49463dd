#include "ecsim/report.hpp"

#include <cstdio>
#include <string>

namespace ecsim {

const char* const kReportSchemaVersion = "1";

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_safe(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

} // namespace

nlohmann::json metrics_to_json(const RunMetrics& m) {
  nlohmann::json j;
  j["completed"] = m.completed;
  j["failure_reason"] = m.failure_reason;
  j["completion_time_s"] = m.completion_time_s;
  j["execution_time_s"] = m.execution_time_s;
  j["recharge_time_s"] = m.recharge_time_s;
  j["energy_total_j"] = m.energy_total_j;
  j["energy_by_component"] = m.energy_by_component;
  j["energy_initial_j"] = m.energy_initial_j;
  j["energy_harvested_j"] = m.energy_harvested_j;
  j["energy_source_j"] = m.energy_source_j;
  j["energy_final_j"] = m.energy_final_j;
  j["n_energy_failures"] = m.n_energy_failures;
  j["window_transitions"] = m.window_transitions;
  j["cycles_executed"] = m.cycles_executed;
  j["boots"] = m.boots;
  j["checkpoints_saved"] = m.checkpoints_saved;
  j["probes"] = m.probes;
  j["v_save_resolved"] = m.v_save_resolved;
  return j;
}

nlohmann::json run_report(const LoadedRunContext& ctx,
                          const RunResult& result) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["workload"] = ctx.workload_name;
  j["settings"] = ctx.resolved_settings;
  j["metrics"] = metrics_to_json(result.metrics);
  nlohmann::json cycles = nlohmann::json::array();
  for (const EnergyCycleSummary& s : result.energy_cycles) {
    cycles.push_back({{"t_boot", s.t_boot},
                      {"t_end", s.t_end},
                      {"progress_at_boot", s.progress_at_boot},
                      {"progress_at_end", s.progress_at_end},
                      {"cycles_run", s.cycles_run}});
  }
  j["energy_cycles"] = std::move(cycles);
  j["n_events"] = result.events.size();
  return j;
}

nlohmann::json sweep_report(const std::string& sweep_kind,
                            const std::vector<PolicySweepResult>& results) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["sweep"] = sweep_kind;
  nlohmann::json policies = nlohmann::json::array();
  for (const PolicySweepResult& res : results) {
    nlohmann::json p;
    p["policy"] = res.policy_label;
    if (res.minimum) {
      p["minimum"] = *res.minimum;
    } else {
      p["minimum"] = nullptr;
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const SweepCandidateResult& row : res.rows) {
      rows.push_back({{"value", row.value},
                      {"feasible", row.feasible},
                      {"metrics", metrics_to_json(row.metrics)}});
    }
    p["rows"] = std::move(rows);
    policies.push_back(std::move(p));
  }
  j["policies"] = std::move(policies);
  return j;
}

nlohmann::json design_report(const WindowTable& table,
                             const DividerDesign& design,
                             const SwitchCostParams& params, double farads) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;

  nlohmann::json windows = nlohmann::json::array();
  for (const PerformanceWindow& w : table.windows()) {
    windows.push_back({{"freq_hz", w.freq_hz},
                       {"v_reg", w.v_reg},
                       {"v_floor", w.v_floor},
                       {"v_ceiling", w.v_ceiling}});
  }
  j["windows"] = std::move(windows);

  j["bounds"] = {
      {"delta_d_lower", delta_d_lower_bound(table, design.eps_c)},
      {"delta_c_upper", delta_c_upper_bound(table, design.eps_c)},
  };
  j["design"] = {
      {"delta_d", design.delta_d}, {"delta_c", design.delta_c},
      {"r1", design.r1},           {"r2", design.r2},
      {"r3", design.r3},           {"r4", design.r4},
      {"eps_c", design.eps_c},     {"eps_d", design.eps_d},
  };
  j["min_switch_cycles"] = min_cycles_for_switch(params);
  j["epsilon_c_min"] = epsilon_c_min(farads, params);

  nlohmann::json thresholds = nlohmann::json::array();
  for (std::size_t w = 0; w < table.size(); ++w) {
    nlohmann::json t;
    t["window"] = w;
    t["freq_hz"] = table[w].freq_hz;
    if (w > 0) t["v_down"] = fbtc_downscale_voltage(table, design, w);
    if (w + 1 < table.size()) t["v_up"] = fbtc_upscale_voltage(table, design, w);
    thresholds.push_back(std::move(t));
  }
  j["thresholds"] = std::move(thresholds);

  AntiBounceReport ab = check_anti_bounce(table, design);
  nlohmann::json violations = nlohmann::json::array();
  for (const BounceViolation& v : ab.violations) {
    violations.push_back(
        {{"window", v.window}, {"v_cap", v.v_cap}, {"what", v.what}});
  }
  j["anti_bounce"] = {{"ok", ab.ok}, {"violations", std::move(violations)}};
  return j;
}

std::string metrics_to_csv(const RunMetrics& m) {
  std::string header =
      "completed,completion_time_s,execution_time_s,recharge_time_s,"
      "energy_total_j";
  std::string row = std::string(m.completed ? "1" : "0") + "," +
                    fmt(m.completion_time_s) + "," + fmt(m.execution_time_s) +
                    "," + fmt(m.recharge_time_s) + "," + fmt(m.energy_total_j);
  for (const auto& [name, joules] : m.energy_by_component) {
    header += ",energy_" + name + "_j";
    row += "," + fmt(joules);
  }
  header +=
      ",energy_initial_j,energy_harvested_j,energy_source_j,energy_final_j,"
      "n_energy_failures,window_transitions,cycles_executed,boots,"
      "checkpoints_saved,probes,v_save_resolved,failure_reason";
  row += "," + fmt(m.energy_initial_j) + "," + fmt(m.energy_harvested_j) +
         "," + fmt(m.energy_source_j) + "," + fmt(m.energy_final_j) + "," +
         std::to_string(m.n_energy_failures) + "," +
         std::to_string(m.window_transitions) + "," +
         std::to_string(m.cycles_executed) + "," + std::to_string(m.boots) +
         "," + std::to_string(m.checkpoints_saved) + "," +
         std::to_string(m.probes) + "," + fmt(m.v_save_resolved) + "," +
         csv_safe(m.failure_reason);
  return header + "\n" + row + "\n";
}

std::string events_to_csv(const std::vector<ActuationEvent>& events) {
  std::string out = "t,action,value,detail\n";
  for (const ActuationEvent& e : events) {
    out += fmt(e.at);
    out += ",";
    out += action_name(e.action);
    out += ",";
    out += fmt(e.value);
    out += ",";
    out += e.detail;
    out += "\n";
  }
  return out;
}

std::string sweep_to_csv(const std::vector<PolicySweepResult>& results) {
  std::string out =
      "policy,value,feasible,energy_total_j,execution_time_s,"
      "recharge_time_s,n_energy_failures,window_transitions,boots,"
      "checkpoints_saved,probes\n";
  for (const PolicySweepResult& res : results) {
    for (const SweepCandidateResult& row : res.rows) {
      const RunMetrics& m = row.metrics;
      out += res.policy_label + "," + fmt(row.value) + "," +
             (row.feasible ? "1" : "0") + "," + fmt(m.energy_total_j) + "," +
             fmt(m.execution_time_s) + "," + fmt(m.recharge_time_s) + "," +
             std::to_string(m.n_energy_failures) + "," +
             std::to_string(m.window_transitions) + "," +
             std::to_string(m.boots) + "," +
             std::to_string(m.checkpoints_saved) + "," +
             std::to_string(m.probes) + "\n";
    }
  }
  return out;
}

} // namespace ecsim
