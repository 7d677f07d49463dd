#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ecsim/config.hpp"
#include "ecsim/report.hpp"
#include "ecsim/sweep.hpp"

using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::string workload;
  std::string format = "json";
  std::string output;
};

void add_common(CLI::App* cmd, CommonOpts* o, bool config_required) {
  CLI::Option* cfg = cmd->add_option("--config", o->config_path,
                                     "experiment config (.cfg or .json)");
  if (config_required) cfg->required();
  cmd->add_option("--set", o->sets,
                  "override one setting as key=value (repeatable)");
  cmd->add_option("--workload", o->workload,
                  "workload preset override (dijkstra, fft, rsa)");
  cmd->add_option("--format", o->format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--output", o->output,
                  "write the report to this file instead of stdout");
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

ecsim::LoadedExperiment load(const CommonOpts& o) {
  ecsim::LoadedExperiment exp = ecsim::load_config(o.config_path);
  bool dirty = false;
  for (const std::string& kv : o.sets) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--set expects key=value, got '" + kv + "'");
    ecsim::apply_setting(exp, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)),
                         "");
    dirty = true;
  }
  if (!o.workload.empty()) {
    ecsim::apply_setting(exp, "workload.preset", o.workload, "");
    dirty = true;
  }
  if (dirty) ecsim::finalize_experiment(exp);
  return exp;
}

void emit(const std::string& output_path, const std::string& text) {
  if (output_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(output_path);
  if (!f) throw std::runtime_error("cannot write " + output_path);
  f << text;
}

std::vector<double> parse_candidates(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string tok = trim(csv.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (!tok.empty()) out.push_back(ecsim::parse_si(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::runtime_error("empty candidate list");
  return out;
}

std::vector<ecsim::PolicyConfig> parse_policies(
    const std::string& spec, const ecsim::LoadedExperiment& exp) {
  if (spec.empty() || spec == "all")
    return ecsim::default_policy_set(exp.config.windows);
  std::vector<ecsim::PolicyConfig> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t comma = spec.find(',', pos);
    std::string tok = trim(spec.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (!tok.empty()) {
      ecsim::PolicyConfig p;
      if (tok == "d2vfs") {
        p.kind = ecsim::PolicyKind::d2vfs;
      } else if (tok == "fbtc") {
        p.kind = ecsim::PolicyKind::fbtc;
        p.fbtc = exp.config.policy.kind == ecsim::PolicyKind::fbtc
                     ? exp.config.policy.fbtc
                     : ecsim::design_dividers(exp.config.windows);
      } else if (tok.rfind("static-", 0) == 0) {
        std::string f = tok.substr(7);
        if (f.size() > 2 && f.compare(f.size() - 2, 2, "Hz") == 0)
          f.resize(f.size() - 2);
        p.kind = ecsim::PolicyKind::fixed;
        p.fixed_freq_hz = ecsim::parse_si(f);
        p.regulated = exp.config.policy.regulated;
      } else {
        throw std::runtime_error(
            "unknown policy '" + tok +
            "' (static-<freq>, d2vfs, fbtc, or all)");
      }
      out.push_back(p);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::runtime_error("empty policy list");
  return out;
}

double device_floor_of(const ecsim::ExperimentConfig& c) {
  double policy_floor = c.windows.floor_voltage();
  if (c.policy.kind == ecsim::PolicyKind::fixed) {
    if (auto idx = c.windows.index_of_frequency(c.policy.fixed_freq_hz))
      policy_floor = c.windows[*idx].v_floor;
  }
  return ecsim::device_floor(c.checkpoint, policy_floor);
}

int cmd_run(const CommonOpts& o, const std::string& events_path) {
  ecsim::LoadedExperiment exp = load(o);
  if (auto v = ecsim::validate_config(exp.config, exp.workload); !v)
    throw std::runtime_error(v.message);

  ecsim::RunResult result = ecsim::run(exp.config, exp.workload);
  if (!events_path.empty())
    emit(events_path, ecsim::events_to_csv(result.events));

  if (o.format == "csv") {
    emit(o.output, ecsim::metrics_to_csv(result.metrics));
  } else {
    ecsim::LoadedRunContext ctx{exp.resolved, exp.workload.name};
    emit(o.output, ecsim::run_report(ctx, result).dump(2));
  }
  return result.metrics.completed ? 0 : 3;
}

int cmd_sweep(const CommonOpts& o, bool vboot, const std::string& candidates,
              const std::string& policies, bool serial) {
  ecsim::LoadedExperiment exp = load(o);
  if (auto v = ecsim::validate_config(exp.config, exp.workload); !v)
    throw std::runtime_error(v.message);

  std::vector<double> values;
  if (!candidates.empty()) {
    values = parse_candidates(candidates);
  } else if (vboot) {
    double lo = device_floor_of(exp.config) + 0.1;
    for (double v = lo; v <= exp.config.rating + 1e-9; v += 0.1)
      values.push_back(v);
  } else {
    values = {10e-6, 20e-6, 47e-6, 80e-6, 100e-6, 220e-6, 470e-6};
  }

  std::vector<ecsim::PolicyConfig> set = parse_policies(policies, exp);
  std::vector<ecsim::PolicySweepResult> results =
      vboot ? ecsim::sweep_min_vboot(exp.config, exp.workload, values, set,
                                     !serial)
            : ecsim::sweep_min_capacitance(exp.config, exp.workload, values,
                                           set, !serial);

  if (o.format == "csv") {
    emit(o.output, ecsim::sweep_to_csv(results));
  } else {
    emit(o.output, ecsim::sweep_report(
                       vboot ? "min_vboot" : "min_capacitance", results)
                       .dump(2));
  }
  return 0;
}

int cmd_tune_vsave(const CommonOpts& o, const std::string& candidates,
                   bool serial) {
  ecsim::LoadedExperiment exp = load(o);
  if (auto v = ecsim::validate_config(exp.config, exp.workload); !v)
    throw std::runtime_error(v.message);
  if (exp.config.checkpoint.scheme == ecsim::Scheme::none)
    throw std::runtime_error("tune-vsave needs a checkpoint scheme");

  std::vector<double> values;
  if (!candidates.empty()) {
    values = parse_candidates(candidates);
  } else {
    double lo = device_floor_of(exp.config) + 0.05;
    double hi = std::min(exp.config.v_boot, exp.config.rating) - 0.05;
    for (double v = lo; v <= hi + 1e-9; v += 0.05) values.push_back(v);
  }

  std::optional<ecsim::TuneResult> tuned =
      ecsim::tune_v_save(exp.config, exp.workload, values, !serial);

  if (o.format == "csv") {
    std::string text = "v_save,feasible,energy_total_j,execution_time_s\n";
    if (tuned) {
      char buf[96];
      for (const ecsim::SweepCandidateResult& row : tuned->rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%d,%.12g,%.12g\n", row.value,
                      row.feasible ? 1 : 0, row.metrics.energy_total_j,
                      row.metrics.execution_time_s);
        text += buf;
      }
    }
    emit(o.output, text);
  } else {
    json j;
    j["schema_version"] = ecsim::kReportSchemaVersion;
    if (tuned) {
      j["v_save"] = tuned->v_save;
      j["metrics"] = ecsim::metrics_to_json(tuned->metrics);
      json rows = json::array();
      for (const ecsim::SweepCandidateResult& row : tuned->rows) {
        rows.push_back({{"v_save", row.value},
                        {"feasible", row.feasible},
                        {"energy_total_j", row.metrics.energy_total_j}});
      }
      j["rows"] = std::move(rows);
    } else {
      j["v_save"] = nullptr;
    }
    emit(o.output, j.dump(2));
  }
  return tuned ? 0 : 3;
}

int cmd_design(const CommonOpts& o, double farads_override) {
  ecsim::WindowTable table = ecsim::msp430g2553_table();
  ecsim::SwitchCostParams params;
  double farads = 100e-6;
  std::optional<ecsim::DividerDesign> pinned;

  if (!o.config_path.empty()) {
    ecsim::LoadedExperiment exp = load(o);
    table = exp.config.windows;
    farads = exp.config.capacitance;
    params.switch_cycles = exp.config.policy.switch_cycles;
    if (exp.config.policy.kind == ecsim::PolicyKind::fbtc)
      pinned = exp.config.policy.fbtc;
  }
  if (farads_override > 0.0) farads = farads_override;

  ecsim::DividerDesign design =
      pinned ? *pinned : ecsim::design_dividers(table);
  emit(o.output, ecsim::design_report(table, design, params, farads).dump(2));
  return 0;
}

int cmd_validate(const CommonOpts& o) {
  json j;
  ecsim::LoadedExperiment exp = load(o);
  ecsim::ValidationResult v = ecsim::validate_config(exp.config, exp.workload);
  j["ok"] = v.ok;
  if (!v.ok) j["error"] = v.message;
  if (v.ok && exp.config.checkpoint.scheme != ecsim::Scheme::none)
    j["v_save_resolved"] = ecsim::resolve_v_save(exp.config, exp.workload);
  emit(o.output, j.dump(2));
  return v.ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ecsim: energy-cycle emulator and design toolkit for "
      "capacitor-buffered DVFS devices"};
  app.require_subcommand(1);

  CommonOpts run_o, cap_o, vboot_o, tune_o, design_o, validate_o;
  std::string run_events, cap_cand, vboot_cand, tune_cand, cap_pol, vboot_pol;
  bool cap_serial = false, vboot_serial = false, tune_serial = false;
  double design_farads = 0.0;

  CLI::App* c_run = app.add_subcommand("run", "emulate one experiment");
  add_common(c_run, &run_o, true);
  c_run->add_option("--events", run_events,
                    "also write the actuation event log (CSV) here");

  CLI::App* c_cap = app.add_subcommand(
      "sweep-cap", "minimum viable capacitance per policy");
  add_common(c_cap, &cap_o, true);
  c_cap->add_option("--candidates", cap_cand,
                    "comma-separated capacitances, ascending");
  c_cap->add_option("--policies", cap_pol,
                    "policies to sweep (default: all)");
  c_cap->add_flag("--serial", cap_serial, "disable parallel candidate runs");

  CLI::App* c_vboot = app.add_subcommand(
      "sweep-vboot", "minimum viable boot voltage per policy");
  add_common(c_vboot, &vboot_o, true);
  c_vboot->add_option("--candidates", vboot_cand,
                      "comma-separated boot voltages, ascending");
  c_vboot->add_option("--policies", vboot_pol,
                      "policies to sweep (default: all)");
  c_vboot->add_flag("--serial", vboot_serial,
                    "disable parallel candidate runs");

  CLI::App* c_tune = app.add_subcommand(
      "tune-vsave", "empirical checkpoint threshold search");
  add_common(c_tune, &tune_o, true);
  c_tune->add_option("--candidates", tune_cand,
                     "comma-separated v_save values to probe");
  c_tune->add_flag("--serial", tune_serial, "disable parallel candidate runs");

  CLI::App* c_design = app.add_subcommand(
      "design", "comparator divider sizing and switching-cost report");
  add_common(c_design, &design_o, false);
  c_design->add_option("--capacitance", design_farads,
                       "buffer capacitance for the epsilon_c floor");

  CLI::App* c_validate =
      app.add_subcommand("validate", "check a config without running it");
  add_common(c_validate, &validate_o, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_run->parsed()) return cmd_run(run_o, run_events);
    if (c_cap->parsed())
      return cmd_sweep(cap_o, false, cap_cand, cap_pol, cap_serial);
    if (c_vboot->parsed())
      return cmd_sweep(vboot_o, true, vboot_cand, vboot_pol, vboot_serial);
    if (c_tune->parsed()) return cmd_tune_vsave(tune_o, tune_cand, tune_serial);
    if (c_design->parsed()) return cmd_design(design_o, design_farads);
    if (c_validate->parsed()) return cmd_validate(validate_o);
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    std::cout << err.dump(2) << "\n";
    return 1;
  }
  return 1;
}
