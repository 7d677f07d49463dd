#include "ecsim/config.hpp"

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ecsim/fbtc_design.hpp"

namespace ecsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes")
    return true;
  if (value == "false" || value == "0" || value == "off" || value == "no")
    return false;
  throw std::runtime_error("expected a boolean for '" + key + "', got '" +
                           value + "'");
}

std::string resolve_path(const std::string& base_dir,
                         const std::string& value) {
  std::filesystem::path p(value);
  if (p.is_absolute() || base_dir.empty()) return value;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

/* window.<N>.{freq,v_reg,v_floor,v_ceiling}; returns field slot or -1. */
int window_field_slot(const std::string& key, int* index) {
  if (key.rfind("window.", 0) != 0) return -1;
  std::string rest = key.substr(7);
  std::size_t dot = rest.find('.');
  if (dot == std::string::npos || dot == 0) return -1;
  for (std::size_t i = 0; i < dot; ++i) {
    if (rest[i] < '0' || rest[i] > '9') return -1;
  }
  *index = std::atoi(rest.substr(0, dot).c_str());
  std::string field = rest.substr(dot + 1);
  if (field == "freq") return 0;
  if (field == "v_reg") return 1;
  if (field == "v_floor") return 2;
  if (field == "v_ceiling") return 3;
  return -1;
}

std::uint32_t parse_u32(const std::string& key, const std::string& value) {
  double v = parse_si(value);
  if (v < 0.0 || v > 4294967295.0)
    throw std::runtime_error("'" + key + "' is out of range: " + value);
  return static_cast<std::uint32_t>(v + 0.5);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  double v = parse_si(value);
  if (v < 0.0)
    throw std::runtime_error("'" + key + "' cannot be negative: " + value);
  return static_cast<std::uint64_t>(v + 0.5);
}

void flatten_json(const nlohmann::json& j, const std::string& prefix,
                  std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& item : j.items()) {
      std::string key = prefix.empty() ? item.key() : prefix + "." + item.key();
      flatten_json(item.value(), key, out);
    }
  } else if (j.is_array()) {
    std::size_t i = 0;
    for (const auto& v : j) {
      flatten_json(v, prefix + "." + std::to_string(i), out);
      ++i;
    }
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

} // namespace

double parse_si(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) throw std::runtime_error("empty number");
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) throw std::runtime_error("not a number: '" + text + "'");
  std::string suffix = trim(std::string(end));
  if (suffix.empty()) return v;
  if (suffix.size() == 1) {
    switch (suffix[0]) {
      case 'n': return v * 1e-9;
      case 'u': return v * 1e-6;
      case 'm': return v * 1e-3;
      case 'k': return v * 1e3;
      case 'M': return v * 1e6;
      case 'G': return v * 1e9;
    }
  }
  throw std::runtime_error("unrecognized unit suffix '" + suffix + "' in '" +
                           text + "'");
}

void apply_setting(LoadedExperiment& exp, const std::string& key,
                   const std::string& value, const std::string& base_dir) {
  ExperimentConfig& c = exp.config;
  auto num = [&] { return parse_si(value); };
  auto boolean = [&] { return parse_bool(key, value); };
  std::string stored = value;

  if (key == "capacitance") {
    c.capacitance = num();
  } else if (key == "rating") {
    c.rating = num();
  } else if (key == "v_boot") {
    c.v_boot = num();
  } else if (key == "v_initial") {
    c.v_initial = num();
  } else if (key == "seed") {
    c.seed = parse_u64(key, value);
  } else if (key == "regulator.eta") {
    c.regulator = Regulator(num());
  } else if (key == "policy.kind") {
    if (value == "static") c.policy.kind = PolicyKind::fixed;
    else if (value == "d2vfs") c.policy.kind = PolicyKind::d2vfs;
    else if (value == "fbtc") c.policy.kind = PolicyKind::fbtc;
    else
      throw std::runtime_error("unknown policy.kind '" + value +
                               "' (static, d2vfs, fbtc)");
  } else if (key == "policy.frequency") {
    c.policy.fixed_freq_hz = num();
  } else if (key == "policy.regulated") {
    c.policy.regulated = boolean();
  } else if (key == "policy.v_on") {
    c.policy.v_on = num();
  } else if (key == "policy.switch_cycles") {
    c.policy.switch_cycles = static_cast<int>(parse_u32(key, value));
  } else if (key == "policy.fbtc.delta_d") {
    c.policy.fbtc.delta_d = num();
  } else if (key == "policy.fbtc.delta_c") {
    c.policy.fbtc.delta_c = num();
  } else if (key == "policy.fbtc.r1") {
    c.policy.fbtc.r1 = num();
  } else if (key == "policy.fbtc.r2") {
    c.policy.fbtc.r2 = num();
  } else if (key == "policy.fbtc.r3") {
    c.policy.fbtc.r3 = num();
  } else if (key == "policy.fbtc.r4") {
    c.policy.fbtc.r4 = num();
  } else if (key == "policy.fbtc.eps_c") {
    c.policy.fbtc.eps_c = num();
  } else if (key == "policy.fbtc.eps_d") {
    c.policy.fbtc.eps_d = num();
  } else if (key == "checkpoint.scheme") {
    if (value == "none") c.checkpoint.scheme = Scheme::none;
    else if (value == "hibernus") c.checkpoint.scheme = Scheme::hibernus;
    else if (value == "mementos") c.checkpoint.scheme = Scheme::mementos;
    else
      throw std::runtime_error("unknown checkpoint.scheme '" + value +
                               "' (none, hibernus, mementos)");
  } else if (key == "checkpoint.v_save") {
    c.checkpoint.v_save = num();
  } else if (key == "checkpoint.v_save_margin") {
    c.checkpoint.v_save_margin = num();
  } else if (key == "checkpoint.resume_margin") {
    c.checkpoint.resume_margin = num();
  } else if (key == "checkpoint.i_hibernate") {
    c.checkpoint.i_hibernate = num();
  } else if (key == "checkpoint.adc_mode") {
    if (value == "default") c.checkpoint.adc_mode = AdcMode::default_mode;
    else if (value == "no_adc_off") c.checkpoint.adc_mode = AdcMode::no_adc_off;
    else if (value == "two_v_min") c.checkpoint.adc_mode = AdcMode::two_v_min;
    else
      throw std::runtime_error("unknown checkpoint.adc_mode '" + value +
                               "' (default, no_adc_off, two_v_min)");
  } else if (key == "checkpoint.t_adc") {
    c.checkpoint.t_adc = num();
  } else if (key == "checkpoint.probe_compare_cycles") {
    c.checkpoint.probe_compare_cycles =
        static_cast<int>(parse_u32(key, value));
  } else if (key == "checkpoint.adc_floor") {
    c.checkpoint.adc_floor = num();
  } else if (key == "checkpoint.registers_bytes") {
    c.checkpoint.footprint.registers_bytes = parse_u32(key, value);
  } else if (key == "checkpoint.ram_used_bytes") {
    c.checkpoint.footprint.ram_used_bytes = parse_u32(key, value);
  } else if (key == "workload.preset") {
    if (value != "dijkstra" && value != "fft" && value != "rsa")
      throw std::runtime_error("unknown workload.preset '" + value +
                               "' (dijkstra, fft, rsa)");
  } else if (key == "workload.cycles" || key == "workload.probe_interval" ||
             key == "workload.ram_used") {
    (void)parse_u64(key, value); // applied in finalize_experiment
  } else if (key == "nvm.capacity") {
    c.nvm.capacity_bytes = parse_u32(key, value);
  } else if (key == "nvm.bus_clock") {
    c.nvm.bus_clock_hz = num();
  } else if (key == "nvm.cycles_per_byte") {
    c.nvm.bus_cycles_per_byte = num();
  } else if (key == "nvm.overhead_bytes") {
    c.nvm.transaction_overhead_bytes = parse_u32(key, value);
  } else if (key == "nvm.energy_per_byte") {
    c.nvm.energy_per_byte_write = num();
    c.nvm.energy_per_byte_read = c.nvm.energy_per_byte_write;
  } else if (key == "nvm.standby_current") {
    c.nvm.standby_current_a = num();
  } else if (key == "source.kind") {
    if (value == "constant") c.source.kind = SourceConfig::Kind::constant;
    else if (value == "poor") c.source.kind = SourceConfig::Kind::synthetic_poor;
    else if (value == "trace") c.source.kind = SourceConfig::Kind::trace;
    else
      throw std::runtime_error("unknown source.kind '" + value +
                               "' (constant, poor, trace)");
  } else if (key == "source.volts") {
    c.source.volts = num();
  } else if (key == "source.trace") {
    stored = resolve_path(base_dir, value); // loaded in finalize_experiment
  } else if (key == "source.loop") {
    c.source.loop = boolean();
  } else if (key == "network.r_series") {
    c.network.r_series = num();
  } else if (key == "network.doubler") {
    if (boolean()) {
      if (!c.network.doubler) c.network.doubler.emplace();
    } else {
      c.network.doubler.reset();
    }
  } else if (key == "network.doubler.gain") {
    if (!c.network.doubler) c.network.doubler.emplace();
    c.network.doubler->gain = num();
  } else if (key == "network.doubler.efficiency") {
    if (!c.network.doubler) c.network.doubler.emplace();
    c.network.doubler->efficiency = num();
  } else if (key == "circuitry") {
    if (value != "auto" && value != "none")
      throw std::runtime_error("unknown circuitry mode '" + value +
                               "' (auto, none)");
  } else if (key == "device.ram_bytes") {
    c.device_ram_bytes = parse_u32(key, value);
  } else if (key == "energy_model.path") {
    stored = resolve_path(base_dir, value); // loaded in finalize_experiment
  } else if (key == "controls.max_off_dt") {
    c.controls.max_off_dt = num();
  } else if (key == "controls.crossing_tol") {
    c.controls.crossing_tol_v = num();
  } else if (key == "controls.max_sim_time") {
    c.controls.max_sim_time = num();
  } else if (key == "controls.max_energy_cycles") {
    c.controls.max_energy_cycles = parse_u64(key, value);
  } else if (key == "controls.record_events") {
    c.controls.record_events = boolean();
  } else {
    int index = 0;
    if (window_field_slot(key, &index) >= 0) {
      (void)num(); // collected in finalize_experiment
    } else {
      throw std::runtime_error("unknown setting '" + key + "'");
    }
  }

  exp.resolved[key] = stored;
}

void finalize_experiment(LoadedExperiment& exp) {
  ExperimentConfig& c = exp.config;
  const nlohmann::json& r = exp.resolved;
  auto has = [&](const char* k) { return r.contains(k); };
  auto str = [&](const char* k) { return r.at(k).get<std::string>(); };

  // Performance windows: explicit window.N.* rows, else the bundled table.
  std::map<int, std::array<double, 4>> rows;
  std::map<int, int> masks;
  for (const auto& item : r.items()) {
    int index = 0;
    int slot = window_field_slot(item.key(), &index);
    if (slot < 0) continue;
    rows[index][static_cast<std::size_t>(slot)] =
        parse_si(item.value().get<std::string>());
    masks[index] |= 1 << slot;
  }
  if (!rows.empty()) {
    std::vector<PerformanceWindow> ws;
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      auto it = rows.find(i);
      if (it == rows.end() || masks[i] != 0xf)
        throw std::runtime_error(
            "window." + std::to_string(i) +
            " needs freq, v_reg, v_floor and v_ceiling");
      ws.push_back({it->second[0], it->second[1], it->second[2],
                    it->second[3]});
    }
    c.windows = WindowTable(ws);
    if (auto vr = validate_table(c.windows); !vr)
      throw std::runtime_error(vr.message);
  } else {
    c.windows = msp430g2553_table();
  }

  // Energy model is the one setting with no usable default.
  if (!has("energy_model.path"))
    throw std::runtime_error("missing required setting 'energy_model.path'");
  c.energy = std::make_shared<EnergyModelTable>(
      EnergyModelTable::from_csv_file(str("energy_model.path")));

  // Workload: preset first, explicit fields override.
  Workload wl;
  if (has("workload.preset")) wl = workload_preset(str("workload.preset"));
  if (has("workload.cycles"))
    wl.total_cycles = parse_u64("workload.cycles", str("workload.cycles"));
  if (has("workload.probe_interval"))
    wl.probe_interval_cycles =
        parse_u64("workload.probe_interval", str("workload.probe_interval"));
  if (has("workload.ram_used"))
    wl.ram_used_bytes =
        parse_u32("workload.ram_used", str("workload.ram_used"));
  exp.workload = wl;
  if (!has("checkpoint.ram_used_bytes"))
    c.checkpoint.footprint.ram_used_bytes = wl.ram_used_bytes;

  // FBTC divider network: pinned ratios pass through, otherwise designed
  // from the window table.
  if (c.policy.kind == PolicyKind::fbtc) {
    bool dd = has("policy.fbtc.delta_d");
    bool dc = has("policy.fbtc.delta_c");
    if (dd != dc)
      throw std::runtime_error(
          "pin both policy.fbtc.delta_d and policy.fbtc.delta_c or neither");
    if (!dd) c.policy.fbtc = design_dividers(c.windows, c.policy.fbtc.eps_c);
  }

  // Source trace.
  if (c.source.kind == SourceConfig::Kind::trace) {
    if (!has("source.trace"))
      throw std::runtime_error("missing required setting 'source.trace'");
    c.source.trace_path = str("source.trace");
    c.source.trace = std::make_shared<SourceTrace>(
        SourceTrace::from_csv_file(c.source.trace_path, c.source.loop));
  } else {
    c.source.trace.reset();
  }

  // Support circuitry follows the policy and checkpoint scheme.
  c.circuitry = CircuitryProfile{};
  bool auto_circ = !has("circuitry") || str("circuitry") == "auto";
  if (auto_circ) {
    if (c.policy.kind == PolicyKind::d2vfs) {
      c.circuitry = d2vfs_circuitry();
    } else if (c.policy.kind == PolicyKind::fbtc) {
      c.circuitry = fbtc_circuitry(c.policy.fbtc);
    }
    if (c.checkpoint.scheme == Scheme::hibernus) {
      for (const CircuitComponent& comp : hibernus_divider().components)
        c.circuitry.components.push_back(comp);
    }
  }
}

LoadedExperiment load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);

  LoadedExperiment exp;
  exp.resolved = nlohmann::json::object();
  std::string base_dir = std::filesystem::path(path).parent_path().string();

  bool is_json = path.size() >= 5 && path.rfind(".json") == path.size() - 5;
  if (is_json) {
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object())
      throw std::runtime_error(path + ": top-level JSON must be an object");
    std::vector<std::pair<std::string, std::string>> kv;
    flatten_json(j, "", kv);
    for (const auto& [key, value] : kv) apply_setting(exp, key, value, base_dir);
  } else {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      std::size_t eq = line.find('=');
      std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
      std::string value =
          eq == std::string::npos ? "" : trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": expected 'key = value'");
      apply_setting(exp, key, value, base_dir);
    }
  }

  finalize_experiment(exp);
  return exp;
}

} // namespace ecsim
