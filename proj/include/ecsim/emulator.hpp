#ifndef ECSIM_EMULATOR_HPP
#define ECSIM_EMULATOR_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ecsim/checkpoint.hpp"
#include "ecsim/energy_model.hpp"
#include "ecsim/fbtc_design.hpp"
#include "ecsim/harvest.hpp"
#include "ecsim/nvm.hpp"
#include "ecsim/policies.hpp"
#include "ecsim/windows.hpp"

namespace ecsim {

/* A benchmark reduced to its cycle count; probe sites model the polling
 * instrumentation inserted at loop latches and call sites. */
struct Workload {
  std::string name = "custom";
  std::uint64_t total_cycles = 0;
  std::uint64_t probe_interval_cycles = 2000;
  std::uint32_t ram_used_bytes = 128;
};

/* Bundled presets (dijkstra, fft, rsa) with ascending cycle counts.  The
 * magnitudes are representative placeholders, not measurements.  Throws
 * std::invalid_argument for an unknown name. */
Workload workload_preset(const std::string& name);

struct SourceConfig {
  enum class Kind { constant, trace, synthetic_poor };
  Kind kind = Kind::constant;
  double volts = 3.6; // constant level, or supply level for synthetic_poor
  std::string trace_path;
  bool loop = false;
  std::shared_ptr<const SourceTrace> trace;
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::fixed;
  double fixed_freq_hz = 16e6; // fixed policies only
  bool regulated = false;      // fixed only: run through the regulator at the
                               // window's v_reg instead of straight off the
                               // capacitor (DVFS policies always regulate)
  DividerDesign fbtc;          // fbtc only
  double v_on = -1.0;          // fbtc latch set threshold; < 0 means v_boot
  int switch_cycles = 18;
};

struct EmulatorControls {
  double max_off_dt = 1e-3;      // adaptive step ceiling while off/hibernating
  double crossing_tol_v = 1e-6;  // bisection tolerance for threshold location
  double max_sim_time = 1e7;     // hard wall on simulated seconds
  std::uint64_t max_energy_cycles = 1000000;
  bool record_events = true;
};

struct ExperimentConfig {
  WindowTable windows;
  std::shared_ptr<const EnergyModelTable> energy;

  double capacitance = 100e-6;
  double rating = 3.6;
  double v_initial = -1.0; // < 0 means "start at v_boot"
  double v_boot = 3.6;

  Regulator regulator;
  PolicyConfig policy;
  CheckpointConfig checkpoint;
  NvmModel nvm;
  SourceConfig source;
  ChargingNetwork network;
  CircuitryProfile circuitry; // governor/monitor support hardware on the rail

  std::uint32_t device_ram_bytes = 512;
  EmulatorControls controls;
  std::uint64_t seed = 0; // reserved: runs are deterministic
};

struct RunMetrics {
  bool completed = false;
  std::string failure_reason; // non-empty when the run was aborted

  double completion_time_s = 0.0;
  double execution_time_s = 0.0; // powered time (active, stalls, hibernation)
  double recharge_time_s = 0.0;  // powered-off time

  double energy_total_j = 0.0;
  std::map<std::string, double> energy_by_component;
  double energy_initial_j = 0.0;
  double energy_harvested_j = 0.0; // delivered into the capacitor
  double energy_source_j = 0.0;    // drawn from the source (incl. losses)
  double energy_final_j = 0.0;

  std::uint64_t n_energy_failures = 0; // power losses before completion
  std::uint64_t window_transitions = 0;
  std::uint64_t cycles_executed = 0; // workload cycles completed (net)
  std::uint64_t boots = 0;
  std::uint64_t checkpoints_saved = 0;
  std::uint64_t probes = 0;
  double v_save_resolved = 0.0;
};

/* Per-energy-cycle progress snapshot, for forward-progress analysis. */
struct EnergyCycleSummary {
  double t_boot = 0.0;
  double t_end = 0.0;
  std::uint64_t progress_at_boot = 0;
  std::uint64_t progress_at_end = 0; // committed (checkpointed or completed)
  std::uint64_t cycles_run = 0;      // workload cycles executed this cycle,
                                     // whether or not they were committed
};

struct RunResult {
  RunMetrics metrics;
  std::vector<ActuationEvent> events;
  std::vector<EnergyCycleSummary> energy_cycles;
};

/* Basic coherence checks across the assembled experiment: valid window and
 * energy tables covering each other, v_boot within (device floor, rating],
 * v_save inside the operating span, positive component values. */
ValidationResult validate_config(const ExperimentConfig& cfg,
                                 const Workload& wl);

/* The v_save actually used by a run: the configured value, or the derived
 * default when cfg.checkpoint.v_save <= 0. */
double resolve_v_save(const ExperimentConfig& cfg, const Workload& wl);

/* Trace-driven emulation of the full device across energy cycles.  Active
 * phases step per MCU clock cycle with exact energy accounting; powered-off
 * and hibernation phases use adaptive timesteps with bisected threshold
 * crossings.  Aborts with a diagnostic instead of looping when the
 * configuration cannot make forward progress. */
RunResult run(const ExperimentConfig& cfg, const Workload& wl);

/* Human-readable policy label ("static-16MHz", "d2vfs", "fbtc"). */
std::string policy_label(const PolicyConfig& policy);

} // namespace ecsim

#endif
