#ifndef ECSIM_CHECKPOINT_HPP
#define ECSIM_CHECKPOINT_HPP

#include <cstdint>

namespace ecsim {

enum class Scheme { none, hibernus, mementos };
enum class AdcMode { default_mode, no_adc_off, two_v_min };

/* Bytes written per checkpoint: register file plus the used portion of main
 * memory (the region delimited by the stack pointer). */
struct StateFootprint {
  std::uint32_t registers_bytes = 32;
  std::uint32_t ram_used_bytes = 128;
  std::uint32_t total() const { return registers_bytes + ram_used_bytes; }
};

struct CheckpointConfig {
  Scheme scheme = Scheme::hibernus;

  /* Voltage-triggered save threshold.  <= 0 selects the derived default:
   * sqrt(floor^2 + 2 * v_save_margin * E_save / C), just enough headroom to
   * finish a save above the device floor. */
  double v_save = 0.0;
  double v_save_margin = 1.3;

  StateFootprint footprint;

  /* hibernus parameters */
  double i_hibernate = 0.5e-6; // LPM current while hibernating
  double resume_margin = 0.1;  // resume at v_save + margin

  /* mementos parameters */
  AdcMode adc_mode = AdcMode::default_mode;
  double t_adc = 30e-6;                 // ADC conversion wait per probe
  std::uint32_t probe_compare_cycles = 10; // fixed compare/branch overhead
  double adc_floor = 2.2;               // minimum reliable ADC supply
};

enum class HibernusPhase { active, hibernating, booting };
enum class HibernusAction { none, save_then_hibernate, resume, restore_on_boot };

/* Voltage-comparator decision logic:
 *   active and v_cap < v_save            -> save_then_hibernate
 *   hibernating and v_cap >= v_save + m  -> resume (RAM retained, no restore)
 *   booting after a full power loss      -> restore_on_boot when a
 *                                           checkpoint exists. */
HibernusAction hibernus_on_voltage(const CheckpointConfig& cfg, double v_cap,
                                   HibernusPhase phase, bool has_checkpoint);

struct ProbeResult {
  std::uint64_t cost_cycles = 0;
  bool save = false;
};

/* One polled voltage probe: costs ceil(t_adc * freq) NOP-padding cycles plus
 * the fixed compare overhead.  Saves when v_cap < v_save; in default mode
 * every probe below the ADC floor also saves (the reading is unreliable, so
 * the instrumentation saves defensively). */
ProbeResult mementos_probe(const CheckpointConfig& cfg, double v_cap,
                           double freq_hz);

/* Effective shutdown voltage: the policy floor, raised to adc_floor when the
 * scheme is mementos in two_v_min mode. */
double device_floor(const CheckpointConfig& cfg, double policy_floor_v);

} // namespace ecsim

#endif
