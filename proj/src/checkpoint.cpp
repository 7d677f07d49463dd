#include "ecsim/checkpoint.hpp"

#include <algorithm>
#include <cmath>

namespace ecsim {

HibernusAction hibernus_on_voltage(const CheckpointConfig& cfg, double v_cap,
                                   HibernusPhase phase, bool has_checkpoint) {
  switch (phase) {
    case HibernusPhase::active:
      if (v_cap < cfg.v_save) return HibernusAction::save_then_hibernate;
      return HibernusAction::none;
    case HibernusPhase::hibernating:
      // RAM was retained, so waking is a register reload, not a restore.
      if (v_cap >= cfg.v_save + cfg.resume_margin) return HibernusAction::resume;
      return HibernusAction::none;
    case HibernusPhase::booting:
      return has_checkpoint ? HibernusAction::restore_on_boot
                            : HibernusAction::none;
  }
  return HibernusAction::none;
}

ProbeResult mementos_probe(const CheckpointConfig& cfg, double v_cap,
                           double freq_hz) {
  ProbeResult r;
  r.cost_cycles = static_cast<std::uint64_t>(std::ceil(cfg.t_adc * freq_hz)) +
                  cfg.probe_compare_cycles;
  if (v_cap < cfg.v_save) {
    r.save = true;
  } else if (cfg.adc_mode == AdcMode::default_mode && v_cap < cfg.adc_floor) {
    // The conversion result cannot be trusted this close to the ADC's supply
    // limit, so the instrumentation saves defensively.
    r.save = true;
  }
  return r;
}

double device_floor(const CheckpointConfig& cfg, double policy_floor_v) {
  if (cfg.scheme == Scheme::mementos && cfg.adc_mode == AdcMode::two_v_min) {
    return std::max(policy_floor_v, cfg.adc_floor);
  }
  return policy_floor_v;
}

} // namespace ecsim
