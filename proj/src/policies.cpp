#include "ecsim/policies.hpp"

#include <algorithm>
#include <cmath>

namespace ecsim {

const char* action_name(Action a) {
  switch (a) {
    case Action::set_frequency: return "set_frequency";
    case Action::set_regulator: return "set_regulator";
    case Action::power_on: return "power_on";
    case Action::power_off: return "power_off";
    case Action::interrupt: return "interrupt";
  }
  return "?";
}

double circuitry_drain(const CircuitryProfile& profile, double v_cap,
                       double dt, bool device_on) {
  double e = 0.0;
  for (const auto& c : profile.components) {
    if (c.activity == Activity::only_when_on && !device_on) continue;
    e += c.quiescent_a * v_cap * dt;
    if (c.divider_ohms > 0.0) e += v_cap * v_cap * dt / c.divider_ohms;
  }
  return e;
}

CircuitryProfile d2vfs_circuitry() {
  CircuitryProfile p;
  p.components = {
      {"detector-2v2", 0.8e-6, 0.0, Activity::always},
      {"detector-2v8", 0.8e-6, 0.0, Activity::always},
      {"detector-3v3", 0.8e-6, 0.0, Activity::always},
      {"detector-3v6", 0.8e-6, 0.0, Activity::always},
      {"quad-flipflop", 2.0e-6, 0.0, Activity::always},
      {"window-comparator", 2.0e-6, 0.0, Activity::always},
      {"and-gate", 0.5e-6, 0.0, Activity::always},
  };
  return p;
}

CircuitryProfile fbtc_circuitry(const DividerDesign& design) {
  CircuitryProfile p;
  p.components = {
      {"detector-on", 0.8e-6, 0.0, Activity::always},
      {"detector-off", 0.8e-6, 0.0, Activity::always},
      {"inverter", 0.5e-6, 0.0, Activity::always},
      {"nor-latch", 0.5e-6, 0.0, Activity::always},
      {"opamp-discharge", 0.21e-6, design.r1 + design.r2, Activity::always},
      {"opamp-charge", 0.21e-6, design.r3 + design.r4, Activity::always},
  };
  return p;
}

CircuitryProfile hibernus_divider() {
  CircuitryProfile p;
  p.components = {
      {"sense-divider", 0.0, 200e3, Activity::always},
  };
  return p;
}

std::size_t policy_boot(PolicyState& state, const WindowTable& table,
                        double v_cap, double t, std::size_t fixed_window) {
  std::size_t idx = fixed_window;
  if (state.kind != PolicyKind::fixed) {
    auto w = window_for_voltage(table, v_cap);
    if (w) {
      idx = *w;
    } else {
      // Clamp a boot voltage past the span into the nearest window.
      idx = v_cap > table.ceiling_voltage() ? table.size() - 1 : 0;
    }
  }

  if (state.kind == PolicyKind::fixed) {
    state.log(t, Action::set_frequency, table[idx].freq_hz);
  } else {
    state.log(t, Action::set_regulator, table[idx].v_reg);
    state.log(t, Action::set_frequency, table[idx].freq_hz);
  }
  state.current_window = static_cast<int>(idx);
  state.pending_upscale = false;
  state.discharge_irq_enabled = idx > 0;
  return idx;
}

bool static_step(PolicyState& state, const WindowTable& table,
                 std::size_t fixed_window, double v_cap, double t) {
  if (state.current_window < 0) return false;
  if (v_cap < table[fixed_window].v_floor) {
    state.log(t, Action::power_off);
    state.current_window = -1;
    return true;
  }
  return false;
}

namespace {

/* Boundary index for a crossing voltage: i when it matches window i's floor,
 * table.size() for the global ceiling. */
int boundary_index(const WindowTable& table, double boundary_v) {
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (std::abs(table[i].v_floor - boundary_v) < 1e-9)
      return static_cast<int>(i);
  }
  if (std::abs(table.ceiling_voltage() - boundary_v) < 1e-9)
    return static_cast<int>(table.size());
  return -1;
}

} // namespace

StepOutcome d2vfs_step(PolicyState& state, const WindowTable& table,
                       double boundary_v, CrossDirection dir, double t,
                       int switch_cycles) {
  StepOutcome out;
  int b = boundary_index(table, boundary_v);
  int cur = state.current_window;
  if (b < 0 || cur < 0) return out;

  if (dir == CrossDirection::down) {
    // Any downward move cancels a half-armed upscale.
    state.pending_upscale = false;
    if (b == cur && b > 0) {
      state.log(t, Action::interrupt, boundary_v, "boundary-down");
      state.log(t, Action::set_frequency, table[b - 1].freq_hz);
      state.log(t, Action::set_regulator, table[b - 1].v_reg);
      state.current_window = b - 1;
      out.switched = true;
      out.cost_cycles = switch_cycles;
    }
    return out;
  }

  // Upward crossing.  The tracker raises the window only when the capacitor
  // has charged through the whole of the next window — i.e. it reaches that
  // window's ceiling — guaranteeing a full span of margin after the switch.
  int top = static_cast<int>(table.size()) - 1;
  if (cur < top && b >= cur + 2) {
    state.log(t, Action::interrupt, boundary_v, "boundary-up");
    state.log(t, Action::set_regulator, table[cur + 1].v_reg);
    state.log(t, Action::set_frequency, table[cur + 1].freq_hz);
    state.current_window = cur + 1;
    state.pending_upscale = false;
    out.switched = true;
    out.cost_cycles = switch_cycles;
  } else {
    state.pending_upscale = true;
  }
  return out;
}

StepOutcome fbtc_step(PolicyState& state, const WindowTable& table,
                      const DividerDesign& design, double v_prev, double v_now,
                      double t, int switch_cycles) {
  StepOutcome out;
  int cur = state.current_window;
  if (cur < 0) return out;

  if (v_now < v_prev && cur > 0 && state.discharge_irq_enabled) {
    double v_down = fbtc_downscale_voltage(table, design,
                                           static_cast<std::size_t>(cur));
    if (v_prev >= v_down && v_now < v_down) {
      state.log(t, Action::interrupt, v_down, "discharge");
      state.log(t, Action::set_frequency, table[cur - 1].freq_hz);
      state.log(t, Action::set_regulator, table[cur - 1].v_reg);
      state.current_window = cur - 1;
      if (state.current_window == 0) state.discharge_irq_enabled = false;
      out.switched = true;
      out.cost_cycles = switch_cycles;
    }
    return out;
  }

  if (v_now > v_prev && cur + 1 < static_cast<int>(table.size())) {
    double v_up = fbtc_upscale_voltage(table, design,
                                       static_cast<std::size_t>(cur));
    if (v_prev < v_up && v_now >= v_up) {
      state.log(t, Action::interrupt, v_up, "charge");
      state.log(t, Action::set_regulator, table[cur + 1].v_reg);
      state.log(t, Action::set_frequency, table[cur + 1].freq_hz);
      state.current_window = cur + 1;
      state.discharge_irq_enabled = true;
      out.switched = true;
      out.cost_cycles = switch_cycles;
    }
  }
  return out;
}

bool power_state_step(PowerLatch& latch, double v_cap, double v_on,
                      double v_min, double t,
                      std::vector<ActuationEvent>& log) {
  if (!latch.on && v_cap >= v_on) {
    latch.on = true;
    log.push_back({t, Action::power_on, v_cap, ""});
    return true;
  }
  if (latch.on && v_cap < v_min) {
    latch.on = false;
    log.push_back({t, Action::power_off, v_cap, ""});
    return true;
  }
  return false;
}

} // namespace ecsim
