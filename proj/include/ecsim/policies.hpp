#ifndef ECSIM_POLICIES_HPP
#define ECSIM_POLICIES_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "ecsim/fbtc_design.hpp"
#include "ecsim/windows.hpp"

namespace ecsim {

enum class Action {
  set_frequency,
  set_regulator,
  power_on,
  power_off,
  interrupt,
};

const char* action_name(Action a);

/* One entry of the actuation log.  value carries hertz for set_frequency,
 * volts for set_regulator and zero otherwise; detail names the interrupt
 * source for Action::interrupt. */
struct ActuationEvent {
  double at = 0.0;
  Action action = Action::interrupt;
  double value = 0.0;
  const char* detail = "";
};

enum class PolicyKind { fixed, d2vfs, fbtc };

/* Mutable governor state; the event log is the observable output shared
 * with the emulator. */
struct PolicyState {
  PolicyKind kind = PolicyKind::fixed;
  int current_window = -1; // -1 while powered off
  bool pending_upscale = false;
  bool discharge_irq_enabled = true;
  std::vector<ActuationEvent> event_log;

  void log(double t, Action a, double value = 0.0, const char* detail = "") {
    event_log.push_back({t, a, value, detail});
  }
};

/* ---- support circuitry ------------------------------------------------ */

enum class Activity { always, only_when_on };

struct CircuitComponent {
  std::string name;
  double quiescent_a = 0.0;  // fixed quiescent current
  double divider_ohms = 0.0; // total divider resistance (0 = none)
  Activity activity = Activity::always;
};

struct CircuitryProfile {
  std::vector<CircuitComponent> components;
};

/* Energy drawn from the capacitor over dt at voltage v_cap:
 * sum of i_q * v * dt plus v^2 * dt / R for divider components. */
double circuitry_drain(const CircuitryProfile& profile, double v_cap,
                       double dt, bool device_on);

/* Datasheet-flavoured defaults: four voltage detectors, a quad flip-flop, a
 * 4-bit comparator and an AND gate for the window tracker; two detectors,
 * inverter, NOR pair, two nanopower op-amps plus the divider strings for the
 * threshold comparator board; the 200 kOhm sense divider used by the
 * software checkpointing baseline. */
CircuitryProfile d2vfs_circuitry();
CircuitryProfile fbtc_circuitry(const DividerDesign& design);
CircuitryProfile hibernus_divider();

/* ---- governors --------------------------------------------------------- */

/* Boot-time actuation: picks the window containing v_cap and emits the
 * upscale-ordered pair (regulator first, then frequency); fixed-frequency
 * policies emit set_frequency only (no regulator in the supply path).
 * Returns the selected window index. */
std::size_t policy_boot(PolicyState& state, const WindowTable& table,
                        double v_cap, double t,
                        std::size_t fixed_window = 0);

/* Fixed-frequency governor running straight off the capacitor: powers off
 * when v_cap falls below the window floor.  Returns true when a power-off
 * was emitted. */
bool static_step(PolicyState& state, const WindowTable& table,
                 std::size_t fixed_window, double v_cap, double t);

enum class CrossDirection { down, up };

struct StepOutcome {
  bool switched = false;
  int cost_cycles = 0; // MCU cycles consumed by the switch routine
};

/* Window-boundary interrupt handler for the detector-ladder governor.
 * boundary_v is the voltage of the boundary just crossed; crossings must be
 * delivered one at a time in voltage order.  Downward crossings of the
 * current floor actuate immediately (frequency first, then regulator).
 * Upward crossings actuate one window up only when the ceiling of that
 * window is reached; the first crossing after a reversal only arms
 * pending_upscale. */
StepOutcome d2vfs_step(PolicyState& state, const WindowTable& table,
                       double boundary_v, CrossDirection dir, double t,
                       int switch_cycles = 18);

/* Threshold-comparator governor.  Examines the voltage move v_prev -> v_now
 * against the current window's comparator thresholds and performs at most
 * one transition.  The discharge interrupt is disabled while in the lowest
 * window and re-enabled on upscale. */
StepOutcome fbtc_step(PolicyState& state, const WindowTable& table,
                      const DividerDesign& design, double v_prev, double v_now,
                      double t, int switch_cycles = 18);

/* ---- power latch -------------------------------------------------------- */

/* Set-reset flip-flop driving the regulator enable: set when v_cap rises to
 * v_on, reset when it falls below v_min.  Returns true when the latch
 * changed state; transitions are logged as power_on / power_off. */
struct PowerLatch {
  bool on = false;
};

bool power_state_step(PowerLatch& latch, double v_cap, double v_on,
                      double v_min, double t,
                      std::vector<ActuationEvent>& log);

} // namespace ecsim

#endif
