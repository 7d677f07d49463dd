#ifndef ECSIM_FBTC_DESIGN_HPP
#define ECSIM_FBTC_DESIGN_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecsim/windows.hpp"

namespace ecsim {

/* Resistor dividers feeding the two threshold comparators.
 * Discharge side: delta_d = r2 / (r1 + r2); an interrupt fires when
 * v_reg > delta_d * v_cap.  Charge side: delta_c = r4 / (r3 + r4); an
 * interrupt fires when delta_c * v_cap > v_reg. */
struct DividerDesign {
  double delta_d = 0.0;
  double delta_c = 0.0;
  double r1 = 0.0, r2 = 0.0; // discharge divider
  double r3 = 0.0, r4 = 0.0; // charge divider
  double eps_c = 0.05;       // charge-side anti-bounce margin (volts)
  double eps_d = 0.05;       // discharge-side headroom (volts)
};

/* Parameters of the switch-cost feasibility bound.  p_lower is the relative
 * per-cycle energy increase of the next lower frequency at equal voltage
 * (average over adjacent frequency pairs); e_cc_max is the largest per-cycle
 * energy across operating points. */
struct SwitchCostParams {
  double switch_cycles = 18.0;
  double p_lower = 1.17;
  double e_cc_max = 0.85e-9;
};

/* Lower bound for delta_d: max over i of v_reg[i+1] / (v_floor[i+1] + eps_c),
 * taken across every adjacent window pair.  Requires >= 2 windows. */
double delta_d_lower_bound(const WindowTable& table, double eps_c);

/* Upper bound for delta_c, anchored at the lowest transition:
 * v_reg[0] / (v_floor[1] + eps_c).  Requires >= 2 windows. */
double delta_c_upper_bound(const WindowTable& table, double eps_c);

/* Cycles that must be executable from the margin energy for a window switch
 * to pay off: ceil(switch_cycles / (p_lower - 1)).  Throws
 * std::invalid_argument when p_lower <= 1 (the bound is infeasible). */
std::uint64_t min_cycles_for_switch(const SwitchCostParams& params);

/* Smallest anti-bounce margin that funds min_cycles_for_switch cycles at
 * e_cc_max from the extra capacitor energy: sqrt(2 n e_cc_max / C). */
double epsilon_c_min(double farads, const SwitchCostParams& params);

enum class DividerSide { discharge, charge };

/* Standard E24 mantissas per decade from 1 kOhm to 10 MOhm, plus the 8.0
 * mantissa (stocked for round 4:1 dividers). */
std::vector<double> default_resistor_series();

struct ResistorPair {
  double ra = 0.0; // high-side resistor (r1 or r3)
  double rb = 0.0; // low-side resistor (r2 or r4)
  double ratio() const { return rb / (ra + rb); }
};

/* Picks the pair whose ratio satisfies the bound (>= for discharge, <= for
 * charge) with the smallest margin; among equal ratios the largest total
 * resistance wins (lowest divider current).  nullopt when no pair
 * satisfies the bound. */
std::optional<ResistorPair> pick_resistors(double bound, DividerSide side,
                                           const std::vector<double>& series);

/* Capacitor voltage at which the charge comparator's upscale from window i
 * actually actuates.  The comparator edge fires at v_reg[i] / delta_c; the
 * driver defers actuation until the target window's floor plus eps_c when
 * the edge lands below it. */
double fbtc_upscale_voltage(const WindowTable& table, const DividerDesign& d,
                            std::size_t window);

/* Capacitor voltage at which the discharge comparator fires while in the
 * given window: v_reg[i] / delta_d. */
double fbtc_downscale_voltage(const WindowTable& table, const DividerDesign& d,
                              std::size_t window);

struct BounceViolation {
  std::size_t window = 0; // window the upscale leaves
  double v_cap = 0.0;     // witness voltage
  std::string what;
};

struct AntiBounceReport {
  bool ok = true;
  std::vector<BounceViolation> violations;
  explicit operator bool() const { return ok; }
};

/* Sweeps v_cap upward over the table span in fixed steps, actuating the
 * charge comparator as the driver would, and checks at every upscale point
 * that the discharge comparator of the new window does not already hold
 * (delta_d * v_cap >= v_reg[i+1]). */
AntiBounceReport check_anti_bounce(const WindowTable& table,
                                   const DividerDesign& design,
                                   double sweep_step = 1e-3);

/* Full sizing pipeline: bounds from eps_c, resistor picks from the series,
 * ratios taken from the picked pairs.  Throws std::runtime_error when a
 * side has no feasible pair. */
DividerDesign design_dividers(const WindowTable& table, double eps_c = 0.05,
                              const std::vector<double>& series =
                                  default_resistor_series());

} // namespace ecsim

#endif
