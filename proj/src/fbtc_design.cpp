#include "ecsim/fbtc_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ecsim {

double delta_d_lower_bound(const WindowTable& table, double eps_c) {
  // The discharge comparator must not request a downscale out of window i+1
  // while v_cap can still legitimately sit at the bottom of that window.  At
  // the steady point v_reg = V_reg[i+1] and the tightest cap voltage is
  // V_min[i+1] + eps_c, giving delta_d >= V_reg[i+1] / (V_min[i+1] + eps_c)
  // for every interior boundary; the binding one is the largest.
  const auto& w = table.windows();
  double bound = 0.0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    bound = std::max(bound, w[i].v_reg / (w[i].v_floor + eps_c));
  }
  return bound;
}

double delta_c_upper_bound(const WindowTable& table, double eps_c) {
  // The charge comparator fires when delta_c * v_cap > v_reg.  The edge must
  // not arrive before the next floor is cleared with margin at the *lowest*
  // transition — the one taken on every boot from the device floor:
  // delta_c <= v_reg[0] / (v_floor[1] + eps_c).  Higher transitions may fire
  // early; the driver covers them by deferring actuation to floor + eps_c.
  const auto& w = table.windows();
  return w[0].v_reg / (w[1].v_floor + eps_c);
}

std::uint64_t min_cycles_for_switch(const SwitchCostParams& params) {
  if (params.p_lower <= 1.0) {
    throw std::invalid_argument(
        "switch payoff requires the higher window to cost >1x per cycle");
  }
  // A switch pays for itself once the cycles saved at the cheaper rate cover
  // the switching overhead: n * (p_lower - 1) >= switch_cycles.
  return static_cast<std::uint64_t>(
      std::ceil(params.switch_cycles / (params.p_lower - 1.0)));
}

double epsilon_c_min(double farads, const SwitchCostParams& params) {
  // The hysteresis pad must hold at least the energy burned by the minimum
  // profitable run at the higher window: 1/2 C eps^2 >= n * e_cc_max.
  double n = static_cast<double>(min_cycles_for_switch(params));
  return std::sqrt(2.0 * n * params.e_cc_max / farads);
}

std::vector<double> default_resistor_series() {
  // E24 mantissas plus 8.0 (a common stocked value the E24 grid skips),
  // spread over the 1 kOhm .. 10 MOhm decades usable for sense dividers.
  static const double mantissas[] = {
      1.0, 1.1, 1.2, 1.3, 1.5, 1.6, 1.8, 2.0, 2.2, 2.4, 2.7,
      3.0, 3.3, 3.6, 3.9, 4.3, 4.7, 5.1, 5.6, 6.2, 6.8, 7.5,
      8.0, 8.2, 9.1,
  };
  std::vector<double> out;
  for (double decade = 1e3; decade <= 1e6 + 0.5; decade *= 10.0) {
    for (double m : mantissas) out.push_back(m * decade);
  }
  out.push_back(10e6);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<ResistorPair> pick_resistors(double bound, DividerSide side,
                                           const std::vector<double>& series) {
  // Feasible ratios: discharge needs ratio >= bound (but < 1), charge needs
  // ratio <= bound (but > 0).  Among feasible pairs prefer the ratio closest
  // to the bound (least margin given away), then the largest total
  // resistance (least standing drain).
  std::optional<ResistorPair> best;
  double best_err = std::numeric_limits<double>::infinity();
  double best_total = 0.0;
  for (double ra : series) {
    for (double rb : series) {
      double ratio = rb / (ra + rb);
      bool ok = side == DividerSide::discharge ? (ratio >= bound && ratio < 1.0)
                                               : (ratio <= bound && ratio > 0.0);
      if (!ok) continue;
      double err = std::abs(ratio - bound);
      double total = ra + rb;
      if (err < best_err - 1e-15 ||
          (std::abs(err - best_err) <= 1e-15 && total > best_total)) {
        best_err = err;
        best_total = total;
        best = ResistorPair{ra, rb};
      }
    }
  }
  return best;
}

double fbtc_upscale_voltage(const WindowTable& table,
                            const DividerDesign& design, std::size_t window) {
  const auto& w = table.windows();
  if (window + 1 >= w.size()) {
    throw std::out_of_range("no window above the top to upscale into");
  }
  // The comparator fires at v_cap = V_reg[window] / delta_c, but the driver
  // must never raise the clock into a window whose floor the capacitor has
  // not yet cleared; it waits out the residue when the divider is coarse.
  double fire = w[window].v_reg / design.delta_c;
  double safe = w[window + 1].v_floor + design.eps_c;
  return std::max(fire, safe);
}

double fbtc_downscale_voltage(const WindowTable& table,
                              const DividerDesign& design, std::size_t window) {
  const auto& w = table.windows();
  if (window == 0) {
    throw std::out_of_range("no window below the bottom to downscale into");
  }
  return w[window].v_reg / design.delta_d;
}

AntiBounceReport check_anti_bounce(const WindowTable& table,
                                   const DividerDesign& design,
                                   double sweep_step) {
  AntiBounceReport report;
  const auto& w = table.windows();

  // Sweep the capacitor upward across the full span, actuating exactly as
  // the driver would, and verify that immediately after each upscale the
  // discharge comparator is quiet: v_reg(new) <= delta_d * v_cap.
  std::size_t cur = 0;
  for (double v = w.front().v_floor; v <= w.back().v_ceiling + 1e-12;
       v += sweep_step) {
    if (cur + 1 < w.size()) {
      double v_up = fbtc_upscale_voltage(table, design, cur);
      if (v >= v_up) {
        ++cur;
        double v_reg_new = w[cur].v_reg;
        if (v_reg_new > design.delta_d * v + 1e-12) {
          std::ostringstream what;
          what << "upscale into window " << cur << " at v_cap=" << v
               << " V immediately re-arms the discharge comparator ("
               << v_reg_new << " > " << design.delta_d << " * " << v << ")";
          report.violations.push_back({cur, v, what.str()});
        }
      }
    }
  }
  report.ok = report.violations.empty();
  return report;
}

DividerDesign design_dividers(const WindowTable& table, double eps_c,
                              const std::vector<double>& series) {
  DividerDesign d;
  d.eps_c = eps_c;
  d.eps_d = eps_c;

  double dd_bound = delta_d_lower_bound(table, eps_c);
  double dc_bound = delta_c_upper_bound(table, eps_c);

  auto discharge = pick_resistors(dd_bound, DividerSide::discharge, series);
  auto charge = pick_resistors(dc_bound, DividerSide::charge, series);
  if (!discharge || !charge) {
    throw std::runtime_error(
        "no resistor pair in the series satisfies the divider bounds");
  }

  d.r1 = discharge->ra;
  d.r2 = discharge->rb;
  d.delta_d = discharge->ratio();
  d.r3 = charge->ra;
  d.r4 = charge->rb;
  d.delta_c = charge->ratio();

  auto bounce = check_anti_bounce(table, d);
  if (!bounce.ok) {
    throw std::runtime_error("designed dividers fail the anti-bounce check: " +
                             bounce.violations.front().what);
  }
  return d;
}

} // namespace ecsim
