#ifndef ECSIM_ENERGY_MODEL_HPP
#define ECSIM_ENERGY_MODEL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecsim/windows.hpp"

namespace ecsim {

/* Per-clock-cycle MCU energy sampled over (frequency, supply voltage).
 * One voltage-ascending series per frequency; queries interpolate linearly
 * in supply voltage and never extrapolate beyond the sampled span. */
class EnergyModelTable {
public:
  struct Sample {
    double v_supply = 0.0;
    double joules_per_cycle = 0.0;
  };
  struct Series {
    double freq_hz = 0.0;
    std::vector<Sample> samples; // ascending in v_supply
    double v_min() const { return samples.front().v_supply; }
    double v_max() const { return samples.back().v_supply; }
  };

  /* CSV columns: freq_hz,v_supply,nj_per_cycle with a header row.  Values in
   * the third column are nanojoules.  Rows must be sorted by frequency then
   * voltage.  Throws std::runtime_error on malformed input or violated
   * invariants (duplicate sample, non-positive energy, e_cc decreasing in
   * voltage within a series). */
  static EnergyModelTable from_csv_file(const std::string& path);
  static EnergyModelTable from_series(std::vector<Series> series);

  /* Linear interpolation in v_supply within the matching frequency series.
   * Throws std::out_of_range for an unknown frequency or a voltage outside
   * the sampled span. */
  double energy_per_cycle(double freq_hz, double v_supply) const;

  const Series& series_for(double freq_hz) const; // throws std::out_of_range
  const Series* find_series(double freq_hz) const;
  const std::vector<Series>& series() const { return series_; }

private:
  std::vector<Series> series_; // ascending in freq_hz
};

/* Cross-check: every frequency in the window table has a series with at
 * least two samples spanning [window v_reg, global ceiling]. */
ValidationResult validate_energy_model(const EnergyModelTable& model,
                                       const WindowTable& table);

/* Ideal energy-buffer capacitor: E = 1/2 C V^2, V capped at the rating. */
struct Capacitor {
  double farads = 100e-6;
  double volts = 0.0;
  double rating = 3.6;

  double energy() const { return 0.5 * farads * volts * volts; }

  /* Inverse of the energy relation; throws std::invalid_argument on E < 0. */
  static double voltage_for_energy(double farads, double joules);
};

/* Buck regulator efficiency: either a flat value or a bilinear grid over
 * (v_in, v_out).  The default models a TPS62740-class part at 90%. */
class Regulator {
public:
  Regulator() = default;
  explicit Regulator(double eta) : eta_(eta) {}

  struct Curve {
    std::vector<double> v_in;  // ascending grid
    std::vector<double> v_out; // ascending grid
    std::vector<double> eta;   // row-major [v_in][v_out]
  };
  void set_curve(Curve c) { curve_ = std::move(c); }

  double efficiency(double v_in, double v_out) const;
  double flat_efficiency() const { return eta_; }

private:
  double eta_ = 0.9;
  std::optional<Curve> curve_;
};

struct DrainResult {
  double v_after = 0.0;
  bool underflow = false; // requested energy exceeded the stored energy
};

/* Removes load_energy joules from the capacitor.  When a regulator is
 * present the capacitor-side draw is load_energy / efficiency(v_cap, v_out).
 * Clamps at zero charge and reports underflow. */
DrainResult drain(Capacitor& cap, double load_energy, const Regulator* reg,
                  double v_out);

/* Integration mode for cycles_in_discharge. */
struct DischargeMode {
  bool regulated = false;
  double v_reg = 0.0;      // regulator output when regulated
  double eta = 1.0;        // regulator efficiency when regulated
  double slab_volts = 1e-3; // voltage slab width for the unregulated path
};

/* Whole clock cycles executable while the capacitor discharges from
 * cap.volts down to v_stop at the given frequency.
 *   regulated:   e_cc fixed at (freq, v_reg); result = floor(dE * eta / e_cc)
 *   unregulated: e_cc evaluated at the instantaneous capacitor voltage,
 *                integrated over fixed voltage slabs (midpoint rule). */
std::uint64_t cycles_in_discharge(const EnergyModelTable& model,
                                  const Capacitor& cap, double freq_hz,
                                  double v_stop, const DischargeMode& mode);

} // namespace ecsim

#endif
