#ifndef ECSIM_HARVEST_HPP
#define ECSIM_HARVEST_HPP

#include <optional>
#include <string>
#include <vector>

namespace ecsim {

/* Piecewise-linear open-circuit source voltage over time, loaded from a
 * two-column CSV (t_s,v_src).  Lookups before the first sample clamp to it;
 * past the last sample they clamp, or wrap when looping is enabled. */
class SourceTrace {
public:
  struct Point {
    double t = 0.0;
    double v = 0.0;
  };

  static SourceTrace from_csv_file(const std::string& path, bool looped);
  static SourceTrace from_points(std::vector<Point> pts, bool looped);

  double voltage(double t) const;
  double duration() const { return points_.back().t; }
  bool looped() const { return looped_; }
  const std::vector<Point>& points() const { return points_; }

private:
  std::vector<Point> points_;
  bool looped_ = false;
};

/* Synthetic worst-case source: a bench supply wired through a normally
 * closed cutoff, delivering only while the device rail is down. */
double synthetic_poor_voltage(bool device_powered, double volts = 5.0);

struct Doubler {
  double gain = 2.0;       // voltage gain, exactly 2
  double efficiency = 0.7; // energy efficiency eta_d
};

struct ChargingNetwork {
  double r_series = 1e3;
  std::optional<Doubler> doubler;
};

struct ChargeStep {
  double v_new = 0.0;
  double delivered_j = 0.0;   // energy that entered the capacitor
  double source_side_j = 0.0; // energy drawn from the source
};

/* Ideal-diode RC charging over dt.  The effective source voltage is
 * doubled when a doubler is present; charging happens only while
 * v_eff > v_cap, following the exponential step with time constant
 * r_series * C, capped at the capacitor rating.  With a doubler the source
 * pays delivered / efficiency. */
ChargeStep charge_step(const ChargingNetwork& net, double v_src, double v_cap,
                       double farads, double dt, double rating);

} // namespace ecsim

#endif
