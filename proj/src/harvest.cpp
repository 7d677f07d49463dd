#include "ecsim/harvest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ecsim {

SourceTrace SourceTrace::from_points(std::vector<Point> pts, bool looped) {
  if (pts.empty()) throw std::runtime_error("source trace: no points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].t < 0.0)
      throw std::runtime_error("source trace: negative timestamp");
    if (pts[i].v < 0.0)
      throw std::runtime_error("source trace: negative voltage");
    if (i > 0 && !(pts[i - 1].t < pts[i].t))
      throw std::runtime_error(
          "source trace: timestamps must be strictly ascending");
  }
  SourceTrace tr;
  tr.points_ = std::move(pts);
  tr.looped_ = looped;
  return tr;
}

SourceTrace SourceTrace::from_csv_file(const std::string& path, bool looped) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("source trace: cannot open " + path);

  std::vector<Point> pts;
  std::string line;
  std::size_t lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string a, b;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 't,v'");
    }
    try {
      pts.push_back({std::stod(a), std::stod(b)});
    } catch (const std::exception&) {
      if (first_content) {
        first_content = false; // header row
        continue;
      }
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed number");
    }
    first_content = false;
  }
  return from_points(std::move(pts), looped);
}

double SourceTrace::voltage(double t) const {
  const auto& p = points_;
  if (looped_ && p.size() > 1 && t > p.back().t) {
    t = std::fmod(t, p.back().t);
  }
  if (t <= p.front().t) return p.front().v;
  if (t >= p.back().t) return p.back().v;
  auto it = std::lower_bound(
      p.begin(), p.end(), t,
      [](const Point& a, double time) { return a.t < time; });
  const Point& hi = *it;
  const Point& lo = *(it - 1);
  double a = (t - lo.t) / (hi.t - lo.t);
  return lo.v + a * (hi.v - lo.v);
}

double synthetic_poor_voltage(bool device_powered, double volts) {
  // The cutoff opens the charging path the moment the rail comes up, so the
  // device never sees harvest current while it runs.
  return device_powered ? 0.0 : volts;
}

ChargeStep charge_step(const ChargingNetwork& net, double v_src, double v_cap,
                       double farads, double dt, double rating) {
  ChargeStep step;
  step.v_new = v_cap;

  double v_eff = v_src;
  if (net.doubler) v_eff *= net.doubler->gain;
  if (v_eff <= v_cap || v_cap >= rating || dt <= 0.0) return step;

  double v_new = v_eff + (v_cap - v_eff) * std::exp(-dt / (net.r_series * farads));
  v_new = std::min(v_new, rating);

  step.v_new = v_new;
  step.delivered_j = 0.5 * farads * (v_new * v_new - v_cap * v_cap);
  if (net.doubler) {
    // The pump's efficiency folds resistive and switching losses together.
    step.source_side_j = step.delivered_j / net.doubler->efficiency;
  } else {
    // Direct path: the source supplies the transferred charge at v_src; the
    // remainder over `delivered` burns in the series resistance.
    step.source_side_j = farads * (v_new - v_cap) * v_src;
  }
  return step;
}

} // namespace ecsim
