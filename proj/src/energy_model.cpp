#include "ecsim/energy_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ecsim {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    auto b = field.find_first_not_of(" \t\r");
    auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

} // namespace

EnergyModelTable EnergyModelTable::from_series(std::vector<Series> series) {
  for (const auto& s : series) {
    if (s.samples.size() < 2) {
      throw std::runtime_error("energy model: series for " +
                               std::to_string(s.freq_hz) +
                               " Hz needs at least two samples");
    }
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
      if (s.samples[i].joules_per_cycle <= 0.0)
        throw std::runtime_error("energy model: non-positive energy sample");
      if (i > 0) {
        if (!(s.samples[i - 1].v_supply < s.samples[i].v_supply))
          throw std::runtime_error(
              "energy model: sample voltages must be strictly ascending");
        if (s.samples[i].joules_per_cycle < s.samples[i - 1].joules_per_cycle)
          throw std::runtime_error(
              "energy model: per-cycle energy must not decrease with voltage");
      }
    }
  }
  std::sort(series.begin(), series.end(), [](const Series& a, const Series& b) {
    return a.freq_hz < b.freq_hz;
  });
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i - 1].freq_hz == series[i].freq_hz)
      throw std::runtime_error("energy model: duplicate frequency series");
  }
  EnergyModelTable t;
  t.series_ = std::move(series);
  return t;
}

EnergyModelTable EnergyModelTable::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("energy model: cannot open " + path);

  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  std::vector<Series> series;

  auto series_for_freq = [&](double f) -> Series& {
    for (auto& s : series)
      if (s.freq_hz == f) return s;
    series.push_back(Series{f, {}});
    return series.back();
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (!saw_header) {
      if (fields.size() != 3 || fields[0] != "freq_hz" ||
          fields[1] != "v_supply" || fields[2] != "nj_per_cycle") {
        throw std::runtime_error(
            path + ": expected header 'freq_hz,v_supply,nj_per_cycle'");
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 3 fields");
    }
    try {
      double f = std::stod(fields[0]);
      double v = std::stod(fields[1]);
      double nj = std::stod(fields[2]);
      series_for_freq(f).samples.push_back({v, nj * 1e-9});
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed number");
    }
  }
  if (!saw_header) throw std::runtime_error(path + ": missing header row");
  if (series.empty()) throw std::runtime_error(path + ": no samples");

  // Sortedness within each series is an input contract; from_series throws
  // when it is violated.
  return from_series(std::move(series));
}

const EnergyModelTable::Series* EnergyModelTable::find_series(
    double freq_hz) const {
  for (const auto& s : series_)
    if (s.freq_hz == freq_hz) return &s;
  return nullptr;
}

const EnergyModelTable::Series& EnergyModelTable::series_for(
    double freq_hz) const {
  const Series* s = find_series(freq_hz);
  if (!s) {
    throw std::out_of_range("energy model: no series for " +
                            std::to_string(freq_hz) + " Hz");
  }
  return *s;
}

double EnergyModelTable::energy_per_cycle(double freq_hz,
                                          double v_supply) const {
  const Series& s = series_for(freq_hz);
  const auto& sm = s.samples;
  if (v_supply < sm.front().v_supply || v_supply > sm.back().v_supply) {
    throw std::out_of_range("energy model: " + std::to_string(v_supply) +
                            " V outside sampled span for " +
                            std::to_string(freq_hz) + " Hz");
  }
  auto it = std::lower_bound(
      sm.begin(), sm.end(), v_supply,
      [](const Sample& a, double v) { return a.v_supply < v; });
  if (it == sm.begin()) return it->joules_per_cycle;
  const Sample& hi = *it;
  const Sample& lo = *(it - 1);
  double a = (v_supply - lo.v_supply) / (hi.v_supply - lo.v_supply);
  return lo.joules_per_cycle + a * (hi.joules_per_cycle - lo.joules_per_cycle);
}

ValidationResult validate_energy_model(const EnergyModelTable& model,
                                       const WindowTable& table) {
  for (const auto& w : table.windows()) {
    const auto* s = model.find_series(w.freq_hz);
    std::ostringstream tag;
    tag << w.freq_hz / 1e6 << " MHz";
    if (!s)
      return ValidationResult::fail("energy model: no series for " + tag.str());
    if (s->samples.size() < 2)
      return ValidationResult::fail("energy model: " + tag.str() +
                                    " has fewer than two samples");
    if (s->v_min() > w.v_reg || s->v_max() < table.ceiling_voltage()) {
      return ValidationResult::fail(
          "energy model: " + tag.str() + " must span [" +
          std::to_string(w.v_reg) + ", " +
          std::to_string(table.ceiling_voltage()) + "] V");
    }
  }
  return ValidationResult::pass();
}

double Capacitor::voltage_for_energy(double farads, double joules) {
  if (joules < 0.0)
    throw std::invalid_argument("capacitor energy cannot be negative");
  return std::sqrt(2.0 * joules / farads);
}

namespace {

double interp1(const std::vector<double>& xs, const std::vector<double>& ys,
               double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  std::size_t lo = hi - 1;
  double a = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + a * (ys[hi] - ys[lo]);
}

} // namespace

double Regulator::efficiency(double v_in, double v_out) const {
  if (!curve_) return eta_;
  const Curve& c = *curve_;
  // Interpolate each v_in row at v_out, then across v_in; clamps at edges.
  std::vector<double> col(c.v_in.size());
  for (std::size_t i = 0; i < c.v_in.size(); ++i) {
    std::vector<double> row(c.eta.begin() + i * c.v_out.size(),
                            c.eta.begin() + (i + 1) * c.v_out.size());
    col[i] = interp1(c.v_out, row, v_out);
  }
  return interp1(c.v_in, col, v_in);
}

DrainResult drain(Capacitor& cap, double load_energy, const Regulator* reg,
                  double v_out) {
  double cap_side = load_energy;
  if (reg) cap_side = load_energy / reg->efficiency(cap.volts, v_out);
  double e = cap.energy() - cap_side;
  DrainResult r;
  if (e < 0.0) {
    e = 0.0;
    r.underflow = true;
  }
  cap.volts = Capacitor::voltage_for_energy(cap.farads, e);
  r.v_after = cap.volts;
  return r;
}

std::uint64_t cycles_in_discharge(const EnergyModelTable& model,
                                  const Capacitor& cap, double freq_hz,
                                  double v_stop, const DischargeMode& mode) {
  if (v_stop >= cap.volts) return 0;
  const double farads = cap.farads;

  if (mode.regulated) {
    double de = 0.5 * farads * (cap.volts * cap.volts - v_stop * v_stop);
    double e_cc = model.energy_per_cycle(freq_hz, mode.v_reg);
    return static_cast<std::uint64_t>(std::floor(de * mode.eta / e_cc));
  }

  // Unregulated: the MCU sees the decaying capacitor voltage directly, so
  // integrate over thin voltage slabs costed at their midpoint.
  double total = 0.0;
  double v_hi = cap.volts;
  const double dv = mode.slab_volts;
  while (v_hi > v_stop + 1e-15) {
    double v_lo = std::max(v_stop, v_hi - dv);
    double de = 0.5 * farads * (v_hi * v_hi - v_lo * v_lo);
    double e_cc = model.energy_per_cycle(freq_hz, 0.5 * (v_hi + v_lo));
    total += de / e_cc;
    v_hi = v_lo;
  }
  return static_cast<std::uint64_t>(std::floor(total));
}

} // namespace ecsim
