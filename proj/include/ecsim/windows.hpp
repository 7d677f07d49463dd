#ifndef ECSIM_WINDOWS_HPP
#define ECSIM_WINDOWS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ecsim {

/* One MCU operating point: a clock frequency together with the regulated
 * supply it runs at.  The point is valid while the capacitor voltage stays
 * inside [v_floor, v_ceiling); the top window's ceiling is inclusive. */
struct PerformanceWindow {
  double freq_hz = 0.0;
  double v_reg = 0.0;     // regulator output while in this window (== v_floor)
  double v_floor = 0.0;
  double v_ceiling = 0.0;
};

struct ValidationResult {
  bool ok = true;
  std::string message;
  explicit operator bool() const { return ok; }
  static ValidationResult pass() { return {}; }
  static ValidationResult fail(std::string m) { return {false, std::move(m)}; }
};

/* Ordered list of performance windows, ascending in frequency and voltage. */
class WindowTable {
public:
  WindowTable() = default;
  explicit WindowTable(std::vector<PerformanceWindow> windows)
      : windows_(std::move(windows)) {}

  const std::vector<PerformanceWindow>& windows() const { return windows_; }
  std::size_t size() const { return windows_.size(); }
  bool empty() const { return windows_.empty(); }
  const PerformanceWindow& operator[](std::size_t i) const { return windows_[i]; }
  const PerformanceWindow& top() const { return windows_.back(); }

  double floor_voltage() const { return windows_.front().v_floor; }
  double ceiling_voltage() const { return windows_.back().v_ceiling; }

  std::optional<std::size_t> index_of_frequency(double freq_hz) const;

private:
  std::vector<PerformanceWindow> windows_;
};

/* Structural checks: non-empty, positive frequencies, v_floor == v_reg,
 * v_floor < v_ceiling, spans contiguous (window i ceiling == window i+1
 * floor), frequencies and v_reg strictly ascending. */
ValidationResult validate_table(const WindowTable& table);

/* Maps a capacitor voltage to the index of the window whose span contains
 * it.  Spans are half-open [floor, ceiling) except the global ceiling,
 * which is inclusive.  Returns nullopt when v is below the lowest floor or
 * above the global ceiling. */
std::optional<std::size_t> window_for_voltage(const WindowTable& table, double v);

/* The bundled MSP430-G2553 four-window table:
 * 1 MHz @ 1.8 V, 8 MHz @ 2.2 V, 12 MHz @ 2.8 V, 16 MHz @ 3.3 V (to 3.6 V). */
WindowTable msp430g2553_table();

} // namespace ecsim

#endif
