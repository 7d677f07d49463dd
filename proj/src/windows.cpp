#include "ecsim/windows.hpp"

#include <sstream>

namespace ecsim {

std::optional<std::size_t> WindowTable::index_of_frequency(double freq_hz) const {
  for (std::size_t i = 0; i < windows_.size(); ++i) {
    if (windows_[i].freq_hz == freq_hz) return i;
  }
  return std::nullopt;
}

ValidationResult validate_table(const WindowTable& table) {
  const auto& w = table.windows();
  if (w.empty()) return ValidationResult::fail("window table is empty");

  for (std::size_t i = 0; i < w.size(); ++i) {
    std::ostringstream tag;
    tag << "window " << i << " (" << w[i].freq_hz / 1e6 << " MHz)";
    if (w[i].freq_hz <= 0.0)
      return ValidationResult::fail(tag.str() + ": frequency must be positive");
    if (w[i].v_reg != w[i].v_floor)
      return ValidationResult::fail(tag.str() + ": v_reg must equal v_floor");
    if (!(w[i].v_floor < w[i].v_ceiling))
      return ValidationResult::fail(tag.str() + ": floor must be below ceiling");
  }

  for (std::size_t i = 1; i < w.size(); ++i) {
    std::ostringstream tag;
    tag << "windows " << i - 1 << "/" << i;
    if (!(w[i - 1].freq_hz < w[i].freq_hz))
      return ValidationResult::fail(tag.str() +
                                    ": frequencies must be strictly ascending");
    if (!(w[i - 1].v_reg < w[i].v_reg))
      return ValidationResult::fail(tag.str() +
                                    ": v_reg must be strictly ascending");
    if (w[i - 1].v_ceiling != w[i].v_floor)
      return ValidationResult::fail(
          tag.str() + ": spans must tile (ceiling[i-1] == floor[i])");
  }
  return ValidationResult::pass();
}

std::optional<std::size_t> window_for_voltage(const WindowTable& table,
                                              double v) {
  const auto& w = table.windows();
  if (w.empty() || v < w.front().v_floor) return std::nullopt;
  // The global ceiling is inclusive; interior boundaries belong to the upper
  // window.
  if (v > w.back().v_ceiling) return std::nullopt;
  for (std::size_t i = w.size(); i-- > 0;) {
    if (v >= w[i].v_floor) return i;
  }
  return std::nullopt;
}

WindowTable msp430g2553_table() {
  return WindowTable({
      {1e6, 1.8, 1.8, 2.2},
      {8e6, 2.2, 2.2, 2.8},
      {12e6, 2.8, 2.8, 3.3},
      {16e6, 3.3, 3.3, 3.6},
  });
}

} // namespace ecsim
