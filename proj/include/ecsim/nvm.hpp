#ifndef ECSIM_NVM_HPP
#define ECSIM_NVM_HPP

#include <cstdint>

namespace ecsim {

/* Serial FRAM checkpoint store (MB85RC64V-class part on a 1 MHz I2C bus).
 * A transaction moves the payload plus a fixed address/command overhead at
 * bus_cycles_per_byte bus clocks per byte. */
struct NvmModel {
  std::uint32_t capacity_bytes = 8192;
  double bus_clock_hz = 1e6;
  double bus_cycles_per_byte = 9.0;
  std::uint32_t transaction_overhead_bytes = 3;
  double energy_per_byte_write = 4.5e-9;
  double energy_per_byte_read = 4.5e-9;
  double standby_current_a = 3e-6; // drawn whenever the device rail is up
};

struct NvmCost {
  double wall_time_s = 0.0;          // frequency-independent bus time
  std::uint64_t mcu_stall_cycles = 0; // stall at the querying MCU frequency
  double energy_j = 0.0;             // chip-side transaction energy
};

/* Cost of writing `bytes` of checkpoint state.  Throws std::invalid_argument
 * when bytes exceeds the capacity. */
NvmCost save_cost(const NvmModel& nvm, std::uint32_t bytes, double mcu_freq_hz);

/* Cost of reading `bytes` back (read-side energy rate). */
NvmCost restore_cost(const NvmModel& nvm, std::uint32_t bytes,
                     double mcu_freq_hz);

} // namespace ecsim

#endif
