#include "ecsim/nvm.hpp"

#include <cmath>
#include <stdexcept>

namespace ecsim {

namespace {

NvmCost transaction_cost(const NvmModel& nvm, std::uint32_t bytes,
                         double mcu_freq_hz, double energy_per_byte) {
  if (bytes > nvm.capacity_bytes) {
    throw std::invalid_argument("nvm: transaction of " + std::to_string(bytes) +
                                " bytes exceeds capacity of " +
                                std::to_string(nvm.capacity_bytes));
  }
  double moved = static_cast<double>(bytes + nvm.transaction_overhead_bytes);
  NvmCost cost;
  cost.wall_time_s = moved * nvm.bus_cycles_per_byte / nvm.bus_clock_hz;
  // Whole MCU cycles burnt while the bus transfers; the 1e-9 pad keeps an
  // exact multiple from rounding up on a representation error.
  cost.mcu_stall_cycles = static_cast<std::uint64_t>(
      std::ceil(cost.wall_time_s * mcu_freq_hz - 1e-9));
  cost.energy_j = moved * energy_per_byte;
  return cost;
}

} // namespace

NvmCost save_cost(const NvmModel& nvm, std::uint32_t bytes,
                  double mcu_freq_hz) {
  return transaction_cost(nvm, bytes, mcu_freq_hz, nvm.energy_per_byte_write);
}

NvmCost restore_cost(const NvmModel& nvm, std::uint32_t bytes,
                     double mcu_freq_hz) {
  return transaction_cost(nvm, bytes, mcu_freq_hz, nvm.energy_per_byte_read);
}

} // namespace ecsim
