#ifndef ECSIM_SWEEP_HPP
#define ECSIM_SWEEP_HPP

#include <optional>
#include <string>
#include <vector>

#include "ecsim/emulator.hpp"

namespace ecsim {

struct SweepCandidateResult {
  double value = 0.0; // capacitance (F) or boot voltage (V)
  bool feasible = false;
  RunMetrics metrics; // valid when the run executed (feasible or failed)
};

struct PolicySweepResult {
  std::string policy_label;
  PolicyConfig policy;
  std::optional<double> minimum; // smallest feasible candidate, if any
  std::vector<SweepCandidateResult> rows;
};

/* Default contender set: the four fixed windows plus both DVFS policies.
 * Fixed entries carry the matching v_on / window floor semantics; the fbtc
 * entry is built from design_dividers() on the given table. */
std::vector<PolicyConfig> default_policy_set(const WindowTable& table);

/* For each policy, find the smallest candidate capacitance that completes
 * the workload.  Candidates are tried in ascending order; each run gets a
 * fresh copy of the base config with capacitance (and v_initial reset)
 * substituted.  `parallel` distributes candidate runs across OpenMP threads
 * when available; results are identical to the serial path. */
std::vector<PolicySweepResult> sweep_min_capacitance(
    const ExperimentConfig& base, const Workload& wl,
    const std::vector<double>& candidates_farads,
    const std::vector<PolicyConfig>& policies, bool parallel = true);

/* Same shape for the minimum viable boot voltage at fixed capacitance.
 * v_boot (and the fbtc latch v_on) are substituted per candidate. */
std::vector<PolicySweepResult> sweep_min_vboot(
    const ExperimentConfig& base, const Workload& wl,
    const std::vector<double>& candidates_volts,
    const std::vector<PolicyConfig>& policies, bool parallel = true);

struct TuneResult {
  double v_save = 0.0;
  RunMetrics metrics;
  std::vector<SweepCandidateResult> rows; // one per probed v_save
};

/* Empirical v_save search: run the workload at each candidate and keep the
 * feasible one with the lowest total energy (ties resolved toward the lower
 * threshold, which postpones saving). */
std::optional<TuneResult> tune_v_save(const ExperimentConfig& base,
                                      const Workload& wl,
                                      const std::vector<double>& candidates,
                                      bool parallel = true);

} // namespace ecsim

#endif
