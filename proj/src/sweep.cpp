#include "ecsim/sweep.hpp"

#include <algorithm>
#include <stdexcept>

#include "ecsim/fbtc_design.hpp"

namespace ecsim {

namespace {

/* One candidate per slot, filled independently so the parallel and serial
 * paths produce identical vectors. */
template <typename Substitute>
std::vector<PolicySweepResult> sweep(const ExperimentConfig& base,
                                     const Workload& wl,
                                     const std::vector<double>& candidates,
                                     const std::vector<PolicyConfig>& policies,
                                     bool parallel, Substitute&& substitute) {
  std::vector<PolicySweepResult> results(policies.size());
  for (std::size_t p = 0; p < policies.size(); ++p) {
    results[p].policy = policies[p];
    results[p].policy_label = policy_label(policies[p]);
    results[p].rows.resize(candidates.size());
  }

  struct Job {
    std::size_t policy, row;
  };
  std::vector<Job> jobs;
  jobs.reserve(policies.size() * candidates.size());
  for (std::size_t p = 0; p < policies.size(); ++p)
    for (std::size_t c = 0; c < candidates.size(); ++c) jobs.push_back({p, c});

  auto run_job = [&](const Job& job) {
    ExperimentConfig cfg = base;
    cfg.policy = policies[job.policy];
    cfg.v_initial = -1.0; // every candidate starts from its own boot voltage
    substitute(cfg, candidates[job.row]);
    SweepCandidateResult& row = results[job.policy].rows[job.row];
    row.value = candidates[job.row];
    RunResult r = run(cfg, wl);
    row.feasible = r.metrics.completed;
    row.metrics = std::move(r.metrics);
  };

#if ECSIM_HAVE_OPENMP
  if (parallel) {
    const auto n = static_cast<long long>(jobs.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) run_job(jobs[static_cast<std::size_t>(i)]);
  } else {
    for (const Job& job : jobs) run_job(job);
  }
#else
  (void)parallel;
  for (const Job& job : jobs) run_job(job);
#endif

  for (auto& res : results) {
    for (const SweepCandidateResult& row : res.rows) {
      if (row.feasible) {
        res.minimum = row.value;
        break; // candidates are ascending; first feasible is the minimum
      }
    }
  }
  return results;
}

} // namespace

std::vector<PolicyConfig> default_policy_set(const WindowTable& table) {
  std::vector<PolicyConfig> set;
  for (const PerformanceWindow& w : table.windows()) {
    PolicyConfig p;
    p.kind = PolicyKind::fixed;
    p.fixed_freq_hz = w.freq_hz;
    set.push_back(p);
  }
  PolicyConfig d2;
  d2.kind = PolicyKind::d2vfs;
  set.push_back(d2);
  PolicyConfig fb;
  fb.kind = PolicyKind::fbtc;
  fb.fbtc = design_dividers(table);
  set.push_back(fb);
  return set;
}

std::vector<PolicySweepResult> sweep_min_capacitance(
    const ExperimentConfig& base, const Workload& wl,
    const std::vector<double>& candidates_farads,
    const std::vector<PolicyConfig>& policies, bool parallel) {
  if (!std::is_sorted(candidates_farads.begin(), candidates_farads.end()))
    throw std::invalid_argument("capacitance candidates must be ascending");
  return sweep(base, wl, candidates_farads, policies, parallel,
               [](ExperimentConfig& cfg, double farads) {
                 cfg.capacitance = farads;
               });
}

std::vector<PolicySweepResult> sweep_min_vboot(
    const ExperimentConfig& base, const Workload& wl,
    const std::vector<double>& candidates_volts,
    const std::vector<PolicyConfig>& policies, bool parallel) {
  if (!std::is_sorted(candidates_volts.begin(), candidates_volts.end()))
    throw std::invalid_argument("boot voltage candidates must be ascending");
  return sweep(base, wl, candidates_volts, policies, parallel,
               [](ExperimentConfig& cfg, double volts) {
                 cfg.v_boot = volts;
                 if (cfg.policy.kind == PolicyKind::fbtc) cfg.policy.v_on = volts;
               });
}

std::optional<TuneResult> tune_v_save(const ExperimentConfig& base,
                                      const Workload& wl,
                                      const std::vector<double>& candidates,
                                      bool parallel) {
  std::vector<SweepCandidateResult> rows(candidates.size());

  auto run_candidate = [&](std::size_t i) {
    ExperimentConfig cfg = base;
    cfg.checkpoint.v_save = candidates[i];
    SweepCandidateResult& row = rows[i];
    row.value = candidates[i];
    RunResult r = run(cfg, wl);
    row.feasible = r.metrics.completed;
    row.metrics = std::move(r.metrics);
  };

#if ECSIM_HAVE_OPENMP
  if (parallel) {
    const auto n = static_cast<long long>(candidates.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) run_candidate(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < candidates.size(); ++i) run_candidate(i);
  }
#else
  (void)parallel;
  for (std::size_t i = 0; i < candidates.size(); ++i) run_candidate(i);
#endif

  const SweepCandidateResult* best = nullptr;
  for (const SweepCandidateResult& row : rows) {
    if (!row.feasible) continue;
    if (!best || row.metrics.energy_total_j < best->metrics.energy_total_j ||
        (row.metrics.energy_total_j == best->metrics.energy_total_j &&
         row.value < best->value)) {
      best = &row;
    }
  }
  if (!best) return std::nullopt;

  TuneResult out;
  out.v_save = best->value;
  out.metrics = best->metrics;
  out.rows = std::move(rows);
  return out;
}

} // namespace ecsim
