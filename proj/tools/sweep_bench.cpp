/* Times the capacitance sweep with the OpenMP path against the serial
 * reference and checks that both produce the same table. */

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "ecsim/config.hpp"
#include "ecsim/sweep.hpp"

namespace {

double seconds_between(std::chrono::steady_clock::time_point a,
                       std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

bool same_results(const std::vector<ecsim::PolicySweepResult>& a,
                  const std::vector<ecsim::PolicySweepResult>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t p = 0; p < a.size(); ++p) {
    if (a[p].minimum.has_value() != b[p].minimum.has_value()) return false;
    if (a[p].minimum && *a[p].minimum != *b[p].minimum) return false;
    if (a[p].rows.size() != b[p].rows.size()) return false;
    for (std::size_t r = 0; r < a[p].rows.size(); ++r) {
      const ecsim::SweepCandidateResult& x = a[p].rows[r];
      const ecsim::SweepCandidateResult& y = b[p].rows[r];
      if (x.feasible != y.feasible) return false;
      // Each run is single-threaded inside, so the parallel path must be
      // bit-identical, not merely close.
      if (x.metrics.energy_total_j != y.metrics.energy_total_j) return false;
      if (x.metrics.cycles_executed != y.metrics.cycles_executed) return false;
    }
  }
  return true;
}

} // namespace

int main(int argc, char** argv) {
  std::string config_path =
      argc > 1 ? argv[1] : "data/msp430g2553-fbtc.cfg";
  try {
    ecsim::LoadedExperiment exp = ecsim::load_config(config_path);
    std::vector<ecsim::PolicyConfig> policies =
        ecsim::default_policy_set(exp.config.windows);
    std::vector<double> candidates = {10e-6,  20e-6,  47e-6,
                                      80e-6,  100e-6, 220e-6};

    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    auto serial = ecsim::sweep_min_capacitance(exp.config, exp.workload,
                                               candidates, policies, false);
    auto t1 = clock::now();
    auto parallel = ecsim::sweep_min_capacitance(exp.config, exp.workload,
                                                 candidates, policies, true);
    auto t2 = clock::now();

    double ts = seconds_between(t0, t1);
    double tp = seconds_between(t1, t2);
    bool same = same_results(serial, parallel);

    std::printf("jobs      %zu runs (%zu policies x %zu candidates)\n",
                policies.size() * candidates.size(), policies.size(),
                candidates.size());
    std::printf("serial    %8.3f s\n", ts);
#if ECSIM_HAVE_OPENMP
    std::printf("parallel  %8.3f s\n", tp);
    std::printf("speedup   %8.2fx\n", tp > 0.0 ? ts / tp : 0.0);
#else
    std::printf("parallel  %8.3f s (built without OpenMP: serial fallback)\n",
                tp);
#endif
    std::printf("results   %s\n", same ? "identical" : "DIVERGED");
    return same ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sweep_bench: %s\n", e.what());
    return 1;
  }
}
