#ifndef ECSIM_REPORT_HPP
#define ECSIM_REPORT_HPP

#include <string>

#include <nlohmann/json.hpp>

#include "ecsim/emulator.hpp"
#include "ecsim/fbtc_design.hpp"
#include "ecsim/sweep.hpp"

namespace ecsim {

/* Schema tag embedded in every JSON report so downstream tooling can detect
 * format drift. */
extern const char* const kReportSchemaVersion;

nlohmann::json metrics_to_json(const RunMetrics& m);

/* Minimal context needed to stamp a report; decoupled from config.hpp so the
 * report layer does not depend on the loader. */
struct LoadedRunContext {
  nlohmann::json resolved_settings; // may be null
  std::string workload_name;
};

/* Full run report: schema version, resolved settings, metrics, and the
 * per-energy-cycle progress table. */
nlohmann::json run_report(const LoadedRunContext& ctx, const RunResult& result);

nlohmann::json sweep_report(const std::string& sweep_kind,
                            const std::vector<PolicySweepResult>& results);

nlohmann::json design_report(const WindowTable& table,
                             const DividerDesign& design,
                             const SwitchCostParams& params, double farads);

/* CSV emitters (header row + data rows, '\n' line endings). */
std::string metrics_to_csv(const RunMetrics& m);
std::string events_to_csv(const std::vector<ActuationEvent>& events);
std::string sweep_to_csv(const std::vector<PolicySweepResult>& results);

} // namespace ecsim

#endif
