#include "ecsim/emulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace ecsim {

Workload workload_preset(const std::string& name) {
  // Representative mid-size kernels; cycle counts are round placeholders in
  // the right order of magnitude, not measurements.
  if (name == "dijkstra") return {"dijkstra", 400000, 2000, 128};
  if (name == "fft") return {"fft", 1500000, 2000, 256};
  if (name == "rsa") return {"rsa", 4000000, 2000, 320};
  throw std::invalid_argument("unknown workload preset: " + name);
}

std::string policy_label(const PolicyConfig& policy) {
  switch (policy.kind) {
    case PolicyKind::fixed: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "static-%gMHz",
                    policy.fixed_freq_hz / 1e6);
      return buf;
    }
    case PolicyKind::d2vfs:
      return "d2vfs";
    case PolicyKind::fbtc:
      return "fbtc";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double policy_floor_voltage(const ExperimentConfig& cfg) {
  if (cfg.policy.kind == PolicyKind::fixed) {
    auto idx = cfg.windows.index_of_frequency(cfg.policy.fixed_freq_hz);
    return idx ? cfg.windows[*idx].v_floor : cfg.windows.floor_voltage();
  }
  return cfg.windows.floor_voltage();
}

double effective_boot_voltage(const ExperimentConfig& cfg) {
  if (cfg.policy.kind == PolicyKind::fbtc && cfg.policy.v_on > 0.0)
    return cfg.policy.v_on;
  return cfg.v_boot;
}

struct CircuitSums {
  double i_always = 0.0, g_always = 0.0;
  double i_on = 0.0, g_on = 0.0;
};

CircuitSums sum_circuitry(const CircuitryProfile& profile) {
  CircuitSums s;
  for (const auto& c : profile.components) {
    double g = c.divider_ohms > 0.0 ? 1.0 / c.divider_ohms : 0.0;
    if (c.activity == Activity::always) {
      s.i_always += c.quiescent_a;
      s.g_always += g;
    } else {
      s.i_on += c.quiescent_a;
      s.g_on += g;
    }
  }
  return s;
}

/* Energy ledger slots; keep names[] in step with the enum. */
enum Comp : int {
  kMcu = 0,
  kRegulator,
  kCircuitry,
  kNvm,
  kProbe,
  kSwitch,
  kHibernation,
  kCompCount,
};
const char* const kCompNames[kCompCount] = {
    "mcu", "regulator", "circuitry", "nvm", "probe", "switch", "hibernation",
};

class Engine {
 public:
  Engine(const ExperimentConfig& cfg, const Workload& wl, RunResult& out)
      : cfg_(cfg),
        wl_(wl),
        out_(out),
        table_(cfg.windows),
        model_(*cfg.energy) {}

  void drive();

 private:
  enum class Phase { off, boot, active, hibernating, done };
  enum class StopReason { ran_all, completed, floor, vsave, policy, probe };

  /* ---- small helpers ---- */
  double v_of(double e) const { return std::sqrt(2.0 * e / C_); }
  double e_of(double v) const { return 0.5 * C_ * v * v; }
  double v_now() const { return v_of(E_); }

  void fail(std::string why) {
    aborted_ = true;
    out_.metrics.failure_reason = std::move(why);
    close_cycle_summary();
  }

  double source_voltage(bool device_powered) const {
    switch (cfg_.source.kind) {
      case SourceConfig::Kind::constant:
        return cfg_.source.volts;
      case SourceConfig::Kind::synthetic_poor:
        return synthetic_poor_voltage(device_powered, cfg_.source.volts);
      case SourceConfig::Kind::trace:
        return cfg_.source.trace->voltage(t_);
    }
    return 0.0;
  }

  double stall_window() const {
    if (cfg_.source.kind == SourceConfig::Kind::trace && cfg_.source.trace)
      return std::max(2.0 * cfg_.source.trace->duration(), 2.0);
    return 2.0;
  }

  /* ---- operating-point caches ---- */

  void refresh_operating_point() {
    auto w = static_cast<std::size_t>(pol_.current_window);
    const PerformanceWindow& win = table_[w];
    f_ = win.freq_hz;
    inv_f_ = 1.0 / f_;
    k_charge_ = std::exp(-inv_f_ / (cfg_.network.r_series * C_));
    if (regulated_) {
      vout_ = win.v_reg;
      ecc_reg_ = model_.energy_per_cycle(f_, vout_);
    } else {
      series_ = &model_.series_for(f_);
      seg_v_lo_ = 0.0;
      seg_v_hi_ = -1.0; // invalidate
    }
    refresh_policy_thresholds();
  }

  void refresh_policy_thresholds() {
    E_pol_lo_ = -1.0;
    E_pol_hi_ = kInf;
    if (pol_.kind == PolicyKind::d2vfs) {
      if (ib_ >= 1) E_pol_lo_ = e_of(bounds_v_[ib_]);
      if (ib_ + 1 < bounds_v_.size()) E_pol_hi_ = e_of(bounds_v_[ib_ + 1]);
    } else if (pol_.kind == PolicyKind::fbtc) {
      int cur = pol_.current_window;
      if (cur > 0 && pol_.discharge_irq_enabled) {
        E_pol_lo_ = e_of(fbtc_downscale_voltage(
            table_, cfg_.policy.fbtc, static_cast<std::size_t>(cur)));
      }
      if (cur >= 0 && cur + 1 < static_cast<int>(table_.size())) {
        E_pol_hi_ = e_of(fbtc_upscale_voltage(table_, cfg_.policy.fbtc,
                                              static_cast<std::size_t>(cur)));
      }
    }
  }

  double ecc_unregulated(double vcap) {
    if (vcap < seg_v_lo_ || vcap > seg_v_hi_) {
      const auto& sm = series_->samples;
      double vq = std::clamp(vcap, sm.front().v_supply, sm.back().v_supply);
      auto it = std::lower_bound(
          sm.begin(), sm.end(), vq,
          [](const EnergyModelTable::Sample& s, double x) {
            return s.v_supply < x;
          });
      if (it == sm.begin()) ++it;
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      seg_v_lo_ = lo.v_supply;
      seg_v_hi_ = hi.v_supply;
      seg_e_lo_ = lo.joules_per_cycle;
      seg_slope_ = (hi.joules_per_cycle - lo.joules_per_cycle) /
                   (hi.v_supply - lo.v_supply);
      // Off-span queries (possible only above the rating clamp) pin to the
      // nearest sample.
      if (vcap < seg_v_lo_) return seg_e_lo_;
      if (vcap > seg_v_hi_) return seg_e_lo_ + seg_slope_ * (seg_v_hi_ - seg_v_lo_);
    }
    return seg_e_lo_ + seg_slope_ * (vcap - seg_v_lo_);
  }

  double charge_one_cycle(double vcap) {
    double vs = source_voltage(true);
    if (vs <= 0.0) return 0.0;
    double veff = vs;
    if (cfg_.network.doubler) veff *= cfg_.network.doubler->gain;
    if (veff <= vcap || vcap >= rating_) return 0.0;
    double v2 = veff + (vcap - veff) * k_charge_;
    if (v2 > rating_) v2 = rating_;
    double delivered = 0.5 * C_ * (v2 * v2 - vcap * vcap);
    out_.metrics.energy_harvested_j += delivered;
    out_.metrics.energy_source_j +=
        cfg_.network.doubler ? delivered / cfg_.network.doubler->efficiency
                             : C_ * (v2 - vcap) * vs;
    return delivered;
  }

  /* ---- the per-cycle engine ---- */

  StopReason run_cycles(std::uint64_t n, int comp, bool progress,
                        bool allow_policy, bool allow_ckpt,
                        double extra_per_cycle) {
    for (std::uint64_t i = 0; i < n; ++i) {
      if (E_ < E_floor_) return StopReason::floor;
      double vcap = v_now();

      double mcu, capside;
      if (regulated_) {
        mcu = ecc_reg_;
        capside = mcu / cfg_.regulator.efficiency(vcap, vout_);
        comp_[kRegulator] += capside - mcu;
      } else {
        mcu = ecc_unregulated(vcap);
        capside = mcu;
      }
      comp_[comp] += mcu + extra_per_cycle;

      double circ = ((circ_.i_always + circ_.i_on) * vcap +
                     (circ_.g_always + circ_.g_on) * vcap * vcap) *
                    inv_f_;
      comp_[kCircuitry] += circ;
      double standby = cfg_.nvm.standby_current_a * vcap * inv_f_;
      comp_[kNvm] += standby;

      double delivered = charge_one_cycle(vcap);
      E_ += delivered - capside - circ - standby - extra_per_cycle;
      if (E_ < 0.0) E_ = 0.0;
      t_ += inv_f_;
      out_.metrics.execution_time_s += inv_f_;

      if (progress) {
        ++ram_progress_;
        ++cycle_progress_run_;
        if (ram_progress_ >= wl_.total_cycles) return StopReason::completed;
        if (probing_ && ram_progress_ == next_probe_) return StopReason::probe;
      }
      if (allow_ckpt && E_ < E_vsave_) return StopReason::vsave;
      if (allow_policy && (E_ < E_pol_lo_ || E_ >= E_pol_hi_))
        return StopReason::policy;
    }
    return StopReason::ran_all;
  }

  bool pay_switch(int cycles) {
    ++out_.metrics.window_transitions;
    return run_cycles(static_cast<std::uint64_t>(cycles), kSwitch, false,
                      false, false, 0.0) != StopReason::floor;
  }

  /* Deliver every ladder crossing between the cursor and the present
   * voltage, in order, paying switch costs as actuations happen.  Returns
   * false when a switch drained the capacitor through the floor. */
  bool process_d2vfs() {
    for (;;) {
      double vn = v_now();
      if (ib_ >= 1 && vn < bounds_v_[ib_]) {
        StepOutcome out = d2vfs_step(pol_, table_, bounds_v_[ib_],
                                     CrossDirection::down, t_,
                                     cfg_.policy.switch_cycles);
        --ib_;
        if (out.switched) {
          refresh_operating_point();
          if (!pay_switch(out.cost_cycles)) return false;
        }
        continue;
      }
      if (ib_ + 1 < bounds_v_.size() && vn >= bounds_v_[ib_ + 1]) {
        ++ib_;
        StepOutcome out = d2vfs_step(pol_, table_, bounds_v_[ib_],
                                     CrossDirection::up, t_,
                                     cfg_.policy.switch_cycles);
        if (out.switched) {
          refresh_operating_point();
          if (!pay_switch(out.cost_cycles)) return false;
        }
        continue;
      }
      break;
    }
    refresh_policy_thresholds();
    return true;
  }

  /* Deliver comparator edges crossed since the last processing point. */
  bool process_fbtc() {
    for (;;) {
      double vn = v_now();
      StepOutcome out = fbtc_step(pol_, table_, cfg_.policy.fbtc, v_pol_prev_,
                                  vn, t_, cfg_.policy.switch_cycles);
      if (!out.switched) break;
      refresh_operating_point();
      if (!pay_switch(out.cost_cycles)) return false;
    }
    v_pol_prev_ = v_now();
    refresh_policy_thresholds();
    return true;
  }

  bool deliver_policy() {
    if (pol_.kind == PolicyKind::d2vfs) return process_d2vfs();
    if (pol_.kind == PolicyKind::fbtc) return process_fbtc();
    return true;
  }

  /* ---- checkpoint transactions ---- */

  std::uint32_t save_bytes() const {
    const StateFootprint& fp = ck_.footprint;
    if (ck_.scheme == Scheme::mementos)
      return fp.registers_bytes + cfg_.device_ram_bytes;
    return fp.registers_bytes + wl_.ram_used_bytes;
  }

  bool do_save() {
    NvmCost cost = save_cost(cfg_.nvm, save_bytes(), f_);
    std::uint64_t stall = std::max<std::uint64_t>(cost.mcu_stall_cycles, 1);
    if (run_cycles(stall, kNvm, false, false, false,
                   cost.energy_j / static_cast<double>(stall)) ==
        StopReason::floor) {
      return false; // power lost mid-save: nothing committed
    }
    committed_ = ram_progress_;
    has_ckpt_ = true;
    ++out_.metrics.checkpoints_saved;
    return true;
  }

  bool do_restore() {
    NvmCost cost = restore_cost(cfg_.nvm, save_bytes(), f_);
    std::uint64_t stall = std::max<std::uint64_t>(cost.mcu_stall_cycles, 1);
    if (run_cycles(stall, kNvm, false, false, false,
                   cost.energy_j / static_cast<double>(stall)) ==
        StopReason::floor) {
      return false;
    }
    ram_progress_ = committed_;
    return true;
  }

  /* ---- energy-cycle bookkeeping ---- */

  void open_cycle_summary() {
    out_.energy_cycles.push_back({t_, t_, committed_, committed_, 0});
    cycle_progress_run_ = 0;
    cycle_open_ = true;
  }

  void close_cycle_summary() {
    if (!cycle_open_) return;
    EnergyCycleSummary& s = out_.energy_cycles.back();
    s.t_end = t_;
    s.progress_at_end = committed_;
    s.cycles_run = cycle_progress_run_;
    cycle_open_ = false;
  }

  void on_power_loss() {
    power_state_step(latch_, v_now(), boot_v_, floor_v_, t_, pol_.event_log);
    pol_.current_window = -1;
    ++out_.metrics.n_energy_failures;
    close_cycle_summary();
    const EnergyCycleSummary& s = out_.energy_cycles.back();
    if (s.progress_at_end > s.progress_at_boot) {
      zero_progress_streak_ = 0;
    } else if (++zero_progress_streak_ >= 3) {
      fail("no forward progress across three consecutive energy cycles");
    }
  }

  void on_complete() {
    committed_ = wl_.total_cycles;
    close_cycle_summary();
    out_.metrics.completed = true;
    out_.metrics.completion_time_s = t_;
  }

  /* ---- phases ---- */

  Phase off_phase() {
    double hi_water = E_;
    double t_hi = t_;
    while (true) {
      if (t_ > cfg_.controls.max_sim_time) {
        fail("simulation time budget exceeded");
        return Phase::done;
      }
      if (E_ >= E_boot_) return Phase::boot;

      double dt = cfg_.controls.max_off_dt;
      if (off_energy_after(dt) >= E_boot_) {
        dt = bisect_off(dt);
      }
      commit_off_step(dt);

      if (E_ > hi_water + 1e-21) {
        hi_water = E_;
        t_hi = t_;
      } else if (t_ - t_hi > stall_window()) {
        fail("source cannot charge the capacitor to the boot voltage");
        return Phase::done;
      }
    }
  }

  double off_energy_after(double dt) const {
    double vcap = v_of(E_);
    double vs = source_voltage(false);
    double delivered = 0.0;
    if (vs > 0.0) {
      delivered =
          charge_step(cfg_.network, vs, vcap, C_, dt, rating_).delivered_j;
    }
    double drains =
        (circ_.i_always * vcap + circ_.g_always * vcap * vcap) * dt;
    double e = E_ + delivered - drains;
    return e < 0.0 ? 0.0 : e;
  }

  double bisect_off(double dt_max) const {
    double lo = 0.0, hi = dt_max;
    for (int i = 0; i < 64 && hi - lo > 1e-12; ++i) {
      double mid = 0.5 * (lo + hi);
      double em = off_energy_after(mid);
      if (em >= E_boot_) {
        hi = mid;
        if (v_of(em) - boot_v_ <= cfg_.controls.crossing_tol_v) break;
      } else {
        lo = mid;
      }
    }
    return hi;
  }

  void commit_off_step(double dt) {
    double vcap = v_of(E_);
    double vs = source_voltage(false);
    double delivered = 0.0;
    if (vs > 0.0) {
      ChargeStep cs = charge_step(cfg_.network, vs, vcap, C_, dt, rating_);
      delivered = cs.delivered_j;
      out_.metrics.energy_harvested_j += cs.delivered_j;
      out_.metrics.energy_source_j += cs.source_side_j;
    }
    double drains =
        (circ_.i_always * vcap + circ_.g_always * vcap * vcap) * dt;
    comp_[kCircuitry] += drains;
    E_ += delivered - drains;
    if (E_ < 0.0) E_ = 0.0;
    t_ += dt;
    out_.metrics.recharge_time_s += dt;
  }

  Phase boot_phase() {
    if (out_.metrics.boots >= cfg_.controls.max_energy_cycles) {
      fail("energy cycle budget exceeded");
      return Phase::done;
    }
    ++out_.metrics.boots;
    power_state_step(latch_, v_now(), boot_v_, floor_v_, t_, pol_.event_log);
    policy_boot(pol_, table_, v_now(), t_, fixed_idx_);
    open_cycle_summary();
    ram_progress_ = 0;

    // Ladder cursor and comparator reference follow the boot voltage.
    ib_ = 0;
    while (ib_ + 1 < bounds_v_.size() && v_now() >= bounds_v_[ib_ + 1]) ++ib_;
    v_pol_prev_ = v_now();
    refresh_operating_point();

    bool restore = false;
    if (ck_.scheme == Scheme::hibernus) {
      restore = hibernus_on_voltage(ck_, v_now(), HibernusPhase::booting,
                                    has_ckpt_) == HibernusAction::restore_on_boot;
    } else if (ck_.scheme == Scheme::mementos) {
      restore = has_ckpt_;
    }
    if (restore) {
      pol_.log(t_, Action::interrupt, v_now(), "restore");
      if (!do_restore()) {
        on_power_loss();
        return aborted_ ? Phase::done : Phase::off;
      }
      if (!deliver_policy()) {
        on_power_loss();
        return aborted_ ? Phase::done : Phase::off;
      }
    }
    next_probe_ = ram_progress_ + wl_.probe_interval_cycles;
    return Phase::active;
  }

  Phase active_phase() {
    for (;;) {
      if (t_ > cfg_.controls.max_sim_time) {
        fail("simulation time budget exceeded");
        return Phase::done;
      }
      if (E_ < E_floor_) {
        on_power_loss();
        return aborted_ ? Phase::done : Phase::off;
      }

      std::uint64_t n = wl_.total_cycles - ram_progress_;
      if (probing_ && next_probe_ > ram_progress_)
        n = std::min(n, next_probe_ - ram_progress_);

      StopReason stop =
          run_cycles(n, kMcu, true, pol_.kind != PolicyKind::fixed,
                     ck_.scheme == Scheme::hibernus, 0.0);
      switch (stop) {
        case StopReason::completed:
          on_complete();
          return Phase::done;
        case StopReason::floor:
          on_power_loss();
          return aborted_ ? Phase::done : Phase::off;
        case StopReason::vsave:
          pol_.log(t_, Action::interrupt, vsave_, "vsave");
          if (!do_save()) {
            on_power_loss();
            return aborted_ ? Phase::done : Phase::off;
          }
          return Phase::hibernating;
        case StopReason::policy:
          if (!deliver_policy()) {
            on_power_loss();
            return aborted_ ? Phase::done : Phase::off;
          }
          break;
        case StopReason::probe:
        case StopReason::ran_all: {
          if (!(probing_ && ram_progress_ == next_probe_)) break;
          ++out_.metrics.probes;
          ProbeResult probe = mementos_probe(ck_, v_now(), f_);
          if (run_cycles(probe.cost_cycles, kProbe, false, false, false,
                         0.0) == StopReason::floor) {
            on_power_loss();
            return aborted_ ? Phase::done : Phase::off;
          }
          if (probe.save) {
            pol_.log(t_, Action::interrupt, v_now(), "probe-save");
            if (!do_save()) {
              on_power_loss();
              return aborted_ ? Phase::done : Phase::off;
            }
          }
          next_probe_ += wl_.probe_interval_cycles;
          break;
        }
      }
    }
  }

  struct HibParts {
    double delivered = 0.0, source = 0.0;
    double hib = 0.0, circ = 0.0, standby = 0.0;
    double e_after = 0.0;
  };

  HibParts hib_parts(double dt) const {
    HibParts p;
    double vcap = v_of(E_);
    double vs = source_voltage(true);
    if (vs > 0.0) {
      ChargeStep cs = charge_step(cfg_.network, vs, vcap, C_, dt, rating_);
      p.delivered = cs.delivered_j;
      p.source = cs.source_side_j;
    }
    p.hib = ck_.i_hibernate * vcap * dt;
    p.circ = ((circ_.i_always + circ_.i_on) * vcap +
              (circ_.g_always + circ_.g_on) * vcap * vcap) *
             dt;
    p.standby = cfg_.nvm.standby_current_a * vcap * dt;
    double e = E_ + p.delivered - p.hib - p.circ - p.standby;
    p.e_after = e < 0.0 ? 0.0 : e;
    return p;
  }

  void commit_hib_step(double dt) {
    HibParts p = hib_parts(dt);
    out_.metrics.energy_harvested_j += p.delivered;
    out_.metrics.energy_source_j += p.source;
    comp_[kHibernation] += p.hib;
    comp_[kCircuitry] += p.circ;
    comp_[kNvm] += p.standby;
    E_ = p.e_after;
    t_ += dt;
    out_.metrics.execution_time_s += dt;
  }

  /* Smallest dt in (0, dt_max] whose end energy crosses the target. */
  double bisect_hib(double dt_max, double e_target, bool upward) const {
    double lo = 0.0, hi = dt_max;
    for (int i = 0; i < 64 && hi - lo > 1e-12; ++i) {
      double mid = 0.5 * (lo + hi);
      double em = hib_parts(mid).e_after;
      bool crossed = upward ? em >= e_target : em < e_target;
      if (crossed) {
        hi = mid;
        if (std::abs(v_of(em) - v_of(e_target)) <= cfg_.controls.crossing_tol_v)
          break;
      } else {
        lo = mid;
      }
    }
    return hi;
  }

  Phase hib_phase() {
    pol_.log(t_, Action::interrupt, v_now(), "hibernate");
    // The save can have crossed comparator levels while interrupts were
    // masked; deliver them before sleeping.
    if (!deliver_policy()) {
      on_power_loss();
      return aborted_ ? Phase::done : Phase::off;
    }

    double hi_water = E_, lo_water = E_;
    double t_hi = t_, t_lo = t_;
    for (;;) {
      if (t_ > cfg_.controls.max_sim_time) {
        fail("simulation time budget exceeded");
        return Phase::done;
      }
      if (E_ < E_floor_) {
        on_power_loss();
        return aborted_ ? Phase::done : Phase::off;
      }
      if (E_ >= E_resume_) {
        pol_.log(t_, Action::interrupt, v_now(), "resume");
        return Phase::active;
      }

      double dt = cfg_.controls.max_off_dt;
      double e0 = E_;
      double e1 = hib_parts(dt).e_after;

      // Nearest threshold crossed by the trial step, if any.
      double target = -1.0;
      bool upward = e1 > e0;
      if (upward) {
        for (double thr : {E_resume_, E_pol_hi_}) {
          if (thr > e0 && e1 >= thr && (target < 0.0 || thr < target))
            target = thr;
        }
      } else {
        for (double thr : {E_floor_, E_pol_lo_}) {
          if (thr >= 0.0 && thr <= e0 && e1 < thr && thr > target)
            target = thr;
        }
      }
      if (target >= 0.0) dt = bisect_hib(dt, target, upward);
      commit_hib_step(dt);

      // Wake-switch-sleep servicing of comparator/ladder interrupts.
      if (E_ >= E_floor_ && (E_ < E_pol_lo_ || E_ >= E_pol_hi_)) {
        if (!deliver_policy()) {
          on_power_loss();
          return aborted_ ? Phase::done : Phase::off;
        }
      }

      if (E_ > hi_water + 1e-21) {
        hi_water = E_;
        t_hi = t_;
      }
      if (E_ < lo_water - 1e-21) {
        lo_water = E_;
        t_lo = t_;
      }
      if (t_ - std::max(t_hi, t_lo) > stall_window() &&
          t_ - std::min(t_hi, t_lo) > stall_window()) {
        fail("capacitor stuck between thresholds while hibernating");
        return Phase::done;
      }
    }
  }

  /* ---- members ---- */

  const ExperimentConfig& cfg_;
  const Workload& wl_;
  RunResult& out_;
  const WindowTable& table_;
  const EnergyModelTable& model_;

  double C_ = 0.0, rating_ = 0.0;
  double boot_v_ = 0.0, floor_v_ = 0.0, vsave_ = 0.0;
  double E_floor_ = 0.0, E_boot_ = 0.0, E_vsave_ = -1.0, E_resume_ = kInf;
  CircuitSums circ_;
  CheckpointConfig ck_;
  bool regulated_ = false;
  bool probing_ = false;
  std::size_t fixed_idx_ = 0;
  std::vector<double> bounds_v_;

  double E_ = 0.0, t_ = 0.0;
  PolicyState pol_;
  PowerLatch latch_;
  double comp_[kCompCount] = {};

  double f_ = 1.0, inv_f_ = 1.0;
  double ecc_reg_ = 0.0, vout_ = 0.0, k_charge_ = 0.0;
  const EnergyModelTable::Series* series_ = nullptr;
  double seg_v_lo_ = 0.0, seg_v_hi_ = -1.0, seg_e_lo_ = 0.0, seg_slope_ = 0.0;

  std::size_t ib_ = 0;
  double E_pol_lo_ = -1.0, E_pol_hi_ = kInf;
  double v_pol_prev_ = 0.0;

  std::uint64_t ram_progress_ = 0, committed_ = 0, next_probe_ = 0;
  std::uint64_t cycle_progress_run_ = 0;
  bool has_ckpt_ = false;
  bool cycle_open_ = false;
  bool aborted_ = false;
  int zero_progress_streak_ = 0;
};

void Engine::drive() {
  RunMetrics& m = out_.metrics;

  C_ = cfg_.capacitance;
  rating_ = cfg_.rating;
  circ_ = sum_circuitry(cfg_.circuitry);
  pol_.kind = cfg_.policy.kind;
  regulated_ = cfg_.policy.kind != PolicyKind::fixed || cfg_.policy.regulated;
  probing_ = cfg_.checkpoint.scheme == Scheme::mementos;
  if (cfg_.policy.kind == PolicyKind::fixed) {
    fixed_idx_ = *table_.index_of_frequency(cfg_.policy.fixed_freq_hz);
  }
  boot_v_ = effective_boot_voltage(cfg_);
  floor_v_ = device_floor(cfg_.checkpoint, policy_floor_voltage(cfg_));
  ck_ = cfg_.checkpoint;
  vsave_ = resolve_v_save(cfg_, wl_);
  ck_.v_save = vsave_;
  m.v_save_resolved = vsave_;

  E_floor_ = e_of(floor_v_);
  E_boot_ = e_of(boot_v_);
  if (ck_.scheme == Scheme::hibernus) {
    E_vsave_ = e_of(vsave_);
    E_resume_ = e_of(vsave_ + ck_.resume_margin);
  }
  for (const auto& w : table_.windows()) bounds_v_.push_back(w.v_floor);
  bounds_v_.push_back(table_.ceiling_voltage());

  double v_init = cfg_.v_initial < 0.0 ? boot_v_ : cfg_.v_initial;
  E_ = e_of(std::min(v_init, rating_));
  m.energy_initial_j = E_;

  Phase ph = E_ >= E_boot_ ? Phase::boot : Phase::off;
  while (!aborted_ && ph != Phase::done) {
    switch (ph) {
      case Phase::off: ph = off_phase(); break;
      case Phase::boot: ph = boot_phase(); break;
      case Phase::active: ph = active_phase(); break;
      case Phase::hibernating: ph = hib_phase(); break;
      case Phase::done: break;
    }
  }

  close_cycle_summary();
  m.energy_final_j = E_;
  double total = 0.0;
  for (int i = 0; i < kCompCount; ++i) {
    m.energy_by_component[kCompNames[i]] = comp_[i];
    total += comp_[i];
  }
  m.energy_total_j = total;
  m.cycles_executed = m.completed ? wl_.total_cycles : committed_;
  if (!cfg_.controls.record_events) pol_.event_log.clear();
  out_.events = std::move(pol_.event_log);
}

} // namespace

double resolve_v_save(const ExperimentConfig& cfg, const Workload& wl) {
  const CheckpointConfig& ck = cfg.checkpoint;
  if (ck.scheme == Scheme::none) return 0.0;
  if (ck.v_save > 0.0) return ck.v_save;
  if (!cfg.energy || cfg.windows.empty()) return 0.0;

  double floor_v = device_floor(ck, policy_floor_voltage(cfg));
  std::uint32_t bytes =
      ck.footprint.registers_bytes +
      (ck.scheme == Scheme::mementos ? cfg.device_ram_bytes
                                     : wl.ram_used_bytes);

  // Cost the save at the operating point the device holds just above the
  // floor, where voltage-triggered saves actually happen.
  double f, ecc_capside;
  if (cfg.policy.kind == PolicyKind::fixed) {
    auto idx = cfg.windows.index_of_frequency(cfg.policy.fixed_freq_hz);
    const PerformanceWindow& win = cfg.windows[idx ? *idx : 0];
    f = win.freq_hz;
    if (cfg.policy.regulated) {
      ecc_capside = cfg.energy->energy_per_cycle(f, win.v_reg) /
                    cfg.regulator.efficiency(floor_v, win.v_reg);
    } else {
      ecc_capside = cfg.energy->energy_per_cycle(f, floor_v);
    }
  } else {
    auto wi = window_for_voltage(cfg.windows, floor_v);
    const PerformanceWindow& win = cfg.windows[wi ? *wi : 0];
    f = win.freq_hz;
    ecc_capside = cfg.energy->energy_per_cycle(f, win.v_reg) /
                  cfg.regulator.efficiency(floor_v, win.v_reg);
  }

  NvmCost cost = save_cost(cfg.nvm, bytes, f);
  double e_save =
      cost.energy_j + static_cast<double>(cost.mcu_stall_cycles) * ecc_capside;
  return std::sqrt(floor_v * floor_v +
                   2.0 * ck.v_save_margin * e_save / cfg.capacitance);
}

ValidationResult validate_config(const ExperimentConfig& cfg,
                                 const Workload& wl) {
  if (auto r = validate_table(cfg.windows); !r) return r;
  if (!cfg.energy)
    return ValidationResult::fail("no energy model loaded (energy_model.path)");
  if (auto r = validate_energy_model(*cfg.energy, cfg.windows); !r) return r;

  if (cfg.capacitance <= 0.0)
    return ValidationResult::fail("capacitance must be positive");
  if (cfg.rating <= 0.0)
    return ValidationResult::fail("capacitor rating must be positive");
  if (wl.total_cycles == 0)
    return ValidationResult::fail("workload has no cycles to run");

  if (cfg.policy.kind == PolicyKind::fixed) {
    if (!cfg.windows.index_of_frequency(cfg.policy.fixed_freq_hz))
      return ValidationResult::fail(
          "fixed policy frequency has no matching window");
  }
  if (cfg.policy.kind == PolicyKind::fbtc) {
    const DividerDesign& d = cfg.policy.fbtc;
    if (!(d.delta_d > 0.0 && d.delta_d < 1.0) ||
        !(d.delta_c > 0.0 && d.delta_c < 1.0))
      return ValidationResult::fail(
          "fbtc divider ratios must lie strictly inside (0, 1)");
  }
  if (cfg.policy.switch_cycles < 0)
    return ValidationResult::fail("switch cycle cost cannot be negative");

  double floor_v = device_floor(cfg.checkpoint, policy_floor_voltage(cfg));
  double boot_v = effective_boot_voltage(cfg);
  if (boot_v <= floor_v)
    return ValidationResult::fail("v_boot must lie above the device floor");
  if (boot_v > cfg.rating)
    return ValidationResult::fail("v_boot exceeds the capacitor rating");
  if (cfg.v_initial >= 0.0 && cfg.v_initial > cfg.rating)
    return ValidationResult::fail("v_initial exceeds the capacitor rating");

  const CheckpointConfig& ck = cfg.checkpoint;
  if (ck.scheme != Scheme::none) {
    if (ck.v_save > 0.0 && ck.v_save <= floor_v)
      return ValidationResult::fail("v_save must lie above the device floor");
    if (ck.v_save > cfg.rating)
      return ValidationResult::fail("v_save exceeds the capacitor rating");
    if (ck.v_save <= 0.0 && ck.v_save_margin <= 0.0)
      return ValidationResult::fail("v_save_margin must be positive");
    std::uint32_t bytes =
        ck.footprint.registers_bytes +
        (ck.scheme == Scheme::mementos ? cfg.device_ram_bytes
                                       : wl.ram_used_bytes);
    if (bytes > cfg.nvm.capacity_bytes)
      return ValidationResult::fail(
          "checkpoint footprint exceeds the non-volatile capacity");
  }
  if (ck.scheme == Scheme::mementos && wl.probe_interval_cycles == 0)
    return ValidationResult::fail("mementos requires a probe interval");
  if (ck.i_hibernate < 0.0)
    return ValidationResult::fail("hibernation current cannot be negative");

  if (cfg.source.kind == SourceConfig::Kind::trace && !cfg.source.trace)
    return ValidationResult::fail("trace source selected but no trace loaded");
  if (cfg.source.kind != SourceConfig::Kind::trace && cfg.source.volts < 0.0)
    return ValidationResult::fail("source voltage cannot be negative");

  if (cfg.network.r_series <= 0.0)
    return ValidationResult::fail("charging series resistance must be positive");
  if (cfg.network.doubler) {
    if (cfg.network.doubler->gain <= 0.0)
      return ValidationResult::fail("doubler gain must be positive");
    if (cfg.network.doubler->efficiency <= 0.0 ||
        cfg.network.doubler->efficiency > 1.0)
      return ValidationResult::fail("doubler efficiency must lie in (0, 1]");
  }

  double eta = cfg.regulator.flat_efficiency();
  if (eta <= 0.0 || eta > 1.0)
    return ValidationResult::fail("regulator efficiency must lie in (0, 1]");

  const EmulatorControls& c = cfg.controls;
  if (c.max_off_dt <= 0.0 || c.crossing_tol_v <= 0.0 || c.max_sim_time <= 0.0 ||
      c.max_energy_cycles == 0)
    return ValidationResult::fail("emulator controls must be positive");

  return ValidationResult::pass();
}

RunResult run(const ExperimentConfig& cfg, const Workload& wl) {
  RunResult out;
  if (auto r = validate_config(cfg, wl); !r) {
    out.metrics.failure_reason = r.message;
    return out;
  }
  Engine engine(cfg, wl, out);
  engine.drive();
  return out;
}

} // namespace ecsim
