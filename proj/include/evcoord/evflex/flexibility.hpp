#pragma once

#include <array>
#include <string>
#include <vector>

#include "evcoord/conic/solve.hpp"
#include "evcoord/evflex/fleet.hpp"

namespace evcoord::evflex {

/// Full-horizon per-EV schedule record (power, relaxed charging status, SOC).
struct EvSchedule {
  std::vector<double> power_kw;
  std::vector<double> status;
  std::vector<double> soc;
};

/// Per-slot aggregate power envelope plus the boundary per-EV schedules
/// that witness it.
struct FlexibilityRegion {
  std::string station_id;
  int horizon = 0;
  double dt_hours = 1.0;
  std::vector<double> lower_kw;
  std::vector<double> upper_kw;
  std::vector<EvSchedule> upper_schedules;  // aligned with fleet.sessions
  std::vector<EvSchedule> lower_schedules;
  std::vector<double> capacities_kwh;       // per EV, for the dispatch SOC dynamics

  double total_width_kw() const;
};

/// A concrete per-EV dispatch for one aggregate trajectory.
struct EvDispatch {
  std::vector<double> aggregate_kw;
  std::vector<EvSchedule> evs;
};

/// Per-constraint-family worst violations; violations are data, not errors.
struct ViolationReport {
  struct Entry {
    double violation = 0.0;
    int slot = -1;
    std::string ev;
  };
  Entry power_bounds;    // |p| vs s * p_chg
  Entry status_window;   // 0 <= s <= presence
  Entry terminal_soc;    // soc(t_a) = init, soc(t_d) >= required
  Entry soc_recursion;
  Entry soc_range;
  Entry charger_count;
  Entry aggregation;     // sum of EV powers vs aggregate trajectory

  double max_violation() const;
  bool ok(double tol) const { return max_violation() <= tol; }
  std::string summary() const;
};

/// The flexibility program plus the variable handles needed to read
/// schedules out of a solution.
struct FlexModel {
  conic::ConicProgram program;
  struct EvRefs {
    std::vector<conic::VariableRef> power, status, soc;
  };
  std::vector<EvRefs> hat, check;  // per EV
  std::vector<conic::VariableRef> upper, lower;
};

FlexModel build_flex_program(const StationFleet& fleet, double w);

FlexibilityRegion compute_flexibility(const StationFleet& fleet, double w);

/// Convex-combination recovery of a feasible per-EV dispatch for any
/// trajectory inside the region. Throws std::domain_error (naming the slot)
/// when the trajectory leaves the region.
EvDispatch disaggregate(const FlexibilityRegion& region, const std::vector<double>& trajectory_kw);

ViolationReport validate_dispatch(const StationFleet& fleet, const EvDispatch& dispatch, double tol);

/// Independent oracle for tiny fleets: enumerates discretized dispatches
/// and returns the per-slot min/max aggregate power. Limited to <= 2 EVs
/// and <= 4 slots; refuses larger enumerations.
FlexibilityRegion brute_force_region(const StationFleet& fleet, double power_step_kw);

}  // namespace evcoord::evflex
