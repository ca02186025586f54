#pragma once

#include <string>
#include <vector>

namespace evcoord::evflex {

/// One vehicle's reservation. Slots are 1-based; charging is allowed on
/// [t_arrive, t_depart) and the vehicle is gone from slot t_depart on.
struct EvSession {
  std::string id;
  int t_arrive = 0;
  int t_depart = 0;
  double soc_init = 0.0;
  double soc_req = 0.0;
  double soc_min = 0.0;
  double soc_max = 1.0;
  double capacity_kwh = 0.0;
  double p_chg_kw = 0.0;
};

struct StationFleet {
  std::string station_id;
  std::vector<EvSession> sessions;
  int n_chargers = 0;
  int horizon = 24;
  double dt_hours = 1.0;
  /// Two-sided charger power bound by default; off clamps charging power
  /// to [0, s * p_chg] for charge-only studies.
  bool v2g = true;

  /// Throws std::invalid_argument naming the offending session: bad window,
  /// inconsistent SOC values, or a requirement the window cannot serve.
  void validate() const;
};

/// 1 iff the vehicle is parked and connectable in slot t.
int presence(const EvSession& s, int t);

}  // namespace evcoord::evflex
