#include "evcoord/evflex/flexibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace evcoord::evflex {

using conic::ConicProgram;
using conic::LinExpr;
using conic::VariableRef;

int presence(const EvSession& s, int t) { return (t >= s.t_arrive && t < s.t_depart) ? 1 : 0; }

void StationFleet::validate() const {
  if (horizon < 1) throw std::invalid_argument("fleet " + station_id + ": horizon must be >= 1");
  if (dt_hours <= 0.0) throw std::invalid_argument("fleet " + station_id + ": dt must be > 0");
  if (n_chargers < 0) throw std::invalid_argument("fleet " + station_id + ": negative charger count");
  for (const auto& s : sessions) {
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument("session " + s.id + ": " + why);
    };
    if (s.t_arrive >= s.t_depart) fail("arrival must precede departure");
    if (s.t_arrive < 1 || s.t_depart > horizon) fail("window outside horizon");
    if (!(s.soc_min <= s.soc_init && s.soc_init <= s.soc_max)) fail("initial SOC outside range");
    if (!(s.soc_min <= s.soc_req && s.soc_req <= s.soc_max)) fail("required SOC outside range");
    if (s.capacity_kwh <= 0.0) fail("capacity must be positive");
    if (s.p_chg_kw < 0.0) fail("charger power must be nonnegative");
    const double need_kwh = (s.soc_req - s.soc_init) * s.capacity_kwh;
    const double deliverable = s.p_chg_kw * dt_hours * (s.t_depart - s.t_arrive);
    if (need_kwh > deliverable + 1e-9) fail("unservable: requirement exceeds window capacity");
  }
}

double FlexibilityRegion::total_width_kw() const {
  double w = 0.0;
  for (int t = 0; t < horizon; ++t) w += upper_kw[static_cast<size_t>(t)] - lower_kw[static_cast<size_t>(t)];
  return w;
}

FlexModel build_flex_program(const StationFleet& fleet, double w) {
  fleet.validate();
  if (w < 0.0) throw std::invalid_argument("flexibility weight w must be >= 0");
  const int T = fleet.horizon;
  const double dt = fleet.dt_hours;

  FlexModel m;
  ConicProgram& prog = m.program;

  auto add_family = [&](const EvSession& s, const char* tag) {
    FlexModel::EvRefs r;
    const double p_lo = fleet.v2g ? -s.p_chg_kw : 0.0;
    for (int t = 1; t <= T; ++t)
      r.power.push_back(prog.add_variable(std::string(tag) + ".p." + s.id + "." + std::to_string(t),
                                          p_lo, s.p_chg_kw));
    for (int t = 1; t <= T; ++t)
      r.status.push_back(prog.add_variable(std::string(tag) + ".s." + s.id + "." + std::to_string(t),
                                           0.0, presence(s, t) ? 1.0 : 0.0));
    for (int t = 1; t <= T; ++t)
      r.soc.push_back(prog.add_variable(std::string(tag) + ".soc." + s.id + "." + std::to_string(t),
                                        s.soc_min, s.soc_max));
    for (int t = 0; t < T; ++t) {
      prog.add_inequality(LinExpr(r.power[t]) - s.p_chg_kw * LinExpr(r.status[t]), LinExpr(0.0));
      if (fleet.v2g)
        prog.add_inequality(-LinExpr(r.power[t]) - s.p_chg_kw * LinExpr(r.status[t]), LinExpr(0.0));
    }
    prog.add_equality(LinExpr(r.soc[s.t_arrive - 1]), LinExpr(s.soc_init));
    prog.add_inequality(-LinExpr(r.soc[s.t_depart - 1]), LinExpr(-s.soc_req));
    for (int t = 0; t + 1 < T; ++t)
      prog.add_equality(LinExpr(r.soc[t + 1]) - LinExpr(r.soc[t]) -
                            (dt / s.capacity_kwh) * LinExpr(r.power[t]),
                        LinExpr(0.0));
    return r;
  };

  for (const auto& s : fleet.sessions) {
    m.hat.push_back(add_family(s, "hat"));
    m.check.push_back(add_family(s, "chk"));
  }
  for (int t = 1; t <= T; ++t)
    m.upper.push_back(prog.add_variable("p_up." + std::to_string(t)));
  for (int t = 1; t <= T; ++t)
    m.lower.push_back(prog.add_variable("p_lo." + std::to_string(t)));

  const int n_ev = static_cast<int>(fleet.sessions.size());
  for (int t = 0; t < T; ++t) {
    LinExpr sum_hat(0.0), sum_chk(0.0), chg_hat(0.0), chg_chk(0.0);
    for (int v = 0; v < n_ev; ++v) {
      sum_hat += LinExpr(m.hat[v].power[t]);
      sum_chk += LinExpr(m.check[v].power[t]);
      chg_hat += LinExpr(m.hat[v].status[t]);
      chg_chk += LinExpr(m.check[v].status[t]);
    }
    prog.add_equality(LinExpr(m.upper[t]) - sum_hat, LinExpr(0.0));
    prog.add_equality(LinExpr(m.lower[t]) - sum_chk, LinExpr(0.0));
    prog.add_inequality(chg_hat, LinExpr(static_cast<double>(fleet.n_chargers)));
    prog.add_inequality(chg_chk, LinExpr(static_cast<double>(fleet.n_chargers)));
    prog.add_inequality(LinExpr(m.lower[t]) - LinExpr(m.upper[t]), LinExpr(0.0));
    for (int v = 0; v < n_ev; ++v) {
      prog.add_equality(LinExpr(m.hat[v].status[t]) - LinExpr(m.check[v].status[t]), LinExpr(0.0));
      // Per-EV ordering of the boundary schedules. This keeps every prefix
      // sum of a convex per-slot mix between the two boundary SOC paths, so
      // disaggregated dispatches stay feasible slot by slot.
      prog.add_inequality(LinExpr(m.check[v].power[t]) - LinExpr(m.hat[v].power[t]), LinExpr(0.0));
    }
  }

  // Negated maximization of per-slot widths with the evenness weight.
  for (int t = 0; t < T; ++t) {
    prog.add_linear_cost(LinExpr(m.lower[t]) - LinExpr(m.upper[t]));
    if (w > 0.0) prog.add_quadratic_cost(w, LinExpr(m.upper[t]) - LinExpr(m.lower[t]));
  }
  return m;
}

FlexibilityRegion compute_flexibility(const StationFleet& fleet, double w) {
  FlexModel model = build_flex_program(fleet, w);
  conic::SolveOptions opts;
  opts.tol = 1e-6;
  opts.max_iter = 200;
  const conic::Solution sol = conic::solve(model.program, opts);
  if (sol.status != conic::SolveStatus::optimal)
    throw std::runtime_error("flexibility solve failed for station " + fleet.station_id + ": " +
                             conic::to_string(sol.status));

  FlexibilityRegion region;
  region.station_id = fleet.station_id;
  region.horizon = fleet.horizon;
  region.dt_hours = fleet.dt_hours;
  region.upper_kw = conic::extract(sol, model.upper);
  region.lower_kw = conic::extract(sol, model.lower);
  auto read = [&](const FlexModel::EvRefs& r) {
    EvSchedule s;
    s.power_kw = conic::extract(sol, r.power);
    s.status = conic::extract(sol, r.status);
    s.soc = conic::extract(sol, r.soc);
    return s;
  };
  for (const auto& r : model.hat) region.upper_schedules.push_back(read(r));
  for (const auto& r : model.check) region.lower_schedules.push_back(read(r));
  for (const auto& s : fleet.sessions) region.capacities_kwh.push_back(s.capacity_kwh);
  return region;
}

EvDispatch disaggregate(const FlexibilityRegion& region, const std::vector<double>& trajectory_kw) {
  const int T = region.horizon;
  if (static_cast<int>(trajectory_kw.size()) != T)
    throw std::invalid_argument("disaggregate: trajectory length does not match horizon");

  std::vector<double> alpha(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    const double up = region.upper_kw[static_cast<size_t>(t)];
    const double lo = region.lower_kw[static_cast<size_t>(t)];
    const double p = trajectory_kw[static_cast<size_t>(t)];
    const double eps = 1e-9 * (1.0 + std::abs(up) + std::abs(lo));
    if (p < lo - eps || p > up + eps)
      throw std::domain_error("disaggregate: trajectory leaves the region at slot " +
                              std::to_string(t + 1));
    const double gap = up - lo;
    alpha[static_cast<size_t>(t)] = (gap <= 1e-9) ? 0.0 : std::clamp((up - p) / gap, 0.0, 1.0);
  }

  EvDispatch d;
  d.aggregate_kw = trajectory_kw;
  const size_t n_ev = region.upper_schedules.size();
  for (size_t v = 0; v < n_ev; ++v) {
    const EvSchedule& hat = region.upper_schedules[v];
    const EvSchedule& chk = region.lower_schedules[v];
    EvSchedule s;
    s.power_kw.resize(static_cast<size_t>(T));
    s.status.resize(static_cast<size_t>(T));
    s.soc.resize(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) {
      const auto i = static_cast<size_t>(t);
      const double a = alpha[i];
      s.power_kw[i] = a * chk.power_kw[i] + (1.0 - a) * hat.power_kw[i];
      s.status[i] = a * chk.status[i] + (1.0 - a) * hat.status[i];
    }
    // The SOC path follows the dynamics for the mixed powers. A per-slot
    // convex combination of the boundary SOC paths would not, once alpha
    // varies over time.
    s.soc[0] = alpha[0] * chk.soc[0] + (1.0 - alpha[0]) * hat.soc[0];
    for (int t = 0; t + 1 < T; ++t) {
      const auto i = static_cast<size_t>(t);
      s.soc[i + 1] = s.soc[i] + s.power_kw[i] * region.dt_hours /
                                    region.capacities_kwh[v];
    }
    d.evs.push_back(std::move(s));
  }
  return d;
}

double ViolationReport::max_violation() const {
  return std::max({power_bounds.violation, status_window.violation, terminal_soc.violation,
                   soc_recursion.violation, soc_range.violation, charger_count.violation,
                   aggregation.violation});
}

std::string ViolationReport::summary() const {
  std::ostringstream os;
  auto line = [&](const char* name, const Entry& e) {
    os << name << "=" << e.violation;
    if (e.slot >= 0) os << " (slot " << e.slot << (e.ev.empty() ? "" : ", ev " + e.ev) << ")";
    os << "; ";
  };
  line("power", power_bounds);
  line("status", status_window);
  line("terminal_soc", terminal_soc);
  line("recursion", soc_recursion);
  line("soc_range", soc_range);
  line("chargers", charger_count);
  line("aggregation", aggregation);
  return os.str();
}

ViolationReport validate_dispatch(const StationFleet& fleet, const EvDispatch& dispatch, double tol) {
  (void)tol;  // violations are reported as data; callers pick the threshold
  const int T = fleet.horizon;
  const double dt = fleet.dt_hours;
  ViolationReport rep;
  auto note = [](ViolationReport::Entry& e, double v, int slot, const std::string& ev) {
    if (v > e.violation) {
      e.violation = v;
      e.slot = slot;
      e.ev = ev;
    }
  };
  if (dispatch.evs.size() != fleet.sessions.size())
    throw std::invalid_argument("validate_dispatch: dispatch shape does not match fleet");

  for (size_t v = 0; v < fleet.sessions.size(); ++v) {
    const EvSession& s = fleet.sessions[v];
    const EvSchedule& ev = dispatch.evs[v];
    if (static_cast<int>(ev.power_kw.size()) != T || static_cast<int>(ev.status.size()) != T ||
        static_cast<int>(ev.soc.size()) != T)
      throw std::invalid_argument("validate_dispatch: schedule length mismatch for " + s.id);
    for (int t = 0; t < T; ++t) {
      const auto i = static_cast<size_t>(t);
      const double cap = ev.status[i] * s.p_chg_kw;
      const double lo_cap = fleet.v2g ? -cap : 0.0;
      note(rep.power_bounds, std::max(ev.power_kw[i] - cap, lo_cap - ev.power_kw[i]), t + 1, s.id);
      const double sp = presence(s, t + 1) ? 1.0 : 0.0;
      note(rep.status_window, std::max(-ev.status[i], ev.status[i] - sp), t + 1, s.id);
      note(rep.soc_range, std::max(s.soc_min - ev.soc[i], ev.soc[i] - s.soc_max), t + 1, s.id);
      if (t + 1 < T) {
        const double next = ev.soc[i] + ev.power_kw[i] * dt / s.capacity_kwh;
        note(rep.soc_recursion, std::abs(ev.soc[i + 1] - next), t + 1, s.id);
      }
    }
    note(rep.terminal_soc, std::abs(ev.soc[static_cast<size_t>(s.t_arrive - 1)] - s.soc_init),
         s.t_arrive, s.id);
    note(rep.terminal_soc, s.soc_req - ev.soc[static_cast<size_t>(s.t_depart - 1)], s.t_depart, s.id);
  }
  for (int t = 0; t < T; ++t) {
    const auto i = static_cast<size_t>(t);
    double status_sum = 0.0, power_sum = 0.0;
    for (const auto& ev : dispatch.evs) {
      status_sum += ev.status[i];
      power_sum += ev.power_kw[i];
    }
    note(rep.charger_count, status_sum - fleet.n_chargers, t + 1, "");
    if (!dispatch.aggregate_kw.empty())
      note(rep.aggregation, std::abs(power_sum - dispatch.aggregate_kw[i]), t + 1, "");
  }
  return rep;
}

FlexibilityRegion brute_force_region(const StationFleet& fleet, double power_step_kw) {
  fleet.validate();
  if (fleet.sessions.size() > 2 || fleet.horizon > 4)
    throw std::invalid_argument("brute_force_region: limited to <= 2 EVs and <= 4 slots");
  if (power_step_kw <= 0.0) throw std::invalid_argument("brute_force_region: step must be > 0");
  const int T = fleet.horizon;
  const double dt = fleet.dt_hours;
  const double eps = 1e-9;

  struct Site {
    int ev, t;  // 0-based slot
    std::vector<double> levels;
  };
  std::vector<Site> sites;
  double combos = 1.0;
  for (size_t v = 0; v < fleet.sessions.size(); ++v) {
    const EvSession& s = fleet.sessions[v];
    for (int t = 1; t <= T; ++t) {
      if (!presence(s, t)) continue;
      Site site{static_cast<int>(v), t - 1, {}};
      const double lo = fleet.v2g ? -s.p_chg_kw : 0.0;
      const int kmin = static_cast<int>(std::ceil(lo / power_step_kw - eps));
      const int kmax = static_cast<int>(std::floor(s.p_chg_kw / power_step_kw + eps));
      for (int k = kmin; k <= kmax; ++k) site.levels.push_back(k * power_step_kw);
      if (site.levels.empty()) site.levels.push_back(0.0);
      combos *= static_cast<double>(site.levels.size());
      sites.push_back(std::move(site));
    }
  }
  if (combos > 2e6) throw std::runtime_error("brute_force_region: enumeration too large");

  const size_t n_ev = fleet.sessions.size();
  std::vector<std::vector<double>> power(n_ev, std::vector<double>(static_cast<size_t>(T), 0.0));
  std::vector<double> upper(static_cast<size_t>(T), -1e300), lower(static_cast<size_t>(T), 1e300);
  bool any_feasible = false;

  auto feasible = [&]() {
    for (int t = 0; t < T; ++t) {
      double chargers = 0.0;
      for (size_t v = 0; v < n_ev; ++v) {
        const double p = power[v][static_cast<size_t>(t)];
        if (p == 0.0) continue;
        if (fleet.sessions[v].p_chg_kw <= 0.0) return false;
        chargers += std::abs(p) / fleet.sessions[v].p_chg_kw;
      }
      if (chargers > fleet.n_chargers + eps) return false;
    }
    for (size_t v = 0; v < n_ev; ++v) {
      const EvSession& s = fleet.sessions[v];
      double soc = s.soc_init;
      for (int t = s.t_arrive; t < s.t_depart; ++t) {
        soc += power[v][static_cast<size_t>(t - 1)] * dt / s.capacity_kwh;
        if (soc < s.soc_min - eps || soc > s.soc_max + eps) return false;
      }
      if (soc < s.soc_req - eps) return false;
    }
    return true;
  };

  std::vector<size_t> idx(sites.size(), 0);
  for (;;) {
    for (size_t k = 0; k < sites.size(); ++k)
      power[static_cast<size_t>(sites[k].ev)][static_cast<size_t>(sites[k].t)] = sites[k].levels[idx[k]];
    if (feasible()) {
      any_feasible = true;
      for (int t = 0; t < T; ++t) {
        double agg = 0.0;
        for (size_t v = 0; v < n_ev; ++v) agg += power[v][static_cast<size_t>(t)];
        upper[static_cast<size_t>(t)] = std::max(upper[static_cast<size_t>(t)], agg);
        lower[static_cast<size_t>(t)] = std::min(lower[static_cast<size_t>(t)], agg);
      }
    }
    size_t k = 0;
    while (k < sites.size() && ++idx[k] == sites[k].levels.size()) idx[k++] = 0;
    if (k == sites.size()) break;
    if (sites.empty()) break;
  }
  if (sites.empty()) {
    std::fill(upper.begin(), upper.end(), 0.0);
    std::fill(lower.begin(), lower.end(), 0.0);
    any_feasible = true;
  }
  if (!any_feasible) throw std::runtime_error("brute_force_region: no feasible discretized dispatch");

  FlexibilityRegion r;
  r.station_id = fleet.station_id;
  r.horizon = T;
  r.dt_hours = dt;
  r.upper_kw = std::move(upper);
  r.lower_kw = std::move(lower);
  return r;
}

}  // namespace evcoord::evflex
