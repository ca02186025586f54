#include "evcoord/coordination/coordination.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evcoord/common/parallel.hpp"

namespace evcoord::coord {

void SystemModel::validate() const {
  if (stations.size() != regions.size())
    throw std::invalid_argument("system: stations and regions must align");
  for (size_t i = 0; i < stations.size(); ++i) {
    const auto& id = stations[i].station_id;
    if (!network.station_bus_pos.count(id))
      throw std::invalid_argument("system: station " + id + " has no bus in the network");
    if (regions[i].station_id != id)
      throw std::invalid_argument("system: region order does not match station order");
    if (regions[i].horizon != network.horizon)
      throw std::invalid_argument("system: region horizon mismatch for " + id);
    stations[i].validate(network.horizon);
  }
}

std::vector<double> price_update(const std::vector<double>& lambda, const std::vector<double>& p_g_kw,
                                 const std::vector<double>& p_n_kw, double rho) {
  if (lambda.size() != p_g_kw.size() || lambda.size() != p_n_kw.size())
    throw std::invalid_argument("price_update: length mismatch");
  std::vector<double> out(lambda.size());
  for (size_t t = 0; t < lambda.size(); ++t) out[t] = lambda[t] + rho * (p_g_kw[t] - p_n_kw[t]);
  return out;
}

double residual(const std::map<std::string, std::vector<double>>& lambda_new,
                const std::map<std::string, std::vector<double>>& lambda_old) {
  double s = 0.0;
  for (const auto& [id, vec] : lambda_new) {
    const auto& old = lambda_old.at(id);
    if (old.size() != vec.size()) throw std::invalid_argument("residual: shape mismatch");
    for (size_t t = 0; t < vec.size(); ++t) {
      const double d = vec[t] - old[t];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

SettlementReport settle(const SystemModel& sys,
                        const std::vector<station::StationDecision>& decisions,
                        const std::vector<double>& per_station_trading_cost,
                        const grid::NetworkState& state) {
  SettlementReport rep;
  const double dt = sys.dt_hours();
  double sum_cg = 0.0;
  for (size_t i = 0; i < sys.stations.size(); ++i) {
    StationLedger l;
    l.station_id = sys.stations[i].station_id;
    l.c_g = per_station_trading_cost[i];
    l.c_b = station::cost_battery(decisions[i].p_b_dis_kw, decisions[i].p_b_chg_kw,
                                  sys.stations[i].c_batt, dt);
    l.c_ev = station::cost_ev(decisions[i].p_d_kw, sys.regions[i].upper_kw,
                              sys.stations[i].c_dissat, dt);
    l.total = l.c_g + l.c_b + l.c_ev;
    rep.stations_total += l.total;
    sum_cg += l.c_g;
    rep.stations.push_back(std::move(l));
  }
  rep.dso_c_bus1 = grid::cost_bus1(state, sys.network);
  rep.dso_c_loss = grid::cost_loss(state, sys.network);
  rep.dso_c_trade = -sum_cg;
  rep.dso_total = rep.dso_c_bus1 + rep.dso_c_loss + rep.dso_c_trade;
  rep.total = rep.stations_total + rep.dso_total;
  return rep;
}

CoordinationResult run_coordination(const SystemModel& sys, const CoordinationOptions& opts) {
  sys.validate();
  if (!(opts.rho > 0.0) || !(opts.delta > 0.0))
    throw std::invalid_argument("run_coordination: rho and delta must be positive");
  const int T = sys.horizon();
  const auto n_stations = sys.stations.size();
  const double dt = sys.dt_hours();
  // The penalty parameter acts on per-unit powers; on raw kW a usable rho
  // would depend on the feeder's base. Internally everything runs in kW, so
  // rescale once here.
  const double rho = opts.rho / sys.network.s_base_kw();

  std::map<std::string, std::vector<double>> lambda, sched;
  for (const auto& p : sys.stations) {
    lambda[p.station_id] = opts.initial_prices.count(p.station_id)
                               ? opts.initial_prices.at(p.station_id)
                               : std::vector<double>(static_cast<size_t>(T), 0.0);
    sched[p.station_id] = opts.initial_schedules_kw.count(p.station_id)
                              ? opts.initial_schedules_kw.at(p.station_id)
                              : std::vector<double>(static_cast<size_t>(T), 0.0);
  }

  CoordinationResult out;
  std::vector<station::StationDecision> decisions(n_stations);
  std::map<std::string, std::vector<double>> requests;

  for (int k = 1; k <= opts.max_iter; ++k) {
    common::parallel_for(static_cast<int>(n_stations), [&](int i) {
      const auto& id = sys.stations[static_cast<size_t>(i)].station_id;
      decisions[static_cast<size_t>(i)] =
          station::solve_station_subproblem(sys.stations[static_cast<size_t>(i)],
                                            sys.regions[static_cast<size_t>(i)], lambda.at(id),
                                            sched.at(id), rho);
    });
    for (size_t i = 0; i < n_stations; ++i)
      requests[sys.stations[i].station_id] = decisions[i].p_g_kw;

    grid::DsoResult dso = grid::dso_subproblem(sys.network, requests, lambda, rho);

    std::map<std::string, std::vector<double>> lambda_new;
    for (const auto& [id, lam] : lambda)
      lambda_new[id] = price_update(lam, requests.at(id), dso.schedules_kw.at(id), rho);
    const double r = residual(lambda_new, lambda);

    IterationRecord rec;
    rec.k = k;
    rec.residual = r;
    double sum_cg = 0.0;
    for (size_t i = 0; i < n_stations; ++i) {
      const auto& id = sys.stations[i].station_id;
      const double cg = station::cost_trading(decisions[i].p_g_kw, lambda.at(id), dt);
      const double ci = cg +
                        station::cost_battery(decisions[i].p_b_dis_kw, decisions[i].p_b_chg_kw,
                                              sys.stations[i].c_batt, dt) +
                        station::cost_ev(decisions[i].p_d_kw, sys.regions[i].upper_kw,
                                         sys.stations[i].c_dissat, dt);
      rec.station_costs.push_back(ci);
      sum_cg += station::cost_trading(dso.schedules_kw.at(id), lambda.at(id), dt);
    }
    rec.dso_cost = grid::cost_bus1(dso.state, sys.network) + grid::cost_loss(dso.state, sys.network) -
                   sum_cg;
    out.trace.push_back(std::move(rec));

    lambda = std::move(lambda_new);
    sched = dso.schedules_kw;
    out.state = std::move(dso.state);
    out.schedules_kw = sched;
    out.iterations = k;
    if (r <= opts.delta) {
      out.converged = true;
      break;
    }
  }

  out.prices = lambda;
  out.decisions = std::move(decisions);
  std::vector<double> trading(n_stations, 0.0);
  for (size_t i = 0; i < n_stations; ++i)
    trading[i] =
        station::cost_trading(out.decisions[i].p_g_kw, lambda.at(sys.stations[i].station_id), dt);
  out.settlement = settle(sys, out.decisions, trading, out.state);

  for (size_t i = 0; i < n_stations; ++i) {
    std::vector<double> traj = out.decisions[i].p_d_kw;
    for (int t = 0; t < T; ++t) {
      const auto ti = static_cast<size_t>(t);
      traj[ti] = std::clamp(traj[ti], sys.regions[i].lower_kw[ti], sys.regions[i].upper_kw[ti]);
    }
    out.dispatches.push_back(evflex::disaggregate(sys.regions[i], traj));
  }
  return out;
}

CentralizedResult solve_centralized(const SystemModel& sys) {
  sys.validate();
  const int T = sys.horizon();
  const double dt = sys.dt_hours();
  const double s_base = sys.network.s_base_kw();

  conic::ConicProgram prog;
  std::vector<station::StationVars> svars;
  for (size_t i = 0; i < sys.stations.size(); ++i) {
    svars.push_back(station::append_station_constraints(prog, sys.stations[i], sys.regions[i], dt));
    station::add_station_base_costs(prog, svars.back(), sys.stations[i], sys.regions[i], dt);
  }
  std::vector<grid::SlotVars> slots;
  for (int t = 0; t < T; ++t) {
    slots.push_back(grid::append_network_slot(prog, sys.network, t));
    grid::add_network_slot_costs(prog, sys.network, slots.back(), t);
  }
  // Bus coupling p_{n_i}(t) = p_{g,i}(t); its shadow price is the
  // locational trading price (per kW over one slot, so divide by dt).
  std::vector<std::vector<conic::EqRef>> coupling(sys.stations.size());
  for (size_t i = 0; i < sys.stations.size(); ++i) {
    const auto& id = sys.stations[i].station_id;
    for (int t = 0; t < T; ++t)
      coupling[i].push_back(prog.add_equality(
          s_base * conic::LinExpr(slots[static_cast<size_t>(t)].station_p.at(id)) -
              conic::LinExpr(svars[i].p_g[t]),
          conic::LinExpr(0.0)));
  }

  conic::SolveOptions opts;
  opts.tol = 1e-6;
  opts.max_iter = 300;
  const conic::Solution sol = conic::solve(prog, opts);
  if (sol.status != conic::SolveStatus::optimal)
    throw std::runtime_error(std::string("centralized solve failed: ") +
                             conic::to_string(sol.status));

  CentralizedResult out;
  out.objective = sol.objective;
  out.state = grid::empty_state(sys.network);
  for (int t = 0; t < T; ++t)
    grid::read_network_slot(sol, sys.network, slots[static_cast<size_t>(t)], t, out.state);
  for (size_t i = 0; i < sys.stations.size(); ++i) {
    station::StationDecision d;
    d.p_d_kw = conic::extract(sol, svars[i].p_d);
    d.p_g_kw = conic::extract(sol, svars[i].p_g);
    d.p_b_dis_kw = conic::extract(sol, svars[i].p_b_dis);
    d.p_b_chg_kw = conic::extract(sol, svars[i].p_b_chg);
    d.soc_b = conic::extract(sol, svars[i].soc_b);
    out.decisions.push_back(std::move(d));
    std::vector<double> lam(static_cast<size_t>(T), 0.0);
    for (int t = 0; t < T; ++t) lam[static_cast<size_t>(t)] = sol.eq_dual(coupling[i][static_cast<size_t>(t)]) / dt;
    out.prices[sys.stations[i].station_id] = std::move(lam);
  }
  std::vector<double> trading(sys.stations.size(), 0.0);
  for (size_t i = 0; i < sys.stations.size(); ++i)
    trading[i] = station::cost_trading(out.decisions[i].p_g_kw,
                                       out.prices.at(sys.stations[i].station_id), dt);
  out.settlement = settle(sys, out.decisions, trading, out.state);
  return out;
}

BaselineResult run_baseline(const SystemModel& sys) {
  sys.validate();
  const auto n_stations = sys.stations.size();
  const double dt = sys.dt_hours();

  BaselineResult out;
  out.decisions.resize(n_stations);
  common::parallel_for(static_cast<int>(n_stations), [&](int i) {
    out.decisions[static_cast<size_t>(i)] = station::solve_station_baseline(
        sys.stations[static_cast<size_t>(i)], sys.regions[static_cast<size_t>(i)],
        sys.network.lambda_buy, sys.network.lambda_sell);
  });

  std::map<std::string, std::vector<double>> injections;
  for (size_t i = 0; i < n_stations; ++i)
    injections[sys.stations[i].station_id] = out.decisions[i].p_g_kw;
  out.state = grid::dso_clear_fixed(sys.network, injections);

  std::vector<double> trading(n_stations, 0.0);
  for (size_t i = 0; i < n_stations; ++i)
    trading[i] = station::cost_trading_baseline(out.decisions[i].p_buy_kw,
                                                out.decisions[i].p_sell_kw, sys.network.lambda_buy,
                                                sys.network.lambda_sell, dt);
  out.settlement = settle(sys, out.decisions, trading, out.state);
  return out;
}

}  // namespace evcoord::coord
