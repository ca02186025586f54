#include "evcoord/station/station.hpp"

#include <cmath>
#include <stdexcept>

namespace evcoord::station {

using conic::ConicProgram;
using conic::LinExpr;
using conic::Solution;
using conic::VariableRef;

void StationParams::validate(int horizon) const {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("station " + station_id + ": " + why);
  };
  if (!(eta_c > 0.0 && eta_c <= 1.0 && eta_d > 0.0 && eta_d <= 1.0))
    fail("efficiencies must lie in (0, 1]");
  if (!(soc_b_min < soc_b_max)) fail("battery SOC range is empty");
  if (!(p_g_min_kw <= 0.0 && 0.0 <= p_g_max_kw)) fail("trading bounds must bracket zero");
  if (battery_capacity_kwh < 0.0 || p_b_chg_max_kw < 0.0 || p_b_dis_max_kw < 0.0)
    fail("negative battery rating");
  if (static_cast<int>(pv_profile_kw.size()) != horizon) fail("PV profile length != horizon");
}

double battery_step(double soc, double p_dis_kw, double p_chg_kw, const StationParams& p,
                    double dt_hours) {
  return soc - p_dis_kw * dt_hours / (p.eta_d * p.battery_capacity_kwh) +
         p_chg_kw * dt_hours * p.eta_c / p.battery_capacity_kwh;
}

double cost_ev(std::span<const double> p_d_kw, std::span<const double> upper_kw, double c_dissat,
               double dt_hours) {
  double c = 0.0;
  for (size_t t = 0; t < p_d_kw.size(); ++t) c += c_dissat * (upper_kw[t] - p_d_kw[t]) * dt_hours;
  return c;
}

double cost_battery(std::span<const double> p_dis_kw, std::span<const double> p_chg_kw,
                    double c_batt, double dt_hours) {
  double c = 0.0;
  for (size_t t = 0; t < p_dis_kw.size(); ++t) c += c_batt * (p_dis_kw[t] + p_chg_kw[t]) * dt_hours;
  return c;
}

double cost_trading(std::span<const double> p_g_kw, std::span<const double> prices,
                    double dt_hours) {
  double c = 0.0;
  for (size_t t = 0; t < p_g_kw.size(); ++t) c += p_g_kw[t] * prices[t] * dt_hours;
  return c;
}

double cost_trading_baseline(std::span<const double> p_buy_kw, std::span<const double> p_sell_kw,
                             std::span<const double> lambda_buy, std::span<const double> lambda_sell,
                             double dt_hours) {
  double c = 0.0;
  for (size_t t = 0; t < p_buy_kw.size(); ++t)
    c += (p_buy_kw[t] * lambda_buy[t] - p_sell_kw[t] * lambda_sell[t]) * dt_hours;
  return c;
}

StationVars append_station_constraints(ConicProgram& prog, const StationParams& p,
                                       const evflex::FlexibilityRegion& region, double dt_hours) {
  const int T = region.horizon;
  p.validate(T);
  StationVars v;
  const std::string& id = p.station_id;
  for (int t = 1; t <= T; ++t) {
    const auto i = static_cast<size_t>(t - 1);
    const double lo = std::min(region.lower_kw[i], region.upper_kw[i]);
    v.p_d.push_back(prog.add_variable(id + ".pd." + std::to_string(t), lo, region.upper_kw[i]));
  }
  for (int t = 1; t <= T; ++t)
    v.p_g.push_back(prog.add_variable(id + ".pg." + std::to_string(t), p.p_g_min_kw, p.p_g_max_kw));
  for (int t = 1; t <= T; ++t)
    v.p_b_dis.push_back(prog.add_variable(id + ".pbd." + std::to_string(t), 0.0, p.p_b_dis_max_kw));
  for (int t = 1; t <= T; ++t)
    v.p_b_chg.push_back(prog.add_variable(id + ".pbc." + std::to_string(t), 0.0, p.p_b_chg_max_kw));
  for (int t = 1; t <= T; ++t)
    v.soc_b.push_back(prog.add_variable(id + ".socb." + std::to_string(t), p.soc_b_min, p.soc_b_max));

  const double dis_coef = dt_hours / (p.eta_d * std::max(p.battery_capacity_kwh, 1e-12));
  const double chg_coef = dt_hours * p.eta_c / std::max(p.battery_capacity_kwh, 1e-12);
  for (int t = 0; t + 1 < T; ++t)
    prog.add_equality(LinExpr(v.soc_b[t + 1]) - LinExpr(v.soc_b[t]) +
                          dis_coef * LinExpr(v.p_b_dis[t]) - chg_coef * LinExpr(v.p_b_chg[t]),
                      LinExpr(0.0));
  // Cyclic day: SOC returns to its start, and the last slot's throughput
  // must not drift the cycle (the T-point SOC path has no t = T+1 entry to
  // absorb it).
  prog.add_equality(LinExpr(v.soc_b[0]) - LinExpr(v.soc_b[static_cast<size_t>(T - 1)]),
                    LinExpr(0.0));
  prog.add_equality(dis_coef * LinExpr(v.p_b_dis[static_cast<size_t>(T - 1)]) -
                        chg_coef * LinExpr(v.p_b_chg[static_cast<size_t>(T - 1)]),
                    LinExpr(0.0));
  for (int t = 0; t < T; ++t)
    prog.add_equality(LinExpr(v.p_d[t]) - LinExpr(v.p_g[t]) - LinExpr(v.p_b_dis[t]) +
                          LinExpr(v.p_b_chg[t]),
                      LinExpr(p.pv_profile_kw[static_cast<size_t>(t)]));
  return v;
}

void add_station_base_costs(ConicProgram& prog, const StationVars& vars, const StationParams& p,
                            const evflex::FlexibilityRegion& region, double dt_hours) {
  const int T = region.horizon;
  for (int t = 0; t < T; ++t) {
    prog.add_linear_cost(p.c_batt * dt_hours *
                         (LinExpr(vars.p_b_dis[t]) + LinExpr(vars.p_b_chg[t])));
    prog.add_linear_cost(-p.c_dissat * dt_hours * LinExpr(vars.p_d[t]));
    prog.add_constant_cost(p.c_dissat * dt_hours * region.upper_kw[static_cast<size_t>(t)]);
  }
}

namespace {

[[noreturn]] void report_infeasible(const StationParams& p, const evflex::FlexibilityRegion& region) {
  const int T = region.horizon;
  for (int t = 0; t < T; ++t) {
    const auto i = static_cast<size_t>(t);
    const double supply = p.p_g_max_kw + p.pv_profile_kw[i] + p.p_b_dis_max_kw;
    if (region.lower_kw[i] > supply + 1e-9)
      throw std::runtime_error("station " + p.station_id + " infeasible: slot " +
                               std::to_string(t + 1) + " needs " + std::to_string(region.lower_kw[i]) +
                               " kW but at most " + std::to_string(supply) + " kW can be supplied");
    const double absorb = p.p_g_min_kw + p.pv_profile_kw[i] - p.p_b_chg_max_kw;
    if (absorb > region.upper_kw[i] + 1e-9)
      throw std::runtime_error("station " + p.station_id + " infeasible: slot " +
                               std::to_string(t + 1) + " cannot absorb the PV surplus");
  }
  throw std::runtime_error("station " + p.station_id +
                           " subproblem infeasible (temporal battery coupling)");
}

StationDecision read_decision(const Solution& sol, const StationVars& v) {
  StationDecision d;
  d.p_d_kw = conic::extract(sol, v.p_d);
  d.p_g_kw = conic::extract(sol, v.p_g);
  d.p_b_dis_kw = conic::extract(sol, v.p_b_dis);
  d.p_b_chg_kw = conic::extract(sol, v.p_b_chg);
  d.soc_b = conic::extract(sol, v.soc_b);
  return d;
}

}  // namespace

StationDecision solve_station_subproblem(const StationParams& p,
                                         const evflex::FlexibilityRegion& region,
                                         const std::vector<double>& prices,
                                         const std::vector<double>& dso_schedule_kw, double rho) {
  const int T = region.horizon;
  if (static_cast<int>(prices.size()) != T || static_cast<int>(dso_schedule_kw.size()) != T)
    throw std::invalid_argument("station subproblem: price/schedule length mismatch");
  if (!(rho > 0.0)) throw std::invalid_argument("station subproblem: rho must be > 0");
  const double dt = region.dt_hours;

  ConicProgram prog;
  const StationVars vars = append_station_constraints(prog, p, region, dt);
  add_station_base_costs(prog, vars, p, region, dt);
  for (int t = 0; t < T; ++t) {
    const auto i = static_cast<size_t>(t);
    prog.add_linear_cost(prices[i] * dt * LinExpr(vars.p_g[t]));
    prog.add_quadratic_cost(0.5 * rho * dt, LinExpr(vars.p_g[t]) - LinExpr(dso_schedule_kw[i]));
  }

  conic::SolveOptions opts;
  opts.tol = 1e-6;
  opts.max_iter = 200;
  const Solution sol = conic::solve(prog, opts);
  if (sol.status == conic::SolveStatus::infeasible) report_infeasible(p, region);
  if (sol.status != conic::SolveStatus::optimal)
    throw std::runtime_error("station " + p.station_id + " subproblem: solver returned " +
                             conic::to_string(sol.status));
  return read_decision(sol, vars);
}

StationDecision solve_station_baseline(const StationParams& p,
                                       const evflex::FlexibilityRegion& region,
                                       const std::vector<double>& lambda_buy,
                                       const std::vector<double>& lambda_sell) {
  const int T = region.horizon;
  if (static_cast<int>(lambda_buy.size()) != T || static_cast<int>(lambda_sell.size()) != T)
    throw std::invalid_argument("station baseline: price length mismatch");
  const double dt = region.dt_hours;

  ConicProgram prog;
  const StationVars vars = append_station_constraints(prog, p, region, dt);
  add_station_base_costs(prog, vars, p, region, dt);
  std::vector<VariableRef> buy, sell;
  for (int t = 1; t <= T; ++t)
    buy.push_back(prog.add_variable(p.station_id + ".buy." + std::to_string(t), 0.0, p.p_g_max_kw));
  for (int t = 1; t <= T; ++t)
    sell.push_back(
        prog.add_variable(p.station_id + ".sell." + std::to_string(t), 0.0, -p.p_g_min_kw));
  for (int t = 0; t < T; ++t) {
    const auto i = static_cast<size_t>(t);
    prog.add_equality(LinExpr(vars.p_g[t]) - LinExpr(buy[i]) + LinExpr(sell[i]), LinExpr(0.0));
    prog.add_linear_cost(lambda_buy[i] * dt * LinExpr(buy[i]) -
                         lambda_sell[i] * dt * LinExpr(sell[i]));
  }

  conic::SolveOptions opts;
  opts.tol = 1e-6;
  opts.max_iter = 200;
  const Solution sol = conic::solve(prog, opts);
  if (sol.status == conic::SolveStatus::infeasible) report_infeasible(p, region);
  if (sol.status != conic::SolveStatus::optimal)
    throw std::runtime_error("station " + p.station_id + " baseline: solver returned " +
                             conic::to_string(sol.status));
  StationDecision d = read_decision(sol, vars);
  d.p_buy_kw = conic::extract(sol, buy);
  d.p_sell_kw = conic::extract(sol, sell);
  return d;
}

}  // namespace evcoord::station
