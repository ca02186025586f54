#pragma once

#include <span>
#include <string>
#include <vector>

#include "evcoord/conic/solve.hpp"
#include "evcoord/evflex/flexibility.hpp"

namespace evcoord::station {

struct StationParams {
  std::string station_id;
  int bus = 0;
  double battery_capacity_kwh = 0.0;
  double p_b_chg_max_kw = 0.0;
  double p_b_dis_max_kw = 0.0;
  double eta_c = 0.95;
  double eta_d = 0.95;
  double soc_b_min = 0.1;
  double soc_b_max = 0.9;
  double c_batt = 0.1;    // $/kWh of battery throughput
  double c_dissat = 0.1;  // $/kWh of curtailed EV charging
  double p_g_min_kw = -300.0;
  double p_g_max_kw = 300.0;
  std::vector<double> pv_profile_kw;  // length = horizon

  void validate(int horizon) const;
};

/// One station's per-slot dispatch.
struct StationDecision {
  std::vector<double> p_d_kw;      // aggregate EV charging power
  std::vector<double> p_g_kw;      // net traded power, import-positive
  std::vector<double> p_b_dis_kw;  // battery discharge
  std::vector<double> p_b_chg_kw;  // battery charge
  std::vector<double> soc_b;       // battery SOC path
  // Split trades, filled by the uniform-price baseline solve only.
  std::vector<double> p_buy_kw, p_sell_kw;
};

double battery_step(double soc, double p_dis_kw, double p_chg_kw, const StationParams& p,
                    double dt_hours);

double cost_ev(std::span<const double> p_d_kw, std::span<const double> upper_kw, double c_dissat,
               double dt_hours);
double cost_battery(std::span<const double> p_dis_kw, std::span<const double> p_chg_kw,
                    double c_batt, double dt_hours);
double cost_trading(std::span<const double> p_g_kw, std::span<const double> prices,
                    double dt_hours);
double cost_trading_baseline(std::span<const double> p_buy_kw, std::span<const double> p_sell_kw,
                             std::span<const double> lambda_buy, std::span<const double> lambda_sell,
                             double dt_hours);

/// Station decision variables inside a larger program; used by the
/// per-iteration subproblem, the baseline, and the centralized solve.
struct StationVars {
  std::vector<conic::VariableRef> p_d, p_g, p_b_dis, p_b_chg, soc_b;
};

/// Appends the station's feasible set: flexibility band, battery power and
/// SOC dynamics with the cyclic day constraint, trading limits, and the
/// internal power balance.
StationVars append_station_constraints(conic::ConicProgram& prog, const StationParams& p,
                                       const evflex::FlexibilityRegion& region, double dt_hours);

/// Adds C_b + C_ev (battery throughput and EV dissatisfaction) for the vars.
void add_station_base_costs(conic::ConicProgram& prog, const StationVars& vars,
                            const StationParams& p, const evflex::FlexibilityRegion& region,
                            double dt_hours);

/// The augmented per-iteration subproblem: minimize
///   C_b + C_ev + sum_t p_g(t) lambda(t) dt + sum_t (rho dt / 2)(p_g(t) - schedule(t))^2
/// over the station's feasible set. Throws std::runtime_error naming a
/// binding slot when infeasible.
StationDecision solve_station_subproblem(const StationParams& p,
                                         const evflex::FlexibilityRegion& region,
                                         const std::vector<double>& prices,
                                         const std::vector<double>& dso_schedule_kw, double rho);

/// Uniform-price baseline: minimize C_b + C_ev + C_g^base over the station's
/// feasible set with split nonnegative buy/sell trades.
StationDecision solve_station_baseline(const StationParams& p,
                                       const evflex::FlexibilityRegion& region,
                                       const std::vector<double>& lambda_buy,
                                       const std::vector<double>& lambda_sell);

}  // namespace evcoord::station
