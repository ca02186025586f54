#pragma once

#include <map>
#include <string>
#include <vector>

#include "evcoord/evflex/flexibility.hpp"
#include "evcoord/grid/dso.hpp"
#include "evcoord/station/station.hpp"

namespace evcoord::coord {

/// Everything stage 2 needs: the network plus, per station (aligned order),
/// its parameters and its stage-1 flexibility region.
struct SystemModel {
  grid::NetworkModel network;
  std::vector<station::StationParams> stations;
  std::vector<evflex::FlexibilityRegion> regions;

  int horizon() const { return network.horizon; }
  double dt_hours() const { return network.dt_hours; }
  void validate() const;
};

/// Price adjustment lambda'(t) = lambda(t) + rho (p_g(t) - p_n(t)).
std::vector<double> price_update(const std::vector<double>& lambda, const std::vector<double>& p_g_kw,
                                 const std::vector<double>& p_n_kw, double rho);

/// Euclidean norm of the price change across all stations and slots.
double residual(const std::map<std::string, std::vector<double>>& lambda_new,
                const std::map<std::string, std::vector<double>>& lambda_old);

struct IterationRecord {
  int k = 0;
  double residual = 0.0;
  std::vector<double> station_costs;  // realized C_i per station at this iterate
  double dso_cost = 0.0;              // C_bus1 + C_loss - sum_i C_g,i
};

struct StationLedger {
  std::string station_id;
  double c_g = 0.0, c_b = 0.0, c_ev = 0.0;
  double total = 0.0;  // C_i
};

/// Table of per-station and DSO costs. The DSO's trading entries mirror the
/// stations' C_g exactly (money conservation).
struct SettlementReport {
  std::vector<StationLedger> stations;
  double stations_total = 0.0;
  double dso_c_bus1 = 0.0;
  double dso_c_loss = 0.0;
  double dso_c_trade = 0.0;  // exactly -sum_i C_g,i
  double dso_total = 0.0;
  double total = 0.0;  // stations_total + dso_total
};

SettlementReport settle(const SystemModel& sys,
                        const std::vector<station::StationDecision>& decisions,
                        const std::vector<double>& per_station_trading_cost,
                        const grid::NetworkState& state);

struct CoordinationResult {
  bool converged = false;
  int iterations = 0;
  std::vector<IterationRecord> trace;
  std::map<std::string, std::vector<double>> prices;        // final lambda
  std::map<std::string, std::vector<double>> schedules_kw;  // final p_n
  std::vector<station::StationDecision> decisions;
  grid::NetworkState state;
  SettlementReport settlement;
  std::vector<evflex::EvDispatch> dispatches;  // stage-1 closure on final p_d
};

struct CoordinationOptions {
  double rho = 0.05;
  double delta = 1e-3;
  int max_iter = 200;
  /// Warm start (defaults to the zero initialization the protocol specifies).
  std::map<std::string, std::vector<double>> initial_prices;
  std::map<std::string, std::vector<double>> initial_schedules_kw;
};

/// The iterative price-based protocol: station solves in parallel, one DSO
/// solve, price update, until the price change drops below delta.
CoordinationResult run_coordination(const SystemModel& sys, const CoordinationOptions& opts = {});

struct CentralizedResult {
  SettlementReport settlement;
  grid::NetworkState state;
  std::map<std::string, std::vector<double>> prices;  // coupling-constraint duals
  std::vector<station::StationDecision> decisions;
  double objective = 0.0;  // sum_i (C_b + C_ev) + C_bus1 + C_loss
};

/// Single convex program over all stations and the network with the bus
/// coupling written explicitly; its duals are the locational prices.
CentralizedResult solve_centralized(const SystemModel& sys);

struct BaselineResult {
  SettlementReport settlement;
  grid::NetworkState state;
  std::vector<station::StationDecision> decisions;
};

/// Uniform-price regime: stations trade only with the utility at the
/// network's buy/sell tariffs; the DSO then clears flows with those trades
/// pinned.
BaselineResult run_baseline(const SystemModel& sys);

}  // namespace evcoord::coord
