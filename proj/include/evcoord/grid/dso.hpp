#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evcoord/conic/solve.hpp"
#include "evcoord/grid/network.hpp"

namespace evcoord::grid {

/// Variable handles for one slot of the branch-flow model inside a program.
struct SlotVars {
  std::vector<conic::VariableRef> v;        // per bus
  std::vector<conic::VariableRef> p_flow, q_flow, l_sq;  // per line
  conic::VariableRef p1_buy, p1_sell;
  std::map<std::string, conic::VariableRef> station_p;  // pu, consumption-positive
};

/// Appends one slot's relaxed branch-flow constraints. Station buses carry a
/// free injection variable (or a pinned value when `fixed_station_pu` is
/// given); other non-slack buses carry their configured loads.
SlotVars append_network_slot(conic::ConicProgram& prog, const NetworkModel& net, int t,
                             const std::map<std::string, double>* fixed_station_pu = nullptr);

/// Adds the slot's share of C_bus1 + C_loss in dollars.
void add_network_slot_costs(conic::ConicProgram& prog, const NetworkModel& net, const SlotVars& sv,
                            int t);

/// Copies one solved slot into the state (voltages, flows, injections, slack).
void read_network_slot(const conic::Solution& sol, const NetworkModel& net, const SlotVars& sv,
                       int t, NetworkState& state);

/// State container sized for the network; slots start zeroed.
NetworkState empty_state(const NetworkModel& net);

struct DsoResult {
  NetworkState state;
  std::map<std::string, std::vector<double>> schedules_kw;  // p_{n_i}, import-positive
};

/// The DSO's augmented subproblem: minimize C_bus1 + C_loss
///   - sum_i sum_t p_{n_i}(t) lambda_i(t) dt + sum_i sum_t (rho dt/2)(g_i(t) - p_{n_i}(t))^2
/// over the relaxed branch-flow set. Slots decouple and solve concurrently.
DsoResult dso_subproblem(const NetworkModel& net,
                         const std::map<std::string, std::vector<double>>& requests_kw,
                         const std::map<std::string, std::vector<double>>& prices, double rho);

/// Clears the network with station injections pinned (the uniform-price
/// baseline's DSO problem): minimize C_bus1 + C_loss.
NetworkState dso_clear_fixed(const NetworkModel& net,
                             const std::map<std::string, std::vector<double>>& injections_kw);

double cost_bus1(const NetworkState& state, const NetworkModel& net);
double cost_loss(const NetworkState& state, const NetworkModel& net);

/// Per-line, per-slot relaxation gap l - (P^2 + Q^2) / v_sending.
std::vector<std::vector<double>> socp_gap(const NetworkState& state, const NetworkModel& net);

/// Worst violation per constraint family; violations are data, not errors.
struct LimitReport {
  struct Entry {
    double violation = 0.0;
    int slot = -1;
    int element = -1;  // bus index or line position
  };
  Entry p_bounds, q_bounds, l_bounds, v_bounds;
  Entry kcl_p, kcl_q, volt_drop;  // flow-equation residuals
  double max_violation() const;
};

LimitReport audit_limits(const NetworkState& state, const NetworkModel& net);

}  // namespace evcoord::grid
