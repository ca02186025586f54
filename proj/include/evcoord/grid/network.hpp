#pragma once

#include <map>
#include <string>
#include <vector>

namespace evcoord::grid {

/// Raw network description in physical units.
struct BusSpec {
  int index = 0;  // 1-based; bus 1 is the slack
  double p_load_kw = 0.0;
  double q_load_kvar = 0.0;
  double v_min_pu = 0.94;
  double v_max_pu = 1.06;
};

struct LineSpec {
  int from = 0, to = 0;
  double r_ohm = 0.0, x_ohm = 0.0;
  double rating_a = 0.0;  // 0 = unlimited
};

struct NetworkConfig {
  double s_base_mva = 1.0;
  double v_base_kv = 12.66;
  std::vector<BusSpec> buses;
  std::vector<LineSpec> lines;
  int horizon = 24;
  double dt_hours = 1.0;
  /// Base loads are scaled by load_scale and, when given, a per-slot shape.
  double load_scale = 1.0;
  std::vector<double> load_shape;  // empty = flat
  std::map<std::string, int> station_buses;  // station id -> bus index
  double station_p_min_kw = -350.0;
  double station_p_max_kw = 350.0;
  std::vector<double> lambda_buy;   // $/kWh, per slot
  std::vector<double> lambda_sell;  // must stay below lambda_buy
  std::vector<double> pi_loss;      // loss price; empty = lambda_buy
};

struct Bus {
  int index = 0;
  std::vector<double> p_load_pu;  // consumption-positive, per slot
  std::vector<double> q_load_pu;
  double v_min_sq = 0.0, v_max_sq = 0.0;
  double p_min_pu = 0.0, p_max_pu = 0.0;  // injection bounds; binding at station buses
  double q_min_pu = -10.0, q_max_pu = 10.0;
};

struct Line {
  int from = 0, to = 0;  // oriented parent -> child
  double r_pu = 0.0, x_pu = 0.0;
  double l_max_pu = 0.0;  // current-squared cap; huge sentinel when unrated
};

/// Radial per-unit model rooted at the slack bus, with tariffs attached.
struct NetworkModel {
  double s_base_mva = 1.0;
  double v_base_kv = 12.66;
  int horizon = 24;
  double dt_hours = 1.0;
  std::vector<Bus> buses;   // position 0 is the slack
  std::vector<Line> lines;  // oriented away from the slack
  std::vector<int> parent_line;              // per bus position; -1 at the slack
  std::vector<std::vector<int>> child_lines; // per bus position
  std::map<std::string, int> station_bus_pos;  // station id -> bus position
  std::vector<double> lambda_buy, lambda_sell, pi_loss;

  double s_base_kw() const { return s_base_mva * 1000.0; }
  int bus_position(int bus_index) const;  // 1-based index -> position; throws if absent
};

/// Validates radiality and balance of the description, orients lines away
/// from the slack, and converts everything to per-unit.
NetworkModel build_network(const NetworkConfig& config);

/// Flow state over the horizon; per-unit throughout.
struct NetworkState {
  int horizon = 0;
  std::vector<std::vector<double>> v_sq;    // [t][bus]
  std::vector<std::vector<double>> p_bus;   // [t][bus] consumption-positive
  std::vector<std::vector<double>> q_bus;   // [t][bus]
  std::vector<std::vector<double>> p_flow;  // [t][line]
  std::vector<std::vector<double>> q_flow;  // [t][line]
  std::vector<std::vector<double>> l_sq;    // [t][line]
  std::vector<double> p1_buy, p1_sell;      // slack exchange per slot
};

}  // namespace evcoord::grid
