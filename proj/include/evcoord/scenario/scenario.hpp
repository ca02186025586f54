#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evcoord/common/rng.hpp"
#include "evcoord/coordination/coordination.hpp"
#include "evcoord/evflex/fleet.hpp"
#include "evcoord/grid/network.hpp"
#include "evcoord/station/station.hpp"

namespace evcoord::scenario {

struct ScenarioConfig {
  int horizon = 24;
  double dt_hours = 1.0;
  std::uint64_t seed = 1;
  double w = 0.01;
  double rho = 0.05;
  double delta = 1e-3;
  int max_iter = 200;
  bool v2g = true;
  double s_base_mva = 1.0;
  double v_base_kv = 12.66;
  double base_load_scale = 0.6;
  double station_p_min_kw = -350.0;
  double station_p_max_kw = 350.0;
};

/// Fully materialized inputs of one experiment.
struct Scenario {
  ScenarioConfig cfg;
  std::vector<evflex::StationFleet> fleets;      // aligned with stations
  std::vector<station::StationParams> stations;  // bus and PV profile filled
  std::vector<grid::BusSpec> buses;
  std::vector<grid::LineSpec> lines;
  std::vector<double> lambda_buy, lambda_sell, pi_loss;
};

struct FleetGenBlock {
  int count = 0;
  int arrive_hour = 0;  // clock hours; slot = hour + 1
  int depart_hour = 0;
};

struct StationGenSpec {
  std::string id;
  int bus = 0;
  std::vector<FleetGenBlock> blocks;
  double battery_kwh = 0.0;
  double battery_kw = 0.0;
  double pv_peak_kw = 0.0;
};

struct GeneratorSpec {
  std::vector<StationGenSpec> stations;
  int n_chargers = 20;
  double ev_capacity_kwh = 40.0;
  double ev_p_chg_kw = 6.6;
  double soc_init = 0.2, soc_req = 0.5, soc_min = 0.1, soc_max = 0.9;
  double eta = 0.95;
  double c_batt = 0.1, c_dissat = 0.1;
  double p_g_limit_kw = 300.0;
  double pv_jitter = 0.1;
  /// Seeded perturbation of EV needs and PV scale, for scenario families.
  bool jitter = false;

  /// Four stations with mild-to-severe charging patterns, batteries of
  /// 100/150/200/200 kWh and the EV parameters of the reference setup.
  static GeneratorSpec reference(bool far_stations = false);
};

std::vector<double> generate_pv_profile(double peak_kw, int horizon, common::Rng rng,
                                        double jitter_frac);

/// Two-peak diurnal buy tariff in [0.05, 0.20] $/kWh.
std::vector<double> synthetic_buy_price_profile(int horizon);

/// Builds the full scenario from a generator spec; network bus/line specs
/// are read from the given CSV pair. Deterministic in (spec, cfg, files).
Scenario generate_scenario(const GeneratorSpec& spec, const ScenarioConfig& cfg,
                           const std::string& buses_csv, const std::string& lines_csv);

/// Writes every input file plus a ready-to-run config.toml into dir.
void write_scenario(const Scenario& s, const std::string& dir);

/// Loads a scenario from a config file; data files resolve relative to it.
/// A [generator] section may replace the fleet/pv/price files; the seed
/// override reaches the generator.
Scenario load_scenario(const std::string& config_path,
                       std::optional<std::uint64_t> seed_override = {});

grid::NetworkModel build_network_model(const Scenario& s);

/// Runs stage 1 for every fleet and assembles the stage-2 system model.
coord::SystemModel build_system(const Scenario& s, double w);

}  // namespace evcoord::scenario
