#include <doctest.h>

#include <cmath>

#include "evcoord/coordination/coordination.hpp"

using namespace evcoord;
using namespace evcoord::coord;

namespace {

// One station on a 2-bus feeder with a varying buy tariff: small enough to
// solve in milliseconds, rich enough to exercise battery arbitrage and
// locational pricing.
SystemModel mini_system(double battery_kwh = 50.0) {
  const int T = 4;
  grid::NetworkConfig cfg;
  cfg.s_base_mva = 1.0;
  cfg.v_base_kv = 12.66;
  cfg.horizon = T;
  cfg.dt_hours = 1.0;
  const double zb = 12.66 * 12.66;
  cfg.buses = {grid::BusSpec{1, 0, 0, 0.94, 1.06}, grid::BusSpec{2, 0, 20.0, 0.90, 1.06}};
  cfg.lines = {grid::LineSpec{1, 2, 0.01 * zb, 0.02 * zb, 0.0}};
  cfg.station_buses = {{"CS1", 2}};
  cfg.lambda_buy = {0.05, 0.20, 0.10, 0.08};
  cfg.lambda_sell.assign(T, 0.01);

  SystemModel sys;
  sys.network = grid::build_network(cfg);

  station::StationParams p;
  p.station_id = "CS1";
  p.bus = 2;
  p.battery_capacity_kwh = battery_kwh;
  p.p_b_chg_max_kw = 20.0;
  p.p_b_dis_max_kw = 20.0;
  p.c_batt = 0.02;
  p.pv_profile_kw = {0.0, 30.0, 10.0, 0.0};
  sys.stations.push_back(p);

  evflex::FlexibilityRegion r;
  r.station_id = "CS1";
  r.horizon = T;
  r.dt_hours = 1.0;
  r.lower_kw = {5.0, 5.0, 0.0, 8.0};
  r.upper_kw = {20.0, 25.0, 15.0, 20.0};
  sys.regions.push_back(r);
  return sys;
}

SystemModel null_system() {
  SystemModel sys = mini_system(0.0);
  sys.stations[0].p_b_chg_max_kw = 0.0;
  sys.stations[0].p_b_dis_max_kw = 0.0;
  sys.stations[0].pv_profile_kw.assign(4, 0.0);
  sys.regions[0].lower_kw.assign(4, 0.0);
  sys.regions[0].upper_kw.assign(4, 0.0);
  for (auto& b : sys.network.buses) {
    b.p_load_pu.assign(4, 0.0);
    b.q_load_pu.assign(4, 0.0);
  }
  return sys;
}

}  // namespace

TEST_SUITE("coordination") {

TEST_CASE("price update follows the imbalance") {
  SUBCASE("worked example") {
    const auto out = price_update({0.10}, {10.0}, {12.0}, 0.05);
    CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("fixed point when request equals schedule") {
    const auto out = price_update({0.07, 0.09}, {4.0, -2.0}, {4.0, -2.0}, 0.05);
    CHECK(out[0] == 0.07);
    CHECK(out[1] == 0.09);
  }
  SUBCASE("oversupply lowers the price") {
    const auto out = price_update({0.10}, {10.0}, {11.0}, 0.05);
    CHECK(out[0] < 0.10);
  }
}

TEST_CASE("residual is the Euclidean norm of the price change") {
  std::map<std::string, std::vector<double>> a{{"CS1", {0.1, 0.2}}, {"CS2", {0.0, 0.0}}};
  auto b = a;
  CHECK(residual(a, b) == 0.0);
  b["CS2"][1] += 3.0;
  CHECK(residual(b, a) == doctest::Approx(3.0));
}

TEST_CASE("null system converges to zero cost") {
  const SystemModel sys = null_system();
  CoordinationOptions opts;
  opts.rho = 5.0;  // rho acts on per-unit powers; the toy needs a coarse one
  const CoordinationResult r = run_coordination(sys, opts);
  CHECK(r.converged);
  CHECK(std::abs(r.settlement.total) <= 0.01);
  for (double g : r.decisions[0].p_g_kw) CHECK(std::abs(g) <= 1e-6);
  CHECK(r.trace.back().residual <= 1e-3);
}

TEST_CASE("distributed run reaches the centralized optimum") {
  const SystemModel sys = mini_system();
  const CentralizedResult central = solve_centralized(sys);
  // Internal consistency: the settlement total is the centralized objective.
  CHECK(central.settlement.total == doctest::Approx(central.objective).epsilon(1e-7));

  // The stopping threshold is an absolute price-change norm, so a toy-sized
  // system needs a tighter delta than the reference scenario's 1e-3.
  CoordinationOptions opts;
  opts.rho = 5.0;
  opts.delta = 1e-6;
  opts.max_iter = 200;
  const CoordinationResult admm = run_coordination(sys, opts);
  REQUIRE(admm.converged);
  CHECK(admm.trace.back().residual <= opts.delta);
  CHECK(std::abs(admm.settlement.total - central.settlement.total) <=
        0.005 * std::abs(central.settlement.total));

  SUBCASE("money conservation is exact") {
    double sum = admm.settlement.dso_c_trade;
    for (const auto& l : admm.settlement.stations) sum += l.c_g;
    CHECK(sum == 0.0);
  }
  SUBCASE("converged prices sit near the coupling duals") {
    for (const auto& [id, lam] : admm.prices) {
      for (size_t t = 0; t < lam.size(); ++t)
        CHECK(std::abs(lam[t] - central.prices.at(id)[t]) <= 0.02);
    }
  }
  SUBCASE("residual trace decays after its transient") {
    const size_t n = admm.trace.size();
    REQUIRE(n >= 4);
    double early = 0.0, late = 0.0;
    for (size_t k = 0; k < n; ++k) {
      const double r = admm.trace[k].residual;
      (k < n / 2 ? early : late) = std::max(k < n / 2 ? early : late, r);
    }
    CHECK(late <= early + 1e-12);
  }
  SUBCASE("dispatches close the stage-1 loop") {
    REQUIRE(admm.dispatches.size() == 1);
    // The hand-made region has no boundary schedules, so disaggregation is
    // skipped for it elsewhere; here we only check the aggregate copy.
    CHECK(admm.dispatches[0].aggregate_kw.size() == 4);
  }
}

TEST_CASE("the settled point does not depend on the penalty parameter") {
  const SystemModel sys = mini_system();
  CoordinationOptions a, b;
  a.rho = 5.0;
  b.rho = 2.5;
  a.delta = b.delta = 1e-6;
  a.max_iter = b.max_iter = 500;
  const CoordinationResult ra = run_coordination(sys, a);
  const CoordinationResult rb = run_coordination(sys, b);
  REQUIRE(ra.converged);
  REQUIRE(rb.converged);
  CHECK(std::abs(ra.settlement.total - rb.settlement.total) <=
        0.005 * std::abs(ra.settlement.total));
}

TEST_CASE("starting from the centralized solution is already converged") {
  const SystemModel sys = mini_system();
  const CentralizedResult central = solve_centralized(sys);
  CoordinationOptions opts;
  opts.rho = 5.0;
  opts.max_iter = 1;
  opts.initial_prices = central.prices;
  for (size_t i = 0; i < sys.stations.size(); ++i)
    opts.initial_schedules_kw[sys.stations[i].station_id] = central.decisions[i].p_g_kw;
  const CoordinationResult r = run_coordination(sys, opts);
  CHECK(r.trace.front().residual <= 1e-3);
  CHECK(r.converged);
}

TEST_CASE("baseline is never cheaper than the centralized optimum") {
  const SystemModel sys = mini_system();
  const BaselineResult base = run_baseline(sys);
  const CentralizedResult central = solve_centralized(sys);
  CHECK(central.settlement.total <= base.settlement.total + 1e-6);

  double sum = base.settlement.dso_c_trade;
  for (const auto& l : base.settlement.stations) sum += l.c_g;
  CHECK(sum == 0.0);
}

}  // TEST_SUITE
