#include <doctest.h>

#include <cmath>

#include "evcoord/common/rng.hpp"
#include "evcoord/evflex/flexibility.hpp"

using namespace evcoord;
using namespace evcoord::evflex;

namespace {

EvSession session(std::string id, int ta, int td, double ini, double req, double cap, double pchg,
                  double smin = 0.1, double smax = 0.9) {
  EvSession s;
  s.id = std::move(id);
  s.t_arrive = ta;
  s.t_depart = td;
  s.soc_init = ini;
  s.soc_req = req;
  s.soc_min = smin;
  s.soc_max = smax;
  s.capacity_kwh = cap;
  s.p_chg_kw = pchg;
  return s;
}

StationFleet small_fleet() {
  StationFleet f;
  f.station_id = "CS";
  f.horizon = 8;
  f.n_chargers = 2;
  f.sessions = {session("ev1", 2, 7, 0.2, 0.5, 40.0, 6.6),
                session("ev2", 1, 6, 0.3, 0.6, 30.0, 6.6),
                session("ev3", 3, 8, 0.2, 0.4, 40.0, 6.6)};
  return f;
}

}  // namespace

TEST_SUITE("evflex") {

TEST_CASE("presence window is half-open") {
  const EvSession s = session("v", 6, 22, 0.2, 0.5, 40, 6.6);
  CHECK(presence(s, 6) == 1);
  CHECK(presence(s, 22) == 0);
  CHECK(presence(s, 3) == 0);
  CHECK(presence(s, 21) == 1);
}

TEST_CASE("fleet validation") {
  StationFleet f;
  f.station_id = "CS";
  f.horizon = 24;
  f.n_chargers = 1;
  SUBCASE("unservable requirement is rejected with the session id") {
    f.sessions = {session("ev42", 10, 12, 0.1, 0.9, 40.0, 6.6)};  // needs 32 kWh in 2 h
    CHECK_THROWS_WITH_AS(f.validate(), doctest::Contains("ev42"), std::invalid_argument);
  }
  SUBCASE("arrival must precede departure") {
    f.sessions = {session("evx", 12, 12, 0.2, 0.2, 40.0, 6.6)};
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  }
}

TEST_CASE("program shape by construction") {
  StationFleet f;
  f.station_id = "CS";
  f.horizon = 24;
  f.n_chargers = 20;
  f.sessions = {session("ev1", 7, 23, 0.2, 0.5, 40.0, 6.6)};

  SUBCASE("one EV: 2*(24 power + 24 status + 24 soc) + 2*24 aggregates") {
    const FlexModel m = build_flex_program(f, 0.01);
    CHECK(m.program.num_variables() == 2 * 3 * 24 + 2 * 24);
  }
  SUBCASE("w = 0 leaves the objective purely linear") {
    const FlexModel m = build_flex_program(f, 0.0);
    CHECK(m.program.quadratic_cost().empty());
  }
  SUBCASE("charger-count rows: one per slot per family with rhs N_chg") {
    StationFleet big = f;
    big.sessions.clear();
    for (int i = 0; i < 30; ++i)
      big.sessions.push_back(session("ev" + std::to_string(i), 7, 23, 0.2, 0.5, 40.0, 6.6));
    const FlexModel m = build_flex_program(big, 0.01);
    int rows = 0;
    for (const auto& r : m.program.inequalities())
      if (r.terms.size() == 30 && r.rhs == 20.0) ++rows;
    CHECK(rows == 2 * 24);
  }
}

TEST_CASE("zero-need EV keeps the lower envelope at zero") {
  StationFleet f;
  f.station_id = "CS";
  f.horizon = 10;
  f.n_chargers = 1;
  f.sessions = {session("ev1", 2, 9, 0.5, 0.5, 40.0, 6.6)};

  SUBCASE("charge-only fleet: pointwise zero") {
    f.v2g = false;
    const FlexibilityRegion r = compute_flexibility(f, 0.01);
    for (int t = 0; t < f.horizon; ++t) {
      CHECK(std::abs(r.lower_kw[t]) <= 1e-6);
      CHECK(r.upper_kw[t] >= -1e-9);
    }
    CHECK(r.total_width_kw() > 1.0);
  }
  SUBCASE("two-sided bound: zero net energy on the lower trajectory") {
    // With discharging allowed the lower trajectory is only pinned up to
    // net-zero shifts; the committed energy is what must vanish.
    const FlexibilityRegion r = compute_flexibility(f, 0.01);
    double net_kwh = 0.0;
    for (int t = 0; t < f.horizon; ++t) net_kwh += r.lower_kw[t] * f.dt_hours;
    CHECK(std::abs(net_kwh) <= 1e-5);
  }
}

TEST_CASE("energy cap binds the upper envelope") {
  // 6-slot window, headroom (0.9-0.2)*40 = 28 kWh, need (0.5-0.2)*40 = 12 kWh.
  StationFleet f;
  f.station_id = "CS";
  f.horizon = 8;
  f.n_chargers = 1;
  f.sessions = {session("ev1", 2, 8, 0.2, 0.5, 40.0, 6.6)};
  for (const double w : {0.0, 0.01}) {
    const FlexibilityRegion r = compute_flexibility(f, w);
    double up_kwh = 0.0, lo_kwh = 0.0;
    for (int t = 0; t < f.horizon; ++t) {
      up_kwh += r.upper_kw[t] * f.dt_hours;
      lo_kwh += r.lower_kw[t] * f.dt_hours;
    }
    CHECK(up_kwh == doctest::Approx(28.0).epsilon(1e-5));
    CHECK(lo_kwh == doctest::Approx(12.0).epsilon(1e-5));
  }
}

TEST_CASE("disaggregation endpoints and midpoint") {
  const StationFleet f = small_fleet();
  const FlexibilityRegion r = compute_flexibility(f, 0.01);

  SUBCASE("upper trajectory returns the upper boundary schedules") {
    const EvDispatch d = disaggregate(r, r.upper_kw);
    for (size_t v = 0; v < d.evs.size(); ++v)
      for (int t = 0; t < f.horizon; ++t)
        CHECK(d.evs[v].power_kw[t] == doctest::Approx(r.upper_schedules[v].power_kw[t]).epsilon(1e-9));
    CHECK(validate_dispatch(f, d, 1e-6).ok(1e-6));
  }
  SUBCASE("lower trajectory returns the lower boundary schedules") {
    const EvDispatch d = disaggregate(r, r.lower_kw);
    for (size_t v = 0; v < d.evs.size(); ++v)
      for (int t = 0; t < f.horizon; ++t)
        CHECK(d.evs[v].power_kw[t] == doctest::Approx(r.lower_schedules[v].power_kw[t]).epsilon(1e-9));
  }
  SUBCASE("midpoint dispatch validates cleanly") {
    std::vector<double> mid(f.horizon);
    for (int t = 0; t < f.horizon; ++t) mid[t] = 0.5 * (r.upper_kw[t] + r.lower_kw[t]);
    const ViolationReport rep = validate_dispatch(f, disaggregate(r, mid), 1e-6);
    INFO(rep.summary());
    CHECK(rep.max_violation() <= 1e-7);
  }
  SUBCASE("outside the region names the offending slot") {
    std::vector<double> bad = r.upper_kw;
    bad[3] += 1.0;
    CHECK_THROWS_WITH_AS(disaggregate(r, bad), doctest::Contains("slot 4"), std::domain_error);
  }
  SUBCASE("boundary schedules share one status sequence") {
    for (size_t v = 0; v < r.upper_schedules.size(); ++v)
      for (int t = 0; t < f.horizon; ++t)
        CHECK(std::abs(r.upper_schedules[v].status[t] - r.lower_schedules[v].status[t]) <= 1e-6);
  }
}

TEST_CASE("validator flags constructed violations") {
  StationFleet f;
  f.station_id = "CS";
  f.horizon = 3;
  f.n_chargers = 20;
  f.sessions = {session("ev1", 1, 3, 0.2, 0.3, 40.0, 6.6)};

  SUBCASE("charging at twice the rated power") {
    EvDispatch d;
    d.evs.resize(1);
    d.evs[0].power_kw = {2 * 6.6, 0.0, 0.0};
    d.evs[0].status = {1.0, 0.0, 0.0};
    d.evs[0].soc = {0.2, 0.2 + 13.2 / 40.0, 0.53};
    const ViolationReport rep = validate_dispatch(f, d, 1e-6);
    CHECK(rep.power_bounds.violation == doctest::Approx(6.6));
    CHECK(rep.power_bounds.ev == "ev1");
  }
  SUBCASE("25 simultaneous vehicles on 20 chargers") {
    StationFleet crowd;
    crowd.station_id = "CS";
    crowd.horizon = 2;
    crowd.n_chargers = 20;
    EvDispatch d;
    for (int i = 0; i < 25; ++i) {
      crowd.sessions.push_back(session("ev" + std::to_string(i), 1, 2, 0.2, 0.2, 40.0, 6.6));
      EvSchedule s;
      s.power_kw = {6.6, 0.0};
      s.status = {1.0, 0.0};
      s.soc = {0.2, 0.2 + 6.6 / 40.0};
      d.evs.push_back(s);
    }
    const ViolationReport rep = validate_dispatch(crowd, d, 1e-6);
    CHECK(rep.charger_count.violation == doctest::Approx(5.0));
  }
}

TEST_CASE("brute-force oracle") {
  SUBCASE("frozen tiny case: one EV needing one full-power slot") {
    // E=12 kWh, init 0.2 -> req 0.7 needs 6 kWh = exactly one full 6 kW slot.
    StationFleet f;
    f.station_id = "CS";
    f.horizon = 3;
    f.n_chargers = 1;
    f.v2g = false;
    f.sessions = {session("ev1", 1, 3, 0.2, 0.7, 12.0, 6.0, 0.1, 1.0)};
    const FlexibilityRegion r = brute_force_region(f, 6.0);
    CHECK(r.upper_kw == std::vector<double>{6.0, 6.0, 0.0});
    CHECK(r.lower_kw == std::vector<double>{0.0, 0.0, 0.0});
  }
  SUBCASE("zero EVs gives all-zero envelopes") {
    StationFleet f;
    f.station_id = "CS";
    f.horizon = 3;
    f.n_chargers = 1;
    const FlexibilityRegion r = brute_force_region(f, 1.0);
    CHECK(r.upper_kw == std::vector<double>(3, 0.0));
    CHECK(r.lower_kw == std::vector<double>(3, 0.0));
  }
  SUBCASE("two EVs, one charger: per-slot upper below one charger's rating") {
    StationFleet f;
    f.station_id = "CS";
    f.horizon = 4;
    f.n_chargers = 1;
    f.v2g = false;
    f.sessions = {session("a", 1, 4, 0.4, 0.5, 24.0, 6.0, 0.1, 1.0),
                  session("b", 2, 4, 0.4, 0.5, 24.0, 6.0, 0.1, 1.0)};
    const FlexibilityRegion r = brute_force_region(f, 3.0);
    for (double u : r.upper_kw) CHECK(u <= 6.0 + 1e-9);
  }
  SUBCASE("stage-1 box sits inside the enumerated per-slot extremes") {
    // The enumeration bounds each slot independently (outer box); the
    // stage-1 region is an inner box of the same flexibility set, so it
    // must fit inside up to one discretization step.
    const double step = 1.0;
    StationFleet f;
    f.station_id = "CS";
    f.horizon = 4;
    f.n_chargers = 2;
    f.sessions = {session("a", 1, 4, 0.3, 0.5, 20.0, 6.0, 0.1, 1.0),
                  session("b", 2, 4, 0.4, 0.6, 16.0, 4.0, 0.1, 1.0)};
    const FlexibilityRegion oracle = brute_force_region(f, step);
    const FlexibilityRegion flex = compute_flexibility(f, 0.0);
    for (int t = 0; t < f.horizon; ++t) {
      CHECK(flex.upper_kw[t] <= oracle.upper_kw[t] + step + 1e-6);
      CHECK(flex.lower_kw[t] >= oracle.lower_kw[t] - step - 1e-6);
      CHECK(flex.upper_kw[t] >= flex.lower_kw[t] - 1e-9);
    }
  }
}

TEST_CASE("sampled in-region trajectories always disaggregate feasibly") {
  const StationFleet f = small_fleet();
  const FlexibilityRegion r = compute_flexibility(f, 0.01);
  common::Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> traj(f.horizon);
    for (int t = 0; t < f.horizon; ++t)
      traj[t] = rng.uniform(r.lower_kw[t], r.upper_kw[t]);
    const ViolationReport rep = validate_dispatch(f, disaggregate(r, traj), 1e-6);
    INFO("trial ", trial, ": ", rep.summary());
    CHECK(rep.max_violation() <= 1e-6);
  }
}

TEST_CASE("evenness weight can only shrink the total width") {
  const StationFleet f = small_fleet();
  const double w0 = compute_flexibility(f, 0.0).total_width_kw();
  const double w1 = compute_flexibility(f, 0.01).total_width_kw();
  CHECK(w1 <= w0 + 1e-6);
}

}  // TEST_SUITE
