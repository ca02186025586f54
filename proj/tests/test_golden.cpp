#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "evcoord/scenario/csv.hpp"
#include "evcoord/scenario/reports.hpp"
#include "evcoord/scenario/scenario.hpp"

#ifndef EVCOORD_DATA_DIR
#define EVCOORD_DATA_DIR "data"
#endif
#ifndef EVCOORD_GOLDEN_DIR
#define EVCOORD_GOLDEN_DIR "tests/golden"
#endif

// Archived reference-scenario artifacts. Regenerate deliberately with
//   EVCOORD_REGEN_GOLDEN=1 ./unit_tests -tc="golden*"
// after a change that is supposed to move them.

using namespace evcoord;
using namespace evcoord::scenario;

namespace {

namespace fs = std::filesystem;

bool regen() { return std::getenv("EVCOORD_REGEN_GOLDEN") != nullptr; }

Scenario reference_scenario() {
  GeneratorSpec spec = GeneratorSpec::reference();
  ScenarioConfig cfg;
  cfg.seed = 1;
  return generate_scenario(spec, cfg, std::string(EVCOORD_DATA_DIR) + "/ieee33_buses.csv",
                           std::string(EVCOORD_DATA_DIR) + "/ieee33_lines.csv");
}

void compare_csv(const fs::path& golden, const fs::path& fresh, double tol) {
  const CsvTable a = read_csv(golden.string());
  const CsvTable b = read_csv(fresh.string());
  REQUIRE(a.header == b.header);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t r = 0; r < a.rows.size(); ++r)
    for (size_t c = 0; c < a.header.size(); ++c) {
      const std::string& xs = a.rows[r][c];
      const std::string& ys = b.rows[r][c];
      double x = 0.0, y = 0.0;
      try {
        x = a.num(r, static_cast<int>(c));
        y = b.num(r, static_cast<int>(c));
      } catch (const std::exception&) {
        CHECK(xs == ys);  // non-numeric cells must match exactly
        continue;
      }
      INFO(golden.filename().string(), " row ", r, " col ", a.header[c]);
      CHECK(std::abs(x - y) <= tol);
    }
}

}  // namespace

TEST_SUITE("golden") {

TEST_CASE("golden: CS1 flexibility envelope") {
  const Scenario s = reference_scenario();
  const evflex::FlexibilityRegion region = evflex::compute_flexibility(s.fleets[0], s.cfg.w);
  const fs::path golden = fs::path(EVCOORD_GOLDEN_DIR) / "cs1_envelope.csv";
  const fs::path fresh = fs::temp_directory_path() / "cs1_envelope_fresh.csv";
  write_envelopes(fresh.string(), {region});
  if (regen()) {
    fs::create_directories(golden.parent_path());
    fs::copy_file(fresh, golden, fs::copy_options::overwrite_existing);
    MESSAGE("regenerated ", golden.string());
    return;
  }
  compare_csv(golden, fresh, 1e-4);
  // Shape sanity: flexibility exists only while vehicles are parked.
  for (int t = 0; t < 6; ++t) CHECK(region.upper_kw[t] == doctest::Approx(0.0).epsilon(1e-9));
  double peak_width = 0.0;
  for (int t = 0; t < region.horizon; ++t)
    peak_width = std::max(peak_width, region.upper_kw[t] - region.lower_kw[t]);
  CHECK(peak_width > 10.0);
}

TEST_CASE("golden: CS1 first-iteration decision") {
  const Scenario s = reference_scenario();
  const evflex::FlexibilityRegion region = evflex::compute_flexibility(s.fleets[0], s.cfg.w);
  const std::vector<double> zeros(static_cast<size_t>(s.cfg.horizon), 0.0);
  const double rho_internal = s.cfg.rho / (s.cfg.s_base_mva * 1000.0);
  const station::StationDecision d =
      station::solve_station_subproblem(s.stations[0], region, zeros, zeros, rho_internal);

  coord::SystemModel shim;
  shim.network.horizon = s.cfg.horizon;
  shim.stations = {s.stations[0]};
  const fs::path golden = fs::path(EVCOORD_GOLDEN_DIR) / "cs1_first_iteration.csv";
  const fs::path fresh = fs::temp_directory_path() / "cs1_first_iteration_fresh.csv";
  write_decisions(fresh.string(), shim, {d});
  if (regen()) {
    fs::create_directories(golden.parent_path());
    fs::copy_file(fresh, golden, fs::copy_options::overwrite_existing);
    MESSAGE("regenerated ", golden.string());
    return;
  }
  compare_csv(golden, fresh, 2e-4);
}

TEST_CASE("golden: reference network state after one iteration") {
  const Scenario s = reference_scenario();
  const coord::SystemModel sys = build_system(s, s.cfg.w);
  coord::CoordinationOptions opts;
  opts.rho = s.cfg.rho;
  opts.delta = s.cfg.delta;
  opts.max_iter = 1;
  const coord::CoordinationResult run = coord::run_coordination(sys, opts);

  const fs::path golden = fs::path(EVCOORD_GOLDEN_DIR) / "ref_iter1_state";
  const fs::path fresh = fs::temp_directory_path() / "ref_iter1_state";
  write_state(fresh.string(), sys.network, run.state);
  if (regen()) {
    fs::create_directories(fs::path(EVCOORD_GOLDEN_DIR));
    for (const char* suffix : {"_bus.csv", "_line.csv", "_slack.csv"})
      fs::copy_file(fresh.string() + suffix, golden.string() + suffix,
                    fs::copy_options::overwrite_existing);
    MESSAGE("regenerated ", golden.string());
    return;
  }
  for (const char* suffix : {"_bus.csv", "_line.csv", "_slack.csv"})
    compare_csv(golden.string() + suffix, fresh.string() + suffix, 2e-5);
}

}  // TEST_SUITE
