#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "evcoord/scenario/csv.hpp"
#include "evcoord/scenario/reports.hpp"
#include "evcoord/scenario/scenario.hpp"

namespace fs = std::filesystem;
using namespace evcoord;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitComputation = 4;

struct RunOpts {
  std::string config;
  std::string out_dir = "out";
  double w = -1.0, rho = -1.0, delta = -1.0;
  int max_iter = -1;
  long long seed = -1;
};

void add_run_options(CLI::App* cmd, RunOpts& o, bool with_solver_knobs = true) {
  cmd->add_option("--config", o.config, "scenario config file (.toml)")->required();
  cmd->add_option("--out-dir", o.out_dir, "artifact directory");
  cmd->add_option("--seed", o.seed, "override the scenario seed");
  cmd->add_option("--w", o.w, "flexibility evenness weight override");
  if (with_solver_knobs) {
    cmd->add_option("--rho", o.rho, "coordination penalty parameter override");
    cmd->add_option("--delta", o.delta, "stopping tolerance override");
    cmd->add_option("--max-iter", o.max_iter, "iteration cap override");
  }
}

scenario::Scenario load_with_overrides(const RunOpts& o) {
  std::optional<std::uint64_t> seed;
  if (o.seed >= 0) seed = static_cast<std::uint64_t>(o.seed);
  scenario::Scenario s = scenario::load_scenario(o.config, seed);
  if (o.w >= 0.0) s.cfg.w = o.w;
  if (o.rho > 0.0) s.cfg.rho = o.rho;
  if (o.delta > 0.0) s.cfg.delta = o.delta;
  if (o.max_iter > 0) s.cfg.max_iter = o.max_iter;
  return s;
}

coord::CoordinationOptions coordination_options(const scenario::Scenario& s) {
  coord::CoordinationOptions o;
  o.rho = s.cfg.rho;
  o.delta = s.cfg.delta;
  o.max_iter = s.cfg.max_iter;
  return o;
}

void write_summary(const std::string& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

json settlement_json(const coord::SettlementReport& rep) {
  json j;
  for (const auto& l : rep.stations)
    j["stations"][l.station_id] = {{"c_g", l.c_g}, {"c_b", l.c_b}, {"c_ev", l.c_ev}, {"c_i", l.total}};
  j["stations_total"] = rep.stations_total;
  j["dso"] = {{"c_bus1", rep.dso_c_bus1},
              {"c_loss", rep.dso_c_loss},
              {"c_trade", rep.dso_c_trade},
              {"c_dso", rep.dso_total}};
  j["total"] = rep.total;
  return j;
}

double max_abs_gap(const std::vector<std::vector<double>>& gaps) {
  double m = 0.0;
  for (const auto& row : gaps)
    for (double g : row) m = std::max(m, std::abs(g));
  return m;
}

void write_coordination_artifacts(const fs::path& dir, const coord::SystemModel& sys,
                                  const coord::CoordinationResult& run) {
  scenario::write_trace((dir / "trace.csv").string(), sys, run.trace);
  scenario::write_settlement((dir / "settlement.csv").string(), run.settlement);
  scenario::write_prices((dir / "prices.csv").string(), sys, run.prices);
  scenario::write_losses((dir / "losses.csv").string(), sys.network, run.state);
  scenario::write_state((dir / "state").string(), sys.network, run.state);
  scenario::write_decisions((dir / "decisions.csv").string(), sys, run.decisions);
  scenario::write_dispatches((dir / "dispatches.csv").string(), sys, run.dispatches);
}

int cmd_generate(long long seed, const std::string& out_dir, const std::string& data_dir,
                 bool jitter, bool far_stations) {
  scenario::GeneratorSpec spec = scenario::GeneratorSpec::reference(far_stations);
  spec.jitter = jitter;
  scenario::ScenarioConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(seed);
  const scenario::Scenario s = scenario::generate_scenario(
      spec, cfg, (fs::path(data_dir) / "ieee33_buses.csv").string(),
      (fs::path(data_dir) / "ieee33_lines.csv").string());
  scenario::write_scenario(s, out_dir);
  std::printf("wrote scenario (seed %lld) to %s\n", seed, out_dir.c_str());
  return kExitOk;
}

int cmd_flex(const RunOpts& o) {
  const scenario::Scenario s = load_with_overrides(o);
  fs::create_directories(o.out_dir);
  std::vector<evflex::FlexibilityRegion> regions;
  for (const auto& fleet : s.fleets) regions.push_back(evflex::compute_flexibility(fleet, s.cfg.w));
  scenario::write_envelopes((fs::path(o.out_dir) / "envelopes.csv").string(), regions);
  double width = 0.0;
  for (const auto& r : regions) width += r.total_width_kw();
  json j{{"command", "flex"}, {"w", s.cfg.w}, {"total_width_kw", width}};
  write_summary((fs::path(o.out_dir) / "summary.json").string(), j);
  std::printf("stage-1 envelopes for %zu stations, total width %.3f kW\n", regions.size(), width);
  return kExitOk;
}

int cmd_disaggregate(const RunOpts& o, const std::string& station_id,
                     const std::string& trajectory_file) {
  const scenario::Scenario s = load_with_overrides(o);
  fs::create_directories(o.out_dir);
  size_t pos = s.fleets.size();
  for (size_t i = 0; i < s.fleets.size(); ++i)
    if (s.fleets[i].station_id == station_id) pos = i;
  if (pos == s.fleets.size()) throw CLI::ValidationError("--station", "unknown station " + station_id);

  const scenario::CsvTable tb = scenario::read_csv(trajectory_file);
  std::vector<double> traj(static_cast<size_t>(s.cfg.horizon), 0.0);
  for (size_t r = 0; r < tb.rows.size(); ++r) {
    const int t = static_cast<int>(tb.num(r, tb.column("t")));
    if (t < 1 || t > s.cfg.horizon) throw std::runtime_error("trajectory slot outside horizon");
    traj[static_cast<size_t>(t - 1)] = tb.num(r, tb.column("p_kw"));
  }

  const evflex::FlexibilityRegion region = evflex::compute_flexibility(s.fleets[pos], s.cfg.w);
  const evflex::EvDispatch dispatch = evflex::disaggregate(region, traj);
  const evflex::ViolationReport rep = evflex::validate_dispatch(s.fleets[pos], dispatch, 1e-6);

  coord::SystemModel shim;  // reuse the dispatch writer's station naming
  shim.network.horizon = s.cfg.horizon;
  shim.stations = {s.stations[pos]};
  scenario::write_dispatches((fs::path(o.out_dir) / ("dispatch_" + station_id + ".csv")).string(),
                             shim, {dispatch});
  scenario::write_violations((fs::path(o.out_dir) / ("violations_" + station_id + ".csv")).string(),
                             rep);
  std::printf("disaggregated %s: max violation %.3e\n", station_id.c_str(), rep.max_violation());
  return kExitOk;
}

int cmd_coordinate(const RunOpts& o) {
  const scenario::Scenario s = load_with_overrides(o);
  const coord::SystemModel sys = scenario::build_system(s, s.cfg.w);
  const coord::CoordinationResult run = coord::run_coordination(sys, coordination_options(s));
  fs::create_directories(o.out_dir);
  write_coordination_artifacts(o.out_dir, sys, run);
  json j{{"command", "coordinate"},
         {"converged", run.converged},
         {"iterations", run.iterations},
         {"residual", run.trace.empty() ? 0.0 : run.trace.back().residual},
         {"max_socp_gap", max_abs_gap(grid::socp_gap(run.state, sys.network))},
         {"max_limit_violation", grid::audit_limits(run.state, sys.network).max_violation()},
         {"settlement", settlement_json(run.settlement)}};
  write_summary((fs::path(o.out_dir) / "summary.json").string(), j);
  std::printf("%s after %d iterations, total cost %.2f\n",
              run.converged ? "converged" : "NOT converged", run.iterations, run.settlement.total);
  return run.converged ? kExitOk : kExitNoConvergence;
}

int cmd_baseline(const RunOpts& o) {
  const scenario::Scenario s = load_with_overrides(o);
  const coord::SystemModel sys = scenario::build_system(s, s.cfg.w);
  const coord::BaselineResult run = coord::run_baseline(sys);
  fs::create_directories(o.out_dir);
  scenario::write_settlement((fs::path(o.out_dir) / "settlement_baseline.csv").string(),
                             run.settlement);
  scenario::write_losses((fs::path(o.out_dir) / "losses_baseline.csv").string(), sys.network,
                         run.state);
  scenario::write_state((fs::path(o.out_dir) / "state_baseline").string(), sys.network, run.state);
  scenario::write_decisions((fs::path(o.out_dir) / "decisions_baseline.csv").string(), sys,
                            run.decisions);
  json j{{"command", "baseline"}, {"settlement", settlement_json(run.settlement)}};
  write_summary((fs::path(o.out_dir) / "summary_baseline.json").string(), j);
  std::printf("baseline total cost %.2f\n", run.settlement.total);
  return kExitOk;
}

int cmd_centralized(const RunOpts& o) {
  const scenario::Scenario s = load_with_overrides(o);
  const coord::SystemModel sys = scenario::build_system(s, s.cfg.w);
  const coord::CentralizedResult run = coord::solve_centralized(sys);
  fs::create_directories(o.out_dir);
  scenario::write_settlement((fs::path(o.out_dir) / "settlement_centralized.csv").string(),
                             run.settlement);
  scenario::write_prices((fs::path(o.out_dir) / "prices_centralized.csv").string(), sys, run.prices);
  scenario::write_state((fs::path(o.out_dir) / "state_centralized").string(), sys.network,
                        run.state);
  json j{{"command", "centralized"},
         {"objective", run.objective},
         {"settlement", settlement_json(run.settlement)}};
  write_summary((fs::path(o.out_dir) / "summary_centralized.json").string(), j);
  std::printf("centralized total cost %.2f\n", run.settlement.total);
  return kExitOk;
}

int cmd_compare(const RunOpts& o) {
  const scenario::Scenario s = load_with_overrides(o);
  const coord::SystemModel sys = scenario::build_system(s, s.cfg.w);
  const coord::CoordinationResult run = coord::run_coordination(sys, coordination_options(s));
  const coord::BaselineResult base = coord::run_baseline(sys);
  fs::create_directories(o.out_dir);
  write_coordination_artifacts(o.out_dir, sys, run);
  scenario::write_settlement((fs::path(o.out_dir) / "settlement_baseline.csv").string(),
                             base.settlement);
  scenario::write_comparison((fs::path(o.out_dir) / "comparison.csv").string(), base.settlement,
                             run.settlement);
  const double reduction =
      (base.settlement.total - run.settlement.total) / base.settlement.total;
  json j{{"command", "compare"},
         {"converged", run.converged},
         {"iterations", run.iterations},
         {"baseline_total", base.settlement.total},
         {"proposed_total", run.settlement.total},
         {"reduction", reduction}};
  write_summary((fs::path(o.out_dir) / "summary.json").string(), j);
  std::printf("baseline %.2f vs proposed %.2f: reduction %.2f%%\n", base.settlement.total,
              run.settlement.total, 100.0 * reduction);
  return run.converged ? kExitOk : kExitNoConvergence;
}

int cmd_audit(const RunOpts& o, const std::string& state_prefix) {
  const scenario::Scenario s = load_with_overrides(o);
  const grid::NetworkModel net = scenario::build_network_model(s);
  const grid::NetworkState st = scenario::read_state(state_prefix, net);
  const auto gaps = grid::socp_gap(st, net);
  const grid::LimitReport rep = grid::audit_limits(st, net);
  fs::create_directories(o.out_dir);
  scenario::CsvWriter w((fs::path(o.out_dir) / "audit.csv").string());
  w.header({"metric", "value", "slot", "element"});
  auto row = [&](const std::string& name, const grid::LimitReport::Entry& e) {
    w.cell(name);
    w.cell(e.violation);
    w.cell(e.slot);
    w.cell(e.element);
    w.end_row();
  };
  w.cell("max_socp_gap");
  w.cell(max_abs_gap(gaps));
  w.cell(-1);
  w.cell(-1);
  w.end_row();
  row("p_bounds", rep.p_bounds);
  row("q_bounds", rep.q_bounds);
  row("l_bounds", rep.l_bounds);
  row("v_bounds", rep.v_bounds);
  row("kcl_p", rep.kcl_p);
  row("kcl_q", rep.kcl_q);
  row("volt_drop", rep.volt_drop);
  std::printf("max socp gap %.3e, max limit violation %.3e\n", max_abs_gap(gaps),
              rep.max_violation());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EV charging-station coordination toolkit"};
  app.require_subcommand(1);

  long long gen_seed = 1;
  std::string gen_out = "scenario";
  std::string gen_data = "data";
  bool gen_jitter = false, gen_far = false;
  CLI::App* generate = app.add_subcommand("generate", "emit a seeded scenario directory");
  generate->add_option("--seed", gen_seed, "scenario seed");
  generate->add_option("--out-dir", gen_out, "scenario directory");
  generate->add_option("--data-dir", gen_data, "directory holding the feeder CSVs");
  generate->add_flag("--jitter", gen_jitter, "perturb EV needs and PV scale");
  generate->add_flag("--far-stations", gen_far, "place stations at buses 7/22/25/33");

  RunOpts flex_o, disagg_o, coord_o, base_o, central_o, compare_o, audit_o;
  CLI::App* flex = app.add_subcommand("flex", "stage-1 aggregate flexibility envelopes");
  add_run_options(flex, flex_o, false);
  CLI::App* disagg =
      app.add_subcommand("disaggregate", "recover a per-EV dispatch for a trajectory");
  add_run_options(disagg, disagg_o, false);
  std::string disagg_station, disagg_traj;
  disagg->add_option("--station", disagg_station, "station id")->required();
  disagg->add_option("--trajectory", disagg_traj, "CSV with columns t,p_kw")->required();
  CLI::App* coordinate = app.add_subcommand("coordinate", "run the price coordination protocol");
  add_run_options(coordinate, coord_o);
  CLI::App* baseline = app.add_subcommand("baseline", "uniform-price baseline");
  add_run_options(baseline, base_o, false);
  CLI::App* centralized = app.add_subcommand("centralized", "centralized reference solve");
  add_run_options(centralized, central_o, false);
  CLI::App* compare = app.add_subcommand("compare", "paired baseline/proposed runs");
  add_run_options(compare, compare_o);
  CLI::App* audit = app.add_subcommand("audit", "relaxation gaps and limit violations of a state");
  add_run_options(audit, audit_o, false);
  std::string audit_prefix;
  audit->add_option("--state-prefix", audit_prefix, "prefix of the state CSV triple")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen_seed, gen_out, gen_data, gen_jitter, gen_far);
    if (flex->parsed()) return cmd_flex(flex_o);
    if (disagg->parsed()) return cmd_disaggregate(disagg_o, disagg_station, disagg_traj);
    if (coordinate->parsed()) return cmd_coordinate(coord_o);
    if (baseline->parsed()) return cmd_baseline(base_o);
    if (centralized->parsed()) return cmd_centralized(central_o);
    if (compare->parsed()) return cmd_compare(compare_o);
    if (audit->parsed()) return cmd_audit(audit_o, audit_prefix);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitComputation;
  }
  return kExitUsage;
}
