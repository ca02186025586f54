#include "evcoord/scenario/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "evcoord/common/parallel.hpp"
#include "evcoord/evflex/flexibility.hpp"
#include "evcoord/scenario/csv.hpp"
#include "evcoord/scenario/io.hpp"
#include "evcoord/scenario/toml.hpp"

namespace evcoord::scenario {

namespace fs = std::filesystem;

GeneratorSpec GeneratorSpec::reference(bool far_stations) {
  GeneratorSpec g;
  const std::vector<int> near{2, 3, 19, 23};
  const std::vector<int> far{7, 22, 25, 33};
  const auto& buses = far_stations ? far : near;
  g.stations = {
      StationGenSpec{"CS1", buses[0], {{30, 6, 22}}, 100.0, 30.0, 60.0},
      StationGenSpec{"CS2", buses[1], {{20, 6, 22}}, 150.0, 45.0, 90.0},
      StationGenSpec{"CS3", buses[2], {{15, 4, 14}, {15, 14, 23}}, 200.0, 60.0, 110.0},
      StationGenSpec{"CS4", buses[3], {{10, 2, 8}, {10, 8, 14}, {10, 14, 20}, {10, 20, 23}},
                     200.0, 60.0, 130.0},
  };
  return g;
}

std::vector<double> generate_pv_profile(double peak_kw, int horizon, common::Rng rng,
                                        double jitter_frac) {
  std::vector<double> pv(static_cast<size_t>(horizon), 0.0);
  for (int t = 0; t < horizon; ++t) {
    const double h = static_cast<double>(t);  // slot t+1 covers clock hours [h, h+1)
    const double u = rng.uniform();           // one draw per slot, daylight or not
    if (h < 6.0 || h > 18.0) continue;
    const double bell = std::pow(std::sin(M_PI * (h - 6.0) / 12.0), 2);
    const double f = 1.0 + jitter_frac * (2.0 * u - 1.0);
    pv[static_cast<size_t>(t)] = peak_kw * std::clamp(bell * f, 0.0, 1.0);
  }
  return pv;
}

std::vector<double> synthetic_buy_price_profile(int horizon) {
  std::vector<double> lam(static_cast<size_t>(horizon), 0.0);
  for (int t = 0; t < horizon; ++t) {
    const double h = static_cast<double>(t);
    const double v = 0.04 + 0.05 * std::exp(-(h - 9.0) * (h - 9.0) / 8.0) +
                     0.36 * std::exp(-(h - 19.5) * (h - 19.5) / 6.0);
    lam[static_cast<size_t>(t)] = std::clamp(v, 0.04, 0.40);
  }
  return lam;
}

namespace {

evflex::EvSession make_session(const GeneratorSpec& spec, const ScenarioConfig& cfg,
                               const std::string& id, const FleetGenBlock& block,
                               common::Rng& rng) {
  evflex::EvSession s;
  s.id = id;
  s.t_arrive = block.arrive_hour + 1;
  s.t_depart = block.depart_hour + 1;
  s.soc_min = spec.soc_min;
  s.soc_max = spec.soc_max;
  s.soc_init = spec.soc_init;
  s.soc_req = spec.soc_req;
  s.capacity_kwh = spec.ev_capacity_kwh;
  s.p_chg_kw = spec.ev_p_chg_kw;
  if (spec.jitter) {
    s.soc_init = rng.uniform(0.15, 0.25);
    s.soc_req = rng.uniform(0.45, 0.55);
    s.t_arrive = std::clamp(s.t_arrive + rng.uniform_int(-1, 1), 1, cfg.horizon - 1);
    s.t_depart = std::clamp(s.t_depart + rng.uniform_int(-1, 1), s.t_arrive + 1, cfg.horizon);
    // Keep the requirement servable inside the (possibly shrunk) window.
    const double deliverable =
        s.p_chg_kw * cfg.dt_hours * (s.t_depart - s.t_arrive) / s.capacity_kwh;
    s.soc_req = std::min(s.soc_req, std::min(s.soc_max, s.soc_init + deliverable));
  }
  return s;
}

}  // namespace

Scenario generate_scenario(const GeneratorSpec& spec, const ScenarioConfig& cfg,
                           const std::string& buses_csv, const std::string& lines_csv) {
  Scenario s;
  s.cfg = cfg;
  auto [buses, lines] = load_network_files(buses_csv, lines_csv);
  s.buses = std::move(buses);
  s.lines = std::move(lines);

  const common::Rng root(cfg.seed);
  for (const auto& st : spec.stations) {
    station::StationParams p;
    p.station_id = st.id;
    p.bus = st.bus;
    p.battery_capacity_kwh = st.battery_kwh;
    p.p_b_chg_max_kw = st.battery_kw;
    p.p_b_dis_max_kw = st.battery_kw;
    p.eta_c = spec.eta;
    p.eta_d = spec.eta;
    p.c_batt = spec.c_batt;
    p.c_dissat = spec.c_dissat;
    p.p_g_min_kw = -spec.p_g_limit_kw;
    p.p_g_max_kw = spec.p_g_limit_kw;
    double peak = st.pv_peak_kw;
    if (spec.jitter) peak *= root.substream("pvscale/" + st.id).uniform(0.8, 1.2);
    p.pv_profile_kw = generate_pv_profile(peak, cfg.horizon, root.substream("pv/" + st.id),
                                          spec.pv_jitter);
    s.stations.push_back(std::move(p));

    evflex::StationFleet fleet;
    fleet.station_id = st.id;
    fleet.n_chargers = spec.n_chargers;
    fleet.horizon = cfg.horizon;
    fleet.dt_hours = cfg.dt_hours;
    fleet.v2g = cfg.v2g;
    common::Rng ev_rng = root.substream("fleet/" + st.id);
    int n = 0;
    for (const auto& block : st.blocks)
      for (int k = 0; k < block.count; ++k)
        fleet.sessions.push_back(
            make_session(spec, cfg, st.id + "-ev" + std::to_string(++n), block, ev_rng));
    fleet.validate();
    s.fleets.push_back(std::move(fleet));
  }

  s.lambda_buy = synthetic_buy_price_profile(cfg.horizon);
  s.lambda_sell.assign(static_cast<size_t>(cfg.horizon), 0.01);
  s.pi_loss = s.lambda_buy;
  return s;
}

void write_scenario(const Scenario& s, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path root(dir);
  {
    CsvWriter w((root / "buses.csv").string());
    w.header({"index", "p_load_kw", "q_load_kvar", "v_min_pu", "v_max_pu"});
    for (const auto& b : s.buses) {
      w.cell(b.index);
      w.cell(b.p_load_kw);
      w.cell(b.q_load_kvar);
      w.cell(b.v_min_pu);
      w.cell(b.v_max_pu);
      w.end_row();
    }
  }
  {
    CsvWriter w((root / "lines.csv").string());
    w.header({"from", "to", "r_ohm", "x_ohm", "rating_a"});
    for (const auto& l : s.lines) {
      w.cell(l.from);
      w.cell(l.to);
      w.cell(l.r_ohm);
      w.cell(l.x_ohm);
      w.cell(l.rating_a);
      w.end_row();
    }
  }
  {
    CsvWriter w((root / "stations.csv").string());
    w.header({"station_id", "bus", "battery_capacity_kwh", "p_b_chg_max_kw", "p_b_dis_max_kw",
              "eta_c", "eta_d", "soc_b_min", "soc_b_max", "c_batt", "c_dissat", "p_g_min_kw",
              "p_g_max_kw"});
    for (const auto& p : s.stations) {
      w.cell(p.station_id);
      w.cell(p.bus);
      w.cell(p.battery_capacity_kwh);
      w.cell(p.p_b_chg_max_kw);
      w.cell(p.p_b_dis_max_kw);
      w.cell(p.eta_c);
      w.cell(p.eta_d);
      w.cell(p.soc_b_min);
      w.cell(p.soc_b_max);
      w.cell(p.c_batt);
      w.cell(p.c_dissat);
      w.cell(p.p_g_min_kw);
      w.cell(p.p_g_max_kw);
      w.end_row();
    }
  }
  {
    CsvWriter w((root / "fleet.csv").string());
    w.header({"id", "station", "t_arrive", "t_depart", "soc_init", "soc_req", "soc_min", "soc_max",
              "capacity_kwh", "p_chg_kw"});
    for (const auto& fleet : s.fleets)
      for (const auto& ev : fleet.sessions) {
        w.cell(ev.id);
        w.cell(fleet.station_id);
        w.cell(ev.t_arrive);
        w.cell(ev.t_depart);
        w.cell(ev.soc_init);
        w.cell(ev.soc_req);
        w.cell(ev.soc_min);
        w.cell(ev.soc_max);
        w.cell(ev.capacity_kwh);
        w.cell(ev.p_chg_kw);
        w.end_row();
      }
  }
  {
    CsvWriter w((root / "pv.csv").string());
    std::vector<std::string> head{"t"};
    for (const auto& p : s.stations) head.push_back(p.station_id);
    w.header(head);
    for (int t = 0; t < s.cfg.horizon; ++t) {
      w.cell(t + 1);
      for (const auto& p : s.stations) w.cell(p.pv_profile_kw[static_cast<size_t>(t)]);
      w.end_row();
    }
  }
  {
    CsvWriter w((root / "prices.csv").string());
    w.header({"t", "lambda_buy", "lambda_sell", "pi"});
    for (int t = 0; t < s.cfg.horizon; ++t) {
      const auto ti = static_cast<size_t>(t);
      w.cell(t + 1);
      w.cell(s.lambda_buy[ti]);
      w.cell(s.lambda_sell[ti]);
      w.cell(s.pi_loss[ti]);
      w.end_row();
    }
  }
  std::ofstream cfgf(root / "config.toml");
  const ScenarioConfig& c = s.cfg;
  cfgf << "[scenario]\n"
       << "horizon = " << c.horizon << "\n"
       << "dt_hours = " << format_number(c.dt_hours) << "\n"
       << "seed = " << c.seed << "\n"
       << "w = " << format_number(c.w) << "\n"
       << "rho = " << format_number(c.rho) << "\n"
       << "delta = " << format_number(c.delta) << "\n"
       << "max_iter = " << c.max_iter << "\n"
       << "v2g = " << (c.v2g ? "true" : "false") << "\n\n"
       << "[network]\n"
       << "buses_file = \"buses.csv\"\n"
       << "lines_file = \"lines.csv\"\n"
       << "s_base_mva = " << format_number(c.s_base_mva) << "\n"
       << "v_base_kv = " << format_number(c.v_base_kv) << "\n"
       << "base_load_scale = " << format_number(c.base_load_scale) << "\n"
       << "station_p_min_kw = " << format_number(c.station_p_min_kw) << "\n"
       << "station_p_max_kw = " << format_number(c.station_p_max_kw) << "\n\n"
       << "[files]\n"
       << "stations = \"stations.csv\"\n"
       << "fleet = \"fleet.csv\"\n"
       << "pv = \"pv.csv\"\n"
       << "prices = \"prices.csv\"\n";
}

namespace {

ScenarioConfig read_config_scalars(const TomlTable& t) {
  ScenarioConfig c;
  c.horizon = static_cast<int>(t.num_or("scenario.horizon", 24));
  c.dt_hours = t.num_or("scenario.dt_hours", 1.0);
  c.seed = static_cast<std::uint64_t>(t.num_or("scenario.seed", 1));
  c.w = t.num_or("scenario.w", 0.01);
  c.rho = t.num_or("scenario.rho", 0.05);
  c.delta = t.num_or("scenario.delta", 1e-3);
  c.max_iter = static_cast<int>(t.num_or("scenario.max_iter", 200));
  c.v2g = t.boolean_or("scenario.v2g", true);
  c.s_base_mva = t.num_or("network.s_base_mva", 1.0);
  c.v_base_kv = t.num_or("network.v_base_kv", 12.66);
  c.base_load_scale = t.num_or("network.base_load_scale", 0.6);
  c.station_p_min_kw = t.num_or("network.station_p_min_kw", -350.0);
  c.station_p_max_kw = t.num_or("network.station_p_max_kw", 350.0);
  return c;
}

}  // namespace

Scenario load_scenario(const std::string& config_path,
                       std::optional<std::uint64_t> seed_override) {
  const TomlTable t = TomlTable::parse_file(config_path);
  const fs::path base = fs::path(config_path).parent_path();
  auto resolve = [&](const std::string& p) { return (base / p).string(); };
  ScenarioConfig cfg = read_config_scalars(t);
  if (seed_override) cfg.seed = *seed_override;

  if (t.has("generator.preset")) {
    if (t.str("generator.preset") != "reference")
      throw std::runtime_error("config: unknown generator preset");
    GeneratorSpec spec = GeneratorSpec::reference(t.boolean_or("generator.far_stations", false));
    spec.jitter = t.boolean_or("generator.jitter", false);
    return generate_scenario(spec, cfg, resolve(t.str("network.buses_file")),
                             resolve(t.str("network.lines_file")));
  }

  Scenario s;
  s.cfg = cfg;
  auto [buses, lines] = load_network_files(resolve(t.str("network.buses_file")),
                                           resolve(t.str("network.lines_file")));
  s.buses = std::move(buses);
  s.lines = std::move(lines);

  {
    const CsvTable st = read_csv(resolve(t.str("files.stations")));
    const int cid = st.column("station_id"), cbus = st.column("bus");
    for (size_t r = 0; r < st.rows.size(); ++r) {
      station::StationParams p;
      p.station_id = st.str(r, cid);
      p.bus = static_cast<int>(st.num(r, cbus));
      p.battery_capacity_kwh = st.num(r, st.column("battery_capacity_kwh"));
      p.p_b_chg_max_kw = st.num(r, st.column("p_b_chg_max_kw"));
      p.p_b_dis_max_kw = st.num(r, st.column("p_b_dis_max_kw"));
      p.eta_c = st.num(r, st.column("eta_c"));
      p.eta_d = st.num(r, st.column("eta_d"));
      p.soc_b_min = st.num(r, st.column("soc_b_min"));
      p.soc_b_max = st.num(r, st.column("soc_b_max"));
      p.c_batt = st.num(r, st.column("c_batt"));
      p.c_dissat = st.num(r, st.column("c_dissat"));
      p.p_g_min_kw = st.num(r, st.column("p_g_min_kw"));
      p.p_g_max_kw = st.num(r, st.column("p_g_max_kw"));
      s.stations.push_back(std::move(p));
    }
  }
  auto station_pos = [&](const std::string& id) -> size_t {
    for (size_t i = 0; i < s.stations.size(); ++i)
      if (s.stations[i].station_id == id) return i;
    throw std::runtime_error("config: fleet/pv references unknown station " + id);
  };
  {
    const CsvTable pv = read_csv(resolve(t.str("files.pv")));
    for (auto& p : s.stations) p.pv_profile_kw.assign(static_cast<size_t>(cfg.horizon), 0.0);
    for (size_t r = 0; r < pv.rows.size(); ++r) {
      const int slot = static_cast<int>(pv.num(r, pv.column("t")));
      if (slot < 1 || slot > cfg.horizon) throw std::runtime_error("pv file: slot outside horizon");
      for (auto& p : s.stations)
        p.pv_profile_kw[static_cast<size_t>(slot - 1)] = pv.num(r, pv.column(p.station_id));
    }
  }
  {
    for (const auto& p : s.stations) {
      evflex::StationFleet fleet;
      fleet.station_id = p.station_id;
      fleet.horizon = cfg.horizon;
      fleet.dt_hours = cfg.dt_hours;
      fleet.v2g = cfg.v2g;
      fleet.n_chargers = 20;
      s.fleets.push_back(std::move(fleet));
    }
    const TomlTable& tt = t;
    if (tt.has("fleet.n_chargers"))
      for (auto& f : s.fleets) f.n_chargers = static_cast<int>(tt.num("fleet.n_chargers"));
    const CsvTable ft = read_csv(resolve(t.str("files.fleet")));
    const int cid = ft.column("id"), cst = ft.column("station");
    for (size_t r = 0; r < ft.rows.size(); ++r) {
      evflex::EvSession ev;
      ev.id = ft.str(r, cid);
      ev.t_arrive = static_cast<int>(ft.num(r, ft.column("t_arrive")));
      ev.t_depart = static_cast<int>(ft.num(r, ft.column("t_depart")));
      ev.soc_init = ft.num(r, ft.column("soc_init"));
      ev.soc_req = ft.num(r, ft.column("soc_req"));
      ev.soc_min = ft.num(r, ft.column("soc_min"));
      ev.soc_max = ft.num(r, ft.column("soc_max"));
      ev.capacity_kwh = ft.num(r, ft.column("capacity_kwh"));
      ev.p_chg_kw = ft.num(r, ft.column("p_chg_kw"));
      s.fleets[station_pos(ft.str(r, cst))].sessions.push_back(std::move(ev));
    }
    for (const auto& f : s.fleets) f.validate();
  }
  {
    const CsvTable pt = read_csv(resolve(t.str("files.prices")));
    s.lambda_buy.assign(static_cast<size_t>(cfg.horizon), 0.0);
    s.lambda_sell.assign(static_cast<size_t>(cfg.horizon), 0.0);
    s.pi_loss.assign(static_cast<size_t>(cfg.horizon), 0.0);
    if (static_cast<int>(pt.rows.size()) != cfg.horizon)
      throw std::runtime_error("prices file: need one row per slot");
    for (size_t r = 0; r < pt.rows.size(); ++r) {
      const int slot = static_cast<int>(pt.num(r, pt.column("t")));
      if (slot < 1 || slot > cfg.horizon)
        throw std::runtime_error("prices file: slot outside horizon");
      const auto i = static_cast<size_t>(slot - 1);
      s.lambda_buy[i] = pt.num(r, pt.column("lambda_buy"));
      s.lambda_sell[i] = pt.num(r, pt.column("lambda_sell"));
      s.pi_loss[i] = pt.num(r, pt.column("pi"));
    }
  }
  return s;
}

grid::NetworkModel build_network_model(const Scenario& s) {
  grid::NetworkConfig cfg;
  cfg.s_base_mva = s.cfg.s_base_mva;
  cfg.v_base_kv = s.cfg.v_base_kv;
  cfg.horizon = s.cfg.horizon;
  cfg.dt_hours = s.cfg.dt_hours;
  cfg.load_scale = s.cfg.base_load_scale;
  cfg.buses = s.buses;
  cfg.lines = s.lines;
  cfg.station_p_min_kw = s.cfg.station_p_min_kw;
  cfg.station_p_max_kw = s.cfg.station_p_max_kw;
  cfg.lambda_buy = s.lambda_buy;
  cfg.lambda_sell = s.lambda_sell;
  cfg.pi_loss = s.pi_loss;
  for (const auto& p : s.stations) cfg.station_buses[p.station_id] = p.bus;
  return grid::build_network(cfg);
}

coord::SystemModel build_system(const Scenario& s, double w) {
  coord::SystemModel sys;
  sys.network = build_network_model(s);
  sys.stations = s.stations;
  sys.regions.resize(s.fleets.size());
  common::parallel_for(static_cast<int>(s.fleets.size()), [&](int i) {
    sys.regions[static_cast<size_t>(i)] =
        evflex::compute_flexibility(s.fleets[static_cast<size_t>(i)], w);
  });
  sys.validate();
  return sys;
}

}  // namespace evcoord::scenario
