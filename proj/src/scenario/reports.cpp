#include "evcoord/scenario/reports.hpp"

#include <stdexcept>

#include "evcoord/scenario/csv.hpp"

namespace evcoord::scenario {

void write_envelopes(const std::string& path, const std::vector<evflex::FlexibilityRegion>& regions) {
  CsvWriter w(path);
  w.header({"station", "t", "lower_kw", "upper_kw"});
  for (const auto& r : regions)
    for (int t = 0; t < r.horizon; ++t) {
      w.cell(r.station_id);
      w.cell(t + 1);
      w.cell(r.lower_kw[static_cast<size_t>(t)]);
      w.cell(r.upper_kw[static_cast<size_t>(t)]);
      w.end_row();
    }
}

void write_decisions(const std::string& path, const coord::SystemModel& sys,
                     const std::vector<station::StationDecision>& decisions) {
  CsvWriter w(path);
  w.header({"station", "t", "p_d_kw", "p_g_kw", "p_b_dis_kw", "p_b_chg_kw", "soc_b"});
  for (size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    for (size_t t = 0; t < d.p_d_kw.size(); ++t) {
      w.cell(sys.stations[i].station_id);
      w.cell(static_cast<int>(t) + 1);
      w.cell(d.p_d_kw[t]);
      w.cell(d.p_g_kw[t]);
      w.cell(d.p_b_dis_kw[t]);
      w.cell(d.p_b_chg_kw[t]);
      w.cell(d.soc_b[t]);
      w.end_row();
    }
  }
}

void write_dispatches(const std::string& path, const coord::SystemModel& sys,
                      const std::vector<evflex::EvDispatch>& dispatches) {
  CsvWriter w(path);
  w.header({"station", "ev", "t", "power_kw", "status", "soc"});
  for (size_t i = 0; i < dispatches.size(); ++i) {
    const auto& d = dispatches[i];
    for (size_t v = 0; v < d.evs.size(); ++v)
      for (size_t t = 0; t < d.evs[v].power_kw.size(); ++t) {
        w.cell(sys.stations[i].station_id);
        w.cell(static_cast<int>(v));
        w.cell(static_cast<int>(t) + 1);
        w.cell(d.evs[v].power_kw[t]);
        w.cell(d.evs[v].status[t]);
        w.cell(d.evs[v].soc[t]);
        w.end_row();
      }
  }
}

void write_violations(const std::string& path, const evflex::ViolationReport& rep) {
  CsvWriter w(path);
  w.header({"family", "violation", "slot", "ev"});
  auto row = [&](const char* name, const evflex::ViolationReport::Entry& e) {
    w.cell(name);
    w.cell(e.violation);
    w.cell(e.slot);
    w.cell(e.ev);
    w.end_row();
  };
  row("power_bounds", rep.power_bounds);
  row("status_window", rep.status_window);
  row("terminal_soc", rep.terminal_soc);
  row("soc_recursion", rep.soc_recursion);
  row("soc_range", rep.soc_range);
  row("charger_count", rep.charger_count);
  row("aggregation", rep.aggregation);
}

void write_trace(const std::string& path, const coord::SystemModel& sys,
                 const std::vector<coord::IterationRecord>& trace) {
  CsvWriter w(path);
  std::vector<std::string> head{"k", "residual", "c_dso"};
  for (const auto& p : sys.stations) head.push_back("c_" + p.station_id);
  w.header(head);
  for (const auto& rec : trace) {
    w.cell(rec.k);
    w.cell(rec.residual);
    w.cell(rec.dso_cost);
    for (double c : rec.station_costs) w.cell(c);
    w.end_row();
  }
}

void write_settlement(const std::string& path, const coord::SettlementReport& rep) {
  CsvWriter w(path);
  w.header({"section", "entity", "item", "value"});
  auto row = [&](const std::string& sec, const std::string& ent, const std::string& item, double v) {
    w.cell(sec);
    w.cell(ent);
    w.cell(item);
    w.cell(v);
    w.end_row();
  };
  for (const auto& l : rep.stations) {
    row("station", l.station_id, "c_g", l.c_g);
    row("station", l.station_id, "c_b", l.c_b);
    row("station", l.station_id, "c_ev", l.c_ev);
    row("station", l.station_id, "c_i", l.total);
  }
  row("stations", "all", "total", rep.stations_total);
  row("dso", "dso", "c_bus1", rep.dso_c_bus1);
  row("dso", "dso", "c_loss", rep.dso_c_loss);
  row("dso", "dso", "c_trade", rep.dso_c_trade);
  row("dso", "dso", "c_dso", rep.dso_total);
  row("system", "all", "total", rep.total);
}

void write_prices(const std::string& path, const coord::SystemModel& sys,
                  const std::map<std::string, std::vector<double>>& prices) {
  CsvWriter w(path);
  std::vector<std::string> head{"t"};
  for (const auto& p : sys.stations) head.push_back(p.station_id);
  w.header(head);
  for (int t = 0; t < sys.horizon(); ++t) {
    w.cell(t + 1);
    for (const auto& p : sys.stations)
      w.cell(prices.at(p.station_id)[static_cast<size_t>(t)]);
    w.end_row();
  }
}

void write_losses(const std::string& path, const grid::NetworkModel& net,
                  const grid::NetworkState& state) {
  CsvWriter w(path);
  w.header({"t", "from", "to", "l_pu", "loss_kw"});
  for (int t = 0; t < state.horizon; ++t)
    for (size_t e = 0; e < net.lines.size(); ++e) {
      w.cell(t + 1);
      w.cell(net.lines[e].from);
      w.cell(net.lines[e].to);
      w.cell(state.l_sq[static_cast<size_t>(t)][e]);
      w.cell(net.lines[e].r_pu * state.l_sq[static_cast<size_t>(t)][e] * net.s_base_kw());
      w.end_row();
    }
}

void write_state(const std::string& prefix, const grid::NetworkModel& net,
                 const grid::NetworkState& state) {
  {
    CsvWriter w(prefix + "_bus.csv");
    w.header({"t", "bus", "v_sq", "p_pu", "q_pu"});
    for (int t = 0; t < state.horizon; ++t)
      for (size_t j = 0; j < net.buses.size(); ++j) {
        w.cell(t + 1);
        w.cell(net.buses[j].index);
        w.cell(state.v_sq[static_cast<size_t>(t)][j]);
        w.cell(state.p_bus[static_cast<size_t>(t)][j]);
        w.cell(state.q_bus[static_cast<size_t>(t)][j]);
        w.end_row();
      }
  }
  {
    CsvWriter w(prefix + "_line.csv");
    w.header({"t", "from", "to", "p_flow_pu", "q_flow_pu", "l_pu"});
    for (int t = 0; t < state.horizon; ++t)
      for (size_t e = 0; e < net.lines.size(); ++e) {
        w.cell(t + 1);
        w.cell(net.lines[e].from);
        w.cell(net.lines[e].to);
        w.cell(state.p_flow[static_cast<size_t>(t)][e]);
        w.cell(state.q_flow[static_cast<size_t>(t)][e]);
        w.cell(state.l_sq[static_cast<size_t>(t)][e]);
        w.end_row();
      }
  }
  {
    CsvWriter w(prefix + "_slack.csv");
    w.header({"t", "p1_buy_pu", "p1_sell_pu"});
    for (int t = 0; t < state.horizon; ++t) {
      w.cell(t + 1);
      w.cell(state.p1_buy[static_cast<size_t>(t)]);
      w.cell(state.p1_sell[static_cast<size_t>(t)]);
      w.end_row();
    }
  }
}

grid::NetworkState read_state(const std::string& prefix, const grid::NetworkModel& net) {
  grid::NetworkState st = grid::empty_state(net);
  {
    const CsvTable tb = read_csv(prefix + "_bus.csv");
    const int ct = tb.column("t"), cb = tb.column("bus");
    const int cv = tb.column("v_sq"), cp = tb.column("p_pu"), cq = tb.column("q_pu");
    for (size_t r = 0; r < tb.rows.size(); ++r) {
      const int t = static_cast<int>(tb.num(r, ct)) - 1;
      const auto j = static_cast<size_t>(net.bus_position(static_cast<int>(tb.num(r, cb))));
      st.v_sq.at(static_cast<size_t>(t))[j] = tb.num(r, cv);
      st.p_bus.at(static_cast<size_t>(t))[j] = tb.num(r, cp);
      st.q_bus.at(static_cast<size_t>(t))[j] = tb.num(r, cq);
    }
  }
  {
    const CsvTable tb = read_csv(prefix + "_line.csv");
    const int ct = tb.column("t"), cf = tb.column("from"), cto = tb.column("to");
    const int cp = tb.column("p_flow_pu"), cq = tb.column("q_flow_pu"), cl = tb.column("l_pu");
    for (size_t r = 0; r < tb.rows.size(); ++r) {
      const int t = static_cast<int>(tb.num(r, ct)) - 1;
      const int from = static_cast<int>(tb.num(r, cf));
      const int to = static_cast<int>(tb.num(r, cto));
      size_t line = net.lines.size();
      for (size_t e = 0; e < net.lines.size(); ++e)
        if (net.lines[e].from == from && net.lines[e].to == to) line = e;
      if (line == net.lines.size())
        throw std::runtime_error("state file references unknown line " + std::to_string(from) + "-" +
                                 std::to_string(to));
      st.p_flow.at(static_cast<size_t>(t))[line] = tb.num(r, cp);
      st.q_flow.at(static_cast<size_t>(t))[line] = tb.num(r, cq);
      st.l_sq.at(static_cast<size_t>(t))[line] = tb.num(r, cl);
    }
  }
  {
    const CsvTable tb = read_csv(prefix + "_slack.csv");
    const int ct = tb.column("t"), cb = tb.column("p1_buy_pu"), cs = tb.column("p1_sell_pu");
    for (size_t r = 0; r < tb.rows.size(); ++r) {
      const int t = static_cast<int>(tb.num(r, ct)) - 1;
      st.p1_buy.at(static_cast<size_t>(t)) = tb.num(r, cb);
      st.p1_sell.at(static_cast<size_t>(t)) = tb.num(r, cs);
    }
  }
  return st;
}

void write_comparison(const std::string& path, const coord::SettlementReport& baseline,
                      const coord::SettlementReport& proposed) {
  CsvWriter w(path);
  w.header({"item", "baseline", "proposed", "reduction"});
  auto row = [&](const std::string& item, double b, double p, bool with_reduction) {
    w.cell(item);
    w.cell(b);
    w.cell(p);
    if (with_reduction && b != 0.0)
      w.cell((b - p) / b);
    else
      w.cell(std::string());
    w.end_row();
  };
  for (size_t i = 0; i < baseline.stations.size(); ++i) {
    const auto& b = baseline.stations[i];
    const auto& p = proposed.stations[i];
    row("c_g." + b.station_id, b.c_g, p.c_g, false);
    row("c_b." + b.station_id, b.c_b, p.c_b, false);
    row("c_ev." + b.station_id, b.c_ev, p.c_ev, false);
    row("c_i." + b.station_id, b.total, p.total, false);
  }
  row("stations_total", baseline.stations_total, proposed.stations_total, false);
  row("c_bus1", baseline.dso_c_bus1, proposed.dso_c_bus1, false);
  row("c_loss", baseline.dso_c_loss, proposed.dso_c_loss, false);
  row("c_dso", baseline.dso_total, proposed.dso_total, false);
  row("total", baseline.total, proposed.total, true);
}

}  // namespace evcoord::scenario
