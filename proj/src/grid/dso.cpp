#include "evcoord/grid/dso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evcoord/common/parallel.hpp"

namespace evcoord::grid {

using conic::ConicProgram;
using conic::LinExpr;
using conic::VariableRef;

namespace {
constexpr double kUnratedCap = 1e6;
}  // namespace

NetworkState empty_state(const NetworkModel& net) {
  NetworkState st;
  st.horizon = net.horizon;
  const size_t nb = net.buses.size(), nl = net.lines.size();
  const auto T = static_cast<size_t>(net.horizon);
  st.v_sq.assign(T, std::vector<double>(nb, 0.0));
  st.p_bus.assign(T, std::vector<double>(nb, 0.0));
  st.q_bus.assign(T, std::vector<double>(nb, 0.0));
  st.p_flow.assign(T, std::vector<double>(nl, 0.0));
  st.q_flow.assign(T, std::vector<double>(nl, 0.0));
  st.l_sq.assign(T, std::vector<double>(nl, 0.0));
  st.p1_buy.assign(T, 0.0);
  st.p1_sell.assign(T, 0.0);
  return st;
}

SlotVars append_network_slot(ConicProgram& prog, const NetworkModel& net, int t,
                             const std::map<std::string, double>* fixed_station_pu) {
  const auto ti = static_cast<size_t>(t);
  const std::string ts = "." + std::to_string(t + 1);
  SlotVars sv;

  for (size_t i = 0; i < net.buses.size(); ++i) {
    const Bus& b = net.buses[i];
    const double lo = (i == 0) ? 1.0 : b.v_min_sq;
    const double hi = (i == 0) ? 1.0 : b.v_max_sq;
    sv.v.push_back(prog.add_variable("v." + std::to_string(b.index) + ts, lo, hi));
  }
  for (size_t e = 0; e < net.lines.size(); ++e) {
    const std::string le = std::to_string(net.lines[e].from) + "-" + std::to_string(net.lines[e].to);
    sv.p_flow.push_back(prog.add_variable("P." + le + ts));
    sv.q_flow.push_back(prog.add_variable("Q." + le + ts));
    const double cap = net.lines[e].l_max_pu;
    sv.l_sq.push_back(
        prog.add_variable("l." + le + ts, 0.0, cap >= kUnratedCap ? conic::kInf : cap));
  }
  sv.p1_buy = prog.add_variable("p1.buy" + ts, 0.0, conic::kInf);
  sv.p1_sell = prog.add_variable("p1.sell" + ts, 0.0, conic::kInf);

  for (const auto& [id, pos] : net.station_bus_pos) {
    const Bus& b = net.buses[static_cast<size_t>(pos)];
    double lo = b.p_min_pu, hi = b.p_max_pu;
    if (fixed_station_pu) {
      const double v = fixed_station_pu->at(id);
      lo = hi = v;
    }
    sv.station_p[id] = prog.add_variable("pn." + id + ts, lo, hi);
  }

  auto station_var_at = [&](size_t pos) -> const VariableRef* {
    for (const auto& [id, pos2] : net.station_bus_pos)
      if (static_cast<size_t>(pos2) == pos) return &sv.station_p.at(id);
    return nullptr;
  };

  for (size_t j = 1; j < net.buses.size(); ++j) {
    const int e = net.parent_line[j];
    const Line& line = net.lines[static_cast<size_t>(e)];
    const size_t parent = static_cast<size_t>(net.bus_position(line.from));

    LinExpr kcl_p = LinExpr(sv.p_flow[static_cast<size_t>(e)]) -
                    line.r_pu * LinExpr(sv.l_sq[static_cast<size_t>(e)]);
    LinExpr kcl_q = LinExpr(sv.q_flow[static_cast<size_t>(e)]) -
                    line.x_pu * LinExpr(sv.l_sq[static_cast<size_t>(e)]);
    for (const int f : net.child_lines[j]) {
      kcl_p -= LinExpr(sv.p_flow[static_cast<size_t>(f)]);
      kcl_q -= LinExpr(sv.q_flow[static_cast<size_t>(f)]);
    }
    if (const VariableRef* pstation = station_var_at(j))
      prog.add_equality(kcl_p - LinExpr(*pstation), LinExpr(0.0));
    else
      prog.add_equality(kcl_p, LinExpr(net.buses[j].p_load_pu[ti]));
    prog.add_equality(kcl_q, LinExpr(net.buses[j].q_load_pu[ti]));

    const double z2 = line.r_pu * line.r_pu + line.x_pu * line.x_pu;
    prog.add_equality(LinExpr(sv.v[j]) - LinExpr(sv.v[parent]) +
                          2.0 * line.r_pu * LinExpr(sv.p_flow[static_cast<size_t>(e)]) +
                          2.0 * line.x_pu * LinExpr(sv.q_flow[static_cast<size_t>(e)]) -
                          z2 * LinExpr(sv.l_sq[static_cast<size_t>(e)]),
                      LinExpr(0.0));
    prog.add_rotated_cone(LinExpr(sv.l_sq[static_cast<size_t>(e)]), LinExpr(sv.v[parent]),
                          {LinExpr(sv.p_flow[static_cast<size_t>(e)]),
                           LinExpr(sv.q_flow[static_cast<size_t>(e)])});
  }

  LinExpr slack = LinExpr(sv.p1_buy) - LinExpr(sv.p1_sell);
  for (const int f : net.child_lines[0]) slack -= LinExpr(sv.p_flow[static_cast<size_t>(f)]);
  prog.add_equality(slack, LinExpr(0.0));
  return sv;
}

void read_network_slot(const conic::Solution& sol, const NetworkModel& net, const SlotVars& sv,
                       int t, NetworkState& st) {
  const auto ti = static_cast<size_t>(t);
  for (size_t i = 0; i < net.buses.size(); ++i) st.v_sq[ti][i] = sol.value(sv.v[i]);
  for (size_t e = 0; e < net.lines.size(); ++e) {
    st.p_flow[ti][e] = sol.value(sv.p_flow[e]);
    st.q_flow[ti][e] = sol.value(sv.q_flow[e]);
    st.l_sq[ti][e] = sol.value(sv.l_sq[e]);
  }
  st.p1_buy[ti] = sol.value(sv.p1_buy);
  st.p1_sell[ti] = sol.value(sv.p1_sell);
  for (size_t j = 0; j < net.buses.size(); ++j) {
    st.p_bus[ti][j] = net.buses[j].p_load_pu[ti];
    st.q_bus[ti][j] = net.buses[j].q_load_pu[ti];
  }
  for (const auto& [id, pos] : net.station_bus_pos)
    st.p_bus[ti][static_cast<size_t>(pos)] = sol.value(sv.station_p.at(id));
  // Net slack injection, consumption-positive like every other bus.
  st.p_bus[ti][0] = -(st.p1_buy[ti] - st.p1_sell[ti]);
  double q1 = 0.0;
  for (const int f : net.child_lines[0]) q1 += st.q_flow[ti][static_cast<size_t>(f)];
  st.q_bus[ti][0] = -q1;
}

void add_network_slot_costs(ConicProgram& prog, const NetworkModel& net, const SlotVars& sv,
                            int t) {
  const auto ti = static_cast<size_t>(t);
  const double s_dt = net.s_base_kw() * net.dt_hours;
  prog.add_linear_cost(net.lambda_buy[ti] * s_dt * LinExpr(sv.p1_buy) -
                       net.lambda_sell[ti] * s_dt * LinExpr(sv.p1_sell));
  for (size_t e = 0; e < net.lines.size(); ++e)
    prog.add_linear_cost(net.lines[e].r_pu * net.pi_loss[ti] * s_dt * LinExpr(sv.l_sq[e]));
}

DsoResult dso_subproblem(const NetworkModel& net,
                         const std::map<std::string, std::vector<double>>& requests_kw,
                         const std::map<std::string, std::vector<double>>& prices, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("dso_subproblem: rho must be > 0");
  const int T = net.horizon;
  for (const auto& [id, pos] : net.station_bus_pos) {
    (void)pos;
    if (!requests_kw.count(id) || static_cast<int>(requests_kw.at(id).size()) != T)
      throw std::invalid_argument("dso_subproblem: missing request profile for " + id);
    if (!prices.count(id) || static_cast<int>(prices.at(id).size()) != T)
      throw std::invalid_argument("dso_subproblem: missing price profile for " + id);
  }

  DsoResult out;
  out.state = empty_state(net);
  for (const auto& [id, pos] : net.station_bus_pos) {
    (void)pos;
    out.schedules_kw[id].assign(static_cast<size_t>(T), 0.0);
  }
  const double s_base = net.s_base_kw();
  const double dt = net.dt_hours;

  common::parallel_for(T, [&](int t) {
    const auto ti = static_cast<size_t>(t);
    ConicProgram prog;
    const SlotVars sv = append_network_slot(prog, net, t);
    add_network_slot_costs(prog, net, sv, t);
    for (const auto& [id, var] : sv.station_p) {
      const double lambda = prices.at(id)[ti];
      const double g = requests_kw.at(id)[ti];
      prog.add_linear_cost(-lambda * dt * s_base * LinExpr(var));
      prog.add_quadratic_cost(0.5 * rho * dt, s_base * LinExpr(var) - LinExpr(g));
    }
    conic::SolveOptions opts;
    opts.tol = 1e-6;
    opts.max_iter = 200;
    const conic::Solution sol = conic::solve(prog, opts);
    if (sol.status != conic::SolveStatus::optimal)
      throw std::runtime_error("DSO subproblem slot " + std::to_string(t + 1) + ": solver returned " +
                               std::string(conic::to_string(sol.status)));
    read_network_slot(sol, net, sv, t, out.state);
    for (const auto& [id, var] : sv.station_p)
      out.schedules_kw[id][ti] = s_base * sol.value(var);
  });
  return out;
}

NetworkState dso_clear_fixed(const NetworkModel& net,
                             const std::map<std::string, std::vector<double>>& injections_kw) {
  const int T = net.horizon;
  for (const auto& [id, pos] : net.station_bus_pos) {
    (void)pos;
    if (!injections_kw.count(id) || static_cast<int>(injections_kw.at(id).size()) != T)
      throw std::invalid_argument("dso_clear_fixed: missing injection profile for " + id);
  }
  NetworkState st = empty_state(net);
  const double s_base = net.s_base_kw();

  common::parallel_for(T, [&](int t) {
    const auto ti = static_cast<size_t>(t);
    std::map<std::string, double> fixed;
    for (const auto& [id, prof] : injections_kw) fixed[id] = prof[ti] / s_base;
    ConicProgram prog;
    const SlotVars sv = append_network_slot(prog, net, t, &fixed);
    add_network_slot_costs(prog, net, sv, t);
    conic::SolveOptions opts;
    opts.tol = 1e-6;
    opts.max_iter = 200;
    const conic::Solution sol = conic::solve(prog, opts);
    if (sol.status != conic::SolveStatus::optimal)
      throw std::runtime_error("baseline network clearing infeasible at slot " +
                               std::to_string(t + 1) + " (" + conic::to_string(sol.status) +
                               "): fixed station trades exceed what the network admits");
    read_network_slot(sol, net, sv, t, st);
  });
  return st;
}

double cost_bus1(const NetworkState& st, const NetworkModel& net) {
  double c = 0.0;
  const double s_dt = net.s_base_kw() * net.dt_hours;
  for (int t = 0; t < st.horizon; ++t) {
    const auto ti = static_cast<size_t>(t);
    c += (st.p1_buy[ti] * net.lambda_buy[ti] - st.p1_sell[ti] * net.lambda_sell[ti]) * s_dt;
  }
  return c;
}

double cost_loss(const NetworkState& st, const NetworkModel& net) {
  double c = 0.0;
  const double s_dt = net.s_base_kw() * net.dt_hours;
  for (int t = 0; t < st.horizon; ++t) {
    const auto ti = static_cast<size_t>(t);
    for (size_t e = 0; e < net.lines.size(); ++e)
      c += net.lines[e].r_pu * st.l_sq[ti][e] * net.pi_loss[ti] * s_dt;
  }
  return c;
}

std::vector<std::vector<double>> socp_gap(const NetworkState& st, const NetworkModel& net) {
  std::vector<std::vector<double>> gap(static_cast<size_t>(st.horizon),
                                       std::vector<double>(net.lines.size(), 0.0));
  for (int t = 0; t < st.horizon; ++t) {
    const auto ti = static_cast<size_t>(t);
    for (size_t e = 0; e < net.lines.size(); ++e) {
      const size_t parent = static_cast<size_t>(net.bus_position(net.lines[e].from));
      const double v = st.v_sq[ti][parent];
      gap[ti][e] = st.l_sq[ti][e] -
                   (st.p_flow[ti][e] * st.p_flow[ti][e] + st.q_flow[ti][e] * st.q_flow[ti][e]) / v;
    }
  }
  return gap;
}

double LimitReport::max_violation() const {
  return std::max({p_bounds.violation, q_bounds.violation, l_bounds.violation, v_bounds.violation,
                   kcl_p.violation, kcl_q.violation, volt_drop.violation});
}

LimitReport audit_limits(const NetworkState& st, const NetworkModel& net) {
  LimitReport rep;
  auto note = [](LimitReport::Entry& e, double v, int slot, int element) {
    if (v > e.violation) {
      e.violation = v;
      e.slot = slot;
      e.element = element;
    }
  };
  for (int t = 0; t < st.horizon; ++t) {
    const auto ti = static_cast<size_t>(t);
    for (size_t j = 1; j < net.buses.size(); ++j) {
      const Bus& b = net.buses[j];
      note(rep.v_bounds, std::max(b.v_min_sq - st.v_sq[ti][j], st.v_sq[ti][j] - b.v_max_sq), t + 1,
           b.index);
      note(rep.p_bounds, std::max(b.p_min_pu - st.p_bus[ti][j], st.p_bus[ti][j] - b.p_max_pu), t + 1,
           b.index);
      note(rep.q_bounds, std::max(b.q_min_pu - st.q_bus[ti][j], st.q_bus[ti][j] - b.q_max_pu), t + 1,
           b.index);

      const int e = net.parent_line[j];
      const Line& line = net.lines[static_cast<size_t>(e)];
      const size_t parent = static_cast<size_t>(net.bus_position(line.from));
      double sum_p = 0.0, sum_q = 0.0;
      for (const int f : net.child_lines[j]) {
        sum_p += st.p_flow[ti][static_cast<size_t>(f)];
        sum_q += st.q_flow[ti][static_cast<size_t>(f)];
      }
      note(rep.kcl_p,
           std::abs(st.p_flow[ti][static_cast<size_t>(e)] -
                    line.r_pu * st.l_sq[ti][static_cast<size_t>(e)] - sum_p - st.p_bus[ti][j]),
           t + 1, b.index);
      note(rep.kcl_q,
           std::abs(st.q_flow[ti][static_cast<size_t>(e)] -
                    line.x_pu * st.l_sq[ti][static_cast<size_t>(e)] - sum_q - st.q_bus[ti][j]),
           t + 1, b.index);
      const double z2 = line.r_pu * line.r_pu + line.x_pu * line.x_pu;
      note(rep.volt_drop,
           std::abs(st.v_sq[ti][j] - st.v_sq[ti][parent] +
                    2.0 * (line.r_pu * st.p_flow[ti][static_cast<size_t>(e)] +
                           line.x_pu * st.q_flow[ti][static_cast<size_t>(e)]) -
                    z2 * st.l_sq[ti][static_cast<size_t>(e)]),
           t + 1, b.index);
    }
    for (size_t e = 0; e < net.lines.size(); ++e)
      note(rep.l_bounds,
           std::max(-st.l_sq[ti][e], st.l_sq[ti][e] - net.lines[e].l_max_pu), t + 1,
           static_cast<int>(e));
  }
  return rep;
}

}  // namespace evcoord::grid
