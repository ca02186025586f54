#include "evcoord/grid/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace evcoord::grid {

namespace {
constexpr double kUnratedCap = 1e6;  // pu current-squared sentinel
}

int NetworkModel::bus_position(int bus_index) const {
  for (size_t i = 0; i < buses.size(); ++i)
    if (buses[i].index == bus_index) return static_cast<int>(i);
  throw std::out_of_range("network: no bus with index " + std::to_string(bus_index));
}

NetworkModel build_network(const NetworkConfig& cfg) {
  if (cfg.buses.empty()) throw std::invalid_argument("network: no buses");
  if (cfg.s_base_mva <= 0.0 || cfg.v_base_kv <= 0.0)
    throw std::invalid_argument("network: base quantities must be positive");
  const int T = cfg.horizon;
  if (static_cast<int>(cfg.lambda_buy.size()) != T ||
      static_cast<int>(cfg.lambda_sell.size()) != T)
    throw std::invalid_argument("network: price profiles must cover the horizon");
  for (int t = 0; t < T; ++t)
    if (!(cfg.lambda_sell[static_cast<size_t>(t)] < cfg.lambda_buy[static_cast<size_t>(t)]))
      throw std::invalid_argument("network: lambda_sell must stay below lambda_buy (slot " +
                                  std::to_string(t + 1) + ")");

  NetworkModel net;
  net.s_base_mva = cfg.s_base_mva;
  net.v_base_kv = cfg.v_base_kv;
  net.horizon = T;
  net.dt_hours = cfg.dt_hours;
  net.lambda_buy = cfg.lambda_buy;
  net.lambda_sell = cfg.lambda_sell;
  net.pi_loss = cfg.pi_loss.empty() ? cfg.lambda_buy : cfg.pi_loss;

  // Buses, slack first.
  std::vector<BusSpec> specs = cfg.buses;
  std::sort(specs.begin(), specs.end(), [](const BusSpec& a, const BusSpec& b) { return a.index < b.index; });
  if (specs.front().index != 1) throw std::invalid_argument("network: slack bus 1 is missing");
  for (size_t i = 1; i < specs.size(); ++i)
    if (specs[i].index == specs[i - 1].index)
      throw std::invalid_argument("network: duplicate bus " + std::to_string(specs[i].index));

  std::vector<char> is_station(specs.size(), 0);
  for (const auto& [id, bus_index] : cfg.station_buses) {
    bool found = false;
    for (size_t i = 0; i < specs.size(); ++i) {
      if (specs[i].index == bus_index) {
        if (i == 0) throw std::invalid_argument("network: a station cannot sit on the slack bus");
        is_station[i] = 1;
        found = true;
      }
    }
    if (!found)
      throw std::invalid_argument("network: station " + id + " maps to unknown bus " +
                                  std::to_string(bus_index));
  }

  const double s_base_kw = cfg.s_base_mva * 1000.0;
  for (size_t i = 0; i < specs.size(); ++i) {
    const BusSpec& s = specs[i];
    Bus b;
    b.index = s.index;
    b.v_min_sq = s.v_min_pu * s.v_min_pu;
    b.v_max_sq = s.v_max_pu * s.v_max_pu;
    if (is_station[i]) {
      b.p_min_pu = cfg.station_p_min_kw / s_base_kw;
      b.p_max_pu = cfg.station_p_max_kw / s_base_kw;
    } else {
      b.p_min_pu = -10.0;
      b.p_max_pu = 10.0;
    }
    for (int t = 0; t < T; ++t) {
      const double shape =
          cfg.load_shape.empty() ? 1.0 : cfg.load_shape[static_cast<size_t>(t)];
      const double k = cfg.load_scale * shape / s_base_kw;
      // Station buses carry the station injection only on the active side;
      // their reactive load stays as configured.
      b.p_load_pu.push_back(is_station[i] ? 0.0 : s.p_load_kw * k);
      b.q_load_pu.push_back(s.q_load_kvar * k);
    }
    net.buses.push_back(std::move(b));
  }

  // Lines: per-unit conversion, then orientation away from the slack.
  const double z_base = cfg.v_base_kv * cfg.v_base_kv / cfg.s_base_mva;  // ohm
  const double i_base_a = cfg.s_base_mva * 1e6 / (cfg.v_base_kv * 1e3);
  struct Raw {
    int a, b;
    double r, x, cap;
  };
  std::vector<Raw> raw;
  for (const auto& l : cfg.lines) {
    if (l.from == l.to) throw std::invalid_argument("network: self-loop line");
    if (l.r_ohm <= 0.0 || l.x_ohm <= 0.0)
      throw std::invalid_argument("network: line impedances must be positive");
    for (const auto& o : raw)
      if ((o.a == l.from && o.b == l.to) || (o.a == l.to && o.b == l.from))
        throw std::invalid_argument("network: duplicate line " + std::to_string(l.from) + "-" +
                                    std::to_string(l.to));
    const double cap =
        l.rating_a > 0.0 ? (l.rating_a / i_base_a) * (l.rating_a / i_base_a) : kUnratedCap;
    raw.push_back(Raw{l.from, l.to, l.r_ohm / z_base, l.x_ohm / z_base, cap});
  }
  if (raw.size() != specs.size() - 1)
    throw std::invalid_argument("network: a radial system needs exactly n_buses - 1 lines");

  std::vector<std::vector<size_t>> adj(specs.size());
  auto pos_of = [&](int idx) {
    for (size_t i = 0; i < specs.size(); ++i)
      if (specs[i].index == idx) return i;
    throw std::invalid_argument("network: line references unknown bus " + std::to_string(idx));
  };
  for (size_t e = 0; e < raw.size(); ++e) {
    adj[pos_of(raw[e].a)].push_back(e);
    adj[pos_of(raw[e].b)].push_back(e);
  }

  net.parent_line.assign(specs.size(), -1);
  net.child_lines.assign(specs.size(), {});
  std::vector<char> seen(specs.size(), 0);
  std::vector<char> used(raw.size(), 0);
  std::deque<size_t> frontier{0};
  seen[0] = 1;
  while (!frontier.empty()) {
    const size_t at = frontier.front();
    frontier.pop_front();
    for (const size_t e : adj[at]) {
      if (used[e]) continue;
      used[e] = 1;
      const size_t other = (pos_of(raw[e].a) == at) ? pos_of(raw[e].b) : pos_of(raw[e].a);
      if (seen[other])
        throw std::invalid_argument("network: cycle detected; the model requires a radial system");
      seen[other] = 1;
      Line l;
      l.from = specs[at].index;
      l.to = specs[other].index;
      l.r_pu = raw[e].r;
      l.x_pu = raw[e].x;
      l.l_max_pu = raw[e].cap;
      net.child_lines[at].push_back(static_cast<int>(net.lines.size()));
      net.parent_line[other] = static_cast<int>(net.lines.size());
      net.lines.push_back(l);
      frontier.push_back(other);
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw std::invalid_argument("network: graph is disconnected");

  for (const auto& [id, bus_index] : cfg.station_buses)
    net.station_bus_pos[id] = net.bus_position(bus_index);
  return net;
}

}  // namespace evcoord::grid
