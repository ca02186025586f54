#include "evcoord/scenario/io.hpp"

#include "evcoord/scenario/csv.hpp"

namespace evcoord::scenario {

std::pair<std::vector<grid::BusSpec>, std::vector<grid::LineSpec>> load_network_files(
    const std::string& buses_csv, const std::string& lines_csv) {
  std::vector<grid::BusSpec> buses;
  const CsvTable bt = read_csv(buses_csv);
  const int bi = bt.column("index"), bp = bt.column("p_load_kw"), bq = bt.column("q_load_kvar");
  const int bvmin = bt.column("v_min_pu"), bvmax = bt.column("v_max_pu");
  for (size_t r = 0; r < bt.rows.size(); ++r) {
    grid::BusSpec b;
    b.index = static_cast<int>(bt.num(r, bi));
    b.p_load_kw = bt.num(r, bp);
    b.q_load_kvar = bt.num(r, bq);
    b.v_min_pu = bt.num(r, bvmin);
    b.v_max_pu = bt.num(r, bvmax);
    buses.push_back(b);
  }
  std::vector<grid::LineSpec> lines;
  const CsvTable lt = read_csv(lines_csv);
  const int lf = lt.column("from"), lto = lt.column("to");
  const int lr = lt.column("r_ohm"), lx = lt.column("x_ohm"), la = lt.column("rating_a");
  for (size_t r = 0; r < lt.rows.size(); ++r) {
    grid::LineSpec l;
    l.from = static_cast<int>(lt.num(r, lf));
    l.to = static_cast<int>(lt.num(r, lto));
    l.r_ohm = lt.num(r, lr);
    l.x_ohm = lt.num(r, lx);
    l.rating_a = lt.num(r, la);
    lines.push_back(l);
  }
  return {std::move(buses), std::move(lines)};
}

}  // namespace evcoord::scenario
