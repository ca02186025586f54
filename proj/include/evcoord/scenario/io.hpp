#pragma once

#include <string>
#include <utility>
#include <vector>

#include "evcoord/grid/network.hpp"

namespace evcoord::scenario {

/// Reads the bus/line CSV pair (index,p_load_kw,q_load_kvar,v_min_pu,v_max_pu
/// and from,to,r_ohm,x_ohm,rating_a).
std::pair<std::vector<grid::BusSpec>, std::vector<grid::LineSpec>> load_network_files(
    const std::string& buses_csv, const std::string& lines_csv);

}  // namespace evcoord::scenario
