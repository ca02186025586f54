#pragma once

#include <string>
#include <vector>

#include "evcoord/coordination/coordination.hpp"
#include "evcoord/evflex/flexibility.hpp"

namespace evcoord::scenario {

/// CSV report writers. All numbers go through the deterministic formatter,
/// so identical runs produce byte-identical artifacts.

void write_envelopes(const std::string& path, const std::vector<evflex::FlexibilityRegion>& regions);

void write_decisions(const std::string& path, const coord::SystemModel& sys,
                     const std::vector<station::StationDecision>& decisions);

void write_dispatches(const std::string& path, const coord::SystemModel& sys,
                      const std::vector<evflex::EvDispatch>& dispatches);

void write_violations(const std::string& path, const evflex::ViolationReport& report);

void write_trace(const std::string& path, const coord::SystemModel& sys,
                 const std::vector<coord::IterationRecord>& trace);

void write_settlement(const std::string& path, const coord::SettlementReport& rep);

void write_prices(const std::string& path, const coord::SystemModel& sys,
                  const std::map<std::string, std::vector<double>>& prices);

void write_losses(const std::string& path, const grid::NetworkModel& net,
                  const grid::NetworkState& state);

/// Network state as a bus/line/slack CSV triple under the given prefix.
void write_state(const std::string& prefix, const grid::NetworkModel& net,
                 const grid::NetworkState& state);
grid::NetworkState read_state(const std::string& prefix, const grid::NetworkModel& net);

void write_comparison(const std::string& path, const coord::SettlementReport& baseline,
                      const coord::SettlementReport& proposed);

}  // namespace evcoord::scenario
