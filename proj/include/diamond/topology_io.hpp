#pragma once

#include <string>
#include <vector>

#include "diamond/net.hpp"

namespace diamond {

// Topology file contents: graph, flow demands and interference parameters.
// JSON schema (link ids are assigned by file order):
//   { "nodes": [{"id", "x", "y"}],
//     "links": [{"tx", "rx", "bandwidth_mhz", "tx_power_mw", "noise_mw"}],
//     "flows": [{"src", "dst", "payload_mbit"}],
//     "interference": {"range_m", "pathloss_exp"} }
struct TopologyFile {
    NetworkGraph graph;
    std::vector<FlowDemand> flows;
    double range_m = 500;
    double pathloss_exp = 2;
};

TopologyFile load_topology(const std::string& path);
void save_topology(const TopologyFile& topo, const std::string& path);

}  // namespace diamond
