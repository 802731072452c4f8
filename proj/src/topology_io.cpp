#include "diamond/topology_io.hpp"

#include <fstream>

#include "json.hpp"

namespace diamond {

using nlohmann::json;

TopologyFile load_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open topology file: " + path);
    json j = json::parse(in);

    TopologyFile topo;
    for (const auto& jn : j.at("nodes")) {
        const int id = jn.at("id").get<int>();
        if (id != topo.graph.node_count())
            throw ContractViolation("node ids must appear in order 0..V-1: " + path);
        topo.graph.add_node(jn.at("x").get<double>(), jn.at("y").get<double>());
    }
    for (const auto& jl : j.at("links")) {
        topo.graph.add_link(jl.at("tx").get<int>(), jl.at("rx").get<int>(),
                            jl.at("bandwidth_mhz").get<double>(), jl.at("tx_power_mw").get<double>(),
                            jl.at("noise_mw").get<double>());
    }
    if (j.contains("flows")) {
        for (const auto& jf : j.at("flows")) {
            FlowDemand f;
            f.id = static_cast<int>(topo.flows.size());
            f.src = jf.at("src").get<int>();
            f.dst = jf.at("dst").get<int>();
            f.payload_mbit = jf.at("payload_mbit").get<double>();
            if (f.src == f.dst) throw ContractViolation("flow src == dst");
            topo.flows.push_back(f);
        }
    }
    if (j.contains("interference")) {
        topo.range_m = j.at("interference").at("range_m").get<double>();
        topo.pathloss_exp = j.at("interference").at("pathloss_exp").get<double>();
    }
    topo.graph.validate();
    return topo;
}

void save_topology(const TopologyFile& topo, const std::string& path) {
    json j;
    j["nodes"] = json::array();
    for (const Node& n : topo.graph.nodes)
        j["nodes"].push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
    j["links"] = json::array();
    for (const Link& l : topo.graph.links)
        j["links"].push_back({{"tx", l.tx},
                              {"rx", l.rx},
                              {"bandwidth_mhz", l.bandwidth_mhz},
                              {"tx_power_mw", l.tx_power_mw},
                              {"noise_mw", l.noise_mw}});
    j["flows"] = json::array();
    for (const FlowDemand& f : topo.flows)
        j["flows"].push_back({{"src", f.src}, {"dst", f.dst}, {"payload_mbit", f.payload_mbit}});
    j["interference"] = {{"range_m", topo.range_m}, {"pathloss_exp", topo.pathloss_exp}};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write topology file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace diamond
