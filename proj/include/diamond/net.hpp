#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace diamond {

struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct UnreachableDestination : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Node {
    int id = 0;
    double x = 0;  // meters
    double y = 0;
};

struct Link {
    int id = 0;
    int tx = 0;  // transmitter node
    int rx = 0;  // receiver node
    double bandwidth_mhz = 1.0;
    double tx_power_mw = 1.0;
    double noise_mw = 1e-3;  // AWGN power at the receiver
};

struct FlowDemand {
    int id = 0;
    int src = 0;
    int dst = 0;
    double payload_mbit = 1.0;
};

// A route is an ordered list of link ids from source to destination.
using Path = std::vector<int>;

// Directed connected graph with geometric node positions.
struct NetworkGraph {
    std::vector<Node> nodes;
    std::vector<Link> links;
    std::vector<std::vector<int>> out_links;  // per node, link ids leaving it
    std::vector<std::vector<int>> in_links;   // per node, link ids entering it

    int node_count() const { return static_cast<int>(nodes.size()); }
    int link_count() const { return static_cast<int>(links.size()); }

    int add_node(double x, double y);
    int add_link(int tx, int rx, double bandwidth_mhz, double tx_power_mw, double noise_mw);
    void rebuild_adjacency();

    double link_length(int link) const;
    std::pair<double, double> link_midpoint(int link) const;

    // Strong connectivity over the directed links.
    bool is_connected() const;
    // Throws ContractViolation when a structural invariant is broken.
    void validate() const;
};

double node_distance(const NetworkGraph& g, int a, int b);

inline constexpr int kUnassigned = -1;

struct ActionSpace {
    std::vector<Path> paths;
    bool padded = false;  // graph had fewer distinct routes than requested; tail repeats
};

// The strategy profile: one chosen path index per flow, plus each flow's
// candidate route set A_n.
struct PathAllocation {
    std::vector<ActionSpace> spaces;
    std::vector<int> chosen;  // index into spaces[n].paths, or kUnassigned

    int flow_count() const { return static_cast<int>(spaces.size()); }
    bool assigned(int flow) const { return chosen[flow] != kUnassigned; }
    bool complete() const;
    const Path& path_of(int flow) const;

    static PathAllocation from_spaces(std::vector<ActionSpace> spaces);
};

// Per-link interference structure plus flow-level neighbor sets.
struct InterferenceMap {
    double range_m = 0;
    double pathloss_exp = 2;
    // Per link l: (interfering link e, interference power I_{l,e} in mW) with
    // e's transmitter within range of l's receiver. Sorted by e.
    std::vector<std::vector<std::pair<int, double>>> link_neighbors;
    // Received signal power per link over its own tx->rx distance.
    std::vector<double> rx_power_mw;
    // N_n per flow, sorted. Filled by recompute_flow_neighbors once action
    // spaces exist.
    std::vector<std::vector<int>> flow_neighbors;

    bool is_link_neighbor(int l, int e) const;
    double pair_power(int l, int e) const;  // 0 when e is not a neighbor of l
};

// Path-loss attenuated power over distance d, with a 1 m floor to avoid the
// singularity at zero distance.
double pathloss_power(double tx_power_mw, double dist_m, double alpha);

InterferenceMap build_interference_map(const NetworkGraph& g, double range_m, double pathloss_exp);

// Flow-level neighbor sets N_n from the action spaces: flows are neighbors
// when a link of one's space interferes with a link of the other's, in either
// direction, or when the two spaces can occupy a common link. Symmetric by
// construction, which the potential-game argument requires.
void recompute_flow_neighbors(InterferenceMap& map, const std::vector<ActionSpace>& spaces,
                              int link_count);

// Which flows currently occupy each link, derived from the chosen paths.
struct LinkLoad {
    std::vector<std::vector<int>> users;  // per link, sorted flow ids

    static LinkLoad from(const PathAllocation& alloc, int link_count);
    bool uses(int link, int flow) const;
    int count(int link) const { return static_cast<int>(users[link].size()); }
};

enum class UtilityKind { rate, log_rate };

struct UtilityConfig {
    UtilityKind kind = UtilityKind::rate;
    double u_max = std::numeric_limits<double>::infinity();
};

inline constexpr double kRateFloorMbps = 1e-6;

// Largest interference-free single-link rate; a valid u_max for the instance.
double default_u_max(const NetworkGraph& g, const InterferenceMap& map, UtilityKind kind);

// Cumulative interference power (mW) at the receiver of `link`. A neighboring
// link e contributes if some flow whose chosen path uses e does not itself use
// `link` (a flow's own path links do not interfere with each other).
double interference_at_link(int link, const LinkLoad& load, const InterferenceMap& map);
double interference_at_link(int link, const PathAllocation& alloc, const InterferenceMap& map);

double sinr(const NetworkGraph& g, int link, const LinkLoad& load, const InterferenceMap& map);
double sinr(const NetworkGraph& g, int link, const PathAllocation& alloc, const InterferenceMap& map);

// Shannon rate B*log2(1+SINR), split equally among the flows sharing the link.
double link_rate(const NetworkGraph& g, int link, const LinkLoad& load, const InterferenceMap& map);
double link_rate(const NetworkGraph& g, int link, const PathAllocation& alloc, const InterferenceMap& map);

// Bottleneck rate: minimum link rate along the flow's chosen path.
double flow_rate(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                 const LinkLoad& load, const InterferenceMap& map);
double flow_rate(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                 const InterferenceMap& map);

double flow_utility(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                    const LinkLoad& load, const InterferenceMap& map, const UtilityConfig& cfg);
double flow_utility(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                    const InterferenceMap& map, const UtilityConfig& cfg);

// Sum of flow utilities. Serves both as the optimization objective and as the
// exact potential of the strategy game.
double network_utility(const NetworkGraph& g, const PathAllocation& alloc,
                       const InterferenceMap& map, const UtilityConfig& cfg);

}  // namespace diamond
