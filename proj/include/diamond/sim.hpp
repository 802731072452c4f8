#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diamond/nb3r.hpp"
#include "diamond/net.hpp"
#include "diamond/rng.hpp"
#include "diamond/train.hpp"

namespace diamond {

struct AttributeRanges {
    double bandwidth_lo_mhz = 5;
    double bandwidth_hi_mhz = 20;
    double power_lo_mw = 50;
    double power_hi_mw = 200;
    double noise_mw = 1e-3;
};

// V nodes uniform in a square of the given side; a random spanning tree
// guarantees connectivity, the remaining undirected edges are drawn uniformly
// among unused pairs. Every undirected edge becomes two directed links.
NetworkGraph random_topology(int v, int e_undirected, double area_m, Rng& rng,
                             const AttributeRanges& ranges);

// "nsfnet" (V=14, 21 undirected edges) or "geant2" (V=24, 37 undirected
// edges), expanded to directed links with default attributes.
NetworkGraph load_preset(const std::string& name);

void randomize_link_attributes(NetworkGraph& g, const AttributeRanges& ranges, Rng& rng);

std::vector<FlowDemand> random_flows(const NetworkGraph& g, int n, double payload_lo_mbit,
                                     double payload_hi_mbit, Rng& rng);

inline constexpr int kDelayCapSteps = 10000;

struct DeliveryResult {
    std::vector<double> delay_steps;
    std::vector<bool> capped;
    double max_delay = 0;
};

// Discrete-time delivery: each timestep every unfinished flow moves one
// step's worth of payload at its current bottleneck rate; finished flows stop
// transmitting, so the survivors speed up. Unfinished flows at the cap are
// flagged.
DeliveryResult simulate_delivery(const NetworkGraph& g, const PathAllocation& alloc,
                                 const InterferenceMap& map,
                                 const std::vector<FlowDemand>& flows);

enum class Method { diamond, grrl_only, nb3r_only, ospf, rb, oracle };

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

struct TopologySource {
    enum class Kind { random, file, preset } kind = Kind::random;
    int v = 10;
    int e = 15;
    double area_m = 1000;
    std::string path;         // file kind
    std::string preset_name;  // preset kind
    AttributeRanges ranges;
};

struct ExperimentConfig {
    TopologySource topology;
    int num_flows = 10;
    double payload_lo_mbit = 1;
    double payload_hi_mbit = 100;
    int k = 4;
    std::vector<std::uint64_t> seeds;
    std::vector<Method> methods;
    UtilityKind utility_kind = UtilityKind::rate;
    double range_m = 500;
    double pathloss_exp = 2;
    UpdateSchedule schedule;   // nu.delta < 0 requests delta = N * u_max per instance
    int rb_trials = 100;
    double alpha = 1.0;        // reward mix used by GRRL rollouts
    std::string checkpoint;    // required when diamond / grrl_only requested
    bool write_traces = false;
};

ExperimentConfig load_experiment_config(const std::string& json_path);

struct MethodMetrics {
    double avg_flow_rate_mbps = 0;
    double max_delay_steps = 0;
    double network_utility_value = 0;
    double wall_ms = 0;
    double nb3r_rounds = 0;
    int seeds = 0;
};

struct RunMetrics {
    std::map<Method, MethodMetrics> per_method;
};

// Runs every requested method on every seed, writes per_seed.csv and
// summary.csv into out_dir, and returns the aggregated means. Partial rows are
// flushed before an error propagates.
RunMetrics run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace diamond
