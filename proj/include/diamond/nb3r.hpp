#pragma once

#include <functional>
#include <string>
#include <vector>

#include "diamond/linalg.hpp"
#include "diamond/net.hpp"
#include "diamond/rng.hpp"

namespace diamond {

enum class ScheduleMode {
    backoff,         // contention backoff; non-neighbor flows may update together
    single_uniform,  // exactly one uniformly chosen flow per round
};

struct NuSchedule {
    bool cooling = false;  // nu(t) = ln(t) / delta when true
    double fixed_nu = 1.0;
    double delta = 1.0;
};

struct UpdateSchedule {
    ScheduleMode mode = ScheduleMode::backoff;
    double backoff_horizon = 1.0;  // upper end of the uniform backoff draw
    int max_rounds = 1000;
    int stall_window = 20;  // stop after this many rounds without a switch
    NuSchedule nu;
};

// U_n: the flow's own utility plus the utilities of its interfering neighbors.
double collaborative_utility(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                             const InterferenceMap& map, const UtilityConfig& cfg);

// Noisy-best-response pmf over the flow's candidate routes, all other flows
// frozen: P(i) proportional to exp(nu * U_n(path_i, sigma_{-n})).
Vec nbr_distribution(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                     const InterferenceMap& map, const UtilityConfig& cfg, double nu);

// The set of flows allowed to update this round. In backoff mode a flow joins
// when its backoff beats every interfering neighbor's, so the result is an
// independent set of the flow-interference graph.
std::vector<int> select_optimizing_flows(int flow_count,
                                         const std::vector<std::vector<int>>& flow_neighbors,
                                         const UpdateSchedule& schedule, Rng& rng);

// Cooling schedule nu(t) = ln(t) / delta, t >= 1.
double cooling_nu(double t, double delta);

// The annealing constant: an upper bound on any unilateral potential change.
inline double annealing_delta(int flow_count, double u_max) { return flow_count * u_max; }

struct Nb3rResult {
    PathAllocation best;   // highest-utility profile visited, initial included
    PathAllocation last;   // chain state at termination
    double best_utility = 0;
    int rounds = 0;

    struct TraceRow {
        int round;
        double nu;
        double utility;
        int switches;
    };
    std::vector<TraceRow> trace;
};

// Called after each round with the chain state of that round.
using RoundObserver = std::function<void(int round, const std::vector<int>& chosen)>;

// The refinement loop. Requires a complete initial allocation and a map with
// flow neighbors computed. Within a round, every selected flow samples against
// the round-start profile; the draws are then applied together, which makes
// the round order-independent.
Nb3rResult nb3r_run(const NetworkGraph& g, PathAllocation initial, const InterferenceMap& map,
                    const UtilityConfig& cfg, const UpdateSchedule& schedule, Rng& rng,
                    const RoundObserver& observer = {});

// CSV with header round,nu,network_utility,num_switches.
void write_trace_csv(const std::vector<Nb3rResult::TraceRow>& trace, const std::string& path);

}  // namespace diamond
