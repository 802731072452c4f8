#include "diamond/nb3r.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace diamond {

double collaborative_utility(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                             const InterferenceMap& map, const UtilityConfig& cfg) {
    if (map.flow_neighbors.size() != alloc.spaces.size())
        throw ContractViolation("flow neighbors not computed for this allocation");
    const LinkLoad load = LinkLoad::from(alloc, g.link_count());
    double u = flow_utility(g, flow, alloc, load, map, cfg);
    for (int m : map.flow_neighbors[flow]) u += flow_utility(g, m, alloc, load, map, cfg);
    return u;
}

Vec nbr_distribution(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                     const InterferenceMap& map, const UtilityConfig& cfg, double nu) {
    const int k = static_cast<int>(alloc.spaces[flow].paths.size());
    if (k < 1) throw ContractViolation("empty action space");
    PathAllocation work = alloc;
    Vec scaled(k);
    for (int i = 0; i < k; ++i) {
        work.chosen[flow] = i;
        scaled[i] = nu * collaborative_utility(g, flow, work, map, cfg);
    }
    return softmax(scaled);
}

std::vector<int> select_optimizing_flows(int flow_count,
                                         const std::vector<std::vector<int>>& flow_neighbors,
                                         const UpdateSchedule& schedule, Rng& rng) {
    std::vector<int> selected;
    if (flow_count == 0) return selected;

    if (schedule.mode == ScheduleMode::single_uniform) {
        selected.push_back(rng.index(flow_count));
        return selected;
    }

    std::vector<double> backoff(flow_count);
    for (int n = 0; n < flow_count; ++n) backoff[n] = rng.uniform(0.0, schedule.backoff_horizon);
    for (int n = 0; n < flow_count; ++n) {
        bool wins = true;
        for (int m : flow_neighbors[n]) {
            // Equal backoffs have probability zero; the lower flow id wins.
            if (backoff[m] < backoff[n] || (backoff[m] == backoff[n] && m < n)) {
                wins = false;
                break;
            }
        }
        if (wins) selected.push_back(n);
    }
    return selected;
}

double cooling_nu(double t, double delta) {
    if (!(t >= 1)) throw ContractViolation("cooling schedule is defined for t >= 1");
    if (!(delta > 0)) throw ContractViolation("annealing delta must be positive");
    return std::log(t) / delta;
}

Nb3rResult nb3r_run(const NetworkGraph& g, PathAllocation initial, const InterferenceMap& map,
                    const UtilityConfig& cfg, const UpdateSchedule& schedule, Rng& rng,
                    const RoundObserver& observer) {
    if (!initial.complete()) throw ContractViolation("nb3r_run requires a complete allocation");
    if (map.flow_neighbors.size() != initial.spaces.size())
        throw ContractViolation("flow neighbors not computed for this allocation");

    const int n = initial.flow_count();
    Nb3rResult result;
    result.best = initial;
    result.best_utility = network_utility(g, initial, map, cfg);

    PathAllocation alloc = std::move(initial);
    int stall = 0;
    for (int round = 1; round <= schedule.max_rounds; ++round) {
        const double nu = schedule.nu.cooling ? cooling_nu(round, schedule.nu.delta)
                                              : schedule.nu.fixed_nu;
        const std::vector<int> opt = select_optimizing_flows(n, map.flow_neighbors, schedule, rng);

        // Sample every optimizing flow against the round-start profile, then
        // apply the draws together.
        std::vector<std::pair<int, int>> draws;
        draws.reserve(opt.size());
        for (int flow : opt) {
            const Vec pmf = nbr_distribution(g, flow, alloc, map, cfg, nu);
            const double u = rng.uniform01();
            double acc = 0;
            int pick = static_cast<int>(pmf.size()) - 1;
            for (std::size_t i = 0; i < pmf.size(); ++i) {
                acc += pmf[i];
                if (u < acc) {
                    pick = static_cast<int>(i);
                    break;
                }
            }
            draws.emplace_back(flow, pick);
        }

        int switches = 0;
        for (const auto& [flow, pick] : draws) {
            if (alloc.chosen[flow] != pick) ++switches;
            alloc.chosen[flow] = pick;
        }

        const double utility = network_utility(g, alloc, map, cfg);
        if (utility > result.best_utility) {
            result.best_utility = utility;
            result.best = alloc;
        }
        result.trace.push_back({round, nu, utility, switches});
        result.rounds = round;
        if (observer) observer(round, alloc.chosen);

        stall = switches == 0 ? stall + 1 : 0;
        if (stall >= schedule.stall_window) break;
    }

    result.last = std::move(alloc);
    return result;
}

void write_trace_csv(const std::vector<Nb3rResult::TraceRow>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace: " + path);
    out << "round,nu,network_utility,num_switches\n";
    for (const auto& row : trace)
        out << row.round << ',' << row.nu << ',' << row.utility << ',' << row.switches << '\n';
}

}  // namespace diamond
