#include "diamond/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace diamond {

PathAllocation ospf_allocate(const NetworkGraph& g, const std::vector<FlowDemand>& flows) {
    std::vector<ActionSpace> spaces;
    spaces.reserve(flows.size());
    for (const FlowDemand& f : flows) spaces.push_back(build_action_space(f, 1, g));
    return ospf_allocate(std::move(spaces));
}

PathAllocation ospf_allocate(std::vector<ActionSpace> spaces) {
    PathAllocation alloc = PathAllocation::from_spaces(std::move(spaces));
    std::fill(alloc.chosen.begin(), alloc.chosen.end(), 0);
    return alloc;
}

PathAllocation random_baseline_allocate(const NetworkGraph& g, std::vector<ActionSpace> spaces,
                                        const InterferenceMap& map, const UtilityConfig& cfg,
                                        int trials, Rng& rng) {
    if (trials < 1) throw ContractViolation("random baseline needs at least one trial");
    PathAllocation alloc = PathAllocation::from_spaces(std::move(spaces));
    std::vector<int> best_choice(alloc.flow_count(), 0);
    double best = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        for (int f = 0; f < alloc.flow_count(); ++f)
            alloc.chosen[f] = rng.index(alloc.spaces[f].paths.size());
        const double u = network_utility(g, alloc, map, cfg);
        if (u > best) {
            best = u;
            best_choice = alloc.chosen;
        }
    }
    alloc.chosen = best_choice;
    return alloc;
}

long profile_rank(const std::vector<int>& choice, const std::vector<int>& sizes) {
    long rank = 0;
    for (std::size_t f = 0; f < sizes.size(); ++f) rank = rank * sizes[f] + choice[f];
    return rank;
}

std::vector<int> profile_from_rank(long rank, const std::vector<int>& sizes) {
    std::vector<int> choice(sizes.size(), 0);
    for (int f = static_cast<int>(sizes.size()) - 1; f >= 0; --f) {
        choice[f] = static_cast<int>(rank % sizes[f]);
        rank /= sizes[f];
    }
    return choice;
}

OracleResult brute_force_optimum(const NetworkGraph& g, const std::vector<ActionSpace>& spaces,
                                 const InterferenceMap& map, const UtilityConfig& cfg,
                                 bool want_table) {
    OracleResult result;
    long total = 1;
    for (const ActionSpace& s : spaces) {
        result.space_sizes.push_back(static_cast<int>(s.paths.size()));
        if (total > kOracleProfileGuard / std::max<int>(1, result.space_sizes.back()))
            throw SearchSpaceTooLarge("profile space exceeds the enumeration guard");
        total *= result.space_sizes.back();
    }
    if (total > kOracleProfileGuard)
        throw SearchSpaceTooLarge("profile space exceeds the enumeration guard");

    PathAllocation alloc = PathAllocation::from_spaces(spaces);
    std::fill(alloc.chosen.begin(), alloc.chosen.end(), 0);
    if (want_table) result.table.reserve(total);

    result.best_utility = -std::numeric_limits<double>::infinity();
    for (long rank = 0; rank < total; ++rank) {
        const double u = network_utility(g, alloc, map, cfg);
        if (want_table) result.table.push_back(u);
        // Lexicographic enumeration plus a strict comparison keeps the
        // lexicographically smallest profile among ties.
        if (u > result.best_utility) {
            result.best_utility = u;
            result.best_choice = alloc.chosen;
        }
        // Odometer increment.
        for (int f = static_cast<int>(spaces.size()) - 1; f >= 0; --f) {
            if (++alloc.chosen[f] < result.space_sizes[f]) break;
            alloc.chosen[f] = 0;
        }
    }
    return result;
}

OracleResult brute_force_optimum(const NetworkGraph& g, const std::vector<FlowDemand>& flows,
                                 int k, const InterferenceMap& map, const UtilityConfig& cfg,
                                 bool want_table) {
    return brute_force_optimum(g, build_action_spaces(flows, k, g), map, cfg, want_table);
}

Vec gibbs_distribution(const Vec& table, double nu) {
    if (table.empty()) throw ContractViolation("gibbs_distribution needs a non-empty table");
    Vec scaled(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) scaled[i] = nu * table[i];
    return softmax(scaled);
}

void write_oracle_csv(const OracleResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write oracle table: " + path);
    out << "profile_indices,utility\n";
    for (std::size_t rank = 0; rank < result.table.size(); ++rank) {
        const std::vector<int> choice = profile_from_rank(static_cast<long>(rank), result.space_sizes);
        for (std::size_t f = 0; f < choice.size(); ++f) out << (f ? "-" : "") << choice[f];
        out << ',' << result.table[rank] << '\n';
    }
}

}  // namespace diamond
