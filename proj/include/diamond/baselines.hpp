#pragma once

#include <string>
#include <vector>

#include "diamond/linalg.hpp"
#include "diamond/net.hpp"
#include "diamond/path_space.hpp"
#include "diamond/rng.hpp"

namespace diamond {

struct SearchSpaceTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr long kOracleProfileGuard = 1'000'000;

// Every flow takes the hop-count shortest path, interference ignored. The path
// is the first entry of the flow's action space by construction, so the chosen
// index is 0.
PathAllocation ospf_allocate(const NetworkGraph& g, const std::vector<FlowDemand>& flows);
PathAllocation ospf_allocate(std::vector<ActionSpace> spaces);

// Best of `trials` uniform profiles by network utility.
PathAllocation random_baseline_allocate(const NetworkGraph& g, std::vector<ActionSpace> spaces,
                                        const InterferenceMap& map, const UtilityConfig& cfg,
                                        int trials, Rng& rng);

struct OracleResult {
    std::vector<int> best_choice;
    double best_utility = 0;
    std::vector<int> space_sizes;  // radix per flow for rank conversion
    std::vector<double> table;     // utility per profile rank when requested
};

// Exhaustive search over every profile, lexicographic tie-break. Guarded:
// throws SearchSpaceTooLarge beyond kOracleProfileGuard profiles.
OracleResult brute_force_optimum(const NetworkGraph& g, const std::vector<ActionSpace>& spaces,
                                 const InterferenceMap& map, const UtilityConfig& cfg,
                                 bool want_table = false);
OracleResult brute_force_optimum(const NetworkGraph& g, const std::vector<FlowDemand>& flows,
                                 int k, const InterferenceMap& map, const UtilityConfig& cfg,
                                 bool want_table = false);

// Lexicographic profile rank (first flow most significant).
long profile_rank(const std::vector<int>& choice, const std::vector<int>& sizes);
std::vector<int> profile_from_rank(long rank, const std::vector<int>& sizes);

// P(sigma) proportional to exp(nu * utility(sigma)) over the full table.
Vec gibbs_distribution(const Vec& table, double nu);

// CSV with header profile_indices,utility; indices joined by '-'.
void write_oracle_csv(const OracleResult& result, const std::string& path);

}  // namespace diamond
