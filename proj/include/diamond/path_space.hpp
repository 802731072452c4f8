#pragma once

#include <vector>

#include "diamond/net.hpp"

namespace diamond {

// Per-link weights for the diverse-path construction. Unit-initialized and
// never decreasing while a flow's route set is built.
using LinkWeightVector = std::vector<double>;

LinkWeightVector unit_weights(const NetworkGraph& g);

// Minimum-total-weight simple path from src to dst. Ties are broken toward the
// lexicographically smallest node-id sequence; among parallel links the lowest
// link id wins. Throws UnreachableDestination when no route exists.
Path shortest_path(int src, int dst, const NetworkGraph& g, const LinkWeightVector& weights);

// Euclidean distance between the two links' midpoints.
double link_distance(int a, int b, const NetworkGraph& g);

inline constexpr double kLinkDistanceFloorM = 1.0;

// Builds the K-route action space for one flow: repeated shortest-path
// extraction where, after each selection, every link weight grows by the
// inverse distance to the selected path (floored at 1 m, so the path's own
// links take the maximal increment). Distinct routes are preferred; when the
// graph runs out of them the list is padded with the last distinct route and
// flagged.
ActionSpace build_action_space(const FlowDemand& flow, int k, const NetworkGraph& g);

std::vector<ActionSpace> build_action_spaces(const std::vector<FlowDemand>& flows, int k,
                                             const NetworkGraph& g);

}  // namespace diamond
