#include "diamond/path_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace diamond {

LinkWeightVector unit_weights(const NetworkGraph& g) {
    return LinkWeightVector(g.link_count(), 1.0);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dijkstra distances from `start`, traversing links forward or backward.
std::vector<double> dijkstra_dist(int start, const NetworkGraph& g,
                                  const LinkWeightVector& w, bool forward) {
    std::vector<double> dist(g.node_count(), kInf);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[start] = 0;
    queue.emplace(0.0, start);
    while (!queue.empty()) {
        auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        const auto& adj = forward ? g.out_links[u] : g.in_links[u];
        for (int lid : adj) {
            const int v = forward ? g.links[lid].rx : g.links[lid].tx;
            const double nd = d + w[lid];
            if (nd < dist[v]) {
                dist[v] = nd;
                queue.emplace(nd, v);
            }
        }
    }
    return dist;
}

}  // namespace

Path shortest_path(int src, int dst, const NetworkGraph& g, const LinkWeightVector& weights) {
    if (src == dst) throw ContractViolation("shortest_path requires src != dst");
    const std::vector<double> from_src = dijkstra_dist(src, g, weights, true);
    if (from_src[dst] == kInf)
        throw UnreachableDestination("no route from node " + std::to_string(src) + " to node " +
                                     std::to_string(dst));
    const std::vector<double> to_dst = dijkstra_dist(dst, g, weights, false);
    const double total = from_src[dst];
    const double eps = 1e-9 * std::max(1.0, total);

    // Walk the shortest-path DAG greedily: at each node take the edge toward
    // the smallest next node id, which yields the lexicographically smallest
    // node sequence among all minimum-weight routes.
    Path path;
    int cur = src;
    int guard = g.link_count() + 1;
    while (cur != dst) {
        if (--guard < 0) throw ContractViolation("shortest-path walk failed to terminate");
        int best_link = -1;
        for (int lid : g.out_links[cur]) {
            const int v = g.links[lid].rx;
            if (std::abs(from_src[cur] + weights[lid] - from_src[v]) > eps) continue;
            if (std::abs(from_src[v] + to_dst[v] - total) > eps) continue;
            if (best_link == -1 || v < g.links[best_link].rx ||
                (v == g.links[best_link].rx &&
                 (weights[lid] < weights[best_link] ||
                  (weights[lid] == weights[best_link] && lid < best_link))))
                best_link = lid;
        }
        if (best_link == -1) throw ContractViolation("shortest-path DAG walk lost the route");
        path.push_back(best_link);
        cur = g.links[best_link].rx;
    }
    return path;
}

double link_distance(int a, int b, const NetworkGraph& g) {
    const auto [ax, ay] = g.link_midpoint(a);
    const auto [bx, by] = g.link_midpoint(b);
    return std::hypot(ax - bx, ay - by);
}

ActionSpace build_action_space(const FlowDemand& flow, int k, const NetworkGraph& g) {
    if (k < 1) throw ContractViolation("action space size must be >= 1");
    ActionSpace space;
    LinkWeightVector weights = unit_weights(g);
    // Bounded number of extra extractions when the reweighted shortest path
    // keeps landing on an already selected route.
    int retries = 4 * k + 8;

    while (static_cast<int>(space.paths.size()) < k) {
        const Path phi = shortest_path(flow.src, flow.dst, g, weights);
        const bool fresh =
            std::find(space.paths.begin(), space.paths.end(), phi) == space.paths.end();
        if (fresh) space.paths.push_back(phi);

        // Every link is pushed away from the selected route: increment by the
        // inverse distance to the nearest link of phi, floored at 1 m.
        for (int eps_link = 0; eps_link < g.link_count(); ++eps_link) {
            double nearest = kInf;
            for (int l : phi) nearest = std::min(nearest, link_distance(l, eps_link, g));
            weights[eps_link] += 1.0 / std::max(nearest, kLinkDistanceFloorM);
        }

        if (!fresh && --retries < 0) break;
    }

    while (static_cast<int>(space.paths.size()) < k) {
        space.paths.push_back(space.paths.back());
        space.padded = true;
    }
    return space;
}

std::vector<ActionSpace> build_action_spaces(const std::vector<FlowDemand>& flows, int k,
                                             const NetworkGraph& g) {
    std::vector<ActionSpace> spaces;
    spaces.reserve(flows.size());
    for (const FlowDemand& f : flows) spaces.push_back(build_action_space(f, k, g));
    return spaces;
}

}  // namespace diamond
