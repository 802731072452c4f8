// Shared helpers for the test suites: tiny graph builders plus independent
// reference implementations of the physical-layer math. The references are
// written from the formulas with plain loops and never call the library's
// utility chain, so they can serve as oracles for it.
#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "diamond/net.hpp"
#include "diamond/rng.hpp"

namespace testref {

using diamond::ActionSpace;
using diamond::FlowDemand;
using diamond::InterferenceMap;
using diamond::NetworkGraph;
using diamond::Path;
using diamond::PathAllocation;
using diamond::Rng;
using diamond::UtilityConfig;
using diamond::UtilityKind;

inline double dist(const NetworkGraph& g, int a, int b) {
    const double dx = g.nodes[a].x - g.nodes[b].x;
    const double dy = g.nodes[a].y - g.nodes[b].y;
    return std::sqrt(dx * dx + dy * dy);
}

// Reference chain: active links, interference, SINR, shared rate, bottleneck
// rate, utility, sum utility. Recomputed from scratch on every call.
struct Reference {
    const NetworkGraph& g;
    double range;
    double alpha_exp;

    double pl(double power, double d) const { return power * std::pow(std::max(d, 1.0), -alpha_exp); }

    std::vector<std::set<int>> users(const PathAllocation& alloc) const {
        std::vector<std::set<int>> u(g.link_count());
        for (int f = 0; f < alloc.flow_count(); ++f) {
            if (!alloc.assigned(f)) continue;
            for (int l : alloc.path_of(f)) u[l].insert(f);
        }
        return u;
    }

    double interference(int link, const PathAllocation& alloc) const {
        const auto u = users(alloc);
        double total = 0;
        for (int e = 0; e < g.link_count(); ++e) {
            if (e == link) continue;
            const double d = dist(g, g.links[e].tx, g.links[link].rx);
            if (d > range) continue;
            bool active = false;
            for (int f : u[e])
                if (!u[link].count(f)) active = true;
            if (active) total += pl(g.links[e].tx_power_mw, d);
        }
        return total;
    }

    double link_rate(int link, const PathAllocation& alloc) const {
        const double rx = pl(g.links[link].tx_power_mw, dist(g, g.links[link].tx, g.links[link].rx));
        const double s = rx / (interference(link, alloc) + g.links[link].noise_mw);
        const double shannon = g.links[link].bandwidth_mhz * std::log2(1.0 + s);
        const auto u = users(alloc);
        const int sharers = static_cast<int>(u[link].size());
        return sharers > 1 ? shannon / sharers : shannon;
    }

    double flow_rate(int flow, const PathAllocation& alloc) const {
        double r = std::numeric_limits<double>::infinity();
        for (int l : alloc.path_of(flow)) r = std::min(r, link_rate(l, alloc));
        return r;
    }

    double flow_utility(int flow, const PathAllocation& alloc, const UtilityConfig& cfg) const {
        const double r = flow_rate(flow, alloc);
        double v = cfg.kind == UtilityKind::rate ? r : std::log2(std::max(r, 1e-6));
        return std::min(v, cfg.u_max);
    }

    double network_utility(const PathAllocation& alloc, const UtilityConfig& cfg) const {
        double total = 0;
        for (int f = 0; f < alloc.flow_count(); ++f) total += flow_utility(f, alloc, cfg);
        return total;
    }
};

// Enumerates every simple path (as link id lists) from src to dst by DFS.
inline void all_simple_paths_rec(const NetworkGraph& g, int cur, int dst, std::vector<char>& seen,
                                 Path& links, std::vector<Path>& out) {
    if (cur == dst) {
        out.push_back(links);
        return;
    }
    for (int lid : g.out_links[cur]) {
        const int v = g.links[lid].rx;
        if (seen[v]) continue;
        seen[v] = 1;
        links.push_back(lid);
        all_simple_paths_rec(g, v, dst, seen, links, out);
        links.pop_back();
        seen[v] = 0;
    }
}

inline std::vector<Path> all_simple_paths(const NetworkGraph& g, int src, int dst) {
    std::vector<Path> out;
    std::vector<char> seen(g.node_count(), 0);
    seen[src] = 1;
    Path links;
    all_simple_paths_rec(g, src, dst, seen, links, out);
    return out;
}

inline std::vector<int> node_sequence(const NetworkGraph& g, int src, const Path& links) {
    std::vector<int> nodes{src};
    for (int l : links) nodes.push_back(g.links[l].rx);
    return nodes;
}

// Small random connected instance for property tests: v nodes in a square,
// tree + extra bidirectional pairs.
inline NetworkGraph random_test_graph(int v, int extra_pairs, double area, Rng& rng) {
    NetworkGraph g;
    for (int i = 0; i < v; ++i) g.add_node(rng.uniform(0, area), rng.uniform(0, area));
    auto add_pair = [&](int a, int b) {
        g.add_link(a, b, rng.uniform(1, 10), rng.uniform(50, 200), 1e-3);
        g.add_link(b, a, rng.uniform(1, 10), rng.uniform(50, 200), 1e-3);
    };
    std::set<std::pair<int, int>> used;
    for (int i = 1; i < v; ++i) {
        const int j = rng.index(i);
        add_pair(i, j);
        used.insert({std::min(i, j), std::max(i, j)});
    }
    int remaining = extra_pairs;
    int guard = 200;
    while (remaining > 0 && guard-- > 0) {
        const int a = rng.index(v);
        const int b = rng.index(v);
        if (a == b || used.count({std::min(a, b), std::max(a, b)})) continue;
        add_pair(a, b);
        used.insert({std::min(a, b), std::max(a, b)});
        --remaining;
    }
    return g;
}

inline std::vector<FlowDemand> random_test_flows(const NetworkGraph& g, int n, Rng& rng) {
    std::vector<FlowDemand> flows;
    for (int i = 0; i < n; ++i) {
        FlowDemand f;
        f.id = i;
        f.src = rng.index(g.node_count());
        do {
            f.dst = rng.index(g.node_count());
        } while (f.dst == f.src);
        f.payload_mbit = rng.uniform(1, 100);
        flows.push_back(f);
    }
    return flows;
}

}  // namespace testref
