#include "diamond/net.hpp"

#include <algorithm>
#include <cmath>

namespace diamond {

int NetworkGraph::add_node(double x, double y) {
    const int id = node_count();
    nodes.push_back(Node{id, x, y});
    out_links.emplace_back();
    in_links.emplace_back();
    return id;
}

int NetworkGraph::add_link(int tx, int rx, double bandwidth_mhz, double tx_power_mw,
                           double noise_mw) {
    const int id = link_count();
    links.push_back(Link{id, tx, rx, bandwidth_mhz, tx_power_mw, noise_mw});
    if (static_cast<int>(out_links.size()) == node_count()) {
        out_links[tx].push_back(id);
        in_links[rx].push_back(id);
    }
    return id;
}

void NetworkGraph::rebuild_adjacency() {
    out_links.assign(nodes.size(), {});
    in_links.assign(nodes.size(), {});
    for (const Link& l : links) {
        out_links[l.tx].push_back(l.id);
        in_links[l.rx].push_back(l.id);
    }
}

double NetworkGraph::link_length(int link) const {
    const Link& l = links[link];
    return node_distance(*this, l.tx, l.rx);
}

std::pair<double, double> NetworkGraph::link_midpoint(int link) const {
    const Link& l = links[link];
    const Node& a = nodes[l.tx];
    const Node& b = nodes[l.rx];
    return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

namespace {

// Marks every node reachable from `start` following the given adjacency.
int reach_count(const std::vector<std::vector<int>>& adj, const std::vector<Link>& links,
                bool forward, int start, int n) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int lid : adj[u]) {
            const int v = forward ? links[lid].rx : links[lid].tx;
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count;
}

}  // namespace

bool NetworkGraph::is_connected() const {
    const int n = node_count();
    if (n == 0) return false;
    if (out_links.size() != nodes.size()) return false;
    return reach_count(out_links, links, true, 0, n) == n &&
           reach_count(in_links, links, false, 0, n) == n;
}

void NetworkGraph::validate() const {
    const int n = node_count();
    for (int i = 0; i < n; ++i) {
        if (nodes[i].id != i)
            throw ContractViolation("node ids must be contiguous integers starting at 0");
    }
    for (const Link& l : links) {
        if (l.tx < 0 || l.tx >= n || l.rx < 0 || l.rx >= n)
            throw ContractViolation("link endpoint out of range");
        if (l.tx == l.rx) throw ContractViolation("self-loop link");
        if (!(l.bandwidth_mhz > 0) || !(l.tx_power_mw > 0) || !(l.noise_mw > 0))
            throw ContractViolation("link attributes must be positive");
    }
    if (!is_connected()) throw ContractViolation("graph is not connected");
}

double node_distance(const NetworkGraph& g, int a, int b) {
    const double dx = g.nodes[a].x - g.nodes[b].x;
    const double dy = g.nodes[a].y - g.nodes[b].y;
    return std::hypot(dx, dy);
}

bool PathAllocation::complete() const {
    for (int c : chosen)
        if (c == kUnassigned) return false;
    return !chosen.empty() || spaces.empty();
}

const Path& PathAllocation::path_of(int flow) const {
    const int c = chosen[flow];
    if (c == kUnassigned) throw ContractViolation("flow has no chosen path");
    return spaces[flow].paths[c];
}

PathAllocation PathAllocation::from_spaces(std::vector<ActionSpace> spaces) {
    PathAllocation alloc;
    alloc.chosen.assign(spaces.size(), kUnassigned);
    alloc.spaces = std::move(spaces);
    return alloc;
}

bool InterferenceMap::is_link_neighbor(int l, int e) const {
    const auto& v = link_neighbors[l];
    auto it = std::lower_bound(v.begin(), v.end(), e,
                               [](const std::pair<int, double>& p, int key) { return p.first < key; });
    return it != v.end() && it->first == e;
}

double InterferenceMap::pair_power(int l, int e) const {
    const auto& v = link_neighbors[l];
    auto it = std::lower_bound(v.begin(), v.end(), e,
                               [](const std::pair<int, double>& p, int key) { return p.first < key; });
    return (it != v.end() && it->first == e) ? it->second : 0.0;
}

double pathloss_power(double tx_power_mw, double dist_m, double alpha) {
    return tx_power_mw * std::pow(std::max(dist_m, 1.0), -alpha);
}

InterferenceMap build_interference_map(const NetworkGraph& g, double range_m,
                                       double pathloss_exp) {
    if (!(range_m > 0)) throw ContractViolation("interference range must be positive");
    if (!(pathloss_exp >= 1)) throw ContractViolation("pathloss exponent must be >= 1");

    InterferenceMap map;
    map.range_m = range_m;
    map.pathloss_exp = pathloss_exp;
    const int e = g.link_count();
    map.link_neighbors.resize(e);
    map.rx_power_mw.resize(e);
    for (int l = 0; l < e; ++l) {
        map.rx_power_mw[l] = pathloss_power(g.links[l].tx_power_mw, g.link_length(l), pathloss_exp);
        for (int i = 0; i < e; ++i) {
            if (i == l) continue;
            const double d = node_distance(g, g.links[i].tx, g.links[l].rx);
            if (d <= range_m)
                map.link_neighbors[l].emplace_back(i, pathloss_power(g.links[i].tx_power_mw, d, pathloss_exp));
        }
    }
    return map;
}

namespace {

// True when some link of space `a` can disturb space `b`: a shared link, or a
// link of `a` whose transmission lands inside the interference range of a link
// of `b`.
bool space_disturbs(const std::vector<char>& in_a, const std::vector<char>& in_b,
                    const InterferenceMap& map, int link_count) {
    for (int l = 0; l < link_count; ++l) {
        if (!in_b[l]) continue;
        for (const auto& [e, p] : map.link_neighbors[l]) {
            (void)p;
            if (in_a[e]) return true;
        }
    }
    for (int l = 0; l < link_count; ++l)
        if (in_a[l] && in_b[l]) return true;
    return false;
}

}  // namespace

void recompute_flow_neighbors(InterferenceMap& map, const std::vector<ActionSpace>& spaces,
                              int link_count) {
    const int n = static_cast<int>(spaces.size());
    std::vector<std::vector<char>> masks(n, std::vector<char>(link_count, 0));
    for (int f = 0; f < n; ++f)
        for (const Path& p : spaces[f].paths)
            for (int l : p) masks[f][l] = 1;

    map.flow_neighbors.assign(n, {});
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (space_disturbs(masks[a], masks[b], map, link_count) ||
                space_disturbs(masks[b], masks[a], map, link_count)) {
                map.flow_neighbors[a].push_back(b);
                map.flow_neighbors[b].push_back(a);
            }
        }
    }
    for (auto& v : map.flow_neighbors) std::sort(v.begin(), v.end());
}

LinkLoad LinkLoad::from(const PathAllocation& alloc, int link_count) {
    LinkLoad load;
    load.users.assign(link_count, {});
    for (int f = 0; f < alloc.flow_count(); ++f) {
        if (!alloc.assigned(f)) continue;
        for (int l : alloc.path_of(f)) load.users[l].push_back(f);
    }
    for (auto& v : load.users) std::sort(v.begin(), v.end());
    return load;
}

bool LinkLoad::uses(int link, int flow) const {
    const auto& v = users[link];
    return std::binary_search(v.begin(), v.end(), flow);
}

double default_u_max(const NetworkGraph& g, const InterferenceMap& map, UtilityKind kind) {
    double best = 0;
    for (const Link& l : g.links) {
        const double r = l.bandwidth_mhz * std::log2(1.0 + map.rx_power_mw[l.id] / l.noise_mw);
        best = std::max(best, r);
    }
    if (kind == UtilityKind::log_rate) return std::log2(std::max(best, kRateFloorMbps));
    return best;
}

double interference_at_link(int link, const LinkLoad& load, const InterferenceMap& map) {
    if (link < 0 || link >= static_cast<int>(map.link_neighbors.size()))
        throw ContractViolation("unknown link id");
    double total = 0;
    const auto& own_users = load.users[link];
    for (const auto& [e, power] : map.link_neighbors[link]) {
        // e is active for this link iff some flow occupying e does not also
        // route through `link` itself.
        bool active = false;
        for (int f : load.users[e]) {
            if (!std::binary_search(own_users.begin(), own_users.end(), f)) {
                active = true;
                break;
            }
        }
        if (active) total += power;
    }
    return total;
}

double interference_at_link(int link, const PathAllocation& alloc, const InterferenceMap& map) {
    return interference_at_link(link, LinkLoad::from(alloc, static_cast<int>(map.link_neighbors.size())), map);
}

double sinr(const NetworkGraph& g, int link, const LinkLoad& load, const InterferenceMap& map) {
    const double interference = interference_at_link(link, load, map);
    return map.rx_power_mw[link] / (interference + g.links[link].noise_mw);
}

double sinr(const NetworkGraph& g, int link, const PathAllocation& alloc, const InterferenceMap& map) {
    return sinr(g, link, LinkLoad::from(alloc, g.link_count()), map);
}

double link_rate(const NetworkGraph& g, int link, const LinkLoad& load, const InterferenceMap& map) {
    const double shannon = g.links[link].bandwidth_mhz * std::log2(1.0 + sinr(g, link, load, map));
    const int sharers = load.count(link);
    return sharers > 1 ? shannon / sharers : shannon;
}

double link_rate(const NetworkGraph& g, int link, const PathAllocation& alloc, const InterferenceMap& map) {
    return link_rate(g, link, LinkLoad::from(alloc, g.link_count()), map);
}

double flow_rate(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                 const LinkLoad& load, const InterferenceMap& map) {
    const Path& path = alloc.path_of(flow);
    double r = std::numeric_limits<double>::infinity();
    for (int l : path) r = std::min(r, link_rate(g, l, load, map));
    return r;
}

double flow_rate(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                 const InterferenceMap& map) {
    return flow_rate(g, flow, alloc, LinkLoad::from(alloc, g.link_count()), map);
}

double flow_utility(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                    const LinkLoad& load, const InterferenceMap& map, const UtilityConfig& cfg) {
    const double rate = flow_rate(g, flow, alloc, load, map);
    double u = cfg.kind == UtilityKind::rate ? rate : std::log2(std::max(rate, kRateFloorMbps));
    return std::min(u, cfg.u_max);
}

double flow_utility(const NetworkGraph& g, int flow, const PathAllocation& alloc,
                    const InterferenceMap& map, const UtilityConfig& cfg) {
    return flow_utility(g, flow, alloc, LinkLoad::from(alloc, g.link_count()), map, cfg);
}

double network_utility(const NetworkGraph& g, const PathAllocation& alloc,
                       const InterferenceMap& map, const UtilityConfig& cfg) {
    if (!alloc.complete()) throw ContractViolation("network_utility requires a full allocation");
    const LinkLoad load = LinkLoad::from(alloc, g.link_count());
    double total = 0;
    for (int f = 0; f < alloc.flow_count(); ++f) total += flow_utility(g, f, alloc, load, map, cfg);
    return total;
}

}  // namespace diamond
