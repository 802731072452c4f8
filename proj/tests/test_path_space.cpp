#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "diamond/path_space.hpp"
#include "diamond/rng.hpp"
#include "support.hpp"

using namespace diamond;

namespace {

NetworkGraph four_cycle() {
    // 0 - 1
    // |   |
    // 3 - 2   both directions on every edge
    NetworkGraph g;
    g.add_node(0, 0);
    g.add_node(100, 0);
    g.add_node(100, 100);
    g.add_node(0, 100);
    const int edges[4][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    for (const auto& e : edges) {
        g.add_link(e[0], e[1], 1, 100, 1);
        g.add_link(e[1], e[0], 1, 100, 1);
    }
    return g;
}

double path_weight(const Path& p, const LinkWeightVector& w) {
    double total = 0;
    for (int l : p) total += w[l];
    return total;
}

}  // namespace

TEST_CASE("shortest path: tie on a cycle resolves through the lower node id") {
    NetworkGraph g = four_cycle();
    LinkWeightVector w = unit_weights(g);
    const Path p = shortest_path(0, 2, g, w);
    // 0-1-2 and 0-3-2 both cost 2; the node sequence through 1 is smaller.
    const auto nodes = testref::node_sequence(g, 0, p);
    CHECK(nodes == std::vector<int>{0, 1, 2});
}

TEST_CASE("shortest path: weights steer between parallel one-hop routes") {
    NetworkGraph g;
    g.add_node(0, 0);
    g.add_node(50, 0);
    const int cheap = g.add_link(0, 1, 1, 100, 1);
    const int dear = g.add_link(0, 1, 1, 100, 1);
    g.add_link(1, 0, 1, 100, 1);
    LinkWeightVector w = unit_weights(g);
    w[cheap] = 1;
    w[dear] = 10;
    CHECK(shortest_path(0, 1, g, w) == Path{cheap});
    w[cheap] = 10;
    w[dear] = 1;
    CHECK(shortest_path(0, 1, g, w) == Path{dear});
}

TEST_CASE("shortest path: unreachable destination raises") {
    NetworkGraph g;
    g.add_node(0, 0);
    g.add_node(10, 0);
    g.add_node(20, 0);
    g.add_link(0, 1, 1, 100, 1);
    g.add_link(1, 0, 1, 100, 1);
    g.add_link(2, 0, 1, 100, 1);  // 2 can reach 0 but not the reverse
    CHECK_THROWS_AS(shortest_path(0, 2, g, unit_weights(g)), UnreachableDestination);
}

TEST_CASE("shortest path matches exhaustive enumeration on random graphs") {
    Rng rng(101);
    for (int trial = 0; trial < 25; ++trial) {
        NetworkGraph g = testref::random_test_graph(8, 4, 500, rng);
        LinkWeightVector w = unit_weights(g);
        for (double& v : w) v = 1.0 + 9.0 * rng.uniform01();
        const int src = rng.index(8);
        int dst = rng.index(8);
        while (dst == src) dst = rng.index(8);

        const Path got = shortest_path(src, dst, g, w);
        const auto all = testref::all_simple_paths(g, src, dst);
        REQUIRE(!all.empty());

        double best = std::numeric_limits<double>::infinity();
        for (const Path& p : all) best = std::min(best, path_weight(p, w));
        CHECK(path_weight(got, w) == doctest::Approx(best).epsilon(1e-9));

        // Lexicographic tie-break among all optimal candidates.
        std::vector<int> best_nodes;
        for (const Path& p : all) {
            if (path_weight(p, w) > best + 1e-9 * std::max(1.0, best)) continue;
            const auto nodes = testref::node_sequence(g, src, p);
            if (best_nodes.empty() || nodes < best_nodes) best_nodes = nodes;
        }
        CHECK(testref::node_sequence(g, src, got) == best_nodes);
    }
}

TEST_CASE("link distance") {
    NetworkGraph g;
    g.add_node(0, 0);
    g.add_node(0, 0);    // same midpoint for link 0
    g.add_node(3, 4);
    g.add_node(3, 4);
    g.add_link(0, 1, 1, 1, 1);  // midpoint (0, 0)
    g.add_link(2, 3, 1, 1, 1);  // midpoint (3, 4)
    CHECK(link_distance(0, 0, g) == 0.0);
    CHECK(link_distance(0, 1, g) == doctest::Approx(5.0));
    CHECK(link_distance(1, 0, g) == doctest::Approx(5.0));

    Rng rng(77);
    NetworkGraph r = testref::random_test_graph(5, 2, 200, rng);
    for (int a = 0; a < r.link_count(); ++a)
        for (int b = 0; b < r.link_count(); ++b) {
            const auto [ax, ay] = r.link_midpoint(a);
            const auto [bx, by] = r.link_midpoint(b);
            CHECK(link_distance(a, b, r) == doctest::Approx(std::hypot(ax - bx, ay - by)));
        }
}

TEST_CASE("action space on the diamond graph picks both branches") {
    // s -> a -> d and s -> b -> d, geometrically separated.
    NetworkGraph g;
    g.add_node(0, 0);     // s
    g.add_node(50, 40);   // a
    g.add_node(50, -40);  // b
    g.add_node(100, 0);   // d
    const int edges[4][2] = {{0, 1}, {1, 3}, {0, 2}, {2, 3}};
    for (const auto& e : edges) {
        g.add_link(e[0], e[1], 1, 100, 1);
        g.add_link(e[1], e[0], 1, 100, 1);
    }
    FlowDemand f{0, 0, 3, 10};
    const ActionSpace space = build_action_space(f, 2, g);
    REQUIRE(space.paths.size() == 2);
    CHECK_FALSE(space.padded);
    const auto n0 = testref::node_sequence(g, 0, space.paths[0]);
    const auto n1 = testref::node_sequence(g, 0, space.paths[1]);
    CHECK(n0 == std::vector<int>{0, 1, 3});  // first: lexicographic shortest
    CHECK(n1 == std::vector<int>{0, 2, 3});  // second avoids the reweighted branch
}

TEST_CASE("action space with K=1 is exactly the unit-weight shortest path") {
    Rng rng(55);
    NetworkGraph g = testref::random_test_graph(7, 3, 400, rng);
    FlowDemand f{0, 0, 5, 10};
    const ActionSpace space = build_action_space(f, 1, g);
    REQUIRE(space.paths.size() == 1);
    CHECK(space.paths[0] == shortest_path(0, 5, g, unit_weights(g)));
}

TEST_CASE("action space pads degenerate topologies and flags it") {
    // Line s - a - d: a single simple route.
    NetworkGraph g;
    g.add_node(0, 0);
    g.add_node(50, 0);
    g.add_node(100, 0);
    g.add_link(0, 1, 1, 100, 1);
    g.add_link(1, 0, 1, 100, 1);
    g.add_link(1, 2, 1, 100, 1);
    g.add_link(2, 1, 1, 100, 1);
    FlowDemand f{0, 0, 2, 10};
    const ActionSpace space = build_action_space(f, 3, g);
    REQUIRE(space.paths.size() == 3);
    CHECK(space.padded);
    CHECK(space.paths[0] == space.paths[1]);
    CHECK(space.paths[1] == space.paths[2]);
    const auto nodes = testref::node_sequence(g, 0, space.paths[0]);
    CHECK(nodes == std::vector<int>{0, 1, 2});
}

TEST_CASE("every returned path is simple and connects the endpoints") {
    Rng rng(202);
    for (int trial = 0; trial < 20; ++trial) {
        NetworkGraph g = testref::random_test_graph(8, 4, 600, rng);
        auto flows = testref::random_test_flows(g, 3, rng);
        for (const FlowDemand& f : flows) {
            const ActionSpace space = build_action_space(f, 4, g);
            REQUIRE(space.paths.size() == 4);
            for (const Path& p : space.paths) {
                const auto nodes = testref::node_sequence(g, f.src, p);
                CHECK(nodes.front() == f.src);
                CHECK(nodes.back() == f.dst);
                std::vector<int> sorted = nodes;
                std::sort(sorted.begin(), sorted.end());
                CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
                // consecutive links chain properly
                for (std::size_t i = 0; i + 1 < p.size(); ++i)
                    CHECK(g.links[p[i]].rx == g.links[p[i + 1]].tx);
            }
        }
    }
}

TEST_CASE("first path has minimum hop count") {
    Rng rng(303);
    for (int trial = 0; trial < 15; ++trial) {
        NetworkGraph g = testref::random_test_graph(7, 4, 500, rng);
        auto flows = testref::random_test_flows(g, 2, rng);
        for (const FlowDemand& f : flows) {
            const ActionSpace space = build_action_space(f, 3, g);
            const auto all = testref::all_simple_paths(g, f.src, f.dst);
            std::size_t min_hops = SIZE_MAX;
            for (const Path& p : all) min_hops = std::min(min_hops, p.size());
            CHECK(space.paths[0].size() == min_hops);
        }
    }
}

TEST_CASE("action space construction is deterministic") {
    Rng rng(404);
    NetworkGraph g = testref::random_test_graph(8, 4, 600, rng);
    FlowDemand f{0, 1, 6, 10};
    const ActionSpace a = build_action_space(f, 4, g);
    const ActionSpace b = build_action_space(f, 4, g);
    CHECK(a.paths == b.paths);
    CHECK(a.padded == b.padded);
}

TEST_CASE("link-disjoint equal-length ladder yields disjoint paths") {
    // K = 3 parallel two-hop branches, widely separated so the increment on a
    // selected branch dominates.
    NetworkGraph g;
    g.add_node(0, 0);       // s
    g.add_node(200, 0);     // d
    g.add_node(100, 300);   // branch tops
    g.add_node(100, 0);
    g.add_node(100, -300);
    for (int mid : {2, 3, 4}) {
        g.add_link(0, mid, 1, 100, 1);
        g.add_link(mid, 0, 1, 100, 1);
        g.add_link(mid, 1, 1, 100, 1);
        g.add_link(1, mid, 1, 100, 1);
    }
    FlowDemand f{0, 0, 1, 10};
    const ActionSpace space = build_action_space(f, 3, g);
    REQUIRE(space.paths.size() == 3);
    CHECK_FALSE(space.padded);
    std::vector<int> used;
    for (const Path& p : space.paths)
        for (int l : p) used.push_back(l);
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
}
