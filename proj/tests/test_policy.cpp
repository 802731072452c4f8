#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "diamond/path_space.hpp"
#include "diamond/policy.hpp"
#include "diamond/rng.hpp"
#include "support.hpp"

using namespace diamond;

// Scalar-by-scalar reference forward pass, written independently of the
// library's linear-algebra helpers.
namespace ref {

Vec gru(const GruParams& p, const Vec& x, const Vec& h) {
    const int d = static_cast<int>(h.size());
    Vec z(d), r(d), cand(d), out(d);
    for (int j = 0; j < d; ++j) {
        double az = p.bz[j], ar = p.br[j];
        for (int i = 0; i < d; ++i) {
            az += x[i] * p.wz(i, j) + h[i] * p.uz(i, j);
            ar += x[i] * p.wr(i, j) + h[i] * p.ur(i, j);
        }
        z[j] = 1.0 / (1.0 + std::exp(-az));
        r[j] = 1.0 / (1.0 + std::exp(-ar));
    }
    for (int j = 0; j < d; ++j) {
        double ah = p.bh[j];
        for (int i = 0; i < d; ++i) ah += x[i] * p.wh(i, j) + r[i] * h[i] * p.uh(i, j);
        cand[j] = std::tanh(ah);
    }
    for (int j = 0; j < d; ++j) out[j] = (1.0 - z[j]) * h[j] + z[j] * cand[j];
    return out;
}

std::vector<Vec> encode(const EdgeFeatures& feats, const LinkTopology& topo,
                        const PolicyParams& p, Vec& h_graph) {
    const int e = feats.link_count;
    const int d = p.dim;
    std::vector<Vec> h(e, Vec(d, 0.0));
    for (int l = 0; l < e; ++l)
        for (int f = 0; f < kEdgeFeatureDim && f < d; ++f) h[l][f] = feats.at(l, f);

    for (int t = 0; t < p.depth; ++t) {
        std::vector<Vec> next(e, Vec(d, 0.0));
        for (int l = 0; l < e; ++l) {
            Vec m(d, 0.0);
            for (int j = 0; j < d; ++j) {
                double s = 0;
                for (int i = 0; i < d; ++i) s += h[l][i] * p.w1(i, j);
                for (int in : topo.in_links[l])
                    for (int i = 0; i < d; ++i) s += h[in][i] * p.w2(i, j);
                for (int out : topo.out_links[l])
                    for (int i = 0; i < d; ++i) s += h[out][i] * p.w3(i, j);
                m[j] = std::tanh(s);
            }
            next[l] = gru(p.link_update, m, h[l]);
        }
        h = next;
    }
    h_graph.assign(d, 0.0);
    for (int l = 0; l < e; ++l)
        for (int j = 0; j < d; ++j) h_graph[j] += h[l][j] / e;
    return h;
}

Vec probabilities(const PolicyInput& input, const LinkTopology& topo, const PolicyParams& p) {
    const int d = p.dim;
    Vec h_graph;
    const std::vector<Vec> h = encode(input.feats, topo, p, h_graph);

    Vec demand_emb(d, 0.0);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < 3; ++i) demand_emb[j] += input.demand[i] * p.demand_embed(i, j);

    Vec logits;
    for (const Path& path : input.paths) {
        std::vector<Vec> xs;
        for (int l : path) {
            Vec x = h[l];
            for (int j = 0; j < d; ++j) x[j] += demand_emb[j];
            xs.push_back(x);
        }
        Vec hf = h_graph;
        for (const Vec& x : xs) hf = gru(p.path_fwd, x, hf);
        Vec hb = h_graph;
        for (auto it = xs.rbegin(); it != xs.rend(); ++it) hb = gru(p.path_bwd, *it, hb);
        double u = p.score_b;
        for (int j = 0; j < d; ++j) u += p.score_w[j] * hf[j] + p.score_w[d + j] * hb[j];
        logits.push_back(u);
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0;
    Vec probs(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - mx);
        sum += probs[i];
    }
    for (double& v : probs) v /= sum;
    return probs;
}

}  // namespace ref

namespace {

// Small connected instance with everything the policy consumes.
struct Fixture {
    NetworkGraph g;
    InterferenceMap map;
    LinkTopology topo;
    std::vector<ActionSpace> spaces;
    std::vector<FlowDemand> flows;

    explicit Fixture(std::uint64_t seed, int v = 5, int extra = 2, int n = 2, int k = 2) {
        Rng rng(seed);
        g = testref::random_test_graph(v, extra, 400, rng);
        flows = testref::random_test_flows(g, n, rng);
        map = build_interference_map(g, 200, 2);
        topo = LinkTopology::from(g);
        spaces = build_action_spaces(flows, k, g);
    }

    PolicyInput input_for(int flow, const PathAllocation& partial, const Path* last) const {
        PolicyInput in;
        in.feats = edge_features(g, partial, map, last);
        const double denom = std::max(1, g.node_count() - 1);
        double maxp = 0;
        for (const auto& f : flows) maxp = std::max(maxp, f.payload_mbit);
        in.demand = {flows[flow].src / denom, flows[flow].dst / denom,
                     flows[flow].payload_mbit / maxp};
        in.paths = spaces[flow].paths;
        return in;
    }
};

}  // namespace

TEST_CASE("edge features: fresh network has zero interference and flag columns") {
    Fixture fx(1);
    PathAllocation empty = PathAllocation::from_spaces(fx.spaces);
    EdgeFeatures feats = edge_features(fx.g, empty, fx.map, nullptr);
    for (int l = 0; l < fx.g.link_count(); ++l) {
        CHECK(feats.at(l, 0) == 0.0);
        CHECK(feats.at(l, 2) == 0.0);
        CHECK(feats.at(l, 1) > 0.0);
        CHECK(feats.at(l, 1) <= 1.0);
    }
}

TEST_CASE("edge features: uniform bandwidth gives an all-ones capacity column") {
    NetworkGraph g;
    g.add_node(0, 0);
    g.add_node(10, 0);
    g.add_link(0, 1, 7, 100, 1);
    g.add_link(1, 0, 7, 100, 1);
    InterferenceMap map = build_interference_map(g, 50, 2);
    PathAllocation empty = PathAllocation::from_spaces({});
    EdgeFeatures feats = edge_features(g, empty, map, nullptr);
    CHECK(feats.at(0, 1) == 1.0);
    CHECK(feats.at(1, 1) == 1.0);
}

TEST_CASE("edge features: the flag column is the indicator of the last path") {
    Fixture fx(2);
    PathAllocation alloc = PathAllocation::from_spaces(fx.spaces);
    alloc.chosen[0] = 0;
    const Path& p = alloc.path_of(0);
    EdgeFeatures feats = edge_features(fx.g, alloc, fx.map, &p);
    std::vector<char> on(fx.g.link_count(), 0);
    for (int l : p) on[l] = 1;
    for (int l = 0; l < fx.g.link_count(); ++l) CHECK(feats.at(l, 2) == (on[l] ? 1.0 : 0.0));
}

TEST_CASE("graph encode: zero parameters decay the state toward zero") {
    Fixture fx(3);
    PolicyParams p = zeros_like([] {
        Rng r(0);
        return init_policy(4, 60, r);
    }());
    p.depth = 60;  // halving per step: features shrink to ~1e-18
    PolicyInput in = fx.input_for(0, PathAllocation::from_spaces(fx.spaces), nullptr);
    EncodeCache cache;
    graph_encode(in.feats, fx.topo, p, cache);
    for (double v : cache.h_graph) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("graph encode: single-link graph has h(G) equal to the link embedding") {
    NetworkGraph g;
    g.add_node(0, 0);
    g.add_node(10, 0);
    g.add_link(0, 1, 5, 100, 1);  // adjacency left intentionally one-way
    InterferenceMap map = build_interference_map(g, 50, 2);
    LinkTopology topo = LinkTopology::from(g);
    // E_in of the only link = links entering node 0 (none); E_out = links
    // leaving node 1 (none): a genuinely isolated link.
    CHECK(topo.in_links[0].empty());
    CHECK(topo.out_links[0].empty());

    Rng rng(4);
    PolicyParams p = init_policy(4, 2, rng);
    PathAllocation empty = PathAllocation::from_spaces({});
    EdgeFeatures feats = edge_features(g, empty, map, nullptr);
    EncodeCache cache;
    graph_encode(feats, topo, p, cache);
    CHECK(cache.h_graph == cache.h_final[0]);
}

TEST_CASE("graph encode matches the scalar reference") {
    for (std::uint64_t seed : {10u, 11u, 12u}) {
        Fixture fx(seed, 4, 1);
        Rng rng(seed + 100);
        PolicyParams p = init_policy(3, 2, rng);
        PolicyInput in = fx.input_for(0, PathAllocation::from_spaces(fx.spaces), nullptr);

        EncodeCache cache;
        graph_encode(in.feats, fx.topo, p, cache);
        Vec ref_hg;
        const std::vector<Vec> ref_h = ref::encode(in.feats, fx.topo, p, ref_hg);
        for (int l = 0; l < in.feats.link_count; ++l)
            for (int j = 0; j < p.dim; ++j)
                CHECK(cache.h_final[l][j] == doctest::Approx(ref_h[l][j]).epsilon(1e-12));
        for (int j = 0; j < p.dim; ++j)
            CHECK(cache.h_graph[j] == doctest::Approx(ref_hg[j]).epsilon(1e-12));
    }
}

TEST_CASE("path probabilities match the scalar reference") {
    for (std::uint64_t seed : {20u, 21u, 22u}) {
        Fixture fx(seed, 5, 2, 2, 3);
        Rng rng(seed + 200);
        PolicyParams p = init_policy(4, 2, rng);
        PolicyInput in = fx.input_for(1, PathAllocation::from_spaces(fx.spaces), nullptr);
        const Vec got = path_probabilities(in, fx.topo, p);
        const Vec want = ref::probabilities(in, fx.topo, p);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("softmax arithmetic") {
    const Vec p = softmax({0.0, std::log(2.0)});
    CHECK(p[0] == doctest::Approx(1.0 / 3));
    CHECK(p[1] == doctest::Approx(2.0 / 3));
}

TEST_CASE("duplicate candidate paths get equal probability") {
    Fixture fx(30);
    Rng rng(31);
    PolicyParams p = init_policy(4, 2, rng);
    PolicyInput in = fx.input_for(0, PathAllocation::from_spaces(fx.spaces), nullptr);
    in.paths = {in.paths[0], in.paths[0], in.paths[0]};
    const Vec probs = path_probabilities(in, fx.topo, p);
    for (double v : probs) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("a single candidate has probability one") {
    Fixture fx(32);
    Rng rng(33);
    PolicyParams p = init_policy(4, 1, rng);
    PolicyInput in = fx.input_for(0, PathAllocation::from_spaces(fx.spaces), nullptr);
    in.paths = {in.paths[0]};
    const Vec probs = path_probabilities(in, fx.topo, p);
    REQUIRE(probs.size() == 1);
    CHECK(probs[0] == 1.0);
}

TEST_CASE("probabilities form a distribution and permute with the candidates") {
    Fixture fx(34, 6, 3, 2, 4);
    Rng rng(35);
    PolicyParams p = init_policy(5, 2, rng);
    PolicyInput in = fx.input_for(0, PathAllocation::from_spaces(fx.spaces), nullptr);
    const Vec probs = path_probabilities(in, fx.topo, p);
    double sum = 0;
    for (double v : probs) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);

    PolicyInput rotated = in;
    std::rotate(rotated.paths.begin(), rotated.paths.begin() + 1, rotated.paths.end());
    const Vec rotated_probs = path_probabilities(rotated, fx.topo, p);
    for (std::size_t i = 0; i < probs.size(); ++i)
        CHECK(rotated_probs[i] == doctest::Approx(probs[(i + 1) % probs.size()]).epsilon(1e-12));
}

TEST_CASE("embedding shapes track the link count, not flows or candidates") {
    for (auto [v, extra, n, k] : {std::tuple{4, 1, 1, 2}, {6, 3, 3, 2}, {7, 4, 2, 5}}) {
        Fixture fx(40 + v, v, extra, n, k);
        Rng rng(41);
        PolicyParams p = init_policy(4, 2, rng);
        PolicyInput in = fx.input_for(0, PathAllocation::from_spaces(fx.spaces), nullptr);
        EncodeCache cache;
        graph_encode(in.feats, fx.topo, p, cache);
        CHECK(static_cast<int>(cache.h_final.size()) == fx.g.link_count());
        CHECK(static_cast<int>(cache.h_graph.size()) == p.dim);
    }
}

TEST_CASE("policy forward is deterministic") {
    Fixture fx(50);
    Rng rng(51);
    PolicyParams p = init_policy(6, 3, rng);
    PolicyInput in = fx.input_for(0, PathAllocation::from_spaces(fx.spaces), nullptr);
    const Vec a = path_probabilities(in, fx.topo, p);
    const Vec b = path_probabilities(in, fx.topo, p);
    CHECK(a == b);
}

TEST_CASE("log-probability gradients match central finite differences") {
    // d = 4, T = 2, small graph; every parameter checked.
    Fixture fx(60, 4, 1, 2, 2);
    REQUIRE(fx.g.link_count() <= 8);
    Rng rng(61);
    PolicyParams params = init_policy(4, 2, rng);
    PathAllocation partial = PathAllocation::from_spaces(fx.spaces);
    partial.chosen[1] = 0;  // some state so features are not all trivial
    PolicyInput in = fx.input_for(0, partial, &partial.path_of(1));
    const int chosen = 1;

    PolicyParams grad = zeros_like(params);
    ScoreCache cache;
    path_probabilities(in, fx.topo, params, cache);
    backward_log_prob(in, fx.topo, params, cache, chosen, grad);

    std::vector<double*> slots;
    visit_params(params, [&](double& v) { slots.push_back(&v); });
    std::vector<double> analytic;
    visit_params(grad, [&](double& v) { analytic.push_back(v); });
    REQUIRE(slots.size() == analytic.size());

    const double h = 1e-5;
    int worst_idx = -1;
    double worst_rel = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const double saved = *slots[i];
        *slots[i] = saved + h;
        const double up = std::log(path_probabilities(in, fx.topo, params)[chosen]);
        *slots[i] = saved - h;
        const double down = std::log(path_probabilities(in, fx.topo, params)[chosen]);
        *slots[i] = saved;
        const double numeric = (up - down) / (2 * h);
        const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
        const double rel = std::abs(numeric - analytic[i]) / denom;
        if (rel > worst_rel) {
            worst_rel = rel;
            worst_idx = static_cast<int>(i);
        }
    }
    INFO("worst component ", worst_idx, " rel err ", worst_rel);
    CHECK(worst_rel < 1e-4);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    Rng rng(70);
    PolicyParams p = init_policy(5, 2, rng);
    const std::string path = "test_checkpoint.bin";
    save_checkpoint(path, p);
    PolicyParams q = load_checkpoint(path);
    CHECK(q.dim == p.dim);
    CHECK(q.depth == p.depth);
    std::vector<double> a, b;
    visit_params(p, [&](double v) { a.push_back(v); });
    visit_params(q, [&](double v) { b.push_back(v); });
    CHECK(a == b);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint loader rejects foreign files") {
    const std::string path = "test_not_checkpoint.bin";
    {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        std::fputs("JUNKJUNKJUNKJUNK", f);
        std::fclose(f);
    }
    CHECK_THROWS(load_checkpoint(path));
    std::remove(path.c_str());
}
