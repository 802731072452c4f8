#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "diamond/linalg.hpp"
#include "diamond/net.hpp"
#include "diamond/rng.hpp"

namespace diamond {

inline constexpr int kEdgeFeatureDim = 3;

// E x 3 edge feature matrix:
//   column 0  interference at the link, normalized by the network-wide max
//   column 1  link capacity, normalized by the max bandwidth
//   column 2  1 when the link lies on the previously allocated route
struct EdgeFeatures {
    int link_count = 0;
    std::vector<double> data;  // row-major E x 3

    EdgeFeatures() = default;
    explicit EdgeFeatures(int links) : link_count(links), data(static_cast<std::size_t>(links) * kEdgeFeatureDim, 0.0) {}
    double& at(int link, int f) { return data[static_cast<std::size_t>(link) * kEdgeFeatureDim + f]; }
    double at(int link, int f) const { return data[static_cast<std::size_t>(link) * kEdgeFeatureDim + f]; }
};

EdgeFeatures edge_features(const NetworkGraph& g, const PathAllocation& partial,
                           const InterferenceMap& map, const Path* last_path);

// One gated recurrent cell with input and hidden size d.
struct GruParams {
    Mat wz, uz, wr, ur, wh, uh;  // d x d
    Vec bz, br, bh;              // d
};

// All learned tensors of the routing policy. Shapes depend only on the
// embedding size, never on the instance, so one checkpoint serves any graph.
struct PolicyParams {
    int dim = 16;   // embedding size d
    int depth = 3;  // message-passing iterations T

    Mat w1, w2, w3;        // d x d message weights (self / incoming / outgoing)
    GruParams link_update;  // per-link recurrent update of the graph encoder
    Mat demand_embed;       // 3 x d map of the (src, dst, payload) triple
    GruParams path_fwd;     // forward direction of the path encoder
    GruParams path_bwd;     // backward direction
    Vec score_w;            // 2d -> 1 score head
    double score_b = 0;
};

PolicyParams init_policy(int dim, int depth, Rng& rng);
PolicyParams zeros_like(const PolicyParams& p);
std::size_t param_count(const PolicyParams& p);

// Visits every scalar parameter in a fixed declaration order. This order
// defines the checkpoint layout and the flattening used by the optimizer.
void visit_params(PolicyParams& p, const std::function<void(double&)>& fn);
void visit_params(const PolicyParams& p, const std::function<void(double)>& fn);

// Incoming/outgoing link sets per link: for l = (u, v), the links entering u
// and the links leaving v.
struct LinkTopology {
    std::vector<std::vector<int>> in_links;
    std::vector<std::vector<int>> out_links;

    static LinkTopology from(const NetworkGraph& g);
};

struct GruCache {
    Vec x, h_prev, z, r, cand;
    Vec output() const;  // (1-z) .* h_prev + z .* cand
};

struct EncodeCache {
    std::vector<Vec> h0;  // E x d zero-padded features
    struct Step {
        std::vector<Vec> msg;       // post-tanh message per link
        std::vector<GruCache> gru;  // recurrent update per link
    };
    std::vector<Step> steps;    // depth entries
    std::vector<Vec> h_final;   // E x d
    Vec h_graph;                // mean of h_final
};

// T rounds of message passing followed by the mean global embedding.
void graph_encode(const EdgeFeatures& feats, const LinkTopology& topo, const PolicyParams& p,
                  EncodeCache& cache);

// Everything the policy sees when scoring one flow's candidate routes.
struct PolicyInput {
    EdgeFeatures feats;
    std::array<double, 3> demand{};  // normalized (src, dst, payload)
    std::vector<Path> paths;         // K candidates, each non-empty
};

struct PathEncodeCache {
    std::vector<Vec> inputs;        // L x d: link embedding + demand embedding
    std::vector<GruCache> fwd, bwd; // per position
    Vec concat;                     // [fwd final ; bwd final]
};

struct ScoreCache {
    EncodeCache encode;
    Vec demand_emb;
    std::vector<PathEncodeCache> per_path;
    Vec logits;
    Vec probs;
};

// Route-selection probabilities for the candidate set (softmax over path
// scores).
Vec path_probabilities(const PolicyInput& input, const LinkTopology& topo, const PolicyParams& p);
Vec path_probabilities(const PolicyInput& input, const LinkTopology& topo, const PolicyParams& p,
                       ScoreCache& cache);

// Accumulates d log probs[chosen] / d params into `grad` by reverse-mode
// differentiation through the path encoder and the graph encoder.
void backward_log_prob(const PolicyInput& input, const LinkTopology& topo, const PolicyParams& p,
                       const ScoreCache& cache, int chosen, PolicyParams& grad);

// Binary little-endian checkpoint: magic "GRRL", u32 version, u32 d, u32 T,
// then every tensor in visit_params order as f64.
void save_checkpoint(const std::string& path, const PolicyParams& p);
PolicyParams load_checkpoint(const std::string& path);

}  // namespace diamond
