#include "diamond/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace diamond {

EdgeFeatures edge_features(const NetworkGraph& g, const PathAllocation& partial,
                           const InterferenceMap& map, const Path* last_path) {
    const int e = g.link_count();
    EdgeFeatures feats(e);

    const LinkLoad load = LinkLoad::from(partial, e);
    std::vector<double> interference(e);
    double max_interference = 0;
    double max_bandwidth = 0;
    for (int l = 0; l < e; ++l) {
        interference[l] = interference_at_link(l, load, map);
        max_interference = std::max(max_interference, interference[l]);
        max_bandwidth = std::max(max_bandwidth, g.links[l].bandwidth_mhz);
    }
    if (max_interference <= 0) max_interference = 1;

    std::vector<char> on_last(e, 0);
    if (last_path)
        for (int l : *last_path) on_last[l] = 1;

    for (int l = 0; l < e; ++l) {
        feats.at(l, 0) = interference[l] / max_interference;
        feats.at(l, 1) = g.links[l].bandwidth_mhz / max_bandwidth;
        feats.at(l, 2) = on_last[l] ? 1.0 : 0.0;
    }
    return feats;
}

namespace {

GruParams init_gru(int d, double scale, Rng& rng) {
    GruParams g;
    auto mat = [&](Mat& m) {
        m = Mat(d, d);
        for (double& v : m.a) v = rng.uniform(-scale, scale);
    };
    auto vec = [&](Vec& v) {
        v.assign(d, 0.0);
        for (double& x : v) x = rng.uniform(-scale, scale);
    };
    mat(g.wz); mat(g.uz); vec(g.bz);
    mat(g.wr); mat(g.ur); vec(g.br);
    mat(g.wh); mat(g.uh); vec(g.bh);
    return g;
}

GruParams zero_gru(int d) {
    GruParams g;
    g.wz = g.uz = g.wr = g.ur = g.wh = g.uh = Mat(d, d);
    g.bz = g.br = g.bh = Vec(d, 0.0);
    return g;
}

template <typename P, typename F>
void visit_gru(P& g, const F& fn) {
    for (auto* m : {&g.wz, &g.uz, &g.wr, &g.ur, &g.wh, &g.uh})
        for (auto& v : m->a) fn(v);
    for (auto* b : {&g.bz, &g.br, &g.bh})
        for (auto& v : *b) fn(v);
}

template <typename P, typename F>
void visit_all(P& p, const F& fn) {
    for (auto* m : {&p.w1, &p.w2, &p.w3})
        for (auto& v : m->a) fn(v);
    visit_gru(p.link_update, fn);
    for (auto& v : p.demand_embed.a) fn(v);
    visit_gru(p.path_fwd, fn);
    visit_gru(p.path_bwd, fn);
    for (auto& v : p.score_w) fn(v);
    fn(p.score_b);
}

}  // namespace

PolicyParams init_policy(int dim, int depth, Rng& rng) {
    if (dim < 2) throw ContractViolation("embedding size must be >= 2");
    if (depth < 1) throw ContractViolation("message-passing depth must be >= 1");
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    PolicyParams p;
    p.dim = dim;
    p.depth = depth;
    auto mat = [&](Mat& m, int r, int c) {
        m = Mat(r, c);
        for (double& v : m.a) v = rng.uniform(-scale, scale);
    };
    mat(p.w1, dim, dim);
    mat(p.w2, dim, dim);
    mat(p.w3, dim, dim);
    p.link_update = init_gru(dim, scale, rng);
    mat(p.demand_embed, kEdgeFeatureDim, dim);
    p.path_fwd = init_gru(dim, scale, rng);
    p.path_bwd = init_gru(dim, scale, rng);
    p.score_w.assign(2 * dim, 0.0);
    for (double& v : p.score_w) v = rng.uniform(-scale, scale);
    p.score_b = rng.uniform(-scale, scale);
    return p;
}

PolicyParams zeros_like(const PolicyParams& p) {
    PolicyParams z;
    z.dim = p.dim;
    z.depth = p.depth;
    z.w1 = z.w2 = z.w3 = Mat(p.dim, p.dim);
    z.link_update = zero_gru(p.dim);
    z.demand_embed = Mat(kEdgeFeatureDim, p.dim);
    z.path_fwd = zero_gru(p.dim);
    z.path_bwd = zero_gru(p.dim);
    z.score_w.assign(2 * p.dim, 0.0);
    z.score_b = 0;
    return z;
}

std::size_t param_count(const PolicyParams& p) {
    std::size_t n = 0;
    visit_params(p, [&](double) { ++n; });
    return n;
}

void visit_params(PolicyParams& p, const std::function<void(double&)>& fn) {
    visit_all(p, fn);
}

void visit_params(const PolicyParams& p, const std::function<void(double)>& fn) {
    visit_all(p, fn);
}

LinkTopology LinkTopology::from(const NetworkGraph& g) {
    LinkTopology topo;
    topo.in_links.resize(g.link_count());
    topo.out_links.resize(g.link_count());
    for (const Link& l : g.links) {
        topo.in_links[l.id] = g.in_links[l.tx];
        topo.out_links[l.id] = g.out_links[l.rx];
    }
    return topo;
}

namespace {

// z = sigma(x Wz + h Uz + bz), r = sigma(x Wr + h Ur + br),
// cand = tanh(x Wh + (r.*h) Uh + bh), h' = (1-z).*h + z.*cand
Vec gru_forward(const GruParams& p, const Vec& x, const Vec& h, GruCache* cache) {
    const int d = static_cast<int>(h.size());
    Vec az = p.bz, ar = p.br;
    vecmat_acc(x, p.wz, az);
    vecmat_acc(h, p.uz, az);
    vecmat_acc(x, p.wr, ar);
    vecmat_acc(h, p.ur, ar);
    Vec z(d), r(d);
    for (int i = 0; i < d; ++i) {
        z[i] = sigmoid(az[i]);
        r[i] = sigmoid(ar[i]);
    }
    Vec rh(d);
    for (int i = 0; i < d; ++i) rh[i] = r[i] * h[i];
    Vec ah = p.bh;
    vecmat_acc(x, p.wh, ah);
    vecmat_acc(rh, p.uh, ah);
    Vec cand(d);
    for (int i = 0; i < d; ++i) cand[i] = std::tanh(ah[i]);
    Vec out(d);
    for (int i = 0; i < d; ++i) out[i] = (1.0 - z[i]) * h[i] + z[i] * cand[i];
    if (cache) {
        cache->x = x;
        cache->h_prev = h;
        cache->z = z;
        cache->r = r;
        cache->cand = cand;
    }
    return out;
}

// Reverse pass of gru_forward. Accumulates into dx, dh_prev and grad.
void gru_backward(const GruParams& p, const GruCache& c, const Vec& dout, Vec& dx, Vec& dh_prev,
                  GruParams& grad) {
    const int d = static_cast<int>(dout.size());
    Vec dz(d), dcand(d), dh(d, 0.0);
    for (int i = 0; i < d; ++i) {
        dz[i] = dout[i] * (c.cand[i] - c.h_prev[i]);
        dcand[i] = dout[i] * c.z[i];
        dh[i] = dout[i] * (1.0 - c.z[i]);
    }

    Vec dah(d);
    for (int i = 0; i < d; ++i) dah[i] = dcand[i] * (1.0 - c.cand[i] * c.cand[i]);
    Vec rh(d);
    for (int i = 0; i < d; ++i) rh[i] = c.r[i] * c.h_prev[i];
    outer_acc(grad.wh, c.x, dah);
    outer_acc(grad.uh, rh, dah);
    add_acc(grad.bh, dah);
    vecmat_t_acc(dah, p.wh, dx);
    Vec drh(d, 0.0);
    vecmat_t_acc(dah, p.uh, drh);
    Vec dr(d);
    for (int i = 0; i < d; ++i) {
        dr[i] = drh[i] * c.h_prev[i];
        dh[i] += drh[i] * c.r[i];
    }

    Vec dar(d), daz(d);
    for (int i = 0; i < d; ++i) {
        dar[i] = dr[i] * c.r[i] * (1.0 - c.r[i]);
        daz[i] = dz[i] * c.z[i] * (1.0 - c.z[i]);
    }
    outer_acc(grad.wr, c.x, dar);
    outer_acc(grad.ur, c.h_prev, dar);
    add_acc(grad.br, dar);
    vecmat_t_acc(dar, p.wr, dx);
    vecmat_t_acc(dar, p.ur, dh);

    outer_acc(grad.wz, c.x, daz);
    outer_acc(grad.uz, c.h_prev, daz);
    add_acc(grad.bz, daz);
    vecmat_t_acc(daz, p.wz, dx);
    vecmat_t_acc(daz, p.uz, dh);

    add_acc(dh_prev, dh);
}

}  // namespace

Vec GruCache::output() const {
    Vec out(h_prev.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - z[i]) * h_prev[i] + z[i] * cand[i];
    return out;
}

void graph_encode(const EdgeFeatures& feats, const LinkTopology& topo, const PolicyParams& p,
                  EncodeCache& cache) {
    const int e = feats.link_count;
    const int d = p.dim;

    cache.h0.assign(e, Vec(d, 0.0));
    for (int l = 0; l < e; ++l)
        for (int f = 0; f < kEdgeFeatureDim && f < d; ++f) cache.h0[l][f] = feats.at(l, f);

    cache.steps.assign(p.depth, {});
    std::vector<Vec> h = cache.h0;
    for (int t = 0; t < p.depth; ++t) {
        auto& step = cache.steps[t];
        step.msg.assign(e, Vec(d, 0.0));
        step.gru.assign(e, {});
        std::vector<Vec> next(e);
        for (int l = 0; l < e; ++l) {
            Vec s(d, 0.0);
            vecmat_acc(h[l], p.w1, s);
            for (int in : topo.in_links[l]) vecmat_acc(h[in], p.w2, s);
            for (int out : topo.out_links[l]) vecmat_acc(h[out], p.w3, s);
            Vec& m = step.msg[l];
            for (int i = 0; i < d; ++i) m[i] = std::tanh(s[i]);
            next[l] = gru_forward(p.link_update, m, h[l], &step.gru[l]);
        }
        h = std::move(next);
    }

    cache.h_final = std::move(h);
    cache.h_graph.assign(d, 0.0);
    for (int l = 0; l < e; ++l) add_acc(cache.h_graph, cache.h_final[l]);
    if (e > 0)
        for (double& v : cache.h_graph) v /= e;
}

namespace {

void graph_encode_backward(const LinkTopology& topo, const PolicyParams& p,
                           const EncodeCache& cache, std::vector<Vec> dh, PolicyParams& grad) {
    const int e = static_cast<int>(dh.size());
    const int d = p.dim;
    for (int t = p.depth - 1; t >= 0; --t) {
        const auto& step = cache.steps[t];
        std::vector<Vec> dh_prev(e, Vec(d, 0.0));
        std::vector<Vec> dmsg(e, Vec(d, 0.0));
        for (int l = 0; l < e; ++l)
            gru_backward(p.link_update, step.gru[l], dh[l], dmsg[l], dh_prev[l], grad.link_update);
        for (int l = 0; l < e; ++l) {
            const Vec& m = step.msg[l];
            Vec ds(d);
            for (int i = 0; i < d; ++i) ds[i] = dmsg[l][i] * (1.0 - m[i] * m[i]);
            const Vec& h_l = step.gru[l].h_prev;
            outer_acc(grad.w1, h_l, ds);
            vecmat_t_acc(ds, p.w1, dh_prev[l]);
            for (int in : topo.in_links[l]) {
                outer_acc(grad.w2, step.gru[in].h_prev, ds);
                vecmat_t_acc(ds, p.w2, dh_prev[in]);
            }
            for (int out : topo.out_links[l]) {
                outer_acc(grad.w3, step.gru[out].h_prev, ds);
                vecmat_t_acc(ds, p.w3, dh_prev[out]);
            }
        }
        dh = std::move(dh_prev);
    }
    // The remaining gradient lands on the zero-padded input features; no
    // parameters live there.
}

Vec demand_embedding(const PolicyInput& input, const PolicyParams& p) {
    Vec triple(input.demand.begin(), input.demand.end());
    return vecmat(triple, p.demand_embed);
}

}  // namespace

Vec path_probabilities(const PolicyInput& input, const LinkTopology& topo, const PolicyParams& p,
                       ScoreCache& cache) {
    if (input.paths.empty()) throw ContractViolation("path_probabilities needs K >= 1 candidates");
    const int d = p.dim;

    graph_encode(input.feats, topo, p, cache.encode);
    cache.demand_emb = demand_embedding(input, p);

    const int k = static_cast<int>(input.paths.size());
    cache.per_path.assign(k, {});
    cache.logits.assign(k, 0.0);
    for (int i = 0; i < k; ++i) {
        const Path& path = input.paths[i];
        if (path.empty()) throw ContractViolation("candidate path is empty");
        auto& pc = cache.per_path[i];
        const int len = static_cast<int>(path.size());
        pc.inputs.assign(len, Vec(d, 0.0));
        for (int t = 0; t < len; ++t) {
            pc.inputs[t] = cache.encode.h_final[path[t]];
            add_acc(pc.inputs[t], cache.demand_emb);
        }
        pc.fwd.assign(len, {});
        pc.bwd.assign(len, {});
        Vec hf = cache.encode.h_graph;
        for (int t = 0; t < len; ++t) hf = gru_forward(p.path_fwd, pc.inputs[t], hf, &pc.fwd[t]);
        Vec hb = cache.encode.h_graph;
        for (int t = len - 1; t >= 0; --t) hb = gru_forward(p.path_bwd, pc.inputs[t], hb, &pc.bwd[t]);
        pc.concat = hf;
        pc.concat.insert(pc.concat.end(), hb.begin(), hb.end());
        cache.logits[i] = dot(p.score_w, pc.concat) + p.score_b;
    }
    cache.probs = softmax(cache.logits);
    return cache.probs;
}

Vec path_probabilities(const PolicyInput& input, const LinkTopology& topo, const PolicyParams& p) {
    ScoreCache cache;
    return path_probabilities(input, topo, p, cache);
}

void backward_log_prob(const PolicyInput& input, const LinkTopology& topo, const PolicyParams& p,
                       const ScoreCache& cache, int chosen, PolicyParams& grad) {
    const int d = p.dim;
    const int e = input.feats.link_count;
    const int k = static_cast<int>(input.paths.size());

    std::vector<Vec> d_link(e, Vec(d, 0.0));
    Vec d_hgraph(d, 0.0);
    Vec d_demand(d, 0.0);

    for (int i = 0; i < k; ++i) {
        const double dlogit = (i == chosen ? 1.0 : 0.0) - cache.probs[i];
        const auto& pc = cache.per_path[i];
        const int len = static_cast<int>(pc.inputs.size());

        for (int j = 0; j < 2 * d; ++j) grad.score_w[j] += dlogit * pc.concat[j];
        grad.score_b += dlogit;

        std::vector<Vec> dx(len, Vec(d, 0.0));

        Vec dh(d);
        for (int j = 0; j < d; ++j) dh[j] = dlogit * p.score_w[j];
        for (int t = len - 1; t >= 0; --t) {
            Vec dh_prev(d, 0.0);
            gru_backward(p.path_fwd, pc.fwd[t], dh, dx[t], dh_prev, grad.path_fwd);
            dh = std::move(dh_prev);
        }
        add_acc(d_hgraph, dh);

        for (int j = 0; j < d; ++j) dh[j] = dlogit * p.score_w[d + j];
        for (int t = 0; t < len; ++t) {
            Vec dh_prev(d, 0.0);
            gru_backward(p.path_bwd, pc.bwd[t], dh, dx[t], dh_prev, grad.path_bwd);
            dh = std::move(dh_prev);
        }
        add_acc(d_hgraph, dh);

        for (int t = 0; t < len; ++t) {
            add_acc(d_link[input.paths[i][t]], dx[t]);
            add_acc(d_demand, dx[t]);
        }
    }

    Vec triple(input.demand.begin(), input.demand.end());
    outer_acc(grad.demand_embed, triple, d_demand);

    // h_graph is the mean of the final link embeddings.
    if (e > 0) {
        for (int l = 0; l < e; ++l)
            for (int j = 0; j < d; ++j) d_link[l][j] += d_hgraph[j] / e;
    }
    graph_encode_backward(topo, p, cache.encode, std::move(d_link), grad);
}

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;
constexpr char kMagic[4] = {'G', 'R', 'R', 'L'};

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64(std::ofstream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const PolicyParams& p) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    write_u32(out, kCheckpointVersion);
    write_u32(out, static_cast<std::uint32_t>(p.dim));
    write_u32(out, static_cast<std::uint32_t>(p.depth));
    visit_params(p, [&](double v) { write_f64(out, v); });
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

PolicyParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a policy checkpoint: " + path);
    const std::uint32_t version = read_u32(in);
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version in " + path);
    const int dim = static_cast<int>(read_u32(in));
    const int depth = static_cast<int>(read_u32(in));
    PolicyParams p;
    p.dim = dim;
    p.depth = depth;
    p = zeros_like(p);
    visit_params(p, [&](double& v) { v = read_f64(in); });
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return p;
}

}  // namespace diamond
