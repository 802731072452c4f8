#include "diamond/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace diamond {

RolloutContext make_context(NetworkGraph graph, std::vector<FlowDemand> flows, int k,
                            double range_m, double pathloss_exp, UtilityKind kind, double alpha) {
    RolloutContext ctx;
    ctx.graph = std::move(graph);
    ctx.flows = std::move(flows);
    ctx.map = build_interference_map(ctx.graph, range_m, pathloss_exp);
    ctx.topo = LinkTopology::from(ctx.graph);
    ctx.spaces = build_action_spaces(ctx.flows, k, ctx.graph);
    recompute_flow_neighbors(ctx.map, ctx.spaces, ctx.graph.link_count());
    ctx.cfg.kind = kind;
    ctx.cfg.u_max = default_u_max(ctx.graph, ctx.map, kind);
    ctx.alpha = alpha;
    return ctx;
}

double shaped_value(const NetworkGraph& g, const PathAllocation& partial,
                    const InterferenceMap& map, const UtilityConfig& cfg, double alpha) {
    const LinkLoad load = LinkLoad::from(partial, g.link_count());
    double utility_sum = 0;
    std::vector<char> allocated_link(g.link_count(), 0);
    for (int f = 0; f < partial.flow_count(); ++f) {
        if (!partial.assigned(f)) continue;
        utility_sum += flow_utility(g, f, partial, load, map, cfg);
        for (int l : partial.path_of(f)) allocated_link[l] = 1;
    }
    double interference_sum = 0;
    for (int l = 0; l < g.link_count(); ++l) {
        if (!allocated_link[l]) continue;
        interference_sum += interference_at_link(l, load, map) / g.links[l].noise_mw;
    }
    return alpha * utility_sum - (1.0 - alpha) * interference_sum;
}

namespace {

std::array<double, 3> normalized_demand(const RolloutContext& ctx, const FlowDemand& f) {
    const double denom = std::max(1, ctx.graph.node_count() - 1);
    double max_payload = 0;
    for (const FlowDemand& g : ctx.flows) max_payload = std::max(max_payload, g.payload_mbit);
    if (max_payload <= 0) max_payload = 1;
    return {f.src / denom, f.dst / denom, f.payload_mbit / max_payload};
}

int sample_index(const Vec& probs, Rng& rng) {
    const double u = rng.uniform01();
    double acc = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

int argmax_index(const Vec& probs) {
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

}  // namespace

std::pair<Episode, PathAllocation> rollout(const RolloutContext& ctx, const PolicyParams& params,
                                           Rng& rng, bool greedy) {
    const int n = static_cast<int>(ctx.flows.size());
    Episode episode;
    episode.flow_order.resize(n);
    std::iota(episode.flow_order.begin(), episode.flow_order.end(), 0);
    rng.shuffle(episode.flow_order);

    PathAllocation alloc = PathAllocation::from_spaces(ctx.spaces);
    RewardTracker tracker;
    const Path* last_path = nullptr;

    for (int flow : episode.flow_order) {
        StepRecord rec;
        rec.flow = flow;
        rec.input.feats = edge_features(ctx.graph, alloc, ctx.map, last_path);
        rec.input.demand = normalized_demand(ctx, ctx.flows[flow]);
        rec.input.paths = ctx.spaces[flow].paths;

        const Vec probs = path_probabilities(rec.input, ctx.topo, params);
        rec.chosen = greedy ? argmax_index(probs) : sample_index(probs, rng);
        rec.log_prob = std::log(probs[rec.chosen]);

        alloc.chosen[flow] = rec.chosen;
        last_path = &alloc.path_of(flow);
        rec.step_reward = tracker.step(shaped_value(ctx.graph, alloc, ctx.map, ctx.cfg, ctx.alpha));
        episode.steps.push_back(std::move(rec));
    }
    episode.terminal_return = tracker.prev;
    return {std::move(episode), std::move(alloc)};
}

double random_baseline_value(const RolloutContext& ctx, int trials, Rng& rng) {
    if (trials < 1) throw ContractViolation("baseline needs at least one trial");
    PathAllocation alloc = PathAllocation::from_spaces(ctx.spaces);
    double best = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        for (int f = 0; f < alloc.flow_count(); ++f)
            alloc.chosen[f] = rng.index(alloc.spaces[f].paths.size());
        best = std::max(best, network_utility(ctx.graph, alloc, ctx.map, ctx.cfg));
    }
    return best;
}

AdamState make_adam(const PolicyParams& params, double lr) {
    AdamState adam;
    adam.lr = lr;
    adam.m.assign(param_count(params), 0.0);
    adam.v.assign(param_count(params), 0.0);
    return adam;
}

double reinforce_update(const RolloutContext& ctx, const Episode& episode, double baseline,
                        PolicyParams& params, AdamState& adam) {
    PolicyParams grad = zeros_like(params);
    for (const StepRecord& rec : episode.steps) {
        ScoreCache cache;
        path_probabilities(rec.input, ctx.topo, params, cache);
        backward_log_prob(rec.input, ctx.topo, params, cache, rec.chosen, grad);
    }

    const double advantage = episode.terminal_return - baseline;
    double norm_sq = 0;
    bool finite = true;
    visit_params(grad, [&](double& g) {
        g *= advantage;
        if (!std::isfinite(g)) finite = false;
        norm_sq += g * g;
    });
    if (!finite || !std::isfinite(norm_sq))
        throw TrainingDiverged("non-finite policy gradient (return " +
                               std::to_string(episode.terminal_return) + ", baseline " +
                               std::to_string(baseline) + ")");

    // Adam, ascent direction.
    ++adam.step;
    const double bc1 = 1.0 - std::pow(adam.beta1, adam.step);
    const double bc2 = 1.0 - std::pow(adam.beta2, adam.step);
    std::size_t i = 0;
    std::vector<double> flat(adam.m.size());
    visit_params(grad, [&](double& g) { flat[i++] = g; });
    i = 0;
    visit_params(params, [&](double& p) {
        const double g = flat[i];
        adam.m[i] = adam.beta1 * adam.m[i] + (1.0 - adam.beta1) * g;
        adam.v[i] = adam.beta2 * adam.v[i] + (1.0 - adam.beta2) * g * g;
        const double mhat = adam.m[i] / bc1;
        const double vhat = adam.v[i] / bc2;
        p += adam.lr * mhat / (std::sqrt(vhat) + adam.eps);
        ++i;
    });
    return std::sqrt(norm_sq);
}

PolicyParams train(const InstanceProvider& instances, const TrainHyper& hyper,
                   PolicyParams params, Rng& rng) {
    std::ofstream metrics;
    if (!hyper.metrics_csv.empty()) {
        metrics.open(hyper.metrics_csv);
        if (!metrics) throw std::runtime_error("cannot write metrics log: " + hyper.metrics_csv);
        metrics << "epoch,mean_return,baseline,grad_norm\n";
    }

    AdamState adam = make_adam(params, hyper.lr);
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        const RolloutContext& ctx = instances(epoch);
        auto [episode, alloc] = rollout(ctx, params, rng);
        (void)alloc;
        const double baseline = random_baseline_value(ctx, hyper.baseline_trials, rng);
        const double grad_norm = reinforce_update(ctx, episode, baseline, params, adam);
        if (metrics.is_open()) {
            metrics << epoch << ',' << episode.terminal_return << ',' << baseline << ','
                    << grad_norm << '\n';
        }
    }
    return params;
}

}  // namespace diamond
