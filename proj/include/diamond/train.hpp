#pragma once

#include <functional>
#include <string>
#include <vector>

#include "diamond/net.hpp"
#include "diamond/path_space.hpp"
#include "diamond/policy.hpp"
#include "diamond/rng.hpp"

namespace diamond {

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One allocation episode: flows allocated sequentially in a random order.
struct StepRecord {
    int flow = 0;
    PolicyInput input;   // state snapshot the decision was made from
    int chosen = 0;
    double log_prob = 0;
    double step_reward = 0;  // R_n = r_n - r_{n-1}
};

struct Episode {
    std::vector<int> flow_order;
    std::vector<StepRecord> steps;
    double terminal_return = 0;  // r_N; equals the sum of step rewards
};

// A routing instance bundled with everything rollouts need.
struct RolloutContext {
    NetworkGraph graph;
    InterferenceMap map;
    LinkTopology topo;
    std::vector<FlowDemand> flows;
    std::vector<ActionSpace> spaces;
    UtilityConfig cfg;
    double alpha = 0.5;  // reward mix between utility sum and interference level
};

RolloutContext make_context(NetworkGraph graph, std::vector<FlowDemand> flows, int k,
                            double range_m, double pathloss_exp, UtilityKind kind, double alpha);

// r_n: alpha * (utility sum of the allocated flows) - (1-alpha) * (cumulative
// interference over the allocated links, normalized per-link by the noise
// power to keep the units mixable).
double shaped_value(const NetworkGraph& g, const PathAllocation& partial,
                    const InterferenceMap& map, const UtilityConfig& cfg, double alpha);

// Turns consecutive shaped values into telescoping step rewards.
struct RewardTracker {
    double prev = 0;
    double step(double now) {
        const double r = now - prev;
        prev = now;
        return r;
    }
};

// Plays one full episode: shuffled flow order, per-step policy sampling (or
// argmax when greedy), environment update, shaped step rewards.
std::pair<Episode, PathAllocation> rollout(const RolloutContext& ctx, const PolicyParams& params,
                                           Rng& rng, bool greedy = false);

// Best network utility over `trials` uniform-random full allocations. Depends
// only on the instance and the generator, never on the policy.
double random_baseline_value(const RolloutContext& ctx, int trials, Rng& rng);

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    Vec m, v;
};

AdamState make_adam(const PolicyParams& params, double lr);

// One REINFORCE-with-baseline ascent step from a recorded episode. Returns the
// gradient norm. Throws TrainingDiverged on non-finite gradients.
double reinforce_update(const RolloutContext& ctx, const Episode& episode, double baseline,
                        PolicyParams& params, AdamState& adam);

struct TrainHyper {
    int epochs = 500;
    double lr = 1e-3;
    int baseline_trials = 16;
    std::string metrics_csv;  // optional; header: epoch,mean_return,baseline,grad_norm
};

using InstanceProvider = std::function<const RolloutContext&(int epoch)>;

// The agent loop: rollout, baseline, update; per-epoch metrics appended to the
// CSV when configured.
PolicyParams train(const InstanceProvider& instances, const TrainHyper& hyper,
                   PolicyParams params, Rng& rng);

}  // namespace diamond
