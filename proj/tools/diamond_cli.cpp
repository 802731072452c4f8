// Command-line front end: topology generation, policy training, experiment
// runs and the exhaustive oracle.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "diamond/baselines.hpp"
#include "diamond/sim.hpp"
#include "diamond/topology_io.hpp"
#include "diamond/train.hpp"

namespace {

using namespace diamond;
using nlohmann::json;

int cmd_gen_topology(int v, int e, double area, std::uint64_t seed, int n_flows,
                     const std::string& out) {
    Rng rng(seed);
    AttributeRanges ranges;
    TopologyFile topo;
    topo.graph = random_topology(v, e, area, rng, ranges);
    if (n_flows > 0) topo.flows = random_flows(topo.graph, n_flows, 1, 100, rng);
    save_topology(topo, out);
    std::cout << "wrote " << out << " (" << topo.graph.node_count() << " nodes, "
              << topo.graph.link_count() << " directed links, " << topo.flows.size()
              << " flows)\n";
    return 0;
}

struct TrainFileConfig {
    int v = 6, e = 10, n = 2, k = 2;
    double area_m = 1000;
    int epochs = 500;
    double lr = 1e-3;
    double alpha = 1.0;
    int baseline_trials = 16;
    int dim = 16, depth = 3;
    std::uint64_t seed = 1;
    bool fixed_instance = true;
    double range_m = 500, pathloss_exp = 2;
    std::string utility = "rate";
    std::string metrics_csv;
};

TrainFileConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j = json::parse(in);
    TrainFileConfig c;
    if (j.contains("v")) c.v = j.at("v").get<int>();
    if (j.contains("e")) c.e = j.at("e").get<int>();
    if (j.contains("n")) c.n = j.at("n").get<int>();
    if (j.contains("k")) c.k = j.at("k").get<int>();
    if (j.contains("area_m")) c.area_m = j.at("area_m").get<double>();
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
    if (j.contains("lr")) c.lr = j.at("lr").get<double>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("baseline_trials")) c.baseline_trials = j.at("baseline_trials").get<int>();
    if (j.contains("d")) c.dim = j.at("d").get<int>();
    if (j.contains("t")) c.depth = j.at("t").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("fixed_instance")) c.fixed_instance = j.at("fixed_instance").get<bool>();
    if (j.contains("range_m")) c.range_m = j.at("range_m").get<double>();
    if (j.contains("pathloss_exp")) c.pathloss_exp = j.at("pathloss_exp").get<double>();
    if (j.contains("utility")) c.utility = j.at("utility").get<std::string>();
    if (j.contains("metrics_csv")) c.metrics_csv = j.at("metrics_csv").get<std::string>();
    return c;
}

int cmd_train(const std::string& config_path, const std::string& out) {
    const TrainFileConfig c = load_train_config(config_path);
    const UtilityKind kind = c.utility == "log_rate" ? UtilityKind::log_rate : UtilityKind::rate;

    auto make_instance = [&](std::uint64_t seed) {
        Rng rng(derive_seed(seed, 0));
        AttributeRanges ranges;
        NetworkGraph g = random_topology(c.v, c.e, c.area_m, rng, ranges);
        std::vector<FlowDemand> flows = random_flows(g, c.n, 1, 100, rng);
        return make_context(std::move(g), std::move(flows), c.k, c.range_m, c.pathloss_exp, kind,
                            c.alpha);
    };

    Rng init_rng(derive_seed(c.seed, 1));
    PolicyParams params = init_policy(c.dim, c.depth, init_rng);

    TrainHyper hyper;
    hyper.epochs = c.epochs;
    hyper.lr = c.lr;
    hyper.baseline_trials = c.baseline_trials;
    hyper.metrics_csv = c.metrics_csv;

    Rng train_rng(derive_seed(c.seed, 2));
    PolicyParams trained;
    if (c.fixed_instance) {
        RolloutContext ctx = make_instance(c.seed);
        trained = train([&](int) -> const RolloutContext& { return ctx; }, hyper,
                        std::move(params), train_rng);
    } else {
        // Fresh instance per epoch, deterministically derived from the seed.
        std::vector<RolloutContext> cache;
        trained = train(
            [&](int epoch) -> const RolloutContext& {
                cache.push_back(make_instance(derive_seed(c.seed, 100 + epoch)));
                return cache.back();
            },
            hyper, std::move(params), train_rng);
    }
    save_checkpoint(out, trained);
    std::cout << "wrote checkpoint " << out << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& checkpoint,
            const std::string& out_dir) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
    const RunMetrics metrics = run_experiment(cfg, out_dir);
    for (const auto& [m, mm] : metrics.per_method)
        std::cout << method_name(m) << ": avg_rate=" << mm.avg_flow_rate_mbps
                  << " Mbps, max_delay=" << mm.max_delay_steps
                  << " steps, utility=" << mm.network_utility_value << " (" << mm.seeds
                  << " seeds)\n";
    std::cout << "results in " << out_dir << "\n";
    return 0;
}

int cmd_oracle(const std::string& topology_path, int k, const std::string& out) {
    const TopologyFile topo = load_topology(topology_path);
    if (topo.flows.empty()) throw std::runtime_error("topology file carries no flows");
    InterferenceMap map = build_interference_map(topo.graph, topo.range_m, topo.pathloss_exp);
    UtilityConfig cfg{UtilityKind::rate, default_u_max(topo.graph, map, UtilityKind::rate)};
    const OracleResult result =
        brute_force_optimum(topo.graph, topo.flows, k, map, cfg, /*want_table=*/true);
    write_oracle_csv(result, out);
    std::cout << "optimum utility " << result.best_utility << "; table in " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-flow routing over wireless interference networks"};
    app.require_subcommand(1);

    int v = 10, e = 15, n_flows = 0, k = 4;
    double area = 1000;
    std::uint64_t seed = 1;
    std::string out, config, checkpoint, topology;

    auto* gen = app.add_subcommand("gen-topology", "Generate a random connected topology file");
    gen->add_option("--v", v, "node count")->required();
    gen->add_option("--e", e, "undirected edge count")->required();
    gen->add_option("--area", area, "deployment square side, meters");
    gen->add_option("--seed", seed, "rng seed");
    gen->add_option("--n", n_flows, "flow demands to generate");
    gen->add_option("--out", out, "output JSON path")->required();

    auto* train_cmd = app.add_subcommand("train", "Train the routing policy");
    train_cmd->add_option("--config", config, "training config JSON")->required();
    train_cmd->add_option("--out", out, "checkpoint output path")->required();

    auto* run = app.add_subcommand("run", "Run configured methods with a checkpoint");
    run->add_option("--config", config, "experiment config JSON")->required();
    run->add_option("--checkpoint", checkpoint, "policy checkpoint");
    run->add_option("--out", out, "output directory")->required();

    auto* compare = app.add_subcommand("compare", "Run the configured method comparison");
    compare->add_option("--config", config, "experiment config JSON")->required();
    compare->add_option("--out", out, "output directory")->required();

    auto* oracle = app.add_subcommand("oracle", "Exhaustive optimum for a topology file");
    oracle->add_option("--topology", topology, "topology JSON with flows")->required();
    oracle->add_option("--k", k, "routes per flow");
    oracle->add_option("--out", out, "oracle table CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_topology(v, e, area, seed, n_flows, out);
        if (train_cmd->parsed()) return cmd_train(config, out);
        if (run->parsed()) return cmd_run(config, checkpoint, out);
        if (compare->parsed()) return cmd_run(config, "", out);
        if (oracle->parsed()) return cmd_oracle(topology, k, out);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
