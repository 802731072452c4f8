#include "diamond/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "diamond/baselines.hpp"
#include "diamond/topology_io.hpp"

namespace diamond {

using nlohmann::json;

NetworkGraph random_topology(int v, int e_undirected, double area_m, Rng& rng,
                             const AttributeRanges& ranges) {
    if (v < 2) throw ContractViolation("random topology needs at least 2 nodes");
    if (e_undirected < v - 1)
        throw ContractViolation("need at least V-1 undirected edges for connectivity");
    const long max_edges = static_cast<long>(v) * (v - 1) / 2;
    if (e_undirected > max_edges)
        throw ContractViolation("more undirected edges requested than node pairs exist");

    NetworkGraph g;
    for (int i = 0; i < v; ++i) g.add_node(rng.uniform(0, area_m), rng.uniform(0, area_m));

    auto add_pair = [&](int a, int b) {
        g.add_link(a, b, rng.uniform(ranges.bandwidth_lo_mhz, ranges.bandwidth_hi_mhz),
                   rng.uniform(ranges.power_lo_mw, ranges.power_hi_mw), ranges.noise_mw);
        g.add_link(b, a, rng.uniform(ranges.bandwidth_lo_mhz, ranges.bandwidth_hi_mhz),
                   rng.uniform(ranges.power_lo_mw, ranges.power_hi_mw), ranges.noise_mw);
    };

    // Random spanning tree: attach each node to a uniformly chosen earlier one.
    std::vector<char> used(static_cast<std::size_t>(v) * v, 0);
    auto mark = [&](int a, int b) {
        used[static_cast<std::size_t>(a) * v + b] = 1;
        used[static_cast<std::size_t>(b) * v + a] = 1;
    };
    std::vector<int> order(v);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (int i = 1; i < v; ++i) {
        const int a = order[i];
        const int b = order[rng.index(i)];
        add_pair(a, b);
        mark(a, b);
    }

    int remaining = e_undirected - (v - 1);
    while (remaining > 0) {
        const int a = rng.index(v);
        const int b = rng.index(v);
        if (a == b || used[static_cast<std::size_t>(a) * v + b]) continue;
        add_pair(a, b);
        mark(a, b);
        --remaining;
    }
    return g;
}

void randomize_link_attributes(NetworkGraph& g, const AttributeRanges& ranges, Rng& rng) {
    for (Link& l : g.links) {
        l.bandwidth_mhz = rng.uniform(ranges.bandwidth_lo_mhz, ranges.bandwidth_hi_mhz);
        l.tx_power_mw = rng.uniform(ranges.power_lo_mw, ranges.power_hi_mw);
        l.noise_mw = ranges.noise_mw;
    }
}

std::vector<FlowDemand> random_flows(const NetworkGraph& g, int n, double payload_lo_mbit,
                                     double payload_hi_mbit, Rng& rng) {
    std::vector<FlowDemand> flows;
    flows.reserve(n);
    for (int i = 0; i < n; ++i) {
        FlowDemand f;
        f.id = i;
        f.src = rng.index(g.node_count());
        do {
            f.dst = rng.index(g.node_count());
        } while (f.dst == f.src);
        f.payload_mbit = rng.uniform(payload_lo_mbit, payload_hi_mbit);
        flows.push_back(f);
    }
    return flows;
}

DeliveryResult simulate_delivery(const NetworkGraph& g, const PathAllocation& alloc,
                                 const InterferenceMap& map,
                                 const std::vector<FlowDemand>& flows) {
    if (!alloc.complete()) throw ContractViolation("simulate_delivery requires a full allocation");
    const int n = alloc.flow_count();
    DeliveryResult result;
    result.delay_steps.assign(n, 0);
    result.capped.assign(n, false);

    std::vector<double> remaining(n);
    for (int f = 0; f < n; ++f) remaining[f] = flows[f].payload_mbit;
    std::vector<char> finished(n, 0);
    int unfinished = n;

    // Finished flows stop occupying their paths; rates only change when the
    // active set changes.
    PathAllocation active = alloc;
    std::vector<double> rates(n, 0);
    bool dirty = true;

    for (int t = 1; t <= kDelayCapSteps && unfinished > 0; ++t) {
        if (dirty) {
            const LinkLoad load = LinkLoad::from(active, g.link_count());
            for (int f = 0; f < n; ++f)
                if (!finished[f]) rates[f] = flow_rate(g, f, active, load, map);
            dirty = false;
        }
        for (int f = 0; f < n; ++f) {
            if (finished[f]) continue;
            remaining[f] -= rates[f];  // 1 s timestep: Mbps -> Mbit
            if (remaining[f] <= 0) {
                finished[f] = 1;
                --unfinished;
                result.delay_steps[f] = t;
                active.chosen[f] = kUnassigned;
                dirty = true;
            }
        }
    }
    for (int f = 0; f < n; ++f) {
        if (!finished[f]) {
            result.delay_steps[f] = kDelayCapSteps;
            result.capped[f] = true;
        }
        result.max_delay = std::max(result.max_delay, result.delay_steps[f]);
    }
    return result;
}

const char* method_name(Method m) {
    switch (m) {
        case Method::diamond: return "diamond";
        case Method::grrl_only: return "grrl_only";
        case Method::nb3r_only: return "nb3r_only";
        case Method::ospf: return "ospf";
        case Method::rb: return "rb";
        case Method::oracle: return "oracle";
    }
    return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
    for (Method m : {Method::diamond, Method::grrl_only, Method::nb3r_only, Method::ospf,
                     Method::rb, Method::oracle})
        if (name == method_name(m)) return m;
    return std::nullopt;
}

namespace {

AttributeRanges parse_ranges(const json& j) {
    AttributeRanges r;
    if (j.contains("bandwidth_mhz")) {
        r.bandwidth_lo_mhz = j.at("bandwidth_mhz").at(0).get<double>();
        r.bandwidth_hi_mhz = j.at("bandwidth_mhz").at(1).get<double>();
    }
    if (j.contains("tx_power_mw")) {
        r.power_lo_mw = j.at("tx_power_mw").at(0).get<double>();
        r.power_hi_mw = j.at("tx_power_mw").at(1).get<double>();
    }
    if (j.contains("noise_mw")) r.noise_mw = j.at("noise_mw").get<double>();
    return r;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open config: " + json_path);
    json j = json::parse(in);

    ExperimentConfig cfg;
    const json& jt = j.at("topology");
    const std::string kind = jt.at("kind").get<std::string>();
    if (kind == "random") {
        cfg.topology.kind = TopologySource::Kind::random;
        cfg.topology.v = jt.at("v").get<int>();
        cfg.topology.e = jt.at("e").get<int>();
        if (jt.contains("area_m")) cfg.topology.area_m = jt.at("area_m").get<double>();
    } else if (kind == "file") {
        cfg.topology.kind = TopologySource::Kind::file;
        cfg.topology.path = jt.at("path").get<std::string>();
    } else if (kind == "preset") {
        cfg.topology.kind = TopologySource::Kind::preset;
        cfg.topology.preset_name = jt.at("name").get<std::string>();
    } else {
        throw std::runtime_error("unknown topology kind: " + kind);
    }
    cfg.topology.ranges = parse_ranges(jt);

    if (j.contains("flows")) {
        cfg.num_flows = j.at("flows").at("n").get<int>();
        if (j.at("flows").contains("payload_mbit")) {
            cfg.payload_lo_mbit = j.at("flows").at("payload_mbit").at(0).get<double>();
            cfg.payload_hi_mbit = j.at("flows").at("payload_mbit").at(1).get<double>();
        }
    }
    if (j.contains("k")) cfg.k = j.at("k").get<int>();
    for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
    for (const auto& m : j.at("methods")) {
        const auto method = method_from_name(m.get<std::string>());
        if (!method) throw std::runtime_error("unknown method: " + m.get<std::string>());
        cfg.methods.push_back(*method);
    }
    if (j.contains("utility")) {
        const std::string uk = j.at("utility").at("kind").get<std::string>();
        if (uk == "rate")
            cfg.utility_kind = UtilityKind::rate;
        else if (uk == "log_rate")
            cfg.utility_kind = UtilityKind::log_rate;
        else
            throw std::runtime_error("unknown utility kind: " + uk);
    }
    if (j.contains("interference")) {
        cfg.range_m = j.at("interference").at("range_m").get<double>();
        cfg.pathloss_exp = j.at("interference").at("pathloss_exp").get<double>();
    }
    if (j.contains("nb3r")) {
        const json& jn = j.at("nb3r");
        if (jn.contains("mode")) {
            const std::string mode = jn.at("mode").get<std::string>();
            if (mode == "backoff")
                cfg.schedule.mode = ScheduleMode::backoff;
            else if (mode == "single_uniform")
                cfg.schedule.mode = ScheduleMode::single_uniform;
            else
                throw std::runtime_error("unknown nb3r mode: " + mode);
        }
        if (jn.contains("backoff_horizon"))
            cfg.schedule.backoff_horizon = jn.at("backoff_horizon").get<double>();
        if (jn.contains("max_rounds")) cfg.schedule.max_rounds = jn.at("max_rounds").get<int>();
        if (jn.contains("stall_window"))
            cfg.schedule.stall_window = jn.at("stall_window").get<int>();
        if (jn.contains("nu")) {
            const json& ju = jn.at("nu");
            if (ju.contains("cooling") && ju.at("cooling").get<bool>()) {
                cfg.schedule.nu.cooling = true;
                cfg.schedule.nu.delta = -1;  // per-instance N * u_max
                if (ju.contains("delta")) cfg.schedule.nu.delta = ju.at("delta").get<double>();
            } else if (ju.contains("fixed")) {
                cfg.schedule.nu.fixed_nu = ju.at("fixed").get<double>();
            }
        }
    } else {
        cfg.schedule.nu.cooling = true;
        cfg.schedule.nu.delta = -1;
    }
    if (j.contains("rb_trials")) cfg.rb_trials = j.at("rb_trials").get<int>();
    if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("checkpoint")) cfg.checkpoint = j.at("checkpoint").get<std::string>();
    if (j.contains("write_traces")) cfg.write_traces = j.at("write_traces").get<bool>();
    return cfg;
}

namespace {

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct SeedRow {
    std::uint64_t seed;
    Method method;
    double rate, delay, utility, wall_ms;
    int rounds;
};

struct InstanceBundle {
    RolloutContext ctx;
    std::vector<std::uint64_t> sub;  // per-purpose seeds
};

enum SeedPurpose : std::uint64_t { kTopoSeed, kFlowSeed, kMethodSeedBase };

InstanceBundle build_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
    InstanceBundle bundle;
    Rng topo_rng(derive_seed(seed, kTopoSeed));
    NetworkGraph graph;
    switch (cfg.topology.kind) {
        case TopologySource::Kind::random: {
            graph = random_topology(cfg.topology.v, cfg.topology.e, cfg.topology.area_m, topo_rng,
                                    cfg.topology.ranges);
            break;
        }
        case TopologySource::Kind::preset: {
            graph = load_preset(cfg.topology.preset_name);
            randomize_link_attributes(graph, cfg.topology.ranges, topo_rng);
            break;
        }
        case TopologySource::Kind::file: {
            graph = load_topology(cfg.topology.path).graph;
            break;
        }
    }
    graph.validate();

    Rng flow_rng(derive_seed(seed, kFlowSeed));
    std::vector<FlowDemand> flows;
    if (cfg.topology.kind == TopologySource::Kind::file) {
        TopologyFile topo = load_topology(cfg.topology.path);
        flows = topo.flows;
    }
    if (flows.empty())
        flows = random_flows(graph, cfg.num_flows, cfg.payload_lo_mbit, cfg.payload_hi_mbit,
                             flow_rng);

    bundle.ctx = make_context(std::move(graph), std::move(flows), cfg.k, cfg.range_m,
                              cfg.pathloss_exp, cfg.utility_kind, cfg.alpha);
    return bundle;
}

PathAllocation random_initial(const RolloutContext& ctx, Rng& rng) {
    PathAllocation alloc = PathAllocation::from_spaces(ctx.spaces);
    for (int f = 0; f < alloc.flow_count(); ++f)
        alloc.chosen[f] = rng.index(alloc.spaces[f].paths.size());
    return alloc;
}

}  // namespace

RunMetrics run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    const bool needs_checkpoint =
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::diamond) != cfg.methods.end() ||
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::grrl_only) != cfg.methods.end();
    PolicyParams params;
    if (needs_checkpoint) {
        if (cfg.checkpoint.empty())
            throw std::runtime_error("diamond/grrl_only methods require a checkpoint");
        params = load_checkpoint(cfg.checkpoint);
    }

    std::ofstream per_seed(fs::path(out_dir) / "per_seed.csv");
    if (!per_seed) throw std::runtime_error("cannot write per_seed.csv in " + out_dir);
    per_seed << "seed,method,avg_flow_rate_mbps,max_delay_steps,network_utility,wall_ms,"
                "nb3r_rounds\n";

    // Canonical method order keeps the outputs deterministic.
    std::vector<Method> methods;
    for (Method m : {Method::diamond, Method::grrl_only, Method::nb3r_only, Method::ospf,
                     Method::rb, Method::oracle})
        if (std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end())
            methods.push_back(m);

    std::vector<SeedRow> rows;
    auto flush_row = [&](const SeedRow& row) {
        per_seed << row.seed << ',' << method_name(row.method) << ',' << fmt_num(row.rate) << ','
                 << fmt_num(row.delay) << ',' << fmt_num(row.utility) << ','
                 << fmt_num(row.wall_ms) << ',' << row.rounds << '\n';
        per_seed.flush();
        rows.push_back(row);
    };

    for (std::uint64_t seed : cfg.seeds) {
        InstanceBundle bundle = build_instance(cfg, seed);
        const RolloutContext& ctx = bundle.ctx;
        const int n = static_cast<int>(ctx.flows.size());

        UpdateSchedule schedule = cfg.schedule;
        if (schedule.nu.cooling && schedule.nu.delta <= 0)
            schedule.nu.delta = annealing_delta(n, ctx.cfg.u_max);

        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const Method method = methods[mi];
            Rng rng(derive_seed(seed, kMethodSeedBase + static_cast<std::uint64_t>(method)));
            const auto t0 = std::chrono::steady_clock::now();

            PathAllocation alloc = PathAllocation::from_spaces(ctx.spaces);
            int rounds = 0;
            switch (method) {
                case Method::ospf:
                    alloc = ospf_allocate(ctx.spaces);
                    break;
                case Method::rb:
                    alloc = random_baseline_allocate(ctx.graph, ctx.spaces, ctx.map, ctx.cfg,
                                                     cfg.rb_trials, rng);
                    break;
                case Method::grrl_only: {
                    auto [episode, a] = rollout(ctx, params, rng, /*greedy=*/true);
                    (void)episode;
                    alloc = std::move(a);
                    break;
                }
                case Method::diamond: {
                    auto [episode, a] = rollout(ctx, params, rng, /*greedy=*/true);
                    (void)episode;
                    Nb3rResult res = nb3r_run(ctx.graph, std::move(a), ctx.map, ctx.cfg, schedule, rng);
                    rounds = res.rounds;
                    if (cfg.write_traces)
                        write_trace_csv(res.trace, (fs::path(out_dir) /
                                                    ("trace_diamond_" + std::to_string(seed) + ".csv"))
                                                       .string());
                    alloc = std::move(res.best);
                    break;
                }
                case Method::nb3r_only: {
                    PathAllocation initial = random_initial(ctx, rng);
                    Nb3rResult res = nb3r_run(ctx.graph, std::move(initial), ctx.map, ctx.cfg,
                                              schedule, rng);
                    rounds = res.rounds;
                    alloc = std::move(res.best);
                    break;
                }
                case Method::oracle: {
                    OracleResult res = brute_force_optimum(ctx.graph, ctx.spaces, ctx.map, ctx.cfg);
                    alloc.chosen = res.best_choice;
                    break;
                }
            }

            const auto t1 = std::chrono::steady_clock::now();
            const double wall_ms =
                std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0)
                    .count();

            double rate_sum = 0;
            const LinkLoad load = LinkLoad::from(alloc, ctx.graph.link_count());
            for (int f = 0; f < n; ++f) rate_sum += flow_rate(ctx.graph, f, alloc, load, ctx.map);
            const DeliveryResult delivery = simulate_delivery(ctx.graph, alloc, ctx.map, ctx.flows);
            const double utility = network_utility(ctx.graph, alloc, ctx.map, ctx.cfg);

            flush_row({seed, method, rate_sum / std::max(1, n), delivery.max_delay, utility,
                       wall_ms, rounds});
        }
    }

    RunMetrics metrics;
    for (Method m : methods) metrics.per_method[m] = {};
    for (const SeedRow& row : rows) {
        MethodMetrics& mm = metrics.per_method[row.method];
        mm.avg_flow_rate_mbps += row.rate;
        mm.max_delay_steps += row.delay;
        mm.network_utility_value += row.utility;
        mm.wall_ms += row.wall_ms;
        mm.nb3r_rounds += row.rounds;
        mm.seeds += 1;
    }
    for (auto& [m, mm] : metrics.per_method) {
        if (mm.seeds == 0) continue;
        mm.avg_flow_rate_mbps /= mm.seeds;
        mm.max_delay_steps /= mm.seeds;
        mm.network_utility_value /= mm.seeds;
        mm.wall_ms /= mm.seeds;
        mm.nb3r_rounds /= mm.seeds;
    }

    std::ofstream summary(fs::path(out_dir) / "summary.csv");
    if (!summary) throw std::runtime_error("cannot write summary.csv in " + out_dir);
    summary << "method,avg_flow_rate_mbps,max_delay_steps,network_utility,seeds\n";
    for (Method m : methods) {
        const MethodMetrics& mm = metrics.per_method[m];
        summary << method_name(m) << ',' << fmt_num(mm.avg_flow_rate_mbps) << ','
                << fmt_num(mm.max_delay_steps) << ',' << fmt_num(mm.network_utility_value) << ','
                << mm.seeds << '\n';
    }
    return metrics;
}

}  // namespace diamond
