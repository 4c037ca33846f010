// parksia: run parking-auction scenarios and sweeps from the command line.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "parksia/auction_reference.hpp"
#include "parksia/errors.hpp"
#include "parksia/experiment.hpp"

using namespace parksia;

namespace {

struct Overrides {
    std::string config;
    std::string behavior;
    std::string mix;
    double penetration = -1.0;
    long long seed = -1;
    std::string out;
};

void add_override_flags(CLI::App* cmd, Overrides& o, bool single_run) {
    cmd->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "Output directory");
    if (!single_run) return;
    cmd->add_option("--behavior", o.behavior, "baseline | information | auction");
    cmd->add_option("--penetration", o.penetration, "Share of participating drivers in [0, 1]");
    cmd->add_option("--mix", o.mix, "MIX10 | MIX25 | MIX50");
    cmd->add_option("--seed", o.seed, "Random seed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig resolve(const Overrides& o) {
    ScenarioConfig cfg = o.config.empty() ? ScenarioConfig{} : parse_config(read_file(o.config));
    if (!o.behavior.empty()) cfg.sim.behavior = parse_behavior(o.behavior);
    if (!o.mix.empty()) cfg.demand.mix = parse_mix(o.mix);
    if (o.penetration >= 0.0) cfg.demand.penetration = o.penetration;
    if (o.seed >= 0) {
        cfg.demand.seed = static_cast<std::uint64_t>(o.seed);
        cfg.sim.seed = cfg.demand.seed;
    }
    if (!o.out.empty()) cfg.output_dir = o.out;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mesoscopic parking simulator with ascending-auction space assignment"};
    app.require_subcommand(1);

    Overrides run_o;
    bool stream = false;
    bool population = false;
    auto* run = app.add_subcommand("run", "Run one scenario and write its CSV outputs");
    add_override_flags(run, run_o, true);
    run->add_flag("--stream", stream, "Also write the raw event stream (stream.log)");
    run->add_flag("--population", population, "Also write the sampled population (population.csv)");

    Overrides matrix_o;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    int seeds = -1;
    bool artifacts = false;
    std::vector<std::string> only_mix, only_behavior;
    std::vector<double> only_pen;
    auto* matrix = app.add_subcommand("matrix", "Run the mix x behavior x penetration x seed sweep");
    add_override_flags(matrix, matrix_o, false);
    matrix->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
    matrix->add_option("--seeds", seeds, "Use seeds 0..N-1 instead of the configured list");
    matrix->add_option("--mix", only_mix, "Restrict to these mixes");
    matrix->add_option("--behavior", only_behavior, "Restrict to these behaviors");
    matrix->add_option("--penetration", only_pen, "Restrict to these penetrations");
    matrix->add_flag("--artifacts", artifacts, "Write per-run CSV directories under OUT/runs");

    Overrides validate_o;
    bool dump_network = false;
    auto* validate_cmd = app.add_subcommand("validate", "Check a config and print the resolved values");
    add_override_flags(validate_cmd, validate_o, true);
    validate_cmd->add_flag("--dump-network", dump_network, "Print the network adjacency and zone listing");

    int oracle_count = 1000;
    long long oracle_seed = 1;
    int oracle_lots = 3;
    int oracle_agents = 6;
    std::string oracle_normalizer = "max_ask";
    auto* oracle = app.add_subcommand("oracle", "Cross-check the auction engine against the brute-force reference");
    oracle->add_option("--count", oracle_count, "Random instances")->check(CLI::PositiveNumber);
    oracle->add_option("--seed", oracle_seed, "Instance generator seed");
    oracle->add_option("--max-lots", oracle_lots, "Auctions per instance (max)")->check(CLI::PositiveNumber);
    oracle->add_option("--max-agents", oracle_agents, "Agents per instance (max)")->check(CLI::PositiveNumber);
    oracle->add_option("--normalizer", oracle_normalizer, "Price normalizer: max_ask | valuation");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            ScenarioConfig cfg = resolve(run_o);
            cfg.write_stream = cfg.write_stream || stream;
            cfg.write_population = cfg.write_population || population;
            auto t0 = std::chrono::steady_clock::now();
            RunResult r = run_scenario(cfg);
            write_run(r, cfg.output_dir);
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const RunSummary& s = r.summary;
            std::printf("%s %s p=%.2f seed=%llu: %ld vehicles, %ld steps, %.2f s\n", to_string(cfg.demand.mix),
                        to_string(cfg.sim.behavior), cfg.demand.penetration,
                        static_cast<unsigned long long>(cfg.demand.seed), s.vehicles, r.steps, secs);
            std::printf("  route %.1f m  price %.4f EUR  distance %.1f m  flow %.1f veh/h\n", s.overall.route_length.mean,
                        s.overall.price.mean, s.overall.parking_distance.mean, s.flow);
            if (s.reservations_granted > 0)
                std::printf("  reservations %ld granted, success %.3f\n", s.reservations_granted, s.reservation_success);
            std::printf("  short-route fraction %.4f\n  outputs in %s\n", s.short_route_fraction, cfg.output_dir.c_str());
            return 0;
        }
        if (*matrix) {
            ScenarioConfig base = resolve(matrix_o);
            MatrixSpec spec = matrix_o.config.empty() ? MatrixSpec{} : parse_matrix_spec(read_file(matrix_o.config));
            if (seeds > 0) {
                spec.seeds.clear();
                for (int s = 0; s < seeds; ++s) spec.seeds.push_back(static_cast<std::uint64_t>(s));
            }
            if (!only_mix.empty()) {
                spec.mixes.clear();
                for (const auto& m : only_mix) spec.mixes.push_back(parse_mix(m));
            }
            if (!only_behavior.empty()) {
                spec.behaviors.clear();
                for (const auto& b : only_behavior) spec.behaviors.push_back(parse_behavior(b));
            }
            if (!only_pen.empty()) spec.penetrations = only_pen;
            MatrixOptions opts;
            opts.jobs = jobs;
            opts.out_dir = base.output_dir;
            opts.per_run_artifacts = artifacts;
            opts.progress = [](std::size_t done, std::size_t total) {
                std::fprintf(stderr, "\r%zu/%zu runs", done, total);
                if (done == total) std::fprintf(stderr, "\n");
            };
            std::printf("%zu cells, %zu runs, %d jobs\n", expand_cells(spec).size(), run_count(spec), jobs);
            MatrixResult res = run_matrix(base, spec, opts);
            {
                std::ofstream echo(std::filesystem::path(base.output_dir) / "matrix_spec.json");
                echo << to_json_text(spec);
            }
            write_matrix_csv(std::cout, res);
            for (const auto& f : res.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
            return res.failures.empty() ? 0 : 1;
        }
        if (*validate_cmd) {
            ScenarioConfig cfg = resolve(validate_o);
            validate(cfg);
            if (!validate_o.config.empty()) parse_matrix_spec(read_file(validate_o.config));
            std::cout << to_json_text(cfg);
            if (dump_network) build_grid(cfg.grid).dump(std::cout);
            std::fprintf(stderr, "config OK\n");
            return 0;
        }
        if (*oracle) {
            AuctionConfig cfg;
            cfg.normalizer = parse_price_normalizer(oracle_normalizer);
            auto t0 = std::chrono::steady_clock::now();
            auto rep = reference::cross_check(oracle_count, static_cast<std::uint64_t>(oracle_seed), oracle_lots,
                                              oracle_agents, cfg);
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::printf("%d instances (%d single-auction): %d mismatches, %d second-price violations, %.3f s\n",
                        rep.instances, rep.single_lot_cases, rep.mismatches, rep.second_price_violations, secs);
            for (const auto& f : rep.failures) std::printf("  %s\n", f.c_str());
            return rep.mismatches == 0 && rep.second_price_violations == 0 ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
