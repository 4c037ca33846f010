#include "parksia/experiment.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "parksia/csv.hpp"
#include "parksia/errors.hpp"

namespace parksia {

using nlohmann::json;

namespace {

void reject_unknown(const json& section, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!section.is_object()) throw ConfigError("'" + where + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = section.begin(); it != section.end(); ++it) {
        if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

std::string price_text(double v) { return std::isnan(v) ? "" : csv::fixed(v, 4); }
std::string value_text(double v) { return std::isnan(v) ? "" : csv::general(v); }

}  // namespace

void validate(const ScenarioConfig& cfg) {
    build_grid(cfg.grid);  // throws on bad geometry
    validate(cfg.demand);
    validate(cfg.sim);
    if (cfg.steady_cut_s < 0.0) throw ConfigError("steady_state_cut_s must be non-negative");
    if (cfg.sim.behavior == Behavior::Baseline && cfg.demand.penetration != 0.0)
        throw ConfigError("baseline behavior takes penetration 0 (got " + csv::num(cfg.demand.penetration) + ")");
}

ScenarioConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    reject_unknown(j, "config",
                   {"network", "demand", "auction", "traffic", "metrics", "behavior", "penetration", "seed",
                    "output_dir", "write_stream", "write_population", "matrix"});
    ScenarioConfig c;
    if (j.contains("network")) {
        const json& n = j["network"];
        reject_unknown(n, "network",
                       {"rows", "cols", "spacing_m", "capacity", "free_flow_speed_mps", "price_outer_eur",
                        "price_inner_eur", "inner_edges"});
        read(n, "rows", c.grid.rows, "network");
        read(n, "cols", c.grid.cols, "network");
        read(n, "spacing_m", c.grid.spacing, "network");
        read(n, "capacity", c.grid.capacity, "network");
        read(n, "free_flow_speed_mps", c.grid.free_flow_speed, "network");
        read(n, "price_outer_eur", c.grid.prices.outer, "network");
        read(n, "price_inner_eur", c.grid.prices.inner, "network");
        if (n.contains("inner_edges") && !n["inner_edges"].is_null()) {
            std::vector<int> ids;
            read(n, "inner_edges", ids, "network");
            c.grid.inner_edges = ids;
        }
    }
    if (j.contains("demand")) {
        const json& d = j["demand"];
        reject_unknown(d, "demand",
                       {"n_drivers", "horizon_s", "mix", "valuation_eur", "max_depart_offset_s", "min_stay_s",
                        "max_stay_s", "low_beta", "high_beta"});
        read(d, "n_drivers", c.demand.n_drivers, "demand");
        read(d, "horizon_s", c.demand.horizon, "demand");
        if (d.contains("mix")) {
            std::string mix;
            read(d, "mix", mix, "demand");
            c.demand.mix = parse_mix(mix);
        }
        read(d, "valuation_eur", c.demand.valuation, "demand");
        read(d, "max_depart_offset_s", c.demand.max_depart_offset, "demand");
        read(d, "min_stay_s", c.demand.min_stay, "demand");
        read(d, "max_stay_s", c.demand.max_stay, "demand");
        read(d, "low_beta", c.demand.low_beta, "demand");
        read(d, "high_beta", c.demand.high_beta, "demand");
    }
    if (j.contains("auction")) {
        const json& a = j["auction"];
        reject_unknown(a, "auction", {"epsilon_eur", "quiescence_rounds", "period_s", "max_rounds_guard",
                                         "price_normalizer"});
        read(a, "epsilon_eur", c.sim.auction.epsilon, "auction");
        read(a, "quiescence_rounds", c.sim.auction.quiescence_rounds, "auction");
        read(a, "period_s", c.sim.auction_period, "auction");
        read(a, "max_rounds_guard", c.sim.auction.max_rounds_guard, "auction");
        if (a.contains("price_normalizer")) {
            std::string n;
            read(a, "price_normalizer", n, "auction");
            c.sim.auction.normalizer = parse_price_normalizer(n);
        }
    }
    if (j.contains("traffic")) {
        const json& t = j["traffic"];
        reject_unknown(t, "traffic", {"exit_capacity_vps", "rerouter_radius_blocks", "drain_guard_s"});
        read(t, "exit_capacity_vps", c.sim.exit_capacity, "traffic");
        read(t, "rerouter_radius_blocks", c.sim.rerouter_radius_blocks, "traffic");
        read(t, "drain_guard_s", c.sim.drain_guard, "traffic");
    }
    if (j.contains("metrics")) {
        const json& m = j["metrics"];
        reject_unknown(m, "metrics", {"steady_state_cut_s", "detector_window_s"});
        read(m, "steady_state_cut_s", c.steady_cut_s, "metrics");
        read(m, "detector_window_s", c.sim.detector_window, "metrics");
    }
    if (j.contains("behavior")) {
        std::string b;
        read(j, "behavior", b, "config");
        c.sim.behavior = parse_behavior(b);
    }
    read(j, "penetration", c.demand.penetration, "config");
    std::uint64_t seed = 0;
    if (j.contains("seed")) {
        read(j, "seed", seed, "config");
        c.demand.seed = seed;
        c.sim.seed = seed;
    }
    read(j, "output_dir", c.output_dir, "config");
    read(j, "write_stream", c.write_stream, "config");
    read(j, "write_population", c.write_population, "config");
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_json_text(const ScenarioConfig& c) {
    json j;
    j["network"] = {{"rows", c.grid.rows},
                    {"cols", c.grid.cols},
                    {"spacing_m", c.grid.spacing},
                    {"capacity", c.grid.capacity},
                    {"free_flow_speed_mps", c.grid.free_flow_speed},
                    {"price_outer_eur", c.grid.prices.outer},
                    {"price_inner_eur", c.grid.prices.inner},
                    {"inner_edges", c.grid.inner_edges ? json(*c.grid.inner_edges) : json(nullptr)}};
    j["demand"] = {{"n_drivers", c.demand.n_drivers},
                   {"horizon_s", c.demand.horizon},
                   {"mix", to_string(c.demand.mix)},
                   {"valuation_eur", c.demand.valuation},
                   {"max_depart_offset_s", c.demand.max_depart_offset},
                   {"min_stay_s", c.demand.min_stay},
                   {"max_stay_s", c.demand.max_stay},
                   {"low_beta", c.demand.low_beta},
                   {"high_beta", c.demand.high_beta}};
    j["auction"] = {{"epsilon_eur", c.sim.auction.epsilon},
                    {"quiescence_rounds", c.sim.auction.quiescence_rounds},
                    {"period_s", c.sim.auction_period},
                    {"max_rounds_guard", c.sim.auction.max_rounds_guard},
                    {"price_normalizer", to_string(c.sim.auction.normalizer)}};
    j["traffic"] = {{"exit_capacity_vps", c.sim.exit_capacity},
                    {"rerouter_radius_blocks", c.sim.rerouter_radius_blocks},
                    {"drain_guard_s", c.sim.drain_guard}};
    j["metrics"] = {{"steady_state_cut_s", c.steady_cut_s}, {"detector_window_s", c.sim.detector_window}};
    j["behavior"] = to_string(c.sim.behavior);
    j["penetration"] = c.demand.penetration;
    j["seed"] = c.demand.seed;
    j["output_dir"] = c.output_dir;
    j["write_stream"] = c.write_stream;
    j["write_population"] = c.write_population;
    return j.dump(2) + "\n";
}

RunResult run_scenario(const ScenarioConfig& cfg) {
    validate(cfg);
    RoadNetwork net = build_grid(cfg.grid);
    std::vector<Driver> population = sample_population(net, cfg.demand);
    SimConfig sim_cfg = cfg.sim;
    sim_cfg.seed = cfg.demand.seed;
    Simulation sim(net, population, sim_cfg);
    sim.run();

    RunResult r;
    r.config = cfg;
    r.events = sim.parking_events();
    r.trips = sim.trips();
    r.detectors = sim.detectors().aggregate();
    r.auction_batches = sim.auction_batches();
    r.steps = sim.clock();

    SummaryConfig sc;
    sc.steady_cut_s = cfg.steady_cut_s;
    sc.steady_end_s = static_cast<double>(sim.last_departure());
    sc.capacity = cfg.grid.capacity;
    sc.n_edges = static_cast<int>(net.edges().size());
    r.summary = summarize(r.events, r.trips, sim.detectors(), sim.occupancy_log(), sc);
    r.steady = steady_windows(sim.detectors().window(), sc.steady_cut_s, sc.steady_end_s, sim.detectors().num_windows());
    if (cfg.write_stream) r.stream = sim.stream();
    if (cfg.write_population) r.population = std::move(population);
    return r;
}

std::vector<std::pair<std::string, double>> summary_fields(const RunResult& run) {
    const RunSummary& s = run.summary;
    std::vector<std::pair<std::string, double>> f;
    auto group = [&f](const std::string& prefix, const GroupStats& g, bool percentiles) {
        f.emplace_back(prefix + "route_length_mean", g.route_length.mean);
        if (percentiles) {
            f.emplace_back(prefix + "route_length_p10", g.route_length.p10);
            f.emplace_back(prefix + "route_length_p90", g.route_length.p90);
        }
        f.emplace_back(prefix + "price_mean", g.price.mean);
        if (percentiles) {
            f.emplace_back(prefix + "price_p10", g.price.p10);
            f.emplace_back(prefix + "price_p90", g.price.p90);
        }
        f.emplace_back(prefix + "distance_mean", g.parking_distance.mean);
        if (percentiles) {
            f.emplace_back(prefix + "distance_p10", g.parking_distance.p10);
            f.emplace_back(prefix + "distance_p90", g.parking_distance.p90);
        }
        f.emplace_back(prefix + "parkings", static_cast<double>(g.price.n));
    };
    group("", s.overall, true);
    group("part_", s.participants, false);
    group("nonpart_", s.non_participants, false);
    f.emplace_back("flow_mean", s.flow);
    f.emplace_back("flow_p10", s.flow_p10);
    f.emplace_back("flow_p90", s.flow_p90);
    f.emplace_back("reservations_granted", static_cast<double>(s.reservations_granted));
    f.emplace_back("reservations_honored", static_cast<double>(s.reservations_honored));
    f.emplace_back("success_rate", s.reservation_success);
    f.emplace_back("short_route_fraction", s.short_route_fraction);
    f.emplace_back("vehicles", static_cast<double>(s.vehicles));
    f.emplace_back("auction_batches", static_cast<double>(run.auction_batches));
    return f;
}

void write_events_csv(std::ostream& os, const std::vector<ParkingEvent>& events) {
    os << "time_s,driver,participant,area,preferred_area,space,price_eur,parking_distance_m,used_reservation\n";
    for (const ParkingEvent& e : events) {
        os << e.time << ',' << e.driver << ',' << (e.participant ? 1 : 0) << ',' << e.area << ',' << e.preferred_area
           << ',' << e.space << ',' << csv::num(e.price) << ',' << csv::num(e.parking_distance) << ','
           << (e.used_reservation ? 1 : 0) << '\n';
    }
}

void write_trips_csv(std::ostream& os, const std::vector<TripRecord>& trips) {
    os << "driver,participant,spawn_s,first_attempt_s,park_s,exit_s,route_length_m,reservation_granted,"
          "reservation_honored,short_route\n";
    for (const TripRecord& t : trips) {
        os << t.driver << ',' << (t.participant ? 1 : 0) << ',' << t.spawn_time << ',' << t.first_attempt_time << ','
           << t.park_time << ',' << t.exit_time << ',' << csv::general(t.route_length) << ','
           << (t.reservation_granted ? 1 : 0) << ',' << (t.reservation_honored ? 1 : 0) << ','
           << (t.short_route ? 1 : 0) << '\n';
    }
}

void write_detectors_csv(std::ostream& os, const std::vector<DetectorRecord>& records, SteadyWindows steady,
                         double window_s) {
    os << "edge,window,window_start_s,count,flow_vph,steady\n";
    for (const DetectorRecord& r : records) {
        bool in = r.window >= steady.first && r.window <= steady.last;
        os << r.edge << ',' << r.window << ',' << csv::general(r.window * window_s) << ',' << r.count << ','
           << csv::num(r.flow) << ',' << (in ? 1 : 0) << '\n';
    }
}

void write_edge_stats_csv(std::ostream& os, const RoadNetwork& net, const RunSummary& summary) {
    os << "edge,from_row,from_col,to_row,to_col,zone,base_price_eur,mean_occupancy,mean_price_eur,parkings\n";
    for (const EdgeStat& s : summary.edges) {
        const Edge& e = net.edge(s.edge);
        const Junction& a = net.junctions()[e.from];
        const Junction& b = net.junctions()[e.to];
        os << s.edge << ',' << a.row << ',' << a.col << ',' << b.row << ',' << b.col << ',' << to_string(e.zone) << ','
           << csv::num(net.zone_price(e.id)) << ',' << csv::fixed(s.mean_occupancy, 6) << ','
           << price_text(s.mean_price) << ',' << s.parkings << '\n';
    }
}

namespace {

bool is_price_field(const std::string& name) { return name.find("price") != std::string::npos; }

std::string field_text(const std::string& name, double v) {
    return is_price_field(name) ? price_text(v) : value_text(v);
}

}  // namespace

void write_summary_header(std::ostream& os) {
    RunResult dummy;
    os << "mix,behavior,penetration,seed";
    for (const auto& [name, v] : summary_fields(dummy)) os << ',' << name;
    os << '\n';
}

void write_summary_row(std::ostream& os, const RunResult& run) {
    const ScenarioConfig& c = run.config;
    os << to_string(c.demand.mix) << ',' << to_string(c.sim.behavior) << ',' << csv::num(c.demand.penetration) << ','
       << c.demand.seed;
    for (const auto& [name, v] : summary_fields(run)) os << ',' << field_text(name, v);
    os << '\n';
}

void write_run(const RunResult& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        return out;
    };
    RoadNetwork net = build_grid(run.config.grid);
    {
        auto out = open("events.csv");
        write_events_csv(out, run.events);
    }
    {
        auto out = open("trips.csv");
        write_trips_csv(out, run.trips);
    }
    {
        auto out = open("detectors.csv");
        write_detectors_csv(out, run.detectors, run.steady, run.config.sim.detector_window);
    }
    {
        auto out = open("edge_stats.csv");
        write_edge_stats_csv(out, net, run.summary);
    }
    {
        auto out = open("summary.csv");
        write_summary_header(out);
        write_summary_row(out, run);
    }
    {
        auto out = open("network.txt");
        net.dump(out);
    }
    {
        auto out = open("config.json");
        out << to_json_text(run.config);
    }
    if (!run.stream.empty()) {
        auto out = open("stream.log");
        write_stream(out, run.stream);
    }
    if (!run.population.empty()) {
        auto out = open("population.csv");
        write_population_csv(out, run.population);
    }
}

MatrixSpec parse_matrix_spec(const std::string& text) {
    MatrixSpec spec;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("matrix")) return spec;
    const json& m = j["matrix"];
    reject_unknown(m, "matrix", {"mixes", "behaviors", "penetrations", "seeds"});
    if (m.contains("mixes")) {
        std::vector<std::string> names;
        read(m, "mixes", names, "matrix");
        spec.mixes.clear();
        for (const auto& n : names) spec.mixes.push_back(parse_mix(n));
    }
    if (m.contains("behaviors")) {
        std::vector<std::string> names;
        read(m, "behaviors", names, "matrix");
        spec.behaviors.clear();
        for (const auto& n : names) spec.behaviors.push_back(parse_behavior(n));
    }
    read(m, "penetrations", spec.penetrations, "matrix");
    read(m, "seeds", spec.seeds, "matrix");
    for (double p : spec.penetrations)
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("matrix penetrations must lie in [0, 1]");
    if (spec.mixes.empty() || spec.behaviors.empty() || spec.seeds.empty())
        throw ConfigError("matrix needs at least one mix, behavior and seed");
    return spec;
}

std::string to_json_text(const MatrixSpec& spec) {
    json m;
    std::vector<std::string> mixes, behaviors;
    for (Mix x : spec.mixes) mixes.emplace_back(to_string(x));
    for (Behavior b : spec.behaviors) behaviors.emplace_back(to_string(b));
    m["mixes"] = mixes;
    m["behaviors"] = behaviors;
    m["penetrations"] = spec.penetrations;
    m["seeds"] = spec.seeds;
    return json{{"matrix", m}}.dump(2) + "\n";
}

std::vector<MatrixCell> expand_cells(const MatrixSpec& spec) {
    std::vector<MatrixCell> cells;
    for (Mix m : spec.mixes) {
        for (Behavior b : spec.behaviors) {
            if (b == Behavior::Baseline) {
                cells.push_back({m, b, 0.0});
                continue;
            }
            for (double p : spec.penetrations) cells.push_back({m, b, p});
        }
    }
    return cells;
}

std::size_t run_count(const MatrixSpec& spec) { return expand_cells(spec).size() * spec.seeds.size(); }

double MatrixRow::get(const std::string& name) const {
    for (const auto& [n, v] : means)
        if (n == name) return v;
    throw InternalError("no matrix column named " + name);
}

std::string cell_label(const MatrixCell& cell) {
    return std::string(to_string(cell.mix)) + "/" + to_string(cell.behavior) + "/" + csv::num(cell.penetration);
}

MatrixResult run_matrix(const ScenarioConfig& base, const MatrixSpec& spec, const MatrixOptions& opts) {
    const auto cells = expand_cells(spec);
    struct Job {
        std::size_t cell;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (std::uint64_t s : spec.seeds) jobs.push_back({c, s});

    std::vector<std::optional<std::vector<std::pair<std::string, double>>>> fields(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> finished{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const MatrixCell& cell = cells[jobs[i].cell];
            ScenarioConfig cfg = base;
            cfg.demand.mix = cell.mix;
            cfg.sim.behavior = cell.behavior;
            cfg.demand.penetration = cell.penetration;
            cfg.demand.seed = jobs[i].seed;
            cfg.sim.seed = jobs[i].seed;
            try {
                RunResult r = run_scenario(cfg);
                fields[i] = summary_fields(r);
                if (opts.out_dir && opts.per_run_artifacts) {
                    std::string name = std::string(to_string(cell.mix)) + "_" + to_string(cell.behavior) + "_p" +
                                       csv::fixed(cell.penetration, 1) + "_s" + std::to_string(jobs[i].seed);
                    write_run(r, *opts.out_dir / "runs" / name);
                }
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
            std::size_t done = ++finished;
            if (opts.progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                opts.progress(done, jobs.size());
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(opts.jobs, static_cast<int>(jobs.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    MatrixResult result;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const MatrixCell& cell = cells[jobs[i].cell];
        if (!fields[i]) {
            result.failures.push_back(cell_label(cell) + "/seed" + std::to_string(jobs[i].seed) + ": " + errors[i]);
            continue;
        }
        result.runs.push_back({cell, jobs[i].seed, *fields[i]});
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
        MatrixRow row;
        row.cell = cells[c];
        std::vector<double> sums;
        std::vector<int> counts;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (jobs[i].cell != c || !fields[i]) continue;
            const auto& f = *fields[i];
            if (row.means.empty()) {
                for (const auto& [name, v] : f) row.means.emplace_back(name, 0.0);
                sums.assign(f.size(), 0.0);
                counts.assign(f.size(), 0);
            }
            for (std::size_t k = 0; k < f.size(); ++k) {
                if (std::isnan(f[k].second)) continue;
                sums[k] += f[k].second;
                counts[k] += 1;
            }
            ++row.runs;
        }
        for (std::size_t k = 0; k < row.means.size(); ++k)
            row.means[k].second = counts[k] > 0 ? sums[k] / counts[k] : std::nan("");
        result.rows.push_back(std::move(row));
    }

    if (opts.out_dir) {
        std::filesystem::create_directories(*opts.out_dir);
        std::ofstream m(*opts.out_dir / "matrix.csv");
        write_matrix_csv(m, result);
        std::ofstream s(*opts.out_dir / "summary.csv");
        s << "mix,behavior,penetration,seed";
        if (!result.runs.empty())
            for (const auto& [name, v] : result.runs.front().fields) s << ',' << name;
        s << '\n';
        for (const MatrixRun& r : result.runs) {
            s << to_string(r.cell.mix) << ',' << to_string(r.cell.behavior) << ',' << csv::num(r.cell.penetration)
              << ',' << r.seed;
            for (const auto& [name, v] : r.fields) s << ',' << field_text(name, v);
            s << '\n';
        }
        std::ofstream cfg_echo(*opts.out_dir / "config.json");
        cfg_echo << to_json_text(base);
    }
    return result;
}

void write_matrix_csv(std::ostream& os, const MatrixResult& result) {
    os << "mix,behavior,penetration,runs";
    const MatrixRow* first = nullptr;
    for (const MatrixRow& r : result.rows)
        if (!r.means.empty()) {
            first = &r;
            break;
        }
    if (first)
        for (const auto& [name, v] : first->means) os << ',' << name;
    os << '\n';
    for (const MatrixRow& r : result.rows) {
        os << to_string(r.cell.mix) << ',' << to_string(r.cell.behavior) << ',' << csv::num(r.cell.penetration) << ','
           << r.runs;
        if (first) {
            for (std::size_t k = 0; k < first->means.size(); ++k)
                os << ',' << (k < r.means.size() ? field_text(r.means[k].first, r.means[k].second) : "");
        }
        os << '\n';
    }
}

}  // namespace parksia
