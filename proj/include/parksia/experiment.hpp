#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parksia/demand.hpp"
#include "parksia/metrics.hpp"
#include "parksia/network.hpp"
#include "parksia/simcore.hpp"

namespace parksia {

struct ScenarioConfig {
    GridSpec grid;
    DemandConfig demand;
    SimConfig sim;
    double steady_cut_s = 1800.0;
    std::string output_dir = "out";
    bool write_stream = false;       // also dump the raw event stream
    bool write_population = false;

    Behavior behavior() const { return sim.behavior; }
};

void validate(const ScenarioConfig& cfg);

/// JSON text with sections network, demand, auction, traffic, metrics and
/// top-level behavior, penetration, seed, output_dir. Missing keys keep
/// their defaults; unknown keys are rejected.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string to_json_text(const ScenarioConfig& cfg);

struct RunResult {
    ScenarioConfig config;
    RunSummary summary;
    std::vector<ParkingEvent> events;
    std::vector<TripRecord> trips;
    std::vector<DetectorRecord> detectors;
    SteadyWindows steady;
    std::vector<SimEvent> stream;
    std::vector<Driver> population;
    long auction_batches = 0;
    long steps = 0;
};

/// Builds the network, samples the population and runs to completion.
RunResult run_scenario(const ScenarioConfig& cfg);

/// Named per-run metrics in a fixed column order (summary.csv / matrix.csv).
std::vector<std::pair<std::string, double>> summary_fields(const RunResult& run);

void write_events_csv(std::ostream& os, const std::vector<ParkingEvent>& events);
void write_trips_csv(std::ostream& os, const std::vector<TripRecord>& trips);
void write_detectors_csv(std::ostream& os, const std::vector<DetectorRecord>& records, SteadyWindows steady,
                         double window_s = 900.0);
void write_edge_stats_csv(std::ostream& os, const RoadNetwork& net, const RunSummary& summary);
void write_summary_header(std::ostream& os);
void write_summary_row(std::ostream& os, const RunResult& run);

/// Writes events.csv, trips.csv, detectors.csv, edge_stats.csv,
/// summary.csv, network.txt and config.json into `dir`.
void write_run(const RunResult& run, const std::filesystem::path& dir);

struct MatrixSpec {
    std::vector<Mix> mixes{Mix::Mix10, Mix::Mix25, Mix::Mix50};
    std::vector<Behavior> behaviors{Behavior::Baseline, Behavior::Information, Behavior::Auction};
    std::vector<double> penetrations{0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
};

struct MatrixCell {
    Mix mix = Mix::Mix10;
    Behavior behavior = Behavior::Baseline;
    double penetration = 0.0;
};

/// Reads the optional "matrix" section of a config document.
MatrixSpec parse_matrix_spec(const std::string& json_text);
std::string to_json_text(const MatrixSpec& spec);

/// Baseline contributes a single 0% cell per mix; the other behaviors one
/// cell per listed penetration.
std::vector<MatrixCell> expand_cells(const MatrixSpec& spec);
std::size_t run_count(const MatrixSpec& spec);

struct MatrixRow {
    MatrixCell cell;
    int runs = 0;
    std::vector<std::pair<std::string, double>> means;  // seed-averaged summary_fields

    double get(const std::string& name) const;
};

struct MatrixRun {
    MatrixCell cell;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> fields;
};

struct MatrixResult {
    std::vector<MatrixRow> rows;
    std::vector<MatrixRun> runs;               // in deterministic cell/seed order
    std::vector<std::string> failures;         // "MIX10/auction/0.4/seed3: message"
};

struct MatrixOptions {
    int jobs = 1;
    std::optional<std::filesystem::path> out_dir;  // matrix.csv + summary.csv
    bool per_run_artifacts = false;                // run directories under out_dir/runs
    std::function<void(std::size_t done, std::size_t total)> progress;
};

MatrixResult run_matrix(const ScenarioConfig& base, const MatrixSpec& spec, const MatrixOptions& opts);

void write_matrix_csv(std::ostream& os, const MatrixResult& result);

std::string cell_label(const MatrixCell& cell);

}  // namespace parksia
