#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "parksia/network.hpp"

namespace parksia {

/// One vehicle stopping in a parking area.
struct ParkingEvent {
    long time = 0;                   // s
    int driver = 0;
    bool participant = false;
    int area = 0;                    // occupied
    int preferred_area = 0;
    int space = 0;
    double price = 0.0;              // EUR
    double parking_distance = 0.0;   // m, occupied -> preferred
    bool used_reservation = false;   // occupied the space it had won
};

/// Per-vehicle trip outcome, recorded when the vehicle leaves the network.
struct TripRecord {
    int driver = 0;
    bool participant = false;
    long spawn_time = 0;
    long first_attempt_time = -1;
    long park_time = -1;
    long exit_time = -1;
    double route_length = 0.0;       // m
    bool reservation_granted = false;
    bool reservation_honored = false;
    bool short_route = false;        // tried to park before its first auction tick
};

struct DetectorRecord {
    int edge = 0;
    int window = 0;
    long count = 0;
    double flow = 0.0;               // veh/h
};

/// Edge-exit counters bucketed in fixed windows.
class DetectorBank {
public:
    DetectorBank(int n_edges, double window_s = 900.0);

    void fire(int edge, long t);
    double window() const { return window_; }
    int num_windows() const { return static_cast<int>(counts_.size()); }
    long count(int edge, int window) const;
    std::vector<DetectorRecord> aggregate() const;

private:
    int n_edges_;
    double window_;
    std::vector<std::vector<long>> counts_;  // [window][edge]
};

/// Per-area occupied-space-seconds bucketed in the detector windows.
class OccupancyLog {
public:
    OccupancyLog(int n_areas, double window_s = 900.0);

    void sample(long t, const std::vector<int>& occupied_per_area);
    int num_windows() const { return static_cast<int>(sums_.size()); }
    /// Mean occupied spaces of an area over the given windows.
    double mean_occupied(int area, int first_window, int last_window) const;

private:
    int n_areas_;
    double window_;
    std::vector<std::vector<double>> sums_;  // [window][area]
    std::vector<long> samples_;              // per window
};

/// Window range [first, last] kept for steady-state statistics: windows
/// starting at or after `cut` and ending no later than `end`.
struct SteadyWindows {
    int first = 0;
    int last = -1;
    bool empty() const { return last < first; }
};
SteadyWindows steady_windows(double window_s, double cut_s, double end_s, int available);

/// Mean flow over edges and the steady windows (unweighted edge mean).
double network_flow(const std::vector<DetectorRecord>& records, SteadyWindows w);

/// Nearest-rank percentile, q in (0, 1].
double percentile(std::vector<double> values, double q);

double parking_distance(const RoadNetwork& net, int occupied_area, int preferred_area);

struct Stat {
    long n = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double p10 = std::numeric_limits<double>::quiet_NaN();
    double p90 = std::numeric_limits<double>::quiet_NaN();
};
Stat describe(const std::vector<double>& values);

struct GroupStats {
    Stat route_length;
    Stat price;
    Stat parking_distance;
};

struct EdgeStat {
    int edge = 0;
    double mean_occupancy = 0.0;     // [0, 1]
    double mean_price = std::numeric_limits<double>::quiet_NaN();
    long parkings = 0;
};

struct SummaryConfig {
    double steady_cut_s = 1800.0;
    double steady_end_s = 14400.0;   // last scheduled departure
    int capacity = 15;
    int n_edges = 0;
};

struct RunSummary {
    GroupStats overall;
    GroupStats participants;
    GroupStats non_participants;
    double flow = 0.0;               // veh/h
    double flow_p10 = 0.0;
    double flow_p90 = 0.0;
    long reservations_granted = 0;
    long reservations_honored = 0;
    double reservation_success = std::numeric_limits<double>::quiet_NaN();
    double short_route_fraction = 0.0;
    long vehicles = 0;
    std::vector<EdgeStat> edges;
};

RunSummary summarize(const std::vector<ParkingEvent>& events, const std::vector<TripRecord>& trips,
                     const DetectorBank& detectors, const OccupancyLog& occupancy, const SummaryConfig& cfg);

}  // namespace parksia
