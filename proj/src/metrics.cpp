#include "parksia/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parksia/errors.hpp"

namespace parksia {

DetectorBank::DetectorBank(int n_edges, double window_s) : n_edges_(n_edges), window_(window_s) {
    if (!(window_s > 0.0)) throw ConfigError("detector window must be positive");
}

void DetectorBank::fire(int edge, long t) {
    auto w = static_cast<std::size_t>(static_cast<double>(t) / window_);
    while (counts_.size() <= w) counts_.emplace_back(static_cast<std::size_t>(n_edges_), 0L);
    counts_[w][static_cast<std::size_t>(edge)] += 1;
}

long DetectorBank::count(int edge, int window) const {
    if (window < 0 || window >= num_windows()) return 0;
    return counts_[window][edge];
}

std::vector<DetectorRecord> DetectorBank::aggregate() const {
    std::vector<DetectorRecord> out;
    for (int w = 0; w < num_windows(); ++w)
        for (int e = 0; e < n_edges_; ++e)
            out.push_back({e, w, counts_[w][e], static_cast<double>(counts_[w][e]) * 3600.0 / window_});
    return out;
}

OccupancyLog::OccupancyLog(int n_areas, double window_s) : n_areas_(n_areas), window_(window_s) {}

void OccupancyLog::sample(long t, const std::vector<int>& occupied) {
    auto w = static_cast<std::size_t>(static_cast<double>(t) / window_);
    while (sums_.size() <= w) {
        sums_.emplace_back(static_cast<std::size_t>(n_areas_), 0.0);
        samples_.push_back(0);
    }
    for (int a = 0; a < n_areas_; ++a) sums_[w][a] += occupied[a];
    samples_[w] += 1;
}

double OccupancyLog::mean_occupied(int area, int first, int last) const {
    double sum = 0.0;
    long n = 0;
    for (int w = std::max(first, 0); w <= std::min(last, num_windows() - 1); ++w) {
        sum += sums_[w][area];
        n += samples_[w];
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

SteadyWindows steady_windows(double window_s, double cut_s, double end_s, int available) {
    SteadyWindows w;
    w.first = static_cast<int>(std::ceil(cut_s / window_s - 1e-9));
    w.last = static_cast<int>(std::floor(end_s / window_s + 1e-9)) - 1;
    w.last = std::min(w.last, available - 1);
    return w;
}

double network_flow(const std::vector<DetectorRecord>& records, SteadyWindows w) {
    double sum = 0.0;
    long n = 0;
    for (const DetectorRecord& r : records) {
        if (r.window < w.first || r.window > w.last) continue;
        sum += r.flow;
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (!(q > 0.0 && q <= 1.0)) throw InternalError("percentile rank must lie in (0, 1]");
    std::sort(values.begin(), values.end());
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size()) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

double parking_distance(const RoadNetwork& net, int occupied_area, int preferred_area) {
    return net.drive_distance(net.area_position(occupied_area), net.area_position(preferred_area));
}

Stat describe(const std::vector<double>& values) {
    Stat s;
    s.n = static_cast<long>(values.size());
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    s.p10 = percentile(values, 0.10);
    s.p90 = percentile(values, 0.90);
    return s;
}

namespace {

GroupStats group(const std::vector<ParkingEvent>& events, const std::vector<TripRecord>& trips, int which) {
    // which: 0 all, 1 participants, 2 non-participants
    auto keep = [which](bool participant) { return which == 0 || (which == 1) == participant; };
    std::vector<double> route, price, dist;
    for (const TripRecord& t : trips)
        if (keep(t.participant)) route.push_back(t.route_length);
    for (const ParkingEvent& e : events) {
        if (!keep(e.participant)) continue;
        price.push_back(e.price);
        dist.push_back(e.parking_distance);
    }
    return {describe(route), describe(price), describe(dist)};
}

}  // namespace

RunSummary summarize(const std::vector<ParkingEvent>& events, const std::vector<TripRecord>& trips,
                     const DetectorBank& detectors, const OccupancyLog& occupancy, const SummaryConfig& cfg) {
    if (events.empty() || trips.empty()) throw ConfigError("cannot summarize an empty run");
    RunSummary s;
    s.overall = group(events, trips, 0);
    s.participants = group(events, trips, 1);
    s.non_participants = group(events, trips, 2);
    s.vehicles = static_cast<long>(trips.size());

    SteadyWindows w = steady_windows(detectors.window(), cfg.steady_cut_s, cfg.steady_end_s, detectors.num_windows());
    auto records = detectors.aggregate();
    s.flow = network_flow(records, w);
    std::vector<double> flows;
    for (const DetectorRecord& r : records)
        if (r.window >= w.first && r.window <= w.last) flows.push_back(r.flow);
    if (!flows.empty()) {
        s.flow_p10 = percentile(flows, 0.10);
        s.flow_p90 = percentile(flows, 0.90);
    }

    long shorts = 0;
    for (const TripRecord& t : trips) {
        s.reservations_granted += t.reservation_granted ? 1 : 0;
        s.reservations_honored += t.reservation_honored ? 1 : 0;
        shorts += t.short_route ? 1 : 0;
    }
    if (s.reservations_granted > 0)
        s.reservation_success = static_cast<double>(s.reservations_honored) / static_cast<double>(s.reservations_granted);
    s.short_route_fraction = static_cast<double>(shorts) / static_cast<double>(trips.size());

    const int n_edges = cfg.n_edges;
    const SteadyWindows ow = steady_windows(detectors.window(), cfg.steady_cut_s, cfg.steady_end_s, occupancy.num_windows());
    std::vector<double> price_sum(static_cast<std::size_t>(n_edges), 0.0);
    std::vector<long> parkings(static_cast<std::size_t>(n_edges), 0);
    for (const ParkingEvent& e : events) {
        if (e.area < n_edges) {
            price_sum[e.area] += e.price;
            parkings[e.area] += 1;
        }
    }
    for (int e = 0; e < n_edges; ++e) {
        EdgeStat es;
        es.edge = e;
        es.mean_occupancy = ow.empty() ? 0.0 : occupancy.mean_occupied(e, ow.first, ow.last) / cfg.capacity;
        es.parkings = parkings[e];
        if (parkings[e] > 0) es.mean_price = price_sum[e] / static_cast<double>(parkings[e]);
        s.edges.push_back(es);
    }
    return s;
}

}  // namespace parksia
