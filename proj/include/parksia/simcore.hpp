#pragma once

// Mesoscopic parking-traffic engine advanced in 1 s steps.
//
// Vehicles traverse edges at free-flow speed and leave each edge through a
// FIFO exit queue with a fixed discharge rate. On reaching their target area
// they try to park; a full area sends them cruising to a random nearby area
// with free spaces. After the stay they drive back to the street they came
// from and leave. Auction participants are batched every `auction_period`
// seconds and rerouted to the spaces they win.

#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "parksia/auction.hpp"
#include "parksia/demand.hpp"
#include "parksia/metrics.hpp"
#include "parksia/network.hpp"

namespace parksia {

enum class Behavior { Baseline, Information, Auction };

const char* to_string(Behavior b);
Behavior parse_behavior(const std::string& s);

struct SimConfig {
    Behavior behavior = Behavior::Baseline;
    AuctionConfig auction;
    int auction_period = 15;           // s
    double exit_capacity = 0.5;        // veh/s per edge
    double rerouter_radius_blocks = 2.0;
    double detector_window = 900.0;    // s
    std::uint64_t seed = 0;
    long drain_guard = 200'000;        // s allowed after the last departure
};

void validate(const SimConfig& cfg);

enum class Phase { Pending, EnRoute, Cruising, Parked, Returning, Done };
const char* to_string(Phase p);

enum class SpaceStatus { Free, Reserved, Occupied };

struct SpaceState {
    SpaceStatus status = SpaceStatus::Free;
    int driver = -1;
};

/// Space-level parking state for the whole network.
class Occupancy {
public:
    explicit Occupancy(const RoadNetwork& net);

    const SpaceState& space(int id) const { return spaces_[id]; }
    int occupied(int area) const { return occupied_[area]; }
    int capacity(int /*area*/) const { return capacity_; }
    bool has_unoccupied(int area) const { return occupied_[area] < capacity_; }
    const std::vector<int>& occupied_per_area() const { return occupied_; }
    /// Lowest-index space of the area that is not Occupied, or -1.
    int first_unoccupied(int area) const;

    void reserve(int space, int driver);
    void occupy(int space, int driver);
    void release(int space);

private:
    int capacity_;
    std::vector<SpaceState> spaces_;
    std::vector<int> occupied_;
};

struct VehicleState {
    int driver = 0;
    Phase phase = Phase::Pending;
    int edge = -1;
    double position = 0.0;               // m from the upstream end
    int target_area = -1;                // -1 while returning
    int preferred_area = -1;
    int reservation = -1;                // reserved space id
    double reservation_price = 0.0;
    bool reservation_lost = false;
    bool auction_pending = false;        // waits for its first auction tick
    bool fallback = false;               // behaves as a non-participant
    int occupied_space = -1;
    double paid_price = std::numeric_limits<double>::quiet_NaN();
    double odometer = 0.0;               // m
    long spawn_time = -1;
    long first_attempt_time = -1;
    long park_time = -1;
    long leave_time = -1;
    long exit_time = -1;
    long edge_exits = 0;
    bool queued = false;
    int no_stop_edge = -1;               // skip the stop on this edge visit
    bool reservation_granted = false;
    bool reservation_honored = false;
    bool short_route = false;
};

struct ParkResult {
    bool parked = false;
    int space = -1;
    int displaced_driver = -1;           // reservation holder that lost its space
};

/// Occupancy rules for one arrival. Vehicles holding a live reservation in
/// this area take exactly that space; everyone else takes the lowest-index
/// space that is not Occupied, which may be someone's reservation.
ParkResult attempt_park(const VehicleState& vehicle, int area, Occupancy& occupancy);

struct RerouteChoice {
    int area = -1;
    bool random_walk = false;
};

/// Cruising reroute from the downstream junction of `current_edge`: a
/// uniformly random area within `radius_m` driving distance that has a
/// space not Occupied; otherwise the area of a random outgoing edge.
RerouteChoice reroute_cruising(const RoadNetwork& net, const Occupancy& occupancy, int current_edge,
                               double radius_m, std::mt19937_64& rng);

/// First area in static-cost order with a space not Occupied; the
/// preferred lot when every area is full.
int information_destination(const std::vector<int>& ranking, const Occupancy& occupancy);

/// Price owed on parking: the winning bid for the vehicle's own reserved
/// space, the zone price otherwise.
double parking_price(const RoadNetwork& net, const VehicleState& vehicle, int space);

enum class EventKind { Spawn, ReservationWon, ReservationLost, Park, ParkFailed, DepartParking, Exit };
const char* to_string(EventKind k);

struct SimEvent {
    long time = 0;
    EventKind kind = EventKind::Spawn;
    int driver = 0;
    int edge = -1;
    int area = -1;
    int space = -1;
    double price = std::numeric_limits<double>::quiet_NaN();
};

class Simulation {
public:
    Simulation(const RoadNetwork& net, std::vector<Driver> drivers, SimConfig cfg);

    void step();
    void run();
    bool finished() const;

    long clock() const { return clock_; }
    const RoadNetwork& network() const { return net_; }
    const SimConfig& config() const { return cfg_; }
    const std::vector<Driver>& drivers() const { return drivers_; }
    const std::vector<VehicleState>& vehicles() const { return vehicles_; }
    const Occupancy& occupancy() const { return occupancy_; }
    const std::vector<ParkingEvent>& parking_events() const { return parking_events_; }
    const std::vector<TripRecord>& trips() const { return trips_; }
    const std::vector<SimEvent>& stream() const { return stream_; }
    const DetectorBank& detectors() const { return detectors_; }
    const OccupancyLog& occupancy_log() const { return occupancy_log_; }
    long spawned() const { return spawned_; }
    long done() const { return done_; }
    long active() const { return spawned_ - done_; }
    long auction_batches() const { return batches_; }
    long last_departure() const { return last_departure_; }

    /// Time of the first auction tick after the driver's departure.
    long first_tick(const Driver& d) const;

private:
    void auction_tick(long k);
    void spawn(int driver);
    void leave_parking(int driver);
    void advance(VehicleState& v);
    void arrive_at_stop(VehicleState& v);
    void discharge_queues();
    int next_edge_for(const VehicleState& v, int junction) const;
    void emit(EventKind kind, const VehicleState& v, int area = -1, int space = -1,
              double price = std::numeric_limits<double>::quiet_NaN());

    const RoadNetwork& net_;
    std::vector<Driver> drivers_;
    SimConfig cfg_;
    LotRanking ranking_;
    Occupancy occupancy_;
    std::vector<VehicleState> vehicles_;
    std::vector<int> spawn_order_;
    std::size_t next_spawn_ = 0;
    std::vector<int> moving_;
    std::vector<int> pending_auction_;
    using LeaveKey = std::pair<long, int>;
    std::priority_queue<LeaveKey, std::vector<LeaveKey>, std::greater<>> parked_;
    std::vector<std::deque<int>> queues_;
    std::vector<double> exit_credit_;
    std::mt19937_64 rng_;
    DetectorBank detectors_;
    OccupancyLog occupancy_log_;
    std::vector<ParkingEvent> parking_events_;
    std::vector<TripRecord> trips_;
    std::vector<SimEvent> stream_;
    long clock_ = 0;
    long spawned_ = 0;
    long done_ = 0;
    long batches_ = 0;
    long last_departure_ = 0;
};

void write_stream(std::ostream& os, const std::vector<SimEvent>& events);

}  // namespace parksia
