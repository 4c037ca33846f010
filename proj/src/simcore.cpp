#include "parksia/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "parksia/csv.hpp"
#include "parksia/errors.hpp"

namespace parksia {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<double> betas_of(const std::vector<Driver>& drivers) {
    std::vector<double> b;
    for (const Driver& d : drivers) b.push_back(d.beta);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

// Static rankings use the same price scale as the auctions.
double static_price_scale(const std::vector<Driver>& drivers, const SimConfig& cfg) {
    if (cfg.auction.normalizer != PriceNormalizer::Valuation || drivers.empty()) return 0.0;
    for (const Driver& d : drivers)
        if (d.valuation != drivers.front().valuation)
            throw ConfigError("the valuation price normalizer needs a single valuation for all drivers");
    return drivers.front().valuation;
}

}  // namespace

const char* to_string(Behavior b) {
    switch (b) {
        case Behavior::Baseline: return "baseline";
        case Behavior::Information: return "information";
        case Behavior::Auction: return "auction";
    }
    return "?";
}

Behavior parse_behavior(const std::string& s) {
    if (s == "baseline") return Behavior::Baseline;
    if (s == "information") return Behavior::Information;
    if (s == "auction") return Behavior::Auction;
    throw ConfigError("unknown behavior '" + s + "' (expected baseline, information or auction)");
}

const char* to_string(Phase p) {
    switch (p) {
        case Phase::Pending: return "pending";
        case Phase::EnRoute: return "enroute";
        case Phase::Cruising: return "cruising";
        case Phase::Parked: return "parked";
        case Phase::Returning: return "returning";
        case Phase::Done: return "done";
    }
    return "?";
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Spawn: return "spawn";
        case EventKind::ReservationWon: return "reservation-won";
        case EventKind::ReservationLost: return "reservation-lost";
        case EventKind::Park: return "park";
        case EventKind::ParkFailed: return "park-failed";
        case EventKind::DepartParking: return "depart-parking";
        case EventKind::Exit: return "exit";
    }
    return "?";
}

void validate(const SimConfig& cfg) {
    validate(cfg.auction);
    if (cfg.auction_period < 1) throw ConfigError("auction period must be at least 1 s");
    if (!(cfg.exit_capacity > 0.0)) throw ConfigError("exit capacity must be positive");
    if (cfg.rerouter_radius_blocks < 0.0) throw ConfigError("rerouter radius must be non-negative");
    if (!(cfg.detector_window > 0.0)) throw ConfigError("detector window must be positive");
}

// ---------------------------------------------------------------- Occupancy

Occupancy::Occupancy(const RoadNetwork& net)
    : capacity_(net.spec().capacity),
      spaces_(static_cast<std::size_t>(net.num_spaces())),
      occupied_(net.areas().size(), 0) {}

int Occupancy::first_unoccupied(int area) const {
    const int first = area * capacity_;
    for (int s = first; s < first + capacity_; ++s)
        if (spaces_[s].status != SpaceStatus::Occupied) return s;
    return -1;
}

void Occupancy::reserve(int space, int driver) {
    if (spaces_[space].status != SpaceStatus::Free) throw InternalError("reserving a space that is not free");
    spaces_[space] = {SpaceStatus::Reserved, driver};
}

void Occupancy::occupy(int space, int driver) {
    if (spaces_[space].status == SpaceStatus::Occupied) throw InternalError("space already occupied");
    spaces_[space] = {SpaceStatus::Occupied, driver};
    occupied_[space / capacity_] += 1;
}

void Occupancy::release(int space) {
    if (spaces_[space].status == SpaceStatus::Occupied) occupied_[space / capacity_] -= 1;
    spaces_[space] = {};
}

// ------------------------------------------------------------ free helpers

ParkResult attempt_park(const VehicleState& v, int area, Occupancy& occ) {
    ParkResult r;
    const bool holds_reservation = v.reservation >= 0 && !v.fallback && occ.capacity(area) > 0 &&
                                   v.reservation / occ.capacity(area) == area;
    if (holds_reservation) {
        const SpaceState& s = occ.space(v.reservation);
        if (s.status == SpaceStatus::Reserved && s.driver == v.driver) {
            occ.occupy(v.reservation, v.driver);
            r.parked = true;
            r.space = v.reservation;
        }
        return r;
    }
    int space = occ.first_unoccupied(area);
    if (space < 0) return r;
    if (occ.space(space).status == SpaceStatus::Reserved) r.displaced_driver = occ.space(space).driver;
    occ.occupy(space, v.driver);
    r.parked = true;
    r.space = space;
    return r;
}

RerouteChoice reroute_cruising(const RoadNetwork& net, const Occupancy& occ, int current_edge, double radius_m,
                               std::mt19937_64& rng) {
    const int junction = net.edge(current_edge).to;
    std::vector<int> candidates;
    for (const ParkingArea& a : net.areas()) {
        if (!occ.has_unoccupied(a.id)) continue;
        double d = net.junction_distance(junction, net.edge(a.edge).from) + a.position;
        if (d <= radius_m + 1e-9) candidates.push_back(a.id);
    }
    if (!candidates.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        return {candidates[pick(rng)], false};
    }
    std::vector<int> options;
    const int back = net.reverse_edge(current_edge);
    for (int e : net.out_edges(junction))
        if (e != back) options.push_back(e);
    if (options.empty()) options = net.out_edges(junction);
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    return {options[pick(rng)], true};  // area id == edge id
}

int information_destination(const std::vector<int>& ranking, const Occupancy& occ) {
    for (int area : ranking)
        if (occ.has_unoccupied(area)) return area;
    return ranking.front();
}

double parking_price(const RoadNetwork& net, const VehicleState& v, int space) {
    if (v.reservation >= 0 && v.reservation == space && !v.fallback) return v.reservation_price;
    return net.area(net.space_area(space)).base_price;
}

// --------------------------------------------------------------- Simulation

Simulation::Simulation(const RoadNetwork& net, std::vector<Driver> drivers, SimConfig cfg)
    : net_(net),
      drivers_(std::move(drivers)),
      cfg_(cfg),
      ranking_(net, betas_of(drivers_), static_price_scale(drivers_, cfg)),
      occupancy_(net),
      vehicles_(drivers_.size()),
      queues_(net.edges().size()),
      exit_credit_(net.edges().size(), std::max(1.0, cfg.exit_capacity)),
      rng_(splitmix(cfg.seed ^ 0x5eedULL)),
      detectors_(static_cast<int>(net.edges().size()), cfg.detector_window),
      occupancy_log_(static_cast<int>(net.areas().size()), cfg.detector_window) {
    validate(cfg_);
    for (std::size_t i = 0; i < drivers_.size(); ++i) {
        if (drivers_[i].id != static_cast<int>(i)) throw ConfigError("driver ids must be 0..n-1 in order");
        const int n_edges = static_cast<int>(net.edges().size());
        if (drivers_[i].origin_edge < 0 || drivers_[i].origin_edge >= n_edges ||
            drivers_[i].destination_edge < 0 || drivers_[i].destination_edge >= n_edges)
            throw ConfigError("driver " + std::to_string(i) + " references an unknown edge");
        vehicles_[i].driver = static_cast<int>(i);
        vehicles_[i].preferred_area = ranking_.preferred(drivers_[i].destination_edge, drivers_[i].beta);
    }
    spawn_order_.resize(drivers_.size());
    for (std::size_t i = 0; i < drivers_.size(); ++i) spawn_order_[i] = static_cast<int>(i);
    std::stable_sort(spawn_order_.begin(), spawn_order_.end(),
                     [&](int a, int b) { return drivers_[a].depart_time() < drivers_[b].depart_time(); });
    for (const Driver& d : drivers_) last_departure_ = std::max(last_departure_, d.depart_time());
}

bool Simulation::finished() const {
    return next_spawn_ == spawn_order_.size() && moving_.empty() && parked_.empty();
}

long Simulation::first_tick(const Driver& d) const {
    const long p = cfg_.auction_period;
    return (d.depart_time() / p + 1) * p;
}

void Simulation::emit(EventKind kind, const VehicleState& v, int area, int space, double price) {
    stream_.push_back({clock_, kind, v.driver, v.edge, area, space, price});
}

void Simulation::run() {
    while (!finished()) {
        if (clock_ > last_departure_ + cfg_.drain_guard)
            throw InternalError("simulation did not drain; " + std::to_string(active()) + " vehicles still active");
        step();
    }
}

void Simulation::step() {
    const long t = clock_;
    if (cfg_.behavior == Behavior::Auction && t > 0 && t % cfg_.auction_period == 0)
        auction_tick(t / cfg_.auction_period);

    while (next_spawn_ < spawn_order_.size() && drivers_[spawn_order_[next_spawn_]].depart_time() <= t)
        spawn(spawn_order_[next_spawn_++]);

    while (!parked_.empty() && parked_.top().first <= t) {
        int id = parked_.top().second;
        parked_.pop();
        leave_parking(id);
    }

    for (int id : moving_) {
        VehicleState& v = vehicles_[id];
        if (!v.queued) advance(v);
    }
    discharge_queues();
    std::erase_if(moving_, [&](int id) {
        Phase p = vehicles_[id].phase;
        return p == Phase::Parked || p == Phase::Done;
    });

    occupancy_log_.sample(t, occupancy_.occupied_per_area());
    ++clock_;
}

void Simulation::spawn(int id) {
    const Driver& d = drivers_[id];
    VehicleState& v = vehicles_[id];
    v.phase = Phase::EnRoute;
    v.edge = d.origin_edge;
    v.position = 0.0;
    v.spawn_time = clock_;
    v.target_area = v.preferred_area;
    if (d.participant && cfg_.behavior == Behavior::Information) {
        v.target_area = information_destination(ranking_.ranking(d.destination_edge, d.beta), occupancy_);
    } else if (d.participant && cfg_.behavior == Behavior::Auction) {
        v.auction_pending = true;
        pending_auction_.push_back(id);
    }
    ++spawned_;
    moving_.push_back(id);
    emit(EventKind::Spawn, v, v.target_area);
}

void Simulation::auction_tick(long k) {
    std::vector<int> bidders;
    for (int id : pending_auction_) {
        VehicleState& v = vehicles_[id];
        if (v.auction_pending && v.phase == Phase::EnRoute) bidders.push_back(id);
    }
    pending_auction_.clear();
    if (bidders.empty()) return;

    // One auction per free space. Within an area the highest-index space
    // comes first, so equally good spaces are won from the top down and
    // stay clear of the lowest-index-first rule used by other drivers.
    std::vector<Auction> auctions;
    const int cap = net_.spec().capacity;
    for (const ParkingArea& a : net_.areas()) {
        for (int s = a.first_space + cap - 1; s >= a.first_space; --s) {
            if (occupancy_.space(s).status != SpaceStatus::Free) continue;
            Auction auc;
            auc.id = static_cast<int>(auctions.size());
            auc.space = s;
            auc.area = a.id;
            auc.start_price = a.base_price;
            auctions.push_back(auc);
        }
    }

    std::vector<BidderView> views;
    for (int id : bidders) {
        const Driver& d = drivers_[id];
        BidderView view;
        view.agent = id;
        view.beta = d.beta;
        view.valuation = d.valuation;
        view.distance.reserve(auctions.size());
        for (const Auction& auc : auctions) {
            // Area positions are edge midpoints, as are human destinations.
            double dist = net_.area_distance(auc.area, d.destination_edge);
            view.distance.push_back(dist);
            view.d_max = std::max(view.d_max, dist);
        }
        views.push_back(std::move(view));
    }

    ++batches_;
    BatchResult result = run_batch(std::move(auctions), views, cfg_.auction,
                                   splitmix(cfg_.seed * 0x100000001b3ULL + static_cast<std::uint64_t>(k)));
    for (const Assignment& a : result.assignments) {
        VehicleState& v = vehicles_[a.agent];
        occupancy_.reserve(a.space, a.agent);
        v.reservation = a.space;
        v.reservation_price = a.price;
        v.reservation_granted = true;
        v.target_area = a.area;
        v.auction_pending = false;
        emit(EventKind::ReservationWon, v, a.area, a.space, a.price);
    }
    for (int id : result.unassigned) {
        vehicles_[id].auction_pending = false;
        vehicles_[id].fallback = true;
    }
}

void Simulation::advance(VehicleState& v) {
    const Edge& e = net_.edge(v.edge);
    const double budget = e.free_flow_speed;

    if (v.phase == Phase::Returning && v.edge == drivers_[v.driver].origin_edge) {
        double step = std::min(budget, e.length - v.position);
        v.position += step;
        v.odometer += step;
        if (v.position >= e.length) {
            detectors_.fire(v.edge, clock_);
            ++v.edge_exits;
            v.phase = Phase::Done;
            v.exit_time = clock_;
            ++done_;
            emit(EventKind::Exit, v);
            TripRecord trip;
            trip.driver = v.driver;
            trip.participant = drivers_[v.driver].participant;
            trip.spawn_time = v.spawn_time;
            trip.first_attempt_time = v.first_attempt_time;
            trip.park_time = v.park_time;
            trip.exit_time = v.exit_time;
            trip.route_length = v.odometer;
            trip.reservation_granted = v.reservation_granted;
            trip.reservation_honored = v.reservation_honored;
            trip.short_route = v.short_route;
            trips_.push_back(trip);
        }
        return;
    }

    if (v.target_area >= 0 && v.phase != Phase::Returning) {
        const ParkingArea& target = net_.area(v.target_area);
        if (target.edge == v.edge && v.no_stop_edge != v.edge && v.position <= target.position) {
            double gap = target.position - v.position;
            if (gap <= budget) {
                v.position = target.position;
                v.odometer += gap;
                arrive_at_stop(v);
                return;
            }
            v.position += budget;
            v.odometer += budget;
            return;
        }
    }

    double step = std::min(budget, e.length - v.position);
    v.position += step;
    v.odometer += step;
    if (v.position >= e.length) {
        v.position = e.length;
        v.queued = true;
        queues_[v.edge].push_back(v.driver);
    }
}

void Simulation::arrive_at_stop(VehicleState& v) {
    const long t = clock_;
    const Driver& d = drivers_[v.driver];
    if (v.first_attempt_time < 0) {
        v.first_attempt_time = t;
        v.short_route = t < first_tick(d);
    }
    if (v.auction_pending) {
        v.auction_pending = false;
        v.fallback = true;
    }

    const int area = v.target_area;
    const bool had_reservation = v.reservation >= 0 && !v.fallback;
    ParkResult r = attempt_park(v, area, occupancy_);
    if (r.displaced_driver >= 0) {
        VehicleState& loser = vehicles_[r.displaced_driver];
        loser.reservation_lost = true;
        emit(EventKind::ReservationLost, loser, net_.space_area(r.space), r.space);
    }

    if (r.parked) {
        v.phase = Phase::Parked;
        v.occupied_space = r.space;
        v.park_time = t;
        v.paid_price = parking_price(net_, v, r.space);
        v.reservation_honored = had_reservation && r.space == v.reservation;
        v.leave_time = t + static_cast<long>(std::ceil(d.stay));
        parked_.emplace(v.leave_time, v.driver);

        ParkingEvent pe;
        pe.time = t;
        pe.driver = v.driver;
        pe.participant = d.participant;
        pe.area = area;
        pe.preferred_area = v.preferred_area;
        pe.space = r.space;
        pe.price = v.paid_price;
        pe.parking_distance = parking_distance(net_, area, v.preferred_area);
        pe.used_reservation = v.reservation_honored;
        parking_events_.push_back(pe);
        emit(EventKind::Park, v, area, r.space, v.paid_price);
        return;
    }

    emit(EventKind::ParkFailed, v, area);
    if (had_reservation) {
        // Reservation physically unsuccessful: back to ordinary search.
        v.fallback = true;
        if (occupancy_.space(v.reservation).status == SpaceStatus::Reserved &&
            occupancy_.space(v.reservation).driver == v.driver)
            occupancy_.release(v.reservation);
    }
    v.phase = Phase::Cruising;
    v.no_stop_edge = v.edge;
    RerouteChoice c = reroute_cruising(net_, occupancy_, v.edge, cfg_.rerouter_radius_blocks * net_.spacing(), rng_);
    v.target_area = c.area;
}

void Simulation::leave_parking(int id) {
    VehicleState& v = vehicles_[id];
    occupancy_.release(v.occupied_space);
    v.phase = Phase::Returning;
    v.target_area = -1;
    v.no_stop_edge = -1;
    emit(EventKind::DepartParking, v, net_.space_area(v.occupied_space), v.occupied_space);
    moving_.push_back(id);
}

int Simulation::next_edge_for(const VehicleState& v, int junction) const {
    const int target_edge = v.phase == Phase::Returning ? drivers_[v.driver].origin_edge : net_.area(v.target_area).edge;
    const int entry = net_.edge(target_edge).from;
    if (junction == entry) return target_edge;
    return net_.next_edge(junction, entry);
}

void Simulation::discharge_queues() {
    const double burst = std::max(1.0, cfg_.exit_capacity);
    for (std::size_t e = 0; e < queues_.size(); ++e) {
        exit_credit_[e] = std::min(burst, exit_credit_[e] + cfg_.exit_capacity);
        auto& q = queues_[e];
        while (!q.empty() && exit_credit_[e] >= 1.0 - 1e-12) {
            exit_credit_[e] -= 1.0;
            VehicleState& v = vehicles_[q.front()];
            q.pop_front();
            detectors_.fire(static_cast<int>(e), clock_);
            ++v.edge_exits;
            const int junction = net_.edge(v.edge).to;
            v.edge = next_edge_for(v, junction);
            v.position = 0.0;
            v.queued = false;
            v.no_stop_edge = -1;
        }
    }
}

void write_stream(std::ostream& os, const std::vector<SimEvent>& events) {
    for (const SimEvent& e : events) {
        os << e.time << ' ' << to_string(e.kind) << ' ' << e.driver << ' ' << e.edge << ' ' << e.area << ' ' << e.space;
        if (!std::isnan(e.price)) os << ' ' << csv::num(e.price);
        os << '\n';
    }
}

}  // namespace parksia
