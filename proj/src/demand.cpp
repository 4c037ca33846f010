#include "parksia/demand.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "parksia/auction.hpp"
#include "parksia/csv.hpp"
#include "parksia/errors.hpp"

namespace parksia {

namespace {

// Independent random streams per purpose so that, e.g., participation
// draws never shift the trip geometry.
enum Stream : std::uint64_t { kTrips = 1, kParticipation = 2 };

std::mt19937_64 stream_rng(std::uint64_t seed, Stream s) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    return std::mt19937_64(seq);
}

}  // namespace

const char* to_string(Mix m) {
    switch (m) {
        case Mix::Mix10: return "MIX10";
        case Mix::Mix25: return "MIX25";
        case Mix::Mix50: return "MIX50";
    }
    return "?";
}

Mix parse_mix(const std::string& s) {
    std::string u = s;
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
    if (u == "MIX10") return Mix::Mix10;
    if (u == "MIX25") return Mix::Mix25;
    if (u == "MIX50") return Mix::Mix50;
    throw ConfigError("unknown mix '" + s + "' (expected MIX10, MIX25 or MIX50)");
}

double low_beta_share(Mix m) {
    switch (m) {
        case Mix::Mix10: return 0.10;
        case Mix::Mix25: return 0.25;
        case Mix::Mix50: return 0.50;
    }
    return 0.0;
}

void validate(const DemandConfig& cfg) {
    if (cfg.n_drivers <= 0) throw ConfigError("n_drivers must be positive");
    if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(cfg.penetration >= 0.0 && cfg.penetration <= 1.0)) throw ConfigError("penetration must lie in [0, 1]");
    if (!(cfg.valuation > 0.0)) throw ConfigError("valuation must be positive");
    if (cfg.max_depart_offset < 0.0) throw ConfigError("max_depart_offset must be non-negative");
    if (!(cfg.min_stay > 0.0) || cfg.max_stay < cfg.min_stay) throw ConfigError("stay bounds must satisfy 0 < min <= max");
    for (double b : {cfg.low_beta, cfg.high_beta})
        if (!(b > 0.0 && b <= 1.0)) throw ConfigError("beta values must lie in (0, 1]");
}

std::vector<double> attraction_weights(const RoadNetwork& net) {
    std::vector<double> w;
    w.reserve(net.edges().size());
    for (const Edge& e : net.edges()) w.push_back(e.ring + 1.0);
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    return w;
}

std::vector<double> origin_weights(const RoadNetwork& net) {
    const double cx = (net.cols() - 1) * net.spacing() / 2.0;
    const double cy = (net.rows() - 1) * net.spacing() / 2.0;
    std::vector<double> dist;
    for (const Edge& e : net.edges()) {
        const Junction& a = net.junctions()[e.from];
        const Junction& b = net.junctions()[e.to];
        dist.push_back(std::hypot((a.x + b.x) / 2.0 - cx, (a.y + b.y) / 2.0 - cy));
    }
    auto [lo, hi] = std::minmax_element(dist.begin(), dist.end());
    const double dmin = *lo, dmax = *hi;
    std::vector<double> w;
    for (double d : dist) w.push_back(dmax > dmin ? 1.0 + 8.0 * (d - dmin) / (dmax - dmin) : 1.0);
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    return w;
}

std::vector<Driver> sample_population(const RoadNetwork& net, const DemandConfig& cfg) {
    validate(cfg);
    auto dest_w = attraction_weights(net);
    auto orig_w = origin_weights(net);
    std::discrete_distribution<int> destination(dest_w.begin(), dest_w.end());
    std::discrete_distribution<int> origin(orig_w.begin(), orig_w.end());
    std::uniform_real_distribution<double> offset(0.0, cfg.max_depart_offset);
    std::uniform_real_distribution<double> stay(cfg.min_stay, cfg.max_stay);
    std::bernoulli_distribution low_beta(low_beta_share(cfg.mix));

    auto rng = stream_rng(cfg.seed, kTrips);
    std::vector<Driver> drivers(static_cast<std::size_t>(cfg.n_drivers));
    for (int i = 0; i < cfg.n_drivers; ++i) {
        Driver& d = drivers[i];
        d.id = i;
        d.destination_edge = destination(rng);
        d.origin_edge = origin(rng);
        d.base_depart = cfg.horizon * i / cfg.n_drivers;
        d.depart_offset = offset(rng);
        d.stay = stay(rng);
        d.beta = low_beta(rng) ? cfg.low_beta : cfg.high_beta;
        d.valuation = cfg.valuation;
    }

    auto part_rng = stream_rng(cfg.seed, kParticipation);
    std::vector<int> order(drivers.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), part_rng);
    const auto k = static_cast<std::size_t>(std::llround(cfg.penetration * cfg.n_drivers));
    for (std::size_t i = 0; i < k; ++i) drivers[order[i]].participant = true;
    return drivers;
}

std::vector<int> lots_by_static_cost(const RoadNetwork& net, int destination_edge, double beta,
                                     double price_scale) {
    const EdgePosition home = net.edge_midpoint(destination_edge);
    const double p_max = price_scale > 0.0 ? price_scale : net.spec().prices.max();
    std::vector<double> dist;
    for (const ParkingArea& a : net.areas()) dist.push_back(net.drive_distance(net.area_position(a.id), home));
    const double d_max = *std::max_element(dist.begin(), dist.end());
    std::vector<double> c;
    for (const ParkingArea& a : net.areas()) c.push_back(cost(beta, a.base_price, p_max, dist[a.id], d_max));
    std::vector<int> ids(net.areas().size());
    std::iota(ids.begin(), ids.end(), 0);
    std::stable_sort(ids.begin(), ids.end(), [&](int x, int y) { return c[x] < c[y]; });
    return ids;
}

int preferred_lot(const RoadNetwork& net, const Driver& driver, double price_scale) {
    return lots_by_static_cost(net, driver.destination_edge, driver.beta, price_scale).front();
}

LotRanking::LotRanking(const RoadNetwork& net, std::vector<double> betas, double price_scale)
    : betas_(std::move(betas)), n_edges_(net.edges().size()) {
    std::sort(betas_.begin(), betas_.end());
    betas_.erase(std::unique(betas_.begin(), betas_.end()), betas_.end());
    for (double b : betas_)
        for (std::size_t e = 0; e < n_edges_; ++e) table_.push_back(lots_by_static_cost(net, static_cast<int>(e), b, price_scale));
}

const std::vector<int>& LotRanking::ranking(int destination_edge, double beta) const {
    auto it = std::find(betas_.begin(), betas_.end(), beta);
    if (it == betas_.end()) throw InternalError("beta not precomputed in LotRanking");
    return table_.at(static_cast<std::size_t>(it - betas_.begin()) * n_edges_ + destination_edge);
}

void write_population_csv(std::ostream& os, const std::vector<Driver>& drivers) {
    os << "driver,origin_edge,destination_edge,beta,valuation,participant,base_depart_s,depart_offset_s,stay_s\n";
    for (const Driver& d : drivers) {
        os << d.id << ',' << d.origin_edge << ',' << d.destination_edge << ',' << csv::num(d.beta) << ','
           << csv::num(d.valuation) << ',' << (d.participant ? 1 : 0) << ',' << csv::num(d.base_depart) << ','
           << csv::num(d.depart_offset) << ',' << csv::num(d.stay) << '\n';
    }
}

std::vector<Driver> read_population_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("population csv is empty");
    std::vector<Driver> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = csv::split(line);
        if (f.size() != 9) throw ConfigError("population csv row has " + std::to_string(f.size()) + " fields, expected 9");
        Driver d;
        d.id = std::stoi(f[0]);
        d.origin_edge = std::stoi(f[1]);
        d.destination_edge = std::stoi(f[2]);
        d.beta = std::stod(f[3]);
        d.valuation = std::stod(f[4]);
        d.participant = f[5] == "1";
        d.base_depart = std::stod(f[6]);
        d.depart_offset = std::stod(f[7]);
        d.stay = std::stod(f[8]);
        out.push_back(d);
    }
    return out;
}

}  // namespace parksia
