#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "parksia/network.hpp"

namespace parksia {

/// Share of price-indifferent drivers in the population.
enum class Mix { Mix10, Mix25, Mix50 };

const char* to_string(Mix m);
Mix parse_mix(const std::string& s);
double low_beta_share(Mix m);

struct Driver {
    int id = 0;
    int origin_edge = 0;
    int destination_edge = 0;    // the human destination, at the edge midpoint
    double beta = 0.5;
    double valuation = 5.0;      // EUR
    bool participant = false;
    double base_depart = 0.0;    // s
    double depart_offset = 0.0;  // s
    double stay = 0.0;           // s

    long depart_time() const { return static_cast<long>(base_depart + depart_offset); }
};

struct DemandConfig {
    int n_drivers = 11520;
    double horizon = 14400.0;       // s
    Mix mix = Mix::Mix10;
    double penetration = 0.0;
    std::uint64_t seed = 0;
    double valuation = 5.0;         // EUR
    double max_depart_offset = 300.0;
    double min_stay = 900.0;
    double max_stay = 2700.0;
    double low_beta = 0.01;
    double high_beta = 0.5;
};

void validate(const DemandConfig& cfg);

/// Destination probabilities: linear in the edge ring, normalised.
std::vector<double> attraction_weights(const RoadNetwork& net);

/// Origin probabilities: affine in the distance of the edge midpoint from
/// the grid center such that the farthest edge is nine times as likely as
/// the nearest one, normalised.
std::vector<double> origin_weights(const RoadNetwork& net);

std::vector<Driver> sample_population(const RoadNetwork& net, const DemandConfig& cfg);

/// Parking areas ordered by static-price cost for a destination and
/// attitude, ties by area id. Prices are normalised by `price_scale`, or by
/// the highest zone price when it is 0. Precomputed for every
/// (destination, beta) pair that occurs.
class LotRanking {
public:
    LotRanking(const RoadNetwork& net, std::vector<double> betas, double price_scale = 0.0);

    const std::vector<int>& ranking(int destination_edge, double beta) const;
    int preferred(int destination_edge, double beta) const { return ranking(destination_edge, beta).front(); }

private:
    std::vector<double> betas_;
    std::vector<std::vector<int>> table_;  // [beta index * edges + destination]
    std::size_t n_edges_ = 0;
};

/// Ranking computed directly (no cache).
std::vector<int> lots_by_static_cost(const RoadNetwork& net, int destination_edge, double beta,
                                     double price_scale = 0.0);

/// Cheapest area by static-price cost; ties go to the lowest area id.
int preferred_lot(const RoadNetwork& net, const Driver& driver, double price_scale = 0.0);

void write_population_csv(std::ostream& os, const std::vector<Driver>& drivers);
std::vector<Driver> read_population_csv(std::istream& is);

}  // namespace parksia
