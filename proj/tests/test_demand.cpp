#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "parksia/auction.hpp"
#include "parksia/demand.hpp"
#include "parksia/errors.hpp"

using namespace parksia;

namespace {

// Upper tail of the chi-square distribution (Wilson-Hilferty).
double chi_square_p(double x, int dof) {
    const double k = dof;
    const double z = (std::cbrt(x / k) - (1.0 - 2.0 / (9.0 * k))) / std::sqrt(2.0 / (9.0 * k));
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

double chi_square(const std::vector<long>& observed, const std::vector<double>& p) {
    long n = std::accumulate(observed.begin(), observed.end(), 0L);
    double x = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double expected = p[i] * static_cast<double>(n);
        x += (observed[i] - expected) * (observed[i] - expected) / expected;
    }
    return x;
}

int brute_force_preferred(const RoadNetwork& net, int destination, double beta, double p_max) {
    EdgePosition home{destination, net.edge(destination).length / 2.0};
    double d_max = 0.0;
    for (const ParkingArea& a : net.areas())
        d_max = std::max(d_max, net.drive_distance({a.edge, a.position}, home));
    int best = -1;
    double best_cost = 0.0;
    for (const ParkingArea& a : net.areas()) {
        double d = net.drive_distance({a.edge, a.position}, home);
        double c = beta * a.base_price / p_max + (1.0 - beta) * d / d_max;
        if (best < 0 || c < best_cost) {
            best = a.id;
            best_cost = c;
        }
    }
    return best;
}

}  // namespace

TEST(Demand, AttractionWeightsFollowRings) {
    RoadNetwork net = build_grid(GridSpec{});
    auto w = attraction_weights(net);
    ASSERT_EQ(w.size(), 120u);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
    const double u = w[net.edge_between(net.junction_at(0, 0), net.junction_at(0, 1))];
    for (const Edge& e : net.edges()) EXPECT_NEAR(w[e.id], (e.ring + 1) * u, 1e-15);
    double innermost = w[net.edge_between(net.junction_at(2, 2), net.junction_at(2, 3))];
    EXPECT_NEAR(innermost / u, 5.0, 1e-12);
}

TEST(Demand, OriginWeightsNineToOne) {
    RoadNetwork net = build_grid(GridSpec{});
    auto w = origin_weights(net);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
    auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    EXPECT_GT(*lo, 0.0);
    EXPECT_NEAR(*hi / *lo, 9.0, 1e-9);
    // Corner street vs a street through the center.
    double corner = w[net.edge_between(net.junction_at(0, 0), net.junction_at(0, 1))];
    double center = w[net.edge_between(net.junction_at(2, 3), net.junction_at(3, 3))];
    EXPECT_NEAR(corner / center, 9.0, 1e-9);
}

TEST(Demand, OriginWeightsSymmetric) {
    RoadNetwork net = build_grid(GridSpec{});
    auto w = origin_weights(net);
    for (const Edge& e : net.edges()) {
        // Opposite direction and the mirror image share the midpoint distance.
        EXPECT_NEAR(w[e.id], w[net.reverse_edge(e.id)], 1e-15);
        const Junction& f = net.junctions()[e.from];
        const Junction& t = net.junctions()[e.to];
        int mirror = net.edge_between(net.junction_at(5 - f.row, f.col), net.junction_at(5 - t.row, t.col));
        EXPECT_NEAR(w[e.id], w[mirror], 1e-15);
    }
}

TEST(Demand, PopulationShape) {
    RoadNetwork net = build_grid(GridSpec{});
    DemandConfig cfg;
    auto pop = sample_population(net, cfg);
    ASSERT_EQ(pop.size(), 11520u);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const Driver& d = pop[i];
        EXPECT_EQ(d.id, static_cast<int>(i));
        EXPECT_GE(d.stay, 900.0);
        EXPECT_LE(d.stay, 2700.0);
        EXPECT_GE(d.depart_offset, 0.0);
        EXPECT_LE(d.depart_offset, 300.0);
        EXPECT_TRUE(d.beta == 0.01 || d.beta == 0.5);
        EXPECT_DOUBLE_EQ(d.valuation, 5.0);
        EXPECT_DOUBLE_EQ(d.base_depart, 14400.0 * static_cast<double>(i) / 11520.0);
        EXPECT_FALSE(d.participant);
    }
}

TEST(Demand, SameSeedSamePopulation) {
    RoadNetwork net = build_grid(GridSpec{});
    DemandConfig cfg;
    cfg.seed = 42;
    cfg.penetration = 0.4;
    std::ostringstream a, b;
    write_population_csv(a, sample_population(net, cfg));
    write_population_csv(b, sample_population(net, cfg));
    EXPECT_EQ(a.str(), b.str());
    cfg.seed = 43;
    std::ostringstream c;
    write_population_csv(c, sample_population(net, cfg));
    EXPECT_NE(a.str(), c.str());
}

TEST(Demand, ParticipationCountIsExact) {
    RoadNetwork net = build_grid(GridSpec{});
    for (double p : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 0.333}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            DemandConfig cfg;
            cfg.penetration = p;
            cfg.seed = seed;
            auto pop = sample_population(net, cfg);
            long n = std::count_if(pop.begin(), pop.end(), [](const Driver& d) { return d.participant; });
            EXPECT_EQ(n, std::llround(p * 11520)) << p << " seed " << seed;
        }
    }
}

TEST(Demand, PenetrationOnlyChangesParticipation) {
    RoadNetwork net = build_grid(GridSpec{});
    DemandConfig a, b;
    a.penetration = 0.0;
    b.penetration = 0.6;
    auto pa = sample_population(net, a);
    auto pb = sample_population(net, b);
    for (std::size_t i = 0; i < pa.size(); ++i) {
        EXPECT_EQ(pa[i].origin_edge, pb[i].origin_edge);
        EXPECT_EQ(pa[i].destination_edge, pb[i].destination_edge);
        EXPECT_EQ(pa[i].beta, pb[i].beta);
        EXPECT_EQ(pa[i].stay, pb[i].stay);
    }
}

TEST(Demand, DestinationsAndOriginsFitWeights) {
    RoadNetwork net = build_grid(GridSpec{});
    DemandConfig cfg;
    cfg.n_drivers = 100000;
    cfg.seed = 3;
    auto pop = sample_population(net, cfg);
    std::vector<long> dest(120, 0), orig(120, 0);
    for (const Driver& d : pop) {
        ++dest[d.destination_edge];
        ++orig[d.origin_edge];
    }
    EXPECT_GT(chi_square_p(chi_square(dest, attraction_weights(net)), 119), 0.001);
    EXPECT_GT(chi_square_p(chi_square(orig, origin_weights(net)), 119), 0.001);
}

TEST(Demand, ChiSquareHelperRejectsWrongWeights) {
    RoadNetwork net = build_grid(GridSpec{});
    DemandConfig cfg;
    cfg.n_drivers = 100000;
    auto pop = sample_population(net, cfg);
    std::vector<long> dest(120, 0);
    for (const Driver& d : pop) ++dest[d.destination_edge];
    std::vector<double> uniform(120, 1.0 / 120.0);
    EXPECT_LT(chi_square_p(chi_square(dest, uniform), 119), 0.001);
}

TEST(Demand, LowBetaShareMatchesMix) {
    RoadNetwork net = build_grid(GridSpec{});
    for (Mix mix : {Mix::Mix10, Mix::Mix25, Mix::Mix50}) {
        const double p = low_beta_share(mix);
        double x = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            DemandConfig cfg;
            cfg.mix = mix;
            cfg.seed = seed;
            auto pop = sample_population(net, cfg);
            long low = std::count_if(pop.begin(), pop.end(), [](const Driver& d) { return d.beta == 0.01; });
            double n = static_cast<double>(pop.size());
            x += (low - n * p) * (low - n * p) / (n * p * (1.0 - p));
        }
        EXPECT_GT(chi_square_p(x, 10), 0.001) << to_string(mix);
    }
    EXPECT_DOUBLE_EQ(low_beta_share(Mix::Mix10), 0.10);
    EXPECT_DOUBLE_EQ(low_beta_share(Mix::Mix25), 0.25);
    EXPECT_DOUBLE_EQ(low_beta_share(Mix::Mix50), 0.50);
}

TEST(Demand, MixNames) {
    EXPECT_EQ(parse_mix("MIX25"), Mix::Mix25);
    EXPECT_EQ(parse_mix("mix50"), Mix::Mix50);
    EXPECT_STREQ(to_string(Mix::Mix10), "MIX10");
    EXPECT_THROW(parse_mix("MIX30"), ConfigError);
}

TEST(Demand, PreferredLotIsExhaustiveArgmin) {
    RoadNetwork net = build_grid(GridSpec{});
    for (double beta : {0.01, 0.5, 1.0}) {
        for (const Edge& e : net.edges()) {
            Driver d;
            d.destination_edge = e.id;
            d.beta = beta;
            EXPECT_EQ(preferred_lot(net, d), brute_force_preferred(net, e.id, beta, 1.0)) << e.id << " beta " << beta;
            EXPECT_EQ(preferred_lot(net, d, 5.0), brute_force_preferred(net, e.id, beta, 5.0));
        }
    }
}

TEST(Demand, CheapOuterLotBeatsCentralLot) {
    RoadNetwork net = build_grid(GridSpec{});
    int home = net.edge_between(net.junction_at(2, 1), net.junction_at(2, 2));
    ASSERT_EQ(net.edge(home).zone, Zone::Inner);
    Driver d;
    d.destination_edge = home;
    d.beta = 0.5;
    int lot = preferred_lot(net, d);
    EXPECT_EQ(net.edge(lot).zone, Zone::Outer);
    // The winning lot is the closest cheap lot.
    double best_outer = 1e18;
    for (const ParkingArea& a : net.areas())
        if (net.edge(a.edge).zone == Zone::Outer) best_outer = std::min(best_outer, net.area_distance(a.id, home));
    EXPECT_DOUBLE_EQ(net.area_distance(lot, home), best_outer);
}

TEST(Demand, LowBetaPicksClosestLot) {
    for (ZonePrices prices : {ZonePrices{0.5, 1.0}, ZonePrices{0.3, 0.9}, ZonePrices{1.0, 0.2}}) {
        GridSpec s;
        s.prices = prices;
        RoadNetwork net = build_grid(s);
        for (const Edge& e : net.edges()) {
            Driver d;
            d.destination_edge = e.id;
            d.beta = 0.01;
            EXPECT_EQ(preferred_lot(net, d), e.id);
        }
    }
}

TEST(Demand, TiesGoToLowestAreaId) {
    GridSpec s;
    s.prices = {0.7, 0.7};
    RoadNetwork net = build_grid(s);
    Driver d;
    d.destination_edge = 57;
    d.beta = 1.0;  // uniform prices, distance ignored: every lot costs the same
    EXPECT_EQ(preferred_lot(net, d), 0);
    auto ranking = lots_by_static_cost(net, 57, 1.0);
    for (int i = 0; i < 120; ++i) EXPECT_EQ(ranking[i], i);
}

TEST(Demand, LotRankingMatchesDirectComputation) {
    RoadNetwork net = build_grid(GridSpec{});
    LotRanking cache(net, {0.5, 0.01});
    for (const Edge& e : net.edges()) {
        EXPECT_EQ(cache.ranking(e.id, 0.5), lots_by_static_cost(net, e.id, 0.5));
        EXPECT_EQ(cache.preferred(e.id, 0.01), lots_by_static_cost(net, e.id, 0.01).front());
    }
    EXPECT_THROW(cache.ranking(0, 0.3), InternalError);
}

TEST(Demand, PopulationCsvRoundTrip) {
    RoadNetwork net = build_grid(GridSpec{});
    DemandConfig cfg;
    cfg.n_drivers = 500;
    cfg.penetration = 0.5;
    auto pop = sample_population(net, cfg);
    std::stringstream ss;
    write_population_csv(ss, pop);
    auto back = read_population_csv(ss);
    ASSERT_EQ(back.size(), pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        EXPECT_EQ(back[i].id, pop[i].id);
        EXPECT_EQ(back[i].origin_edge, pop[i].origin_edge);
        EXPECT_EQ(back[i].destination_edge, pop[i].destination_edge);
        EXPECT_EQ(back[i].beta, pop[i].beta);
        EXPECT_EQ(back[i].participant, pop[i].participant);
        EXPECT_EQ(back[i].base_depart, pop[i].base_depart);
        EXPECT_EQ(back[i].depart_offset, pop[i].depart_offset);
        EXPECT_EQ(back[i].stay, pop[i].stay);
    }
}

TEST(Demand, RejectsBadConfig) {
    RoadNetwork net = build_grid(GridSpec{});
    DemandConfig cfg;
    cfg.penetration = 1.5;
    EXPECT_THROW(sample_population(net, cfg), ConfigError);
    cfg = {};
    cfg.n_drivers = 0;
    EXPECT_THROW(sample_population(net, cfg), ConfigError);
    cfg = {};
    cfg.min_stay = 3000;
    EXPECT_THROW(sample_population(net, cfg), ConfigError);
}
