#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "parksia/auction.hpp"
#include "parksia/auction_reference.hpp"
#include "parksia/errors.hpp"

using namespace parksia;

namespace {

Auction make_auction(int id, double start) {
    Auction a;
    a.id = id;
    a.space = id;
    a.area = id;
    a.start_price = start;
    return a;
}

BidderView make_bidder(int agent, double beta, double valuation, std::vector<double> distance) {
    BidderView v;
    v.agent = agent;
    v.beta = beta;
    v.valuation = valuation;
    v.distance = std::move(distance);
    for (double d : v.distance) v.d_max = std::max(v.d_max, d);
    return v;
}

std::vector<int> identity(std::size_t n) {
    std::vector<int> o(n);
    for (std::size_t i = 0; i < n; ++i) o[i] = static_cast<int>(i);
    return o;
}

}  // namespace

TEST(Cost, WorkedValues) {
    EXPECT_DOUBLE_EQ(cost(0.5, 1.0, 1.0, 0.0, 200.0), 0.5);
    EXPECT_DOUBLE_EQ(cost(0.5, 0.5, 1.0, 50.0, 200.0), 0.375);
    EXPECT_DOUBLE_EQ(cost(0.01, 1.0, 1.0, 100.0, 100.0), 1.0);
    EXPECT_DOUBLE_EQ(cost(1.0, 0.7, 1.4, 300.0, 400.0), 0.5);
    // Co-located options: distance drops out.
    EXPECT_DOUBLE_EQ(cost(0.3, 0.6, 1.2, 0.0, 0.0), 0.15);
}

TEST(Cost, RejectsNonPositiveNormaliser) {
    EXPECT_THROW(cost(0.5, 1.0, 0.0, 10.0, 10.0), InternalError);
    EXPECT_THROW(cost(0.5, 1.0, -1.0, 10.0, 10.0), InternalError);
}

TEST(PreferredAuction, SingleAffordable) {
    std::vector<Auction> as{make_auction(0, 2.0), make_auction(1, 0.5)};
    auto v = make_bidder(0, 0.01, 1.0, {0.0, 500.0});
    EXPECT_EQ(preferred_auction(v, as), 1);
}

TEST(PreferredAuction, NothingAffordable) {
    std::vector<Auction> as{make_auction(0, 2.0), make_auction(1, 1.5)};
    auto v = make_bidder(0, 0.5, 1.0, {0.0, 0.0});
    EXPECT_FALSE(preferred_auction(v, as).has_value());
    EXPECT_FALSE(preferred_auction(v, std::vector<Auction>{}).has_value());
}

TEST(PreferredAuction, ValuationBoundaryIsAffordable) {
    std::vector<Auction> as{make_auction(0, 0.5)};
    as[0].increments = 5;  // 0.5 + 5 * 0.05, accumulated in floating point
    auto v = make_bidder(0, 0.5, 0.75, {0.0});
    EXPECT_EQ(preferred_auction(v, as), 0);
}

TEST(PreferredAuction, MatchesExhaustiveSearch) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> cents(6, 30);
    std::uniform_int_distribution<int> blocks(0, 8);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<Auction> as;
        for (int i = 0; i < 5; ++i) as.push_back(make_auction(i, cents(rng) * 0.05));
        std::vector<double> dist;
        for (int i = 0; i < 5; ++i) dist.push_back(100.0 * blocks(rng));
        double beta = trial % 2 ? 0.5 : 0.01;
        auto v = make_bidder(0, beta, 1.0, dist);
        double p_max = 0.0;
        for (const Auction& a : as) p_max = std::max(p_max, a.start_price);
        int want = -1;
        double want_cost = 0.0;
        for (int i = 0; i < 5; ++i) {
            if (as[i].start_price > 1.0 + 1e-9) continue;
            double c = beta * as[i].start_price / p_max + (v.d_max > 0 ? (1 - beta) * dist[i] / v.d_max : 0.0);
            if (want < 0 || c < want_cost - 1e-12) {
                want = i;
                want_cost = c;
            }
        }
        auto got = preferred_auction(v, as);
        if (want < 0) {
            EXPECT_FALSE(got.has_value());
        } else {
            ASSERT_TRUE(got.has_value());
            EXPECT_EQ(*got, want) << "trial " << trial;
        }
    }
}

TEST(PreferredAuction, TiesGoToLowestIndex) {
    std::vector<Auction> as{make_auction(0, 0.5), make_auction(1, 0.5), make_auction(2, 0.5)};
    auto v = make_bidder(0, 0.5, 5.0, {100.0, 100.0, 100.0});
    EXPECT_EQ(preferred_auction(v, as), 0);
    as[0].increments = 1;
    EXPECT_EQ(preferred_auction(v, as), 1);
}

TEST(PreferredAuction, NormaliserChangesTheChoice) {
    std::vector<Auction> as{make_auction(0, 1.0), make_auction(1, 0.5)};
    auto v = make_bidder(0, 0.5, 5.0, {0.0, 50.0});
    v.d_max = 200.0;
    EXPECT_EQ(preferred_auction(v, as, 1.0), 1);   // 0.5 vs 0.375
    EXPECT_EQ(preferred_auction(v, as, 5.0), 0);   // 0.1 vs 0.175
}

TEST(RunBatch, UncontestedPaysStartPrice) {
    std::vector<Auction> as{make_auction(0, 0.5)};
    std::vector<BidderView> vs{make_bidder(7, 0.5, 5.0, {0.0})};
    auto r = run_batch(as, vs, AuctionConfig{}, identity(1));
    ASSERT_EQ(r.assignments.size(), 1u);
    EXPECT_EQ(r.assignments[0].agent, 7);
    EXPECT_NEAR(r.assignments[0].price, 0.50, 1e-12);
    EXPECT_EQ(r.total_bids, 1);
    EXPECT_EQ(r.rounds_used, 2);
}

TEST(RunBatch, TwoBiddersOneSpace) {
    std::vector<Auction> as{make_auction(0, 0.5)};
    std::vector<BidderView> vs{make_bidder(0, 0.5, 1.0, {0.0}), make_bidder(1, 0.5, 0.7, {0.0})};
    for (auto order : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
        auto r = run_batch(as, vs, AuctionConfig{}, order);
        ASSERT_EQ(r.assignments.size(), 1u);
        EXPECT_EQ(r.assignments[0].agent, 0);
        EXPECT_GE(r.assignments[0].price, 0.70 - 1e-9);
        EXPECT_LE(r.assignments[0].price, 0.75 + 1e-9);
        EXPECT_EQ(r.unassigned, std::vector<int>{1});
    }
}

TEST(RunBatch, TwoAuctionTrace) {
    std::vector<Auction> as{make_auction(0, 1.0), make_auction(1, 0.5)};
    std::vector<BidderView> vs{make_bidder(1, 0.01, 5.0, {0.0, 100.0}), make_bidder(2, 0.5, 5.0, {0.0, 0.0})};
    std::vector<BidRecord> trace;
    auto r = run_batch(as, vs, AuctionConfig{}, identity(2), &trace);
    ASSERT_EQ(trace.size(), 2u);
    EXPECT_EQ(trace[0].agent, 1);
    EXPECT_EQ(trace[0].auction, 0);
    EXPECT_EQ(trace[1].agent, 2);
    EXPECT_EQ(trace[1].auction, 1);
    ASSERT_EQ(r.assignments.size(), 2u);
    std::map<int, Assignment> by_agent;
    for (const auto& a : r.assignments) by_agent[a.agent] = a;
    EXPECT_EQ(by_agent[1].auction, 0);
    EXPECT_NEAR(by_agent[1].price, 1.00, 1e-12);
    EXPECT_EQ(by_agent[2].auction, 1);
    EXPECT_NEAR(by_agent[2].price, 0.50, 1e-12);
    EXPECT_EQ(r.rounds_used, 2);
}

TEST(RunBatch, MoreBiddersThanSpaces) {
    std::vector<Auction> as{make_auction(0, 0.5), make_auction(1, 0.5)};
    std::vector<BidderView> vs;
    for (int i = 0; i < 5; ++i) vs.push_back(make_bidder(i, 0.5, 0.6 + 0.1 * i, {0.0, 100.0}));
    auto r = run_batch(as, vs, AuctionConfig{}, identity(5));
    ASSERT_EQ(r.assignments.size(), 2u);
    std::set<int> winners;
    for (const auto& a : r.assignments) winners.insert(a.agent);
    EXPECT_EQ(winners, (std::set<int>{3, 4}));
    EXPECT_EQ(r.unassigned.size(), 3u);
}

TEST(RunBatch, EmptyBatches) {
    auto r = run_batch({}, std::vector<BidderView>{}, AuctionConfig{}, std::vector<int>{});
    EXPECT_TRUE(r.assignments.empty());
    std::vector<BidderView> vs{make_bidder(0, 0.5, 5.0, {})};
    r = run_batch({}, vs, AuctionConfig{}, identity(1));
    EXPECT_TRUE(r.assignments.empty());
    EXPECT_EQ(r.unassigned, std::vector<int>{0});
}

TEST(RunBatch, RejectsInconsistentInput) {
    std::vector<Auction> as{make_auction(0, 0.5)};
    std::vector<BidderView> vs{make_bidder(0, 0.5, 5.0, {0.0, 1.0})};
    EXPECT_THROW(run_batch(as, vs, AuctionConfig{}, identity(1)), InternalError);
    vs = {make_bidder(0, 0.5, 5.0, {0.0})};
    EXPECT_THROW(run_batch(as, vs, AuctionConfig{}, identity(2)), InternalError);
    as[0].start_price = 0.0;
    EXPECT_THROW(run_batch(as, vs, AuctionConfig{}, identity(1)), InternalError);
}

TEST(RunBatch, RoundGuardTrips) {
    std::vector<Auction> as{make_auction(0, 0.5)};
    std::vector<BidderView> vs{make_bidder(0, 0.5, 5.0, {0.0}), make_bidder(1, 0.5, 5.0, {0.0})};
    AuctionConfig cfg;
    cfg.max_rounds_guard = 3;
    EXPECT_THROW(run_batch(as, vs, cfg, identity(2)), InternalError);
}

TEST(RunBatch, ExtraQuietRoundsChangeNothing) {
    AuctionConfig one, two;
    two.quiescence_rounds = 2;
    for (std::uint64_t s = 0; s < 300; ++s) {
        auto inst = reference::random_instance(s, 4, 6);
        auto [as, vs] = reference::to_batch(inst);
        auto a = run_batch(as, vs, one, inst.order);
        auto b = run_batch(as, vs, two, inst.order);
        ASSERT_EQ(a.assignments.size(), b.assignments.size());
        for (std::size_t i = 0; i < a.assignments.size(); ++i) {
            EXPECT_EQ(a.assignments[i].agent, b.assignments[i].agent);
            EXPECT_EQ(a.assignments[i].auction, b.assignments[i].auction);
            EXPECT_EQ(a.assignments[i].price, b.assignments[i].price);
        }
        EXPECT_EQ(b.rounds_used, a.rounds_used + 1);
    }
}

TEST(RunBatch, ConfigValidation) {
    AuctionConfig cfg;
    cfg.epsilon = 0.0;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = {};
    cfg.quiescence_rounds = 0;
    EXPECT_THROW(validate(cfg), ConfigError);
    EXPECT_EQ(parse_price_normalizer("valuation"), PriceNormalizer::Valuation);
    EXPECT_EQ(parse_price_normalizer("max_ask"), PriceNormalizer::MaxAsk);
    EXPECT_STREQ(to_string(PriceNormalizer::Valuation), "valuation");
    EXPECT_THROW(parse_price_normalizer("median"), ConfigError);
}

class BatchProperties : public ::testing::TestWithParam<PriceNormalizer> {};

TEST_P(BatchProperties, HoldOnRandomInstances) {
    AuctionConfig cfg;
    cfg.normalizer = GetParam();
    for (std::uint64_t s = 0; s < 500; ++s) {
        auto inst = reference::random_instance(1000 + s, 5, 8);
        auto [as, vs] = reference::to_batch(inst);
        std::vector<BidRecord> trace;
        auto r = run_batch(as, vs, cfg, inst.order, &trace);
        SCOPED_TRACE("instance " + std::to_string(s));

        // Replay: asks only rise by epsilon and every bid is the bidder's
        // cheapest affordable option at that moment.
        std::vector<Auction> replay = as;
        for (Auction& a : replay) a.epsilon = cfg.epsilon;
        double p_max = 0.0;
        for (const Auction& a : replay) p_max = std::max(p_max, a.current_price());
        for (const BidRecord& b : trace) {
            const BidderView& v = vs[b.agent];
            double norm = cfg.normalizer == PriceNormalizer::Valuation ? v.valuation : p_max;
            auto pick = preferred_auction(v, replay, norm);
            ASSERT_TRUE(pick.has_value());
            EXPECT_EQ(*pick, b.auction);
            EXPECT_NEAR(b.price, replay[b.auction].current_price(), 1e-12);
            EXPECT_LE(b.price, v.valuation + 1e-9);
            replay[b.auction].leader = b.agent;
            replay[b.auction].increments += 1;
            p_max = std::max(p_max, replay[b.auction].current_price());
        }
        EXPECT_EQ(static_cast<long>(trace.size()), r.total_bids);
        EXPECT_LE(r.total_bids, bid_bound(as, vs, cfg.epsilon));

        std::set<int> won_auctions, winners;
        for (const Assignment& a : r.assignments) {
            EXPECT_TRUE(won_auctions.insert(a.auction).second);
            EXPECT_TRUE(winners.insert(a.agent).second);
            EXPECT_EQ(replay[a.auction].leader, a.agent);
            EXPECT_NEAR(a.price, *replay[a.auction].leader_bid_price(), 1e-12);
            EXPECT_LE(a.price, vs[a.agent].valuation + 1e-9);
            EXPECT_GE(a.price, as[a.auction].start_price - 1e-12);
        }
        // Nobody is left out while an auction they can afford is unclaimed.
        for (int agent : r.unassigned) {
            for (const Auction& a : r.final_auctions)
                EXPECT_TRUE(a.leader >= 0 || a.current_price() > vs[agent].valuation + 1e-9);
        }
        EXPECT_EQ(r.assignments.size() + r.unassigned.size(), vs.size());

        auto again = run_batch(as, vs, cfg, inst.order);
        ASSERT_EQ(again.assignments.size(), r.assignments.size());
        for (std::size_t i = 0; i < r.assignments.size(); ++i) {
            EXPECT_EQ(again.assignments[i].agent, r.assignments[i].agent);
            EXPECT_EQ(again.assignments[i].price, r.assignments[i].price);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Normalisers, BatchProperties,
                         ::testing::Values(PriceNormalizer::MaxAsk, PriceNormalizer::Valuation),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(RunBatch, SeededOrderIsReproducible) {
    EXPECT_EQ(shuffled_order(20, 5), shuffled_order(20, 5));
    EXPECT_NE(shuffled_order(20, 5), shuffled_order(20, 6));
    auto o = shuffled_order(20, 5);
    std::sort(o.begin(), o.end());
    EXPECT_EQ(o, identity(20));
}

TEST(Reference, AgreesWithEngine) {
    for (PriceNormalizer n : {PriceNormalizer::MaxAsk, PriceNormalizer::Valuation}) {
        AuctionConfig cfg;
        cfg.normalizer = n;
        auto rep = reference::cross_check(1000, 9, 3, 6, cfg);
        EXPECT_EQ(rep.instances, 1000);
        EXPECT_GT(rep.single_lot_cases, 100);
        EXPECT_EQ(rep.mismatches, 0) << (rep.failures.empty() ? "" : rep.failures.front());
        EXPECT_EQ(rep.second_price_violations, 0);
    }
}

TEST(Reference, SecondPriceOnTheGrid) {
    // Valuations 0.93 and 0.81 snap to 0.90 and 0.80 on the 0.05 grid from 0.50.
    reference::Instance inst;
    inst.lots = {{0.5}};
    inst.bidders = {{0.5, 0.81, {0.0}}, {0.5, 0.93, {0.0}}, {0.01, 0.52, {0.0}}};
    inst.order = {0, 1, 2};
    auto [as, vs] = reference::to_batch(inst);
    auto r = run_batch(as, vs, AuctionConfig{}, inst.order);
    ASSERT_EQ(r.assignments.size(), 1u);
    EXPECT_EQ(r.assignments[0].agent, 1);
    EXPECT_GE(r.assignments[0].price, 0.80 - 1e-9);
    EXPECT_LE(r.assignments[0].price, 0.85 + 1e-9);
}
