#include "parksia/auction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "parksia/errors.hpp"

namespace parksia {

const char* to_string(PriceNormalizer n) {
    return n == PriceNormalizer::MaxAsk ? "max_ask" : "valuation";
}

PriceNormalizer parse_price_normalizer(const std::string& s) {
    if (s == "max_ask") return PriceNormalizer::MaxAsk;
    if (s == "valuation") return PriceNormalizer::Valuation;
    throw ConfigError("unknown price normalizer '" + s + "' (expected max_ask or valuation)");
}

void validate(const AuctionConfig& cfg) {
    if (!(cfg.epsilon > 0.0)) throw ConfigError("auction epsilon must be positive");
    if (cfg.quiescence_rounds < 1) throw ConfigError("quiescence_rounds must be >= 1");
    if (cfg.max_rounds_guard < 1) throw ConfigError("max_rounds_guard must be >= 1");
}

double cost(double beta, double price, double p_max, double distance, double d_max) {
    if (!(p_max > 0.0)) throw InternalError("price normaliser must be positive");
    double distance_term = d_max > 0.0 ? (1.0 - beta) * distance / d_max : 0.0;
    return beta * price / p_max + distance_term;
}

std::optional<int> preferred_auction(const BidderView& view, std::span<const Auction> auctions,
                                     double p_max) {
    std::optional<int> best;
    double best_cost = 0.0;
    for (std::size_t i = 0; i < auctions.size(); ++i) {
        double ask = auctions[i].current_price();
        if (ask > view.valuation + kPriceTolerance) continue;
        double c = cost(view.beta, ask, p_max, view.distance[i], view.d_max);
        if (!best || c < best_cost - kCostTolerance) {
            best = static_cast<int>(i);
            best_cost = c;
        }
    }
    return best;
}

std::optional<int> preferred_auction(const BidderView& view, std::span<const Auction> auctions) {
    double p_max = 0.0;
    for (const Auction& a : auctions) p_max = std::max(p_max, a.current_price());
    if (auctions.empty()) return std::nullopt;
    return preferred_auction(view, auctions, p_max);
}

long bid_bound(std::span<const Auction> auctions, std::span<const BidderView> views, double epsilon) {
    if (auctions.empty() || views.empty()) return 0;
    double max_v = 0.0;
    for (const BidderView& v : views) max_v = std::max(max_v, v.valuation);
    double min_p = auctions.front().start_price;
    for (const Auction& a : auctions) min_p = std::min(min_p, a.start_price);
    double steps = std::max(0.0, std::ceil((max_v - min_p) / epsilon - kPriceTolerance));
    return static_cast<long>(auctions.size()) * static_cast<long>(steps) + static_cast<long>(views.size());
}

std::vector<int> shuffled_order(std::size_t n, std::uint64_t seed) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

BatchResult run_batch(std::vector<Auction> auctions, std::span<const BidderView> views,
                      const AuctionConfig& cfg, std::span<const int> order,
                      std::vector<BidRecord>* trace) {
    validate(cfg);
    if (order.size() != views.size()) throw InternalError("agent order does not cover the batch");
    for (Auction& a : auctions) {
        if (!(a.start_price > 0.0)) throw InternalError("auction start price must be positive");
        a.epsilon = cfg.epsilon;
        a.increments = 0;
        a.leader = -1;
    }
    for (const BidderView& v : views) {
        if (v.distance.size() != auctions.size()) throw InternalError("bidder view size mismatch");
    }

    enum class State { Bidding, Leading, Left };
    std::vector<State> state(views.size(), State::Bidding);
    std::vector<int> leads(views.size(), -1);

    double p_max = 0.0;
    for (const Auction& a : auctions) p_max = std::max(p_max, a.current_price());

    BatchResult result;
    int quiet_rounds = 0;
    long round = 0;
    while (!auctions.empty() && quiet_rounds < cfg.quiescence_rounds) {
        if (++round > cfg.max_rounds_guard) throw InternalError("auction batch exceeded round guard");
        long bids_this_round = 0;
        for (int agent : order) {
            if (state[agent] != State::Bidding) continue;
            const BidderView& view = views[agent];
            double norm = cfg.normalizer == PriceNormalizer::Valuation ? view.valuation : p_max;
            auto pick = preferred_auction(view, auctions, norm);
            if (!pick) {
                state[agent] = State::Left;
                continue;
            }
            Auction& target = auctions[*pick];
            if (target.leader >= 0) {
                state[target.leader] = State::Bidding;
                leads[target.leader] = -1;
            }
            if (trace) trace->push_back({round, view.agent, *pick, target.current_price()});
            target.leader = agent;
            target.increments += 1;
            state[agent] = State::Leading;
            leads[agent] = *pick;
            p_max = std::max(p_max, target.current_price());
            ++bids_this_round;
        }
        result.total_bids += bids_this_round;
        quiet_rounds = bids_this_round == 0 ? quiet_rounds + 1 : 0;
    }
    result.rounds_used = round;

    for (std::size_t agent = 0; agent < views.size(); ++agent) {
        if (state[agent] == State::Leading) {
            const Auction& a = auctions[leads[agent]];
            result.assignments.push_back({views[agent].agent, leads[agent], a.space, a.area, *a.leader_bid_price()});
        } else {
            result.unassigned.push_back(views[agent].agent);
        }
    }
    result.final_auctions = std::move(auctions);
    return result;
}

BatchResult run_batch(std::vector<Auction> auctions, std::span<const BidderView> views,
                      const AuctionConfig& cfg, std::uint64_t order_seed, std::vector<BidRecord>* trace) {
    auto order = shuffled_order(views.size(), order_seed);
    return run_batch(std::move(auctions), views, cfg, order, trace);
}

}  // namespace parksia
