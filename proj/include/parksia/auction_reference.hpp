#pragma once

// Brute-force reference for the ascending-auction batch. It re-derives every
// quantity from scratch at each decision and shares no code with
// auction.cpp, so it can cross-check run_batch on small instances.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "parksia/auction.hpp"

namespace parksia::reference {

struct Lot {
    double start_price = 0.0;
};

struct Bidder {
    double beta = 0.5;
    double valuation = 5.0;
    std::vector<double> distance;  // per lot
};

struct Instance {
    std::vector<Lot> lots;
    std::vector<Bidder> bidders;
    std::vector<int> order;
};

struct Outcome {
    std::map<int, std::pair<int, double>> wins;  // bidder -> (lot, price)
    long bids = 0;
};

/// `own_valuation_scale` normalises prices by each bidder's valuation
/// instead of the highest ask.
Outcome run_protocol(const Instance& inst, double epsilon, int quiescence_rounds,
                     bool own_valuation_scale = false);

Instance random_instance(std::uint64_t seed, int max_lots, int max_bidders);

/// Converts an instance into run_batch inputs.
std::pair<std::vector<Auction>, std::vector<BidderView>> to_batch(const Instance& inst);

struct CrossCheckReport {
    int instances = 0;
    int mismatches = 0;
    int single_lot_cases = 0;
    int second_price_violations = 0;
    std::vector<std::string> failures;  // first few, human readable
};

/// Runs run_batch and the reference on `count` random instances and
/// compares winners and prices exactly. Single-lot instances are also
/// checked against the English-auction outcome: the winner has the highest
/// grid-snapped valuation and pays between that second-highest snapped
/// valuation and one increment above it.
CrossCheckReport cross_check(int count, std::uint64_t seed, int max_lots, int max_bidders,
                             const AuctionConfig& cfg);

}  // namespace parksia::reference
