#pragma once

// Simultaneous independent ascending auctions with local greedy bidding.
//
// A batch holds one auction per free parking space. Bidding proceeds in
// global rounds: every agent that does not currently lead an auction picks
// the auction minimising its price/distance cost at the current prices and,
// if the ask is within its valuation, bids there. A bid makes the agent the
// leader at the ask and raises the ask by epsilon. A round without any bid
// ends the batch and every leader wins at its bid price.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace parksia {

/// Price normaliser in the cost function: the highest current ask in the
/// batch, or the bidder's own valuation.
enum class PriceNormalizer { MaxAsk, Valuation };

const char* to_string(PriceNormalizer n);
PriceNormalizer parse_price_normalizer(const std::string& s);

struct AuctionConfig {
    double epsilon = 0.05;          // EUR per accepted bid
    PriceNormalizer normalizer = PriceNormalizer::MaxAsk;
    int quiescence_rounds = 1;      // consecutive bid-free rounds that end a batch
    long max_rounds_guard = 1'000'000;
};

void validate(const AuctionConfig& cfg);

struct Auction {
    int id = 0;
    int space = -1;
    int area = -1;
    double start_price = 0.0;
    long increments = 0;            // accepted bids so far
    int leader = -1;                // agent index into the batch, -1 if none
    double epsilon = 0.05;

    double current_price() const { return start_price + static_cast<double>(increments) * epsilon; }
    std::optional<double> leader_bid_price() const {
        if (leader < 0) return std::nullopt;
        return start_price + static_cast<double>(increments - 1) * epsilon;
    }
};

struct BidderView {
    int agent = 0;                  // caller's id, echoed in results
    double beta = 0.5;
    double valuation = 5.0;         // EUR
    std::vector<double> distance;   // m, one per auction in batch order
    double d_max = 0.0;             // m
};

struct Assignment {
    int agent = 0;                  // BidderView::agent
    int auction = 0;                // index into the batch
    int space = -1;
    int area = -1;
    double price = 0.0;
};

struct BatchResult {
    std::vector<Assignment> assignments;
    std::vector<int> unassigned;    // BidderView::agent values
    long rounds_used = 0;
    long total_bids = 0;
    std::vector<Auction> final_auctions;
};

/// One accepted bid, in the order they happened.
struct BidRecord {
    long round = 0;
    int agent = 0;                  // BidderView::agent
    int auction = 0;                // batch index
    double price = 0.0;             // ask the agent committed to
};

/// Price-distance cost of one parking option. The distance term vanishes
/// when every option is co-located (d_max == 0).
double cost(double beta, double price, double p_max, double distance, double d_max);

/// Index of the cheapest-cost auction whose ask is within the bidder's
/// valuation, normalising prices by the highest current ask. Ties go to the
/// lowest index.
std::optional<int> preferred_auction(const BidderView& view, std::span<const Auction> auctions);
std::optional<int> preferred_auction(const BidderView& view, std::span<const Auction> auctions,
                                     double p_max);

/// Upper bound on accepted bids for a batch.
long bid_bound(std::span<const Auction> auctions, std::span<const BidderView> views, double epsilon);

/// Runs the batch with an explicit within-round agent order (indices into
/// `views`). `trace`, when given, receives every accepted bid.
BatchResult run_batch(std::vector<Auction> auctions, std::span<const BidderView> views,
                      const AuctionConfig& cfg, std::span<const int> order,
                      std::vector<BidRecord>* trace = nullptr);

/// Same, with the agent order drawn from a seeded shuffle.
BatchResult run_batch(std::vector<Auction> auctions, std::span<const BidderView> views,
                      const AuctionConfig& cfg, std::uint64_t order_seed,
                      std::vector<BidRecord>* trace = nullptr);

std::vector<int> shuffled_order(std::size_t n, std::uint64_t seed);

/// Tolerance for comparing prices against valuations and costs against each
/// other; asks are sums of decimal increments.
inline constexpr double kPriceTolerance = 1e-9;
inline constexpr double kCostTolerance = 1e-12;

}  // namespace parksia
