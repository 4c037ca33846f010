#include "parksia/auction_reference.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace parksia::reference {

namespace {

constexpr double kTol = 1e-9;

double ask_of(const Instance& inst, const std::vector<long>& ticks, int lot, double eps) {
    return inst.lots[lot].start_price + static_cast<double>(ticks[lot]) * eps;
}

}  // namespace

Outcome run_protocol(const Instance& inst, double epsilon, int quiescence_rounds, bool own_valuation_scale) {
    const int n_lots = static_cast<int>(inst.lots.size());
    std::vector<long> ticks(n_lots, 0);
    std::vector<int> holder(n_lots, -1);
    std::vector<bool> gone(inst.bidders.size(), false);
    Outcome out;

    int quiet = 0;
    while (n_lots > 0 && quiet < quiescence_rounds) {
        long bids = 0;
        for (int j : inst.order) {
            if (gone[j]) continue;
            bool holding = false;
            for (int l = 0; l < n_lots; ++l) holding = holding || holder[l] == j;
            if (holding) continue;

            const Bidder& b = inst.bidders[j];
            double top = 0.0;
            for (int l = 0; l < n_lots; ++l) top = std::max(top, ask_of(inst, ticks, l, epsilon));
            if (own_valuation_scale) top = b.valuation;
            double far = 0.0;
            for (double d : b.distance) far = std::max(far, d);

            int choice = -1;
            double choice_cost = 0.0;
            for (int l = 0; l < n_lots; ++l) {
                double ask = ask_of(inst, ticks, l, epsilon);
                if (ask > b.valuation + kTol) continue;
                double c = b.beta * ask / top + (far > 0.0 ? (1.0 - b.beta) * b.distance[l] / far : 0.0);
                if (choice < 0 || c < choice_cost - 1e-12) {
                    choice = l;
                    choice_cost = c;
                }
            }
            if (choice < 0) {
                gone[j] = true;
                continue;
            }
            holder[choice] = j;
            ticks[choice] += 1;
            ++bids;
        }
        out.bids += bids;
        quiet = bids == 0 ? quiet + 1 : 0;
    }
    for (int l = 0; l < n_lots; ++l) {
        if (holder[l] >= 0) {
            out.wins[holder[l]] = {l, inst.lots[l].start_price + static_cast<double>(ticks[l] - 1) * epsilon};
        }
    }
    return out;
}

Instance random_instance(std::uint64_t seed, int max_lots, int max_bidders) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> n_lots(1, max_lots);
    std::uniform_int_distribution<int> n_bidders(1, max_bidders);
    std::uniform_int_distribution<int> start_cents(6, 12);   // 0.30 .. 0.60 in 0.05 steps
    std::uniform_real_distribution<double> valuation(0.3, 1.6);
    std::uniform_int_distribution<int> blocks(0, 6);
    std::bernoulli_distribution low_beta(0.5);

    Instance inst;
    inst.lots.resize(n_lots(rng));
    for (Lot& l : inst.lots) l.start_price = start_cents(rng) * 0.05;
    inst.bidders.resize(n_bidders(rng));
    for (Bidder& b : inst.bidders) {
        b.beta = low_beta(rng) ? 0.01 : 0.5;
        b.valuation = valuation(rng);
        for (std::size_t l = 0; l < inst.lots.size(); ++l) b.distance.push_back(100.0 * blocks(rng));
    }
    inst.order.resize(inst.bidders.size());
    for (std::size_t i = 0; i < inst.order.size(); ++i) inst.order[i] = static_cast<int>(i);
    std::shuffle(inst.order.begin(), inst.order.end(), rng);
    return inst;
}

std::pair<std::vector<Auction>, std::vector<BidderView>> to_batch(const Instance& inst) {
    std::vector<Auction> auctions;
    for (std::size_t l = 0; l < inst.lots.size(); ++l) {
        Auction a;
        a.id = static_cast<int>(l);
        a.space = static_cast<int>(l);
        a.area = static_cast<int>(l);
        a.start_price = inst.lots[l].start_price;
        auctions.push_back(a);
    }
    std::vector<BidderView> views;
    for (std::size_t j = 0; j < inst.bidders.size(); ++j) {
        const Bidder& b = inst.bidders[j];
        BidderView v;
        v.agent = static_cast<int>(j);
        v.beta = b.beta;
        v.valuation = b.valuation;
        v.distance = b.distance;
        v.d_max = b.distance.empty() ? 0.0 : *std::max_element(b.distance.begin(), b.distance.end());
        views.push_back(std::move(v));
    }
    return {std::move(auctions), std::move(views)};
}

CrossCheckReport cross_check(int count, std::uint64_t seed, int max_lots, int max_bidders,
                             const AuctionConfig& cfg) {
    CrossCheckReport report;
    std::mt19937_64 seeds(seed);
    for (int i = 0; i < count; ++i) {
        Instance inst = random_instance(seeds(), max_lots, max_bidders);
        auto [auctions, views] = to_batch(inst);
        BatchResult got = run_batch(auctions, views, cfg, inst.order);
        Outcome want = run_protocol(inst, cfg.epsilon, cfg.quiescence_rounds,
                                    cfg.normalizer == PriceNormalizer::Valuation);
        ++report.instances;

        bool same = got.assignments.size() == want.wins.size() && got.total_bids == want.bids;
        for (const Assignment& a : got.assignments) {
            auto it = want.wins.find(a.agent);
            same = same && it != want.wins.end() && it->second.first == a.auction &&
                   std::abs(it->second.second - a.price) < 1e-12;
        }
        if (!same) {
            ++report.mismatches;
            if (report.failures.size() < 5) {
                std::ostringstream os;
                os << "instance " << i << ": run_batch " << got.assignments.size() << " wins/"
                   << got.total_bids << " bids, reference " << want.wins.size() << " wins/" << want.bids << " bids";
                report.failures.push_back(os.str());
            }
        }

        if (inst.lots.size() != 1) continue;
        ++report.single_lot_cases;
        const double start = inst.lots[0].start_price;
        std::vector<double> snapped;
        for (const Bidder& b : inst.bidders) {
            if (b.valuation + kTol < start) continue;
            double steps = std::floor((b.valuation - start) / cfg.epsilon + kTol);
            snapped.push_back(start + steps * cfg.epsilon);
        }
        std::sort(snapped.begin(), snapped.end(), std::greater<>());
        bool ok = true;
        if (snapped.empty()) {
            ok = got.assignments.empty();
        } else if (got.assignments.size() != 1) {
            ok = false;
        } else {
            const Assignment& a = got.assignments.front();
            const Bidder& w = inst.bidders[a.agent];
            double w_snapped = start + std::floor((w.valuation - start) / cfg.epsilon + kTol) * cfg.epsilon;
            ok = std::abs(w_snapped - snapped[0]) < 1e-9;
            if (snapped.size() == 1) {
                ok = ok && std::abs(a.price - start) < 1e-9;
            } else {
                ok = ok && a.price >= snapped[1] - 1e-9 && a.price <= snapped[1] + cfg.epsilon + 1e-9;
            }
        }
        if (!ok) {
            ++report.second_price_violations;
            if (report.failures.size() < 5) report.failures.push_back("second-price violated on instance " + std::to_string(i));
        }
    }
    return report;
}

}  // namespace parksia::reference
