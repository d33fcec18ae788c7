#pragma once

#include <map>
#include <set>

#include "bevscan/chain/valuation.hpp"

namespace bev {

struct SignedAmount {
    AssetId asset;
    Amount amount; // may be negative

    friend bool operator==(const SignedAmount&, const SignedAmount&) = default;
};

struct SandwichInstance {
    std::uint64_t block_number = 0;
    std::uint32_t front = 0;  // T_A1 index
    std::uint32_t victim = 0; // T_V index
    std::uint32_t back = 0;   // T_A2 index
    std::vector<std::uint32_t> additional_victims;
    MarketId market_id;
    AssetId asset_x; // sold by A1 and the victim
    AssetId asset_y; // bought by A1, sold back by A2
    Amount front_in;  // in(A1), asset X
    Amount front_out; // out(A1), asset Y
    Amount back_in;   // in(A2), asset Y
    Amount back_out;  // out(A2), asset X
    bool perfect = false;
    SignedAmount profit;
    Amount gas_cost_native;
    bool privately_relayed = false;
    std::uint32_t intermediate_tx_count = 0;
    Amount front_gas_price;
    Amount victim_gas_price;
    Amount back_gas_price;

    OrderingStrategy strategy() const { return OrderingStrategy::ToleratingFrontRun; }

    friend bool operator==(const SandwichInstance&, const SandwichInstance&) = default;
};

namespace sandwich {

/// One swap leg inside a block.
struct Trade {
    const Transaction* tx;
    const SwapEvent* swap;
};

/// in(A2) within [90%, 110%] of out(A1), both ends inclusive, exact.
inline bool within_h5(const Amount& back_in, const Amount& front_out) {
    return back_in * 10 >= front_out * 9 && back_in * 10 <= front_out * 11;
}

/// Same sender, or both sent to the same contract.
inline bool same_actor(const Transaction& a1, const Transaction& a2) {
    if (a1.sender == a2.sender) return true;
    return a1.to && a2.to && *a1.to == *a2.to;
}

inline bool is_victim_of(const Trade& v, const Trade& front) {
    const auto& f = front.swap->action;
    const auto& a = v.swap->action;
    return v.swap->market_id == front.swap->market_id && a.asset_in == f.asset_in && a.asset_out == f.asset_out &&
           !same_actor(*v.tx, *front.tx);
}

inline bool is_back_of(const Trade& b, const Trade& front) {
    const auto& f = front.swap->action;
    const auto& a = b.swap->action;
    return b.swap->market_id == front.swap->market_id && a.asset_in == f.asset_out && a.asset_out == f.asset_in &&
           same_actor(*front.tx, *b.tx) && within_h5(a.amount_in, f.amount_out);
}

/// Single-swap transactions are candidate legs; multi-swap transactions are routes or
/// arbitrage and never act as sandwich legs.
inline std::vector<Trade> trades_of(const Block& block) {
    std::vector<Trade> out;
    for (const auto& tx : block.transactions) {
        auto swaps = swaps_of(tx);
        if (swaps.size() == 1) out.push_back({&tx, swaps.front()});
    }
    return out;
}

} // namespace sandwich

/// Sandwich detection over one block.
///
/// Fronts are taken in block order. Each front pairs with the nearest later back-run on
/// the same market and actor within the volume tolerance that is not paired yet and has
/// a victim in between. The first victim is the instance's victim; later ones go to
/// additional_victims.
inline std::vector<SandwichInstance> detect_sandwiches(const Block& block) {
    using sandwich::Trade;
    const auto trades = sandwich::trades_of(block);
    std::vector<SandwichInstance> out;
    std::set<std::uint32_t> used; // transactions already acting as front or back

    for (std::size_t f = 0; f < trades.size(); ++f) {
        const Trade& front = trades[f];
        if (used.count(front.tx->index)) continue;
        std::vector<std::uint32_t> victims;
        for (std::size_t k = f + 1; k < trades.size(); ++k) {
            const Trade& cand = trades[k];
            if (used.count(cand.tx->index)) continue;
            if (!victims.empty() && sandwich::is_back_of(cand, front)) {
                const auto& fa = front.swap->action;
                const auto& ba = cand.swap->action;
                SandwichInstance s;
                s.block_number = block.number;
                s.front = front.tx->index;
                s.victim = victims.front();
                s.additional_victims.assign(victims.begin() + 1, victims.end());
                s.back = cand.tx->index;
                s.market_id = front.swap->market_id;
                s.asset_x = fa.asset_in;
                s.asset_y = fa.asset_out;
                s.front_in = fa.amount_in;
                s.front_out = fa.amount_out;
                s.back_in = ba.amount_in;
                s.back_out = ba.amount_out;
                s.perfect = ba.amount_in == fa.amount_out;
                s.profit = {fa.asset_in, ba.amount_out - fa.amount_in};
                s.gas_cost_native = gas_cost(*front.tx) + gas_cost(*cand.tx);
                s.privately_relayed = front.tx->gas_price == 0 && cand.tx->gas_price == 0;
                s.intermediate_tx_count =
                    s.back - s.front - 1 - static_cast<std::uint32_t>(victims.size());
                s.front_gas_price = front.tx->gas_price;
                s.victim_gas_price = block.transactions[s.victim].gas_price;
                s.back_gas_price = cand.tx->gas_price;
                used.insert(s.front);
                used.insert(s.back);
                out.push_back(std::move(s));
                break;
            }
            if (sandwich::is_victim_of(cand, front)) victims.push_back(cand.tx->index);
        }
    }
    return out;
}

/// Independent re-check of a reported instance, working from raw block data.
inline bool verify_sandwich(const Block& block, const SandwichInstance& s) {
    auto single_swap = [&](std::uint32_t idx) -> const SwapEvent* {
        if (idx >= block.transactions.size()) return nullptr;
        const auto& tx = block.transactions[idx];
        if (!tx.succeeded()) return nullptr;
        const SwapEvent* found = nullptr;
        for (const auto& ev : tx.events) {
            if (auto* sw = std::get_if<SwapEvent>(&ev)) {
                if (found) return nullptr;
                found = sw;
            }
        }
        return found;
    };
    if (s.block_number != block.number) return false;
    if (!(s.front < s.victim && s.victim < s.back)) return false; // ordering
    const auto* a1 = single_swap(s.front);
    const auto* v = single_swap(s.victim);
    const auto* a2 = single_swap(s.back);
    if (!a1 || !v || !a2) return false;
    const auto& t1 = block.transactions[s.front];
    const auto& tv = block.transactions[s.victim];
    const auto& t2 = block.transactions[s.back];
    // one market, victim trades with the front-run
    if (a1->market_id != v->market_id || a1->market_id != a2->market_id) return false;
    const AssetId& x = a1->action.asset_in;
    const AssetId& y = a1->action.asset_out;
    if (v->action.asset_in != x || v->action.asset_out != y) return false;
    if (a2->action.asset_in != y || a2->action.asset_out != x) return false;
    // same actor at both ends, someone else in the middle
    const bool same_sender = t1.sender == t2.sender;
    const bool same_contract = t1.to.has_value() && t2.to.has_value() && *t1.to == *t2.to;
    if (!same_sender && !same_contract) return false;
    if (tv.sender == t1.sender || (tv.to && t1.to && *tv.to == *t1.to)) return false;
    // volume tolerance, as a rational interval
    if (a1->action.amount_out == 0) return false;
    const Rational ratio(a2->action.amount_in, a1->action.amount_out);
    if (ratio < Rational(9, 10) || ratio > Rational(11, 10)) return false;
    if (s.perfect != (a2->action.amount_in == a1->action.amount_out)) return false;
    return s.profit.amount == a2->action.amount_out - a1->action.amount_in;
}

// ---- gas-bidding diagnostics --------------------------------------------------------

enum class BidBucket { AtMostOne, UpTo1_1, UpTo1_1Pow2, UpTo1_1Pow3, UpTo1_1Pow4, Above1_1Pow4 };

struct BidRoundEstimate {
    Rational ratio;
    BidBucket bucket = BidBucket::AtMostOne;
    /// 1..4, or 5 meaning "five or more".
    int estimated_bids = 1;
};

inline std::string_view to_string(BidBucket b) {
    switch (b) {
    case BidBucket::AtMostOne: return "r<=1";
    case BidBucket::UpTo1_1: return "1<r<=1.1";
    case BidBucket::UpTo1_1Pow2: return "1.1<r<=1.1^2";
    case BidBucket::UpTo1_1Pow3: return "1.1^2<r<=1.1^3";
    case BidBucket::UpTo1_1Pow4: return "1.1^3<r<=1.1^4";
    case BidBucket::Above1_1Pow4: return "1.1^4<r";
    }
    return "?";
}

/// Counter-bidding rounds implied by r = gas_price(A1) / gas_price(V), assuming each
/// replacement bid raises the price by 10%. Upper bounds are inclusive.
inline std::optional<BidRoundEstimate> estimate_bid_rounds(const Amount& front_gas_price, const Amount& victim_gas_price) {
    if (victim_gas_price <= 0) return std::nullopt;
    BidRoundEstimate e;
    e.ratio = Rational(front_gas_price, victim_gas_price);
    if (e.ratio <= 1) {
        e.bucket = BidBucket::AtMostOne;
        e.estimated_bids = 1;
        return e;
    }
    Rational bound(11, 10);
    static constexpr BidBucket kBuckets[] = {BidBucket::UpTo1_1, BidBucket::UpTo1_1Pow2, BidBucket::UpTo1_1Pow3,
                                            BidBucket::UpTo1_1Pow4};
    static constexpr int kBids[] = {1, 2, 3, 4};
    for (int k = 0; k < 4; ++k) {
        if (e.ratio <= bound) {
            e.bucket = kBuckets[k];
            e.estimated_bids = kBids[k];
            return e;
        }
        bound *= Rational(11, 10);
    }
    e.bucket = BidBucket::Above1_1Pow4;
    e.estimated_bids = 5;
    return e;
}

inline std::optional<BidRoundEstimate> estimate_bid_rounds(const SandwichInstance& s) {
    return estimate_bid_rounds(s.front_gas_price, s.victim_gas_price);
}

enum class GasDeltaBucket { Negative, ZeroToOne, OneToTen, TenToHundred, HundredPlus };

inline std::string_view to_string(GasDeltaBucket b) {
    switch (b) {
    case GasDeltaBucket::Negative: return "d<0";
    case GasDeltaBucket::ZeroToOne: return "0<=d<1";
    case GasDeltaBucket::OneToTen: return "1<=d<10";
    case GasDeltaBucket::TenToHundred: return "10<=d<100";
    case GasDeltaBucket::HundredPlus: return "100<=d";
    }
    return "?";
}

/// Bucket of d = gas_price(V) - gas_price(A2), in GWei. nullopt when A2 paid nothing.
inline std::optional<GasDeltaBucket> backrun_gas_delta(const Amount& victim_gas_price, const Amount& back_gas_price) {
    if (back_gas_price <= 0) return std::nullopt;
    const Amount d = victim_gas_price - back_gas_price;
    const Amount gwei(kGwei);
    if (d < 0) return GasDeltaBucket::Negative;
    if (d < gwei) return GasDeltaBucket::ZeroToOne;
    if (d < gwei * 10) return GasDeltaBucket::OneToTen;
    if (d < gwei * 100) return GasDeltaBucket::TenToHundred;
    return GasDeltaBucket::HundredPlus;
}

inline std::optional<GasDeltaBucket> backrun_gas_delta(const SandwichInstance& s) {
    return backrun_gas_delta(s.victim_gas_price, s.back_gas_price);
}

struct PositionHistogram {
    std::map<std::uint32_t, std::size_t> public_counts;  // intermediate count -> instances
    std::map<std::uint32_t, std::size_t> private_counts;

    bool empty() const { return public_counts.empty() && private_counts.empty(); }
};

inline PositionHistogram sandwich_position_stats(std::span<const SandwichInstance> instances) {
    PositionHistogram h;
    for (const auto& s : instances) {
        auto& bucket = s.privately_relayed ? h.private_counts : h.public_counts;
        ++bucket[s.intermediate_tx_count];
    }
    return h;
}

} // namespace bev
