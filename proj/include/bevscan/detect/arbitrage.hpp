#pragma once

#include <array>
#include <set>

#include "bevscan/chain/amm.hpp"
#include "bevscan/chain/valuation.hpp"

namespace bev {

enum class ArbitrageState { BlockState, NetworkState, Unknown };

inline std::string_view to_string(ArbitrageState s) {
    switch (s) {
    case ArbitrageState::BlockState: return "block_state";
    case ArbitrageState::NetworkState: return "network_state";
    case ArbitrageState::Unknown: return "unknown";
    }
    return "?";
}

struct CycleLeg {
    PlatformId platform;
    MarketId market_id;
    SwapAction action;

    friend bool operator==(const CycleLeg&, const CycleLeg&) = default;
};

struct ArbitrageCycle {
    std::uint64_t block_number = 0;
    std::uint32_t tx_index = 0;
    TxHash tx_hash;
    std::vector<CycleLeg> swaps;
    AssetId loop_asset;
    Amount revenue; // out(s_n) - in(s_1), loop asset
    std::size_t n_markets = 0;
    std::size_t n_platforms = 0;
    Amount gas_cost_native;
    bool privately_relayed = false;
    ArbitrageState state_class = ArbitrageState::Unknown;

    /// Block-state arbitrage front-runs every competitor at the top of the block;
    /// network-state arbitrage back-runs the trade that opened the opportunity.
    std::optional<OrderingStrategy> strategy() const {
        switch (state_class) {
        case ArbitrageState::BlockState: return OrderingStrategy::DestructiveFrontRun;
        case ArbitrageState::NetworkState: return OrderingStrategy::BackRun;
        default: return std::nullopt;
        }
    }

    friend bool operator==(const ArbitrageCycle&, const ArbitrageCycle&) = default;
};

namespace arbitrage {

/// Asset chaining and non-increasing carried amount between consecutive legs.
inline bool links(const SwapAction& prev, const SwapAction& next) {
    return next.asset_in == prev.asset_out && next.amount_in <= prev.amount_out;
}

} // namespace arbitrage

/// Longest contiguous run of the transaction's swap events that chains, has at least
/// two legs and closes back on its starting asset. Ties go to the
/// earliest run. Returns nullopt when no closing run exists.
inline std::optional<std::pair<std::size_t, std::size_t>> longest_closing_chain(std::span<const SwapEvent* const> swaps) {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    for (std::size_t i = 0; i < swaps.size(); ++i) {
        for (std::size_t j = i + 1; j < swaps.size(); ++j) {
            if (!arbitrage::links(swaps[j - 1]->action, swaps[j]->action)) break;
            if (swaps[j]->action.asset_out != swaps[i]->action.asset_in) continue;
            if (!best || j - i > best->second - best->first) best = {i, j};
        }
    }
    return best;
}

/// Cycle (profitable or not) executed by one transaction.
inline std::optional<ArbitrageCycle> extract_cycle(const Transaction& tx, std::uint64_t block_number) {
    const auto swaps = swaps_of(tx);
    if (swaps.size() < 2) return std::nullopt;
    auto range = longest_closing_chain(swaps);
    if (!range) return std::nullopt;
    ArbitrageCycle c;
    c.block_number = block_number;
    c.tx_index = tx.index;
    c.tx_hash = tx.hash;
    std::set<MarketId> markets;
    std::set<PlatformId> platforms;
    for (std::size_t k = range->first; k <= range->second; ++k) {
        c.swaps.push_back({swaps[k]->platform, swaps[k]->market_id, swaps[k]->action});
        markets.insert(swaps[k]->market_id);
        platforms.insert(swaps[k]->platform);
    }
    c.loop_asset = c.swaps.front().action.asset_in;
    c.revenue = c.swaps.back().action.amount_out - c.swaps.front().action.amount_in;
    c.n_markets = markets.size();
    c.n_platforms = platforms.size();
    c.gas_cost_native = gas_cost(tx);
    c.privately_relayed = tx.gas_price == 0;
    return c;
}

/// Profitable single-transaction cycles of a block, in transaction order. The state
/// class is left Unknown; see classify_arbitrage_state.
inline std::vector<ArbitrageCycle> detect_arbitrages(const Block& block) {
    std::vector<ArbitrageCycle> out;
    for (const auto& tx : block.transactions) {
        auto c = extract_cycle(tx, block.number);
        if (c && c->revenue > 0) out.push_back(std::move(*c));
    }
    return out;
}

/// Simulated revenue of the cycle's first input replayed through `pools`; nullopt if a
/// market has no snapshot or the replay cannot execute.
inline std::optional<Amount> replay_cycle_revenue(const ArbitrageCycle& cycle, std::span<const PoolState> pools) {
    std::map<MarketId, PoolState> state;
    for (const auto& leg : cycle.swaps) {
        if (state.count(leg.market_id)) continue;
        auto it = std::find_if(pools.begin(), pools.end(), [&](const PoolState& p) { return p.market_id == leg.market_id; });
        if (it == pools.end()) return std::nullopt;
        state.emplace(leg.market_id, *it);
    }
    AssetAmount carry{cycle.loop_asset, cycle.swaps.front().action.amount_in};
    try {
        for (const auto& leg : cycle.swaps) {
            if (carry.asset != leg.action.asset_in) return std::nullopt;
            if (carry.amount <= 0) return -cycle.swaps.front().action.amount_in;
            auto r = amm_swap_out(state.at(leg.market_id), carry);
            state.at(leg.market_id) = std::move(r.after);
            carry = std::move(r.output);
        }
    } catch (const Error&) {
        return std::nullopt;
    }
    return carry.amount - cycle.swaps.front().action.amount_in;
}

/// Re-executes the cycle at the top of its block, i.e. on the state left by the
/// previous block (the block's start-of-block pool snapshot). Still profitable there
/// means the opportunity pre-dated the block.
inline ArbitrageState classify_arbitrage_state(const ArbitrageCycle& cycle, std::span<const PoolState> top_of_block) {
    auto revenue = replay_cycle_revenue(cycle, top_of_block);
    if (!revenue) return ArbitrageState::Unknown;
    return *revenue > 0 ? ArbitrageState::BlockState : ArbitrageState::NetworkState;
}

/// Independent re-check of a reported cycle.
inline bool verify_arbitrage(const Block& block, const ArbitrageCycle& c) {
    if (c.tx_index >= block.transactions.size()) return false;
    const auto& tx = block.transactions[c.tx_index];
    if (!tx.succeeded() || tx.hash != c.tx_hash) return false;
    if (c.swaps.size() < 2) return false;
    // every leg is a swap event of this very transaction, in order
    std::size_t cursor = 0;
    for (const auto& leg : c.swaps) {
        bool found = false;
        for (; cursor < tx.events.size(); ++cursor) {
            auto* s = std::get_if<SwapEvent>(&tx.events[cursor]);
            if (s && s->market_id == leg.market_id && s->platform == leg.platform && s->action == leg.action) {
                found = true;
                ++cursor;
                break;
            }
        }
        if (!found) return false;
    }
    for (std::size_t i = 1; i < c.swaps.size(); ++i) {
        if (c.swaps[i].action.asset_in != c.swaps[i - 1].action.asset_out) return false;
        if (c.swaps[i].action.amount_in > c.swaps[i - 1].action.amount_out) return false;
    }
    if (c.swaps.front().action.asset_in != c.swaps.back().action.asset_out) return false;
    std::set<MarketId> markets;
    std::set<PlatformId> platforms;
    for (const auto& leg : c.swaps) {
        markets.insert(leg.market_id);
        platforms.insert(leg.platform);
    }
    if (markets.size() != c.n_markets || platforms.size() != c.n_platforms) return false;
    return c.revenue == c.swaps.back().action.amount_out - c.swaps.front().action.amount_in && c.revenue > 0;
}

/// Counts by (markets, platforms): rows {2,3,4,5,>=6}, columns {1,2,3,>=4}.
struct ScopeTable {
    std::array<std::array<std::size_t, 4>, 5> counts{};

    static std::size_t row_of(std::size_t markets) { return std::min<std::size_t>(std::max<std::size_t>(markets, 2), 6) - 2; }
    static std::size_t col_of(std::size_t platforms) { return std::min<std::size_t>(std::max<std::size_t>(platforms, 1), 4) - 1; }

    std::size_t at(std::size_t markets, std::size_t platforms) const { return counts[row_of(markets)][col_of(platforms)]; }

    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& row : counts)
            for (auto c : row) t += c;
        return t;
    }

    /// Cells whose smallest platform count exceeds their largest market count.
    static bool impossible(std::size_t row, std::size_t col) { return row < 4 && col + 1 > row + 2; }
};

inline ScopeTable arbitrage_scope_table(std::span<const ArbitrageCycle> cycles) {
    ScopeTable t;
    for (const auto& c : cycles) {
        if (c.n_platforms > c.n_markets)
            throw InvariantViolation("cycle in tx " + c.tx_hash.hex() + " spans more platforms than markets");
        ++t.counts[ScopeTable::row_of(c.n_markets)][ScopeTable::col_of(c.n_platforms)];
    }
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t col = 0; col < 4; ++col)
            if (ScopeTable::impossible(r, col) && t.counts[r][col] != 0)
                throw InvariantViolation("impossible arbitrage scope cell populated");
    return t;
}

} // namespace bev
