#pragma once

#include <set>
#include <tuple>

#include "bevscan/bevscan.hpp"

namespace testing_util {

struct Score {
    std::size_t truth = 0;
    std::size_t found = 0;
    std::size_t matched = 0;
    double precision() const { return found ? double(matched) / double(found) : 1.0; }
    double recall() const { return truth ? double(matched) / double(truth) : 1.0; }
    bool perfect() const { return matched == truth && matched == found; }
};

template <class Key>
Score score(const std::set<Key>& truth, const std::set<Key>& found, std::size_t found_count) {
    Score s{truth.size(), found_count, 0};
    for (const auto& k : found)
        if (truth.count(k)) ++s.matched;
    return s;
}

struct Scores {
    Score sandwich, arbitrage, liquidation, clogging;
};

inline Scores score_scan(const bev::ScanResult& scan, const bev::GroundTruth& truth) {
    using namespace bev;
    Scores out;
    {
        using K = std::tuple<std::uint64_t, std::uint32_t, std::uint32_t, std::uint32_t, std::vector<std::uint32_t>, std::string>;
        std::set<K> t, f;
        for (const auto& s : truth.sandwiches)
            t.insert({s.block_number, s.front, s.victim, s.back, s.additional_victims, s.profit.amount.str()});
        for (const auto& s : scan.sandwiches)
            f.insert({s.block_number, s.front, s.victim, s.back, s.additional_victims, s.profit.amount.str()});
        out.sandwich = score(t, f, scan.sandwiches.size());
    }
    {
        using K = std::tuple<std::uint64_t, std::uint32_t, std::size_t, std::size_t, std::string, ArbitrageState>;
        std::set<K> t, f;
        for (const auto& a : truth.arbitrages) t.insert({a.block_number, a.tx_index, a.n_markets, a.n_platforms, a.revenue.str(), a.state});
        for (const auto& a : scan.arbitrages)
            f.insert({a.block_number, a.tx_index, a.n_markets, a.n_platforms, a.revenue.str(), a.state_class});
        out.arbitrage = score(t, f, scan.arbitrages.size());
    }
    {
        using K = std::tuple<std::uint64_t, std::uint32_t, Address, LiquidationStrategy, bool>;
        std::set<K> t, f;
        for (const auto& l : truth.liquidations) t.insert({l.block_number, l.tx_index, l.borrower, l.strategy, l.internal_backrun});
        for (const auto& l : scan.liquidations) f.insert({l.block_number, l.tx_index, l.borrower, l.strategy, l.internal_backrun});
        out.liquidation = score(t, f, scan.liquidations.size());
    }
    {
        using K = std::tuple<Address, std::uint64_t, std::uint64_t>;
        std::set<K> t, f;
        for (const auto& c : truth.clogging) t.insert({c.address, c.start_block, c.end_block});
        for (const auto& c : scan.clogging) f.insert({c.address, c.start_block, c.end_block});
        out.clogging = score(t, f, scan.clogging.size());
    }
    return out;
}

inline bev::FixtureSpec acceptance_spec(std::uint64_t seed) {
    bev::FixtureSpec s;
    s.seed = seed;
    s.n_blocks = 800;
    s.planted.sandwiches = 120;
    s.planted.arbitrages_block_state = 60;
    s.planted.arbitrages_network_state = 60;
    s.planted.liquidations_front = 60;
    s.planted.liquidations_back = 60;
    s.planted.liquidations_unclassifiable = 10;
    s.planted.clogging_periods = 55;
    s.planted.replayables = 40;
    s.planted.private_txs = 30;
    s.noise = 4;
    s.decoys = 15;
    return s;
}

} // namespace testing_util
