#pragma once

#include <cstdio>
#include <iostream>
#include <iterator>

#include "bevscan/core/parallel.hpp"
#include "bevscan/detect/arbitrage.hpp"
#include "bevscan/detect/clogging.hpp"
#include "bevscan/detect/liquidation.hpp"
#include "bevscan/detect/sandwich.hpp"
#include "bevscan/io/mempool.hpp"
#include "bevscan/security/fork.hpp"

namespace bev {

inline constexpr const char* kToolVersion = "0.1.0";

struct DetectorSet {
    bool sandwich = true;
    bool arbitrage = true;
    bool liquidation = true;
    bool clogging = true;

    /// Comma-separated subset, e.g. "sandwich,clogging". Throws PreconditionError on an
    /// unknown name.
    static DetectorSet parse(std::string_view csv) {
        DetectorSet d{false, false, false, false};
        std::size_t pos = 0;
        while (pos <= csv.size()) {
            const std::size_t comma = std::min(csv.find(',', pos), csv.size());
            const auto name = csv.substr(pos, comma - pos);
            if (name == "sandwich") d.sandwich = true;
            else if (name == "arbitrage") d.arbitrage = true;
            else if (name == "liquidation") d.liquidation = true;
            else if (name == "clogging") d.clogging = true;
            else throw PreconditionError("unknown detector '" + std::string(name) + "'");
            pos = comma + 1;
        }
        return d;
    }

    std::string str() const {
        std::string s;
        auto add = [&](bool on, const char* name) {
            if (!on) return;
            if (!s.empty()) s += ',';
            s += name;
        };
        add(sandwich, "sandwich");
        add(arbitrage, "arbitrage");
        add(liquidation, "liquidation");
        add(clogging, "clogging");
        return s;
    }
};

struct ScanResult {
    std::vector<SandwichInstance> sandwiches;
    std::vector<ArbitrageCycle> arbitrages;
    std::vector<LiquidationRecord> liquidations;
    std::vector<CloggingPeriod> clogging;
    std::vector<Amount> bev_per_block; // sum of positive gross extraction, native units
};

namespace report {

/// Pre-gas value of each instance in native units (0 when unpriced).
inline Amount gross(const SandwichInstance& s, const Block& b) {
    return value_in_native({s.profit.asset, s.profit.amount}, b.prices).value;
}
inline Amount gross(const ArbitrageCycle& c, const Block& b) { return value_in_native({c.loop_asset, c.revenue}, b.prices).value; }
inline Amount gross(const LiquidationRecord& r) { return r.profit_native ? *r.profit_native + r.gas_cost_native : Amount(0); }

struct BlockFindings {
    std::vector<SandwichInstance> sandwiches;
    std::vector<ArbitrageCycle> arbitrages;
    std::vector<LiquidationRecord> liquidations;
    Amount bev;
    bool verified = true;
};

} // namespace report

/// Runs the selected detectors block by block in parallel and merges in block order.
/// Every instance is re-checked by the detector's independent verify predicate; a
/// disagreement throws InvariantViolation.
inline ScanResult scan_trace(const Trace& trace, const DetectorSet& which, unsigned threads = default_thread_count()) {
    using report::BlockFindings;
    auto per_block = parallel_map<BlockFindings>(trace.blocks.size(), threads, [&](std::size_t i) {
        const Block& b = trace.blocks[i];
        BlockFindings f;
        auto add = [&](const Amount& g) {
            if (g > 0) f.bev += g;
        };
        if (which.sandwich) {
            f.sandwiches = detect_sandwiches(b);
            for (const auto& s : f.sandwiches) {
                f.verified = f.verified && verify_sandwich(b, s);
                add(report::gross(s, b));
            }
        }
        if (which.arbitrage) {
            f.arbitrages = detect_arbitrages(b);
            for (auto& c : f.arbitrages) {
                c.state_class = classify_arbitrage_state(c, b.pool_states);
                f.verified = f.verified && verify_arbitrage(b, c);
                add(report::gross(c, b));
            }
        }
        if (which.liquidation) {
            const Block* prev = trace.predecessor(i);
            f.liquidations = analyze_liquidations(b, prev);
            for (const auto& r : f.liquidations) {
                f.verified = f.verified && verify_liquidation_class(r, prev);
                add(report::gross(r));
            }
        }
        return f;
    });

    ScanResult out;
    out.bev_per_block.reserve(per_block.size());
    for (std::size_t i = 0; i < per_block.size(); ++i) {
        auto& f = per_block[i];
        if (!f.verified)
            throw InvariantViolation("detector output failed its independent re-check in block " +
                                     std::to_string(trace.blocks[i].number));
        std::move(f.sandwiches.begin(), f.sandwiches.end(), std::back_inserter(out.sandwiches));
        std::move(f.arbitrages.begin(), f.arbitrages.end(), std::back_inserter(out.arbitrages));
        std::move(f.liquidations.begin(), f.liquidations.end(), std::back_inserter(out.liquidations));
        out.bev_per_block.push_back(std::move(f.bev));
    }
    if (which.clogging) {
        out.clogging = detect_clogging_periods(trace.blocks);
        for (const auto& p : out.clogging)
            if (!verify_clogging(trace.blocks, p))
                throw InvariantViolation("clogging period of " + p.address.hex() + " failed its re-check");
    }
    return out;
}

struct ReportMetadata {
    std::string tool_version = kToolVersion;
    std::uint32_t trace_checksum = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> flags;
};

struct Totals {
    Amount sandwich;    // sum of instance profits (gross, native)
    Amount arbitrage;   // sum of cycle revenues (native)
    Amount liquidation; // sum of priced liquidation profits (net of gas)
    Amount all() const { return sandwich + arbitrage + liquidation; }
};

struct BevReport {
    ReportMetadata meta;
    DetectorSet detectors;
    ScanResult scan;
    Totals totals;
    std::size_t transactions = 0;
    std::size_t zero_gas_price_txs = 0;
    std::optional<PrivateTxReport> private_txs; // when a mempool log was supplied
    std::size_t private_sandwiches = 0;
    std::size_t private_arbitrages = 0;
    ScopeTable scope;
    PositionHistogram positions;
    std::map<BidBucket, std::size_t> bid_rounds;
    std::map<GasDeltaBucket, std::size_t> gas_deltas;
    std::map<PlatformId, StrategyCounts> liquidation_table;
    std::map<LiquidatorProfile, std::size_t> liquidator_profiles;
    std::vector<CloggingRow> clogging_table;
    MultiplierHistogram multipliers;
};

inline const std::vector<Rational>& default_multiplier_thresholds() {
    static const std::vector<Rational> k = {Rational(1), Rational(2), Rational(4), Rational(10), Rational(100)};
    return k;
}

inline BevReport build_report(const Trace& trace, ScanResult scan, const DetectorSet& which, ReportMetadata meta,
                              const MempoolLog* mempool = nullptr, std::ostream* warn = &std::cerr) {
    BevReport r;
    r.meta = std::move(meta);
    r.detectors = which;
    r.scan = std::move(scan);
    std::map<std::uint64_t, const Block*> by_number;
    for (const auto& b : trace.blocks) {
        by_number[b.number] = &b;
        r.transactions += b.transactions.size();
        for (const auto& tx : b.transactions)
            if (tx.gas_price == 0) ++r.zero_gas_price_txs;
    }
    if (mempool) r.private_txs = diff_private_transactions(trace, *mempool);

    for (const auto& s : r.scan.sandwiches) {
        r.totals.sandwich += report::gross(s, *by_number.at(s.block_number));
        if (s.privately_relayed) ++r.private_sandwiches;
        if (auto e = estimate_bid_rounds(s)) ++r.bid_rounds[e->bucket];
        if (auto g = backrun_gas_delta(s)) ++r.gas_deltas[*g];
    }
    for (const auto& c : r.scan.arbitrages) {
        r.totals.arbitrage += report::gross(c, *by_number.at(c.block_number));
        if (c.privately_relayed) ++r.private_arbitrages;
    }
    for (const auto& l : r.scan.liquidations)
        if (l.profit_native) r.totals.liquidation += *l.profit_native;

    r.scope = arbitrage_scope_table(r.scan.arbitrages);
    r.positions = sandwich_position_stats(r.scan.sandwiches);
    r.liquidation_table = liquidation_strategy_table(r.scan.liquidations);
    for (const auto& [addr, p] : liquidator_profile(r.scan.liquidations)) ++r.liquidator_profiles[p];
    r.clogging_table = clogging_table(r.scan.clogging);
    r.multipliers = bev_multiplier_histogram(trace, r.scan.bev_per_block, default_multiplier_thresholds(), warn);
    return r;
}

// ---- serialization ----------------------------------------------------------------

namespace codec {

inline json encode(const SandwichInstance& s) {
    json extra = json::array();
    for (auto v : s.additional_victims) extra.push_back(std::to_string(v));
    return {{"type", "sandwich"},
            {"block", std::to_string(s.block_number)},
            {"front", std::to_string(s.front)},
            {"victim", std::to_string(s.victim)},
            {"back", std::to_string(s.back)},
            {"additional_victims", extra},
            {"market_id", s.market_id},
            {"asset_x", s.asset_x},
            {"asset_y", s.asset_y},
            {"front_in", s.front_in.str()},
            {"front_out", s.front_out.str()},
            {"back_in", s.back_in.str()},
            {"back_out", s.back_out.str()},
            {"perfect", s.perfect},
            {"profit", {{"asset", s.profit.asset}, {"amount", s.profit.amount.str()}}},
            {"gas_cost", s.gas_cost_native.str()},
            {"privately_relayed", s.privately_relayed},
            {"intermediate_tx_count", std::to_string(s.intermediate_tx_count)},
            {"strategy", std::string(to_string(s.strategy()))}};
}

inline json encode(const ArbitrageCycle& c) {
    json legs = json::array();
    for (const auto& l : c.swaps)
        legs.push_back({{"platform", l.platform},
                        {"market_id", l.market_id},
                        {"asset_in", l.action.asset_in},
                        {"amount_in", l.action.amount_in.str()},
                        {"asset_out", l.action.asset_out},
                        {"amount_out", l.action.amount_out.str()}});
    json j = {{"type", "arbitrage"},
              {"block", std::to_string(c.block_number)},
              {"tx_index", std::to_string(c.tx_index)},
              {"tx_hash", c.tx_hash.hex()},
              {"loop_asset", c.loop_asset},
              {"revenue", c.revenue.str()},
              {"n_markets", std::to_string(c.n_markets)},
              {"n_platforms", std::to_string(c.n_platforms)},
              {"gas_cost", c.gas_cost_native.str()},
              {"privately_relayed", c.privately_relayed},
              {"state", std::string(to_string(c.state_class))},
              {"swaps", legs}};
    j["strategy"] = c.strategy() ? json(std::string(to_string(*c.strategy()))) : json(nullptr);
    return j;
}

inline json encode(const LiquidationRecord& r) {
    json j = {{"type", "liquidation"},
              {"block", std::to_string(r.block_number)},
              {"tx_index", std::to_string(r.tx_index)},
              {"tx_hash", r.tx_hash.hex()},
              {"platform", r.platform},
              {"borrower", r.borrower.hex()},
              {"liquidator", r.liquidator.hex()},
              {"debt_repaid", encode(r.debt_repaid)},
              {"collateral_received", encode(r.collateral_received)},
              {"classification", std::string(to_string(r.strategy))},
              {"internal_backrun", r.internal_backrun},
              {"privately_relayed", r.privately_relayed},
              {"gas_price", r.gas_price.str()},
              {"gas_cost", r.gas_cost_native.str()}};
    j["profit"] = r.profit_native ? json(r.profit_native->str()) : json(nullptr);
    return j;
}

inline json encode(const CloggingPeriod& p) {
    return {{"type", "clogging"},
            {"address", p.address.hex()},
            {"start_block", std::to_string(p.start_block)},
            {"end_block", std::to_string(p.end_block)},
            {"length_blocks", std::to_string(p.length_blocks)},
            {"avg_gas_share", bev::to_string(p.avg_gas_share)},
            {"total_gas_used", std::to_string(p.total_gas_used)},
            {"total_cost", p.total_cost_native.str()}};
}

inline json encode_metadata(const ReportMetadata& m) {
    json flags = json::object();
    for (const auto& [k, v] : m.flags) flags[k] = v;
    char crc[9];
    std::snprintf(crc, sizeof crc, "%08x", m.trace_checksum);
    return {{"metadata",
             {{"tool_version", m.tool_version}, {"trace_checksum", std::string(crc)}, {"seed", std::to_string(m.seed)},
              {"flags", flags}}}};
}

template <class Map>
json counts(const Map& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[std::string(to_string(k))] = std::to_string(v);
    return j;
}

inline json encode_aggregates(const BevReport& r) {
    json scope = json::array();
    for (std::size_t row = 0; row < 5; ++row) {
        json cells = json::array();
        for (std::size_t col = 0; col < 4; ++col)
            cells.push_back(ScopeTable::impossible(row, col) ? json(nullptr) : json(std::to_string(r.scope.counts[row][col])));
        scope.push_back(cells);
    }
    auto hist = [](const std::map<std::uint32_t, std::size_t>& h) {
        json j = json::object();
        for (const auto& [k, v] : h) j[std::to_string(k)] = std::to_string(v);
        return j;
    };
    json liq = json::object();
    for (const auto& [platform, c] : r.liquidation_table)
        liq[platform] = {{"front_run", std::to_string(c.front)},
                         {"back_run", std::to_string(c.back)},
                         {"unclassifiable", std::to_string(c.unclassifiable)},
                         {"total", std::to_string(c.total())}};
    json clog = json::array();
    for (const auto& row : r.clogging_table)
        clog.push_back({{"min_blocks", std::to_string(row.min_blocks)},
                        {"max_blocks", std::to_string(row.max_blocks)},
                        {"count", std::to_string(row.count)},
                        {"avg_gas_used", bev::to_string(row.avg_gas_used)},
                        {"avg_cost", bev::to_string(row.avg_cost_native)}});
    json mult = json::object();
    for (const auto& [k, n] : r.multipliers.at_least) mult[">=" + bev::to_string(k)] = std::to_string(n);
    Rational top(0);
    std::uint64_t top_block = 0;
    for (const auto& m : r.multipliers.blocks)
        if (m.v > top) {
            top = m.v;
            top_block = m.block_number;
        }
    json priv = {{"zero_gas_price", std::to_string(r.zero_gas_price_txs)},
                 {"sandwiches", std::to_string(r.private_sandwiches)},
                 {"arbitrages", std::to_string(r.private_arbitrages)}};
    if (r.private_txs) {
        priv["not_broadcast"] = std::to_string(r.private_txs->not_broadcast.size());
        priv["union"] = std::to_string(r.private_txs->all.size());
        priv["contract_calls"] = std::to_string(r.private_txs->contract_calls);
    }
    return {{"type", "aggregate"},
            {"detectors", r.detectors.str()},
            {"transactions", std::to_string(r.transactions)},
            {"counts",
             {{"sandwich", std::to_string(r.scan.sandwiches.size())},
              {"arbitrage", std::to_string(r.scan.arbitrages.size())},
              {"liquidation", std::to_string(r.scan.liquidations.size())},
              {"clogging", std::to_string(r.scan.clogging.size())}}},
            {"totals",
             {{"sandwich", r.totals.sandwich.str()},
              {"arbitrage", r.totals.arbitrage.str()},
              {"liquidation", r.totals.liquidation.str()},
              {"all", r.totals.all().str()}}},
            {"private", priv},
            {"arbitrage_scope", scope},
            {"sandwich_positions", {{"public", hist(r.positions.public_counts)}, {"private", hist(r.positions.private_counts)}}},
            {"bid_rounds", counts(r.bid_rounds)},
            {"backrun_gas_delta_gwei", counts(r.gas_deltas)},
            {"liquidation_strategies", liq},
            {"liquidator_profiles", counts(r.liquidator_profiles)},
            {"clogging_table", clog},
            {"bev_multipliers", {{"at_least", mult},
                                 {"max", bev::to_string(top)},
                                 {"max_block", std::to_string(top_block)},
                                 {"skipped_blocks", std::to_string(r.multipliers.skipped.size())}}}};
}

} // namespace codec

inline void write_report(std::ostream& out, const BevReport& r) {
    out << codec::encode_metadata(r.meta).dump() << '\n';
    for (const auto& s : r.scan.sandwiches) out << codec::encode(s).dump() << '\n';
    for (const auto& c : r.scan.arbitrages) out << codec::encode(c).dump() << '\n';
    for (const auto& l : r.scan.liquidations) out << codec::encode(l).dump() << '\n';
    for (const auto& p : r.scan.clogging) out << codec::encode(p).dump() << '\n';
    out << codec::encode_aggregates(r).dump() << '\n';
}

} // namespace bev
