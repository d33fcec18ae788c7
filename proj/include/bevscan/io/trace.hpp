#pragma once

#include <boost/crc.hpp>

#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>

#include "bevscan/io/json_codec.hpp"

namespace bev {

struct TraceMetadata {
    std::string source = "unknown";
    std::string chain_id = "1";
    std::optional<std::uint64_t> generator_seed;

    friend bool operator==(const TraceMetadata&, const TraceMetadata&) = default;
};

struct Trace {
    TraceMetadata metadata;
    std::vector<Block> blocks;

    /// Block immediately preceding `blocks[i]` by number, if present in the trace.
    const Block* predecessor(std::size_t i) const {
        if (i == 0) return nullptr;
        const Block& prev = blocks[i - 1];
        return prev.number + 1 == blocks[i].number ? &prev : nullptr;
    }

    friend bool operator==(const Trace&, const Trace&) = default;
};

namespace detail {

inline void validate_block(const Block& b) {
    const auto n = b.number;
    for (std::size_t i = 0; i < b.transactions.size(); ++i) {
        if (b.transactions[i].index != i)
            throw ValidationError(n, "transactions[" + std::to_string(i) + "].index",
                                  "indices must be unique, sorted and contiguous from 0 (found " +
                                      std::to_string(b.transactions[i].index) + ")");
    }
    std::uint64_t gas = 0;
    for (const auto& tx : b.transactions) {
        if (tx.gas_used > b.gas_limit || gas > b.gas_limit - tx.gas_used)
            throw ValidationError(n, "gas_used", "sum of gas_used exceeds gas_limit " + std::to_string(b.gas_limit));
        gas += tx.gas_used;
        for (const auto& ev : tx.events) {
            if (auto* s = std::get_if<SwapEvent>(&ev)) {
                const auto& a = s->action;
                if (a.asset_in == a.asset_out)
                    throw ValidationError(n, "events.swap", "asset_in equals asset_out in tx " + tx.hash.hex());
                if (a.amount_in <= 0) throw ValidationError(n, "events.swap.amount_in", "must be positive");
            } else if (auto* o = std::get_if<OracleUpdateEvent>(&ev)) {
                if (o->price_native <= 0) throw ValidationError(n, "events.oracle_update.price", "must be positive");
            }
        }
    }
    for (const auto& p : b.pool_states) {
        if (p.fee_bps >= kBpsDenominator) throw ValidationError(n, "pool_states.fee_bps", "must be below 10000");
        if (p.asset_x == p.asset_y) throw ValidationError(n, "pool_states", "market " + p.market_id + " pairs an asset with itself");
    }
    for (const auto& [asset, price] : b.prices)
        if (price <= 0) throw ValidationError(n, "prices." + asset, "must be positive");
    for (const auto& pos : b.positions) {
        if (pos.liquidation_threshold <= 0 || pos.liquidation_threshold > 1)
            throw ValidationError(n, "positions.liquidation_threshold", "must lie in (0, 1]");
    }
}

} // namespace detail

/// Checks every trace-level and chain-model invariant; throws ValidationError.
inline void validate_trace(const Trace& trace) {
    std::set<MarketId> known_markets;
    for (std::size_t i = 0; i < trace.blocks.size(); ++i) {
        const Block& b = trace.blocks[i];
        if (i > 0 && b.number <= trace.blocks[i - 1].number)
            throw ValidationError(b.number, "number", "block numbers must be strictly increasing");
        detail::validate_block(b);
        for (const auto& p : b.pool_states) known_markets.insert(p.market_id);
        for (const auto& tx : b.transactions)
            for (const auto& ev : tx.events)
                if (auto* s = std::get_if<SwapEvent>(&ev); s && !known_markets.count(s->market_id))
                    throw ValidationError(b.number, "events.swap.market_id",
                                          "market " + s->market_id + " has no pool snapshot at or before this block");
    }
}

/// Parses a line-delimited trace: an optional {"metadata": {...}} header line, then
/// one block object per line. Blank lines are ignored.
inline Trace parse_trace(std::istream& in) {
    Trace trace;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = codec::json::parse(line);
            if (!j.is_object()) throw PreconditionError("expected a JSON object");
            if (auto it = j.find("metadata"); it != j.end()) {
                const auto& m = *it;
                trace.metadata.source = codec::get_string(m, "source");
                trace.metadata.chain_id = codec::get_string(m, "chain_id");
                if (m.contains("generator_seed") && !m["generator_seed"].is_null())
                    trace.metadata.generator_seed = codec::get_u64(m, "generator_seed");
                continue;
            }
            trace.blocks.push_back(codec::decode_block(j));
        } catch (const codec::json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const PreconditionError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    validate_trace(trace);
    return trace;
}

inline Trace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trace file '" + path + "'");
    return parse_trace(in);
}

inline void write_trace(std::ostream& out, const Trace& trace) {
    codec::json meta = {{"source", trace.metadata.source}, {"chain_id", trace.metadata.chain_id}};
    meta["generator_seed"] =
        trace.metadata.generator_seed ? codec::json(std::to_string(*trace.metadata.generator_seed)) : codec::json(nullptr);
    out << codec::json{{"metadata", meta}}.dump() << '\n';
    for (const auto& b : trace.blocks) out << codec::encode(b).dump() << '\n';
}

inline std::string serialize_trace(const Trace& trace) {
    std::ostringstream out;
    write_trace(out, trace);
    return out.str();
}

inline std::uint32_t checksum(std::string_view bytes) {
    boost::crc_32_type crc;
    crc.process_bytes(bytes.data(), bytes.size());
    return crc.checksum();
}

inline std::uint32_t file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return checksum(buf.str());
}

} // namespace bev
